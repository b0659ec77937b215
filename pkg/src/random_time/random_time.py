"""
Random Time Module

Evolution of the atom when the evolution time t' is itself a Gamma-distributed
random variable with mean t (the laboratory time) and variance tau * t.

Contents:
    - GammaTimeDist, gamma_pdf, gamma_laplace: the distribution P(t, t') and its
      Laplace transform (1 + lambda tau)^(-t/tau)
    - build_v_map, averaged_state_matrixfn: the averaged map V(t) = (I - tau G)^(-t/tau)
      and its log generator -(1/tau) Log(I - tau G)
    - averaged_inversion_closed, averaged_coherence_closed, averaged_state_closed,
      effective_decay_rate: closed forms obtained by applying the Laplace identity
      to every eigenvalue of G
    - kappa_nm, nu_nm, hamiltonian_only_element: purely Hamiltonian dynamics, where
      every coherence decays with kappa_nm and is shifted in frequency by nu_nm
    - choi_matrix, is_completely_positive, semigroup_defect: checks that V(t) is a
      completely positive semigroup

The quadrature route (the direct average over P(t, t')) lives in
random_time/quadrature.py.

Dependencies:
- numpy: linear algebra
- scipy.special: gammaln for the log-space pdf
- src.operator_algebra / src.generator: matrix functions and the Lindblad generator
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import gammaln

import sys
import os
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))
from src.color_logger import logger
from src.numeric_errors import BranchCutError
from src.operator_algebra.operator_algebra import (
    DensityMatrix, eigen_decompose, function_from_eigen, check_branch, mat_exp, mat_log_principal, mat_power,
    vec, unvec, CONDITION_THRESHOLD, EXCITED, GROUND)
from src.generator.generator import (
    Generator, SystemParams, analytic_inversion, analytic_coherence)

CP_TOL = 1e-12
REGIME_RTOL = 1e-12


#region GAMMA DISTRIBUTION
@dataclass(frozen=True)
class GammaTimeDist:
    """
    Gamma distribution of the evolution time t' at laboratory time t.

    Shape k = t / tau, scale tau; mean t and variance tau * t.

    Attributes:
        t (float): laboratory time, >= 0. t = 0 is a point mass at t' = 0.
        tau (float): fluctuation scale, > 0.
    """
    t: float
    tau: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.tau)):
            raise ValueError(f"GammaTimeDist needs finite t and tau, got t={self.t}, tau={self.tau}")
        if self.t < 0:
            raise ValueError(f"GammaTimeDist.t must be >= 0, got {self.t}")
        if self.tau <= 0:
            raise ValueError(f"GammaTimeDist.tau must be > 0, got {self.tau}")

    @property
    def shape(self) -> float:
        return self.t / self.tau

    @property
    def scale(self) -> float:
        return self.tau

    @property
    def mean(self) -> float:
        return self.t

    @property
    def variance(self) -> float:
        return self.tau * self.t

    def pdf_regime(self) -> str:
        """
        Qualitative shape of the density: 'exponential' for t < tau (monotone, diverging at the
        origin when t/tau < 1), 'border' for t = tau (pure exponential) and 'gaussian-like' for
        t > tau (a single interior maximum at (k - 1) tau).
        """
        if math.isclose(self.t, self.tau, rel_tol=REGIME_RTOL):
            return 'border'
        return 'exponential' if self.t < self.tau else 'gaussian-like'


def log_unit_pdf(u: np.ndarray, k: float) -> np.ndarray:
    """Logarithm of the Gamma(k, 1) density u^(k-1) e^(-u) / Gamma(k), for u > 0."""
    u = np.asarray(u, dtype=float)
    return -u + (k - 1.0) * np.log(u) - gammaln(k)


def gamma_pdf(d: GammaTimeDist, t_prime: float | np.ndarray) -> float | np.ndarray:
    """
    Density P(t, t') = (1/tau) e^(-t'/tau) (t'/tau)^(t/tau - 1) / Gamma(t/tau).

    Evaluated in log-space so that large shapes do not overflow.

    Args:
        d (GammaTimeDist): the distribution.
        t_prime (float | np.ndarray): evaluation point(s), all > 0.

    Returns:
        float | np.ndarray: the density, with the shape of t_prime.

    Raises:
        ValueError: If any t_prime <= 0, or if d.t = 0 (a point mass has no density).
    """
    if d.t == 0:
        raise ValueError("The distribution at t = 0 is a point mass at t' = 0 and has no density")
    t_prime_arr = np.asarray(t_prime, dtype=float)
    if np.any(t_prime_arr <= 0):
        raise ValueError("gamma_pdf is defined for t' > 0 only")
    values = np.exp(log_unit_pdf(t_prime_arr / d.tau, d.shape) - math.log(d.tau))
    if values.ndim == 0:
        return float(values)
    return values


def gamma_laplace(d: GammaTimeDist, lam: complex) -> complex:
    """
    Laplace transform E[e^(-lambda t')] = (1 + lambda tau)^(-t/tau) on the principal branch.

    Raises:
        BranchCutError: If Re(1 + lambda tau) <= 0.
    """
    z = 1.0 + complex(lam) * d.tau
    if z.real <= 0:
        raise BranchCutError(f"Laplace transform needs Re(1 + lambda tau) > 0, got {z}")
    if d.t == 0:
        return 1.0 + 0.0j
    return complex(np.exp(-d.shape * np.log(z)))
#endregion GAMMA DISTRIBUTION


#region AVERAGED MAP
@dataclass(frozen=True, eq=False)
class AveragedEvolution:
    """
    The averaged map V(t) and its generator.

    Attributes:
        v_matrix (np.ndarray): V(t) = (I - tau G)^(-t/tau) acting on vec(rho).
        log_generator (np.ndarray): -(1/tau) Log(I - tau G); V(t) = exp(t log_generator).
        params (SystemParams): parameters of the underlying generator.
        t (float): laboratory time.
        tau (float): fluctuation scale used to build the map (0 is the deterministic limit).
    """
    v_matrix: np.ndarray
    log_generator: np.ndarray
    params: SystemParams
    t: float
    tau: float

    def __post_init__(self):
        for name in ('v_matrix', 'log_generator'):
            arr = np.array(getattr(self, name), dtype=complex, copy=True)
            if arr.shape != (4, 4):
                raise ValueError(f"AveragedEvolution.{name} must be 4x4, got shape {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def log_one_minus(tau: float, values: np.ndarray) -> np.ndarray:
    """
    Principal log(1 - tau lambda) for every eigenvalue lambda of G.

    The real part is 0.5 log1p(2x + x^2 + y^2) with x + iy = -tau lambda, which keeps full
    relative accuracy when |tau lambda| is small.
    """
    z = -tau * np.asarray(values, dtype=complex)
    x, y = z.real, z.imag
    return 0.5 * np.log1p(2.0 * x + x * x + y * y) + 1j * np.arctan2(y, 1.0 + x)


def build_v_map(G: Generator, tau: float, t: float) -> AveragedEvolution:
    """
    Build the averaged evolution map at laboratory time t.

    For tau = 0 the map reduces to the ordinary propagator exp(G t) with log generator G.
    Otherwise both matrices come from one eigendecomposition of G, with the logarithm of
    1 - tau lambda taken through log1p; an ill-conditioned G goes through the
    mat_log_principal / mat_power fallbacks on I - tau G.

    Args:
        G (Generator): the Lindblad generator.
        tau (float): fluctuation scale, >= 0.
        t (float): laboratory time, >= 0.

    Returns:
        AveragedEvolution: V(t) together with its log generator.

    Raises:
        ValueError: If tau or t is negative.
        BranchCutError, ConditioningError: From the matrix logarithm.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    identity = np.eye(4, dtype=complex)
    if tau == 0:
        v_matrix = identity if t == 0 else mat_exp(G.matrix * t)
        return AveragedEvolution(v_matrix, G.matrix, G.params, t, tau)

    values, vectors, condition = eigen_decompose(G.matrix)
    check_branch(1.0 - tau * values)
    if condition > CONDITION_THRESHOLD:
        shifted = identity - tau * G.matrix
        log_generator = -mat_log_principal(shifted) / tau
        v_matrix = identity if t == 0 else mat_power(shifted, -t / tau)
        return AveragedEvolution(v_matrix, log_generator, G.params, t, tau)

    log_values = log_one_minus(tau, values)
    log_generator = function_from_eigen(vectors, -log_values / tau)
    v_matrix = identity if t == 0 else function_from_eigen(vectors, np.exp(-(t / tau) * log_values))
    return AveragedEvolution(v_matrix, log_generator, G.params, t, tau)


def averaged_state_matrixfn(ev: AveragedEvolution, rho0: DensityMatrix) -> DensityMatrix:
    """
    Averaged state unvec(V(t) vec(rho0)).

    Raises:
        PositivityError: If the result has an eigenvalue below -1e-10, which would contradict
            complete positivity of V(t).
    """
    return DensityMatrix(unvec(ev.v_matrix @ vec(rho0)))


def semigroup_defect(G: Generator, tau: float, t1: float, t2: float) -> float:
    """max |V(t1 + t2) - V(t1) V(t2)|"""
    v_sum = build_v_map(G, tau, t1 + t2).v_matrix
    v_product = build_v_map(G, tau, t1).v_matrix @ build_v_map(G, tau, t2).v_matrix
    return float(np.max(np.abs(v_sum - v_product)))
#endregion AVERAGED MAP


#region CLOSED FORMS
def effective_decay_rate(gamma: float, tau: float) -> float:
    """
    Decay rate of the averaged inversion, (1/tau) ln(1 + gamma tau); gamma itself for tau = 0.

    The rate falls monotonically with tau: large time fluctuations freeze the decay.
    """
    if gamma < 0 or tau < 0:
        raise ValueError(f"gamma and tau must be >= 0, got gamma={gamma}, tau={tau}")
    if tau == 0:
        return float(gamma)
    return math.log1p(gamma * tau) / tau


def averaged_inversion_closed(s0: float, gamma: float, tau: float, t: float) -> float:
    """
    Averaged inversion s0 (1 + g tau)^(-t/tau) + [(1 + g tau)^(-t/tau) - 1].

    Falls back to analytic_inversion for tau = 0.
    """
    if tau < 0 or gamma < 0 or t < 0:
        raise ValueError(f"gamma, tau and t must be >= 0, got gamma={gamma}, tau={tau}, t={t}")
    if tau == 0:
        return analytic_inversion(s0, gamma, t)
    if abs(s0) > 1.0 + 1e-12:
        raise ValueError(f"Initial inversion must satisfy |s0| <= 1, got {s0}")
    survival = math.exp(-t * effective_decay_rate(gamma, tau))
    return s0 * survival + (survival - 1.0)


def averaged_coherence_closed(c0: complex, params: SystemParams, tau: float, t: float) -> complex:
    """
    Averaged coherence c0 (1 + (g/2 + 4k) tau + 2 i w tau)^(-t/tau).

    Falls back to analytic_coherence for tau = 0.
    """
    if tau < 0 or t < 0:
        raise ValueError(f"tau and t must be >= 0, got tau={tau}, t={t}")
    if tau == 0:
        return analytic_coherence(c0, params, t)
    z = 1.0 + tau * (0.5 * params.gamma + 4.0 * params.kappa + 2j * params.omega)
    return complex(c0 * np.exp(-(t / tau) * np.log(z)))


def averaged_state_closed(params: SystemParams, rho0: DensityMatrix, tau: float, t: float) -> DensityMatrix:
    """Assemble the full averaged state from the closed-form inversion and coherence."""
    rho_gg, rho_ee = rho0.populations
    s = averaged_inversion_closed(rho_ee - rho_gg, params.gamma, tau, t)
    c = averaged_coherence_closed(rho0.coherence, params, tau, t)
    matrix = np.zeros((2, 2), dtype=complex)
    matrix[GROUND, GROUND] = 0.5 * (1.0 - s)
    matrix[EXCITED, EXCITED] = 0.5 * (1.0 + s)
    matrix[EXCITED, GROUND] = c
    matrix[GROUND, EXCITED] = np.conj(c)
    return DensityMatrix(matrix)


def kappa_nm(omega_nm: float, tau: float) -> float:
    """Decay rate (1/2 tau) ln(1 + w_nm^2 tau^2) of a coherence with Bohr frequency w_nm."""
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    return 0.5 * math.log1p((omega_nm * tau) ** 2) / tau


def nu_nm(omega_nm: float, tau: float) -> float:
    """Shifted frequency (1/tau) arctan(w_nm tau); saturates at pi / (2 tau)."""
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    return math.atan(omega_nm * tau) / tau


def hamiltonian_only_element(rho0_nm: complex, omega_nm: float, tau: float, t: float) -> complex:
    """
    Averaged matrix element under purely Hamiltonian dynamics,
    e^(-kappa_nm t) e^(-i nu_nm t) rho0_nm.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return complex(np.exp(-(kappa_nm(omega_nm, tau) + 1j * nu_nm(omega_nm, tau)) * t) * rho0_nm)
#endregion CLOSED FORMS


#region COMPLETE POSITIVITY
def choi_matrix(ev: AveragedEvolution | np.ndarray) -> np.ndarray:
    """
    Choi matrix sum_ij |i><j| kron V(|i><j|).

    Args:
        ev (AveragedEvolution | np.ndarray): the averaged map, or any 4x4 superoperator.

    Returns:
        np.ndarray: the 4x4 Choi matrix; positive semidefinite iff the map is completely positive.
    """
    superoperator = ev.v_matrix if isinstance(ev, AveragedEvolution) else np.asarray(ev, dtype=complex)
    choi = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            unit = np.zeros((2, 2), dtype=complex)
            unit[i, j] = 1.0
            choi += np.kron(unit, unvec(superoperator @ vec(unit)))
    return choi


def is_completely_positive(ev: AveragedEvolution | np.ndarray, tol: float = CP_TOL) -> tuple[bool, float]:
    """
    Check complete positivity through the smallest Choi eigenvalue.

    Returns:
        tuple[bool, float]: (min eigenvalue >= -tol, min eigenvalue).
    """
    choi = choi_matrix(ev)
    min_eigenvalue = float(np.linalg.eigvalsh(0.5 * (choi + choi.conj().T))[0])
    if min_eigenvalue < -tol:
        logger.warning(f"Map is not completely positive: smallest Choi eigenvalue {min_eigenvalue:.3e}")
    return min_eigenvalue >= -tol, min_eigenvalue
#endregion COMPLETE POSITIVITY
