"""
Direct average of the evolved state over the Gamma-distributed evolution time,

    rho_bar(t) = int_0^inf P(t, t') exp(G t') rho0 dt',

after the substitution u = t'/tau, which turns P into the Gamma(k, 1) density
with k = t/tau.

Two schemes are available:
    - 'gauss-laguerre': generalized Gauss-Laguerre nodes for the weight u^(k-1) e^(-u),
      so the k < 1 endpoint singularity is absorbed into the rule. The error estimate
      is the difference between n and 2n nodes; if it exceeds abs_tol the adaptive
      scheme takes over.
    - 'adaptive-subdivision': scipy.integrate.quad_vec on [0, 1] and [1, inf) (k < 1,
      with u = s^(1/k) removing the singularity) or on [0, k] and [k, inf) (k >= 1).

Both schemes divide by the mass the rule assigns to the density itself, so a
trace-preserving generator yields a unit-trace result up to rounding.
"""

from dataclasses import dataclass
import math

import numpy as np
import scipy.linalg
from scipy.integrate import quad, quad_vec
from scipy.special import roots_genlaguerre, gammaln

import sys
import os
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))
from src.color_logger import logger
from src.numeric_errors import ConvergenceError
from src.operator_algebra.operator_algebra import (
    DensityMatrix, eigen_decompose, vec, unvec, CONDITION_THRESHOLD)
from src.generator.generator import Generator
from src.random_time.random_time import GammaTimeDist, log_unit_pdf

SCHEMES = ('gauss-laguerre', 'adaptive-subdivision')


@dataclass(frozen=True)
class QuadratureConfig:
    """
    Settings of the time-average quadrature.

    Attributes:
        scheme (str): 'gauss-laguerre' or 'adaptive-subdivision'.
        nodes (int): Gauss-Laguerre node count (the error estimate uses twice as many), >= 16.
        abs_tol (float): accepted absolute error of every state entry, > 0.
        max_shape (float): largest k = t/tau handled by Gauss-Laguerre; beyond it the
            Gauss weights overflow and the adaptive scheme is used.
        adaptive_limit (int): interval budget of the adaptive scheme.
    """
    scheme: str = 'gauss-laguerre'
    nodes: int = 64
    abs_tol: float = 1e-10
    max_shape: float = 150.0
    adaptive_limit: int = 2000

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"Unknown quadrature scheme '{self.scheme}', expected one of {SCHEMES}")
        if self.nodes < 16:
            raise ValueError(f"QuadratureConfig.nodes must be >= 16, got {self.nodes}")
        if not self.abs_tol > 0:
            raise ValueError(f"QuadratureConfig.abs_tol must be > 0, got {self.abs_tol}")


def averaged_state_quadrature(G: Generator, rho0: DensityMatrix, d: GammaTimeDist,
                              q: QuadratureConfig = QuadratureConfig()) -> DensityMatrix:
    """
    Averaged state by quadrature over the evolution time.

    Args:
        G (Generator): the Lindblad generator.
        rho0 (DensityMatrix): initial state.
        d (GammaTimeDist): the time distribution; t = 0 returns rho0.
        q (QuadratureConfig, optional): quadrature settings.

    Returns:
        DensityMatrix: the validated averaged state.

    Raises:
        ConvergenceError: If no scheme reaches q.abs_tol within its budget.
    """
    if d.t == 0:
        return rho0
    return DensityMatrix(unvec(averaged_vector_quadrature(G.matrix, vec(rho0), d, q)))


def averaged_vector_quadrature(matrix: np.ndarray, vec0: np.ndarray, d: GammaTimeDist,
                               q: QuadratureConfig = QuadratureConfig()) -> np.ndarray:
    """
    int_0^inf P(t, t') exp(matrix t') vec0 dt' for an arbitrary 4x4 matrix.

    The matrix does not have to be a physical generator; this makes the scalar
    reduction exp(-lambda t') available as a check against the Laplace transform.
    """
    vec0 = np.asarray(vec0, dtype=complex)
    if d.t == 0:
        return vec0.copy()
    propagate = _vector_propagator(np.asarray(matrix, dtype=complex), vec0, d.tau)
    k = d.shape

    if q.scheme == 'gauss-laguerre':
        if k > q.max_shape:
            logger.info(f"Shape t/tau = {k:.6g} above {q.max_shape:g}, using adaptive subdivision")
        else:
            coarse = _gauss_laguerre(propagate, k, q.nodes)
            fine = _gauss_laguerre(propagate, k, 2 * q.nodes)
            error = float(np.max(np.abs(fine - coarse)))
            if error <= q.abs_tol:
                return fine
            logger.info(f"Gauss-Laguerre error estimate {error:.3e} above {q.abs_tol:.1e} "
                        f"(t/tau = {k:.6g}), using adaptive subdivision")
    return _adaptive(propagate, k, q)


def gamma_moment_quadrature(d: GammaTimeDist, order: int, central: bool = False) -> float:
    """
    Numerical moment E[t'^order] (or E[(t' - t)^order] when central) of the time distribution.

    Used to confirm the stated mean t and variance tau t independently of the closed forms.
    """
    if d.t == 0:
        raise ValueError("Moments of the t = 0 point mass are trivial and not integrated")
    k = d.shape
    shift = k if central else 0.0

    def moment_integrand(u):
        return (u - shift) ** order * math.exp(log_unit_pdf(u, k))

    if k < 1:
        # u = s^(1/k): u^(k-1) du = ds / k
        def near_origin(s):
            u = s ** (1.0 / k) if s > 0 else 0.0
            return (u - shift) ** order * math.exp(-u - gammaln(k + 1.0))
        head, _ = quad(near_origin, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=500)
        tail, _ = quad(moment_integrand, 1.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=500)
    else:
        head, _ = quad(moment_integrand, 0.0, k, epsabs=0.0, epsrel=1e-13, limit=500)
        tail, _ = quad(moment_integrand, k, np.inf, epsabs=0.0, epsrel=1e-13, limit=500)
    return (head + tail) * d.tau ** order


#region INTERNALS
def _vector_propagator(matrix: np.ndarray, vec0: np.ndarray, tau: float):
    """Return u -> exp(matrix tau u) vec0 evaluated for an array of u, shape (4, len(u))."""
    values, vectors, condition = eigen_decompose(matrix)
    if condition <= CONDITION_THRESHOLD:
        coefficients = np.linalg.solve(vectors, vec0)

        def propagate(u):
            u = np.atleast_1d(np.asarray(u, dtype=float))
            return vectors @ (np.exp(np.outer(values, tau * u)) * coefficients[:, np.newaxis])
        return propagate

    logger.warning(f"Quadrature: eigenvector condition number {condition:.3e} above "
                   f"{CONDITION_THRESHOLD:.1e}, propagating node by node with expm")

    def propagate_expm(u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return np.stack([scipy.linalg.expm(matrix * (tau * ui)) @ vec0 for ui in u], axis=1)
    return propagate_expm


def _gauss_laguerre(propagate, k: float, n: int) -> np.ndarray:
    nodes, weights = roots_genlaguerre(n, k - 1.0)
    weights = weights / np.sum(weights)
    return np.sum(propagate(nodes) * weights[np.newaxis, :], axis=1)


def _adaptive(propagate, k: float, q: QuadratureConfig) -> np.ndarray:
    log_gamma_k1 = gammaln(k + 1.0)

    def stacked(u, density):
        v = propagate(u)[:, 0] * density
        return np.concatenate([v.real, v.imag, [density]])

    def regular(u):
        density = math.exp(log_unit_pdf(u, k)) if u > 0 else 0.0
        return stacked(u, density)

    def near_origin(s):
        u = s ** (1.0 / k) if s > 0 else 0.0
        return stacked(u, math.exp(-u - log_gamma_k1))

    if k < 1:
        segments = [(near_origin, 0.0, 1.0), (regular, 1.0, np.inf)]
    else:
        segments = [(regular, 0.0, k), (regular, k, np.inf)]

    total = np.zeros(9)
    total_error = 0.0
    for integrand, a, b in segments:
        result, error, info = quad_vec(integrand, a, b, epsabs=q.abs_tol / 4, epsrel=1e-12,
                                       norm='max', limit=q.adaptive_limit, full_output=True)
        if not info.success:
            raise ConvergenceError(f"Adaptive quadrature on [{a}, {b}] failed with status {info.status}")
        total += result
        total_error += error

    mass = total[8]
    if total_error > q.abs_tol or mass <= 0:
        raise ConvergenceError(f"Adaptive quadrature error {total_error:.3e} exceeds {q.abs_tol:.1e} "
                               f"(t/tau = {k:.6g})")
    return (total[:4] + 1j * total[4:8]) / mass
#endregion INTERNALS
