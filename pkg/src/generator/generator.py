"""
Generator Module

Builds the Lindblad generator G of the dissipative two-level atom,

    G rho = -i w [s_z, rho] + (g/2)(2 s rho s^dag - s^dag s rho - rho s^dag s) - k [s_z, [s_z, rho]],

as a 4x4 superoperator assembled term by term from Kronecker building blocks,
propagates states exactly with exp(G t), and provides the closed-form decay laws
of the inversion and of the coherence Tr(rho sigma) used to cross-check the
propagator.

The generator is implemented literally. Under it the coherence rotates at 2w and
dephases at g/2 + 4k; `analytic_coherence` encodes exactly these rates.

Usage:
    params = SystemParams(omega=10.0, gamma=1.0, kappa=0.3)
    G = build_generator(params)
    rho_t = propagate_exact(G, state_from_spec('excited'), t=2.0)
"""

from dataclasses import dataclass
import math

import numpy as np

import sys
import os
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))
from src.operator_algebra.operator_algebra import (
    DensityMatrix, atomic_operators, commutator_superoperator, left_superoperator,
    right_superoperator, mat_exp, vec, unvec, eigen_decompose)

GENERATOR_TOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """
    Physical constants of the atom.

    Attributes:
        omega (float): angular frequency in rad/time, coefficient of -i w [s_z, .].
        gamma (float): spontaneous decay rate in 1/time, >= 0.
        kappa (float): dephasing rate in 1/time, >= 0.
        tau (float): time-fluctuation scale in time units, >= 0.

    Raises:
        ValueError: If a rate or tau is negative or any value is not finite.
    """
    omega: float = 0.0
    gamma: float = 0.0
    kappa: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        for name in ('omega', 'gamma', 'kappa', 'tau'):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"SystemParams.{name} must be finite, got {value}")
        for name in ('gamma', 'kappa', 'tau'):
            if getattr(self, name) < 0:
                raise ValueError(f"SystemParams.{name} must be >= 0, got {getattr(self, name)}")


@dataclass(frozen=True, eq=False)
class Generator:
    """A 4x4 generator matrix together with the parameters it was built from."""
    matrix: np.ndarray
    params: SystemParams

    def __post_init__(self):
        arr = np.array(self.matrix, dtype=complex, copy=True)
        if arr.shape != (4, 4):
            raise ValueError(f"A generator must be 4x4, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, 'matrix', arr)

    def trace_defect(self) -> float:
        """max |vec(I)^dag G|; zero for a trace-preserving generator."""
        return float(np.max(np.abs(vec(np.eye(2)).conj() @ self.matrix)))

    def hermiticity_defect(self, rho: np.ndarray) -> float:
        """max |G(rho^dag) - (G rho)^dag| for a given 2x2 matrix rho."""
        rho = np.asarray(rho, dtype=complex)
        lhs = unvec(self.matrix @ vec(rho.conj().T))
        rhs = unvec(self.matrix @ vec(rho)).conj().T
        return float(np.max(np.abs(lhs - rhs)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)


#region GENERATOR TERMS
def hamiltonian_superoperator(omega: float) -> np.ndarray:
    """-i w [s_z, .]"""
    return -1j * omega * commutator_superoperator(atomic_operators()['sigma_z'])


def dissipator_superoperator(gamma: float) -> np.ndarray:
    """(g/2)(2 s . s^dag - s^dag s . - . s^dag s)"""
    ops = atomic_operators()
    sigma, sigma_dagger = ops['sigma'], ops['sigma_dagger']
    number = sigma_dagger @ sigma
    jump = left_superoperator(sigma) @ right_superoperator(sigma_dagger)
    return 0.5 * gamma * (2.0 * jump - left_superoperator(number) - right_superoperator(number))


def dephasing_superoperator(kappa: float) -> np.ndarray:
    """-k [s_z, [s_z, .]]"""
    commutator = commutator_superoperator(atomic_operators()['sigma_z'])
    return -kappa * (commutator @ commutator)
#endregion GENERATOR TERMS


def build_generator(params: SystemParams) -> Generator:
    """
    Assemble the Lindblad generator from its Hamiltonian, dissipative and dephasing terms.

    Args:
        params (SystemParams): physical constants; tau is carried along as provenance only.

    Returns:
        Generator: the 4x4 generator acting on vec(rho).
    """
    matrix = (hamiltonian_superoperator(params.omega)
              + dissipator_superoperator(params.gamma)
              + dephasing_superoperator(params.kappa))
    return Generator(matrix, params)


def propagate_exact(G: Generator, rho0: DensityMatrix, t: float) -> DensityMatrix:
    """
    Exact solution rho(t) = unvec(exp(G t) vec(rho0)).

    Args:
        G (Generator): the generator.
        rho0 (DensityMatrix): initial state.
        t (float): evolution time, >= 0.

    Returns:
        DensityMatrix: the validated evolved state.

    Raises:
        ValueError: If t is negative.
        ConvergenceError: If the matrix exponential fails.
    """
    if t < 0:
        raise ValueError(f"Propagation time must be >= 0, got {t}")
    if t == 0:
        return rho0
    return DensityMatrix(unvec(mat_exp(G.matrix * t) @ vec(rho0)))


def steady_state(G: Generator) -> DensityMatrix:
    """
    Stationary state of G: the right eigenvector of the eigenvalue closest to zero,
    normalized to unit trace. For gamma > 0 this is the ground state |g><g|.

    Raises:
        ValueError: If the null vector has zero trace (no unique physical steady state).
    """
    values, vectors, _ = eigen_decompose(G.matrix)
    null_vector = vectors[:, int(np.argmin(np.abs(values)))]
    matrix = unvec(null_vector)
    trace = np.trace(matrix)
    if abs(trace) < GENERATOR_TOL:
        raise ValueError("The generator has no trace-normalizable null vector")
    return DensityMatrix(matrix / trace)


def analytic_inversion(s0: float, gamma: float, t: float) -> float:
    """
    Closed-form inversion <s_z>(t) = s0 e^(-g t) + (e^(-g t) - 1).

    Args:
        s0 (float): initial inversion, |s0| <= 1.
        gamma (float): decay rate.
        t (float): time, >= 0.

    Returns:
        float: the inversion at time t.
    """
    if abs(s0) > 1.0 + GENERATOR_TOL:
        raise ValueError(f"Initial inversion must satisfy |s0| <= 1, got {s0}")
    if t < 0:
        raise ValueError(f"Time must be >= 0, got {t}")
    decay = math.exp(-gamma * t)
    return s0 * decay + (decay - 1.0)


def analytic_coherence(c0: complex, params: SystemParams, t: float) -> complex:
    """
    Closed-form coherence Tr(rho(t) sigma) = c0 exp[-2 i w t - (g/2 + 4 k) t].

    The rates are those of the literal generator (rotation 2w, dephasing 4k).
    """
    if t < 0:
        raise ValueError(f"Time must be >= 0, got {t}")
    rate = 2j * params.omega + 0.5 * params.gamma + 4.0 * params.kappa
    return complex(c0 * np.exp(-rate * t))
