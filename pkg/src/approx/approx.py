"""
Approximation Module

Small-tau treatment of the averaged dynamics and a fixed-step integrator for
linear master equations on the vectorized state.

Expanding the log generator -(1/tau) Log(I - tau G) to second order and keeping
only the squared Hamiltonian term gives the ordinary Lindblad generator with an
extra dephasing rate kappa = tau w^2 / 2. `build_approx_generator` returns it,
`integrate_linear_ode` integrates either that generator or the exact log
generator with the classic fourth order Runge-Kutta scheme, and
`regime_report` tells whether a parameter set lies in the small-tau regime or
in the frozen-decay regime.

Usage:
    G_approx = build_approx_generator(omega=100.0, gamma=1.0, tau=1e-3)
    trajectory = integrate_linear_ode(G_approx.matrix, state_from_spec('excited'), TimeGrid(5.0, 2001))
    df = trajectory.to_dataframe()
"""

from dataclasses import dataclass
import math

import numpy as np
import pandas as pd

import sys
import os
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))
from src.color_logger import logger
from src.numeric_errors import TraceDriftError
from src.operator_algebra.operator_algebra import (
    DensityMatrix, BlochVector, bloch_vector, purity, vec, unvec,
    HERMITIAN_TOL, POSITIVITY_TOL)
from src.generator.generator import Generator, SystemParams, build_generator

TRACE_DRIFT_TOL = 1e-8


@dataclass(frozen=True)
class TimeGrid:
    """
    Uniform time grid 0 = t_0 < ... < t_{steps-1} = t_max.

    Attributes:
        t_max (float): final time, > 0.
        steps (int): number of grid points, >= 2.
    """
    t_max: float
    steps: int

    def __post_init__(self):
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise ValueError(f"TimeGrid.t_max must be > 0, got {self.t_max}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValueError(f"TimeGrid.steps must be an integer >= 2, got {self.steps}")

    @property
    def h(self) -> float:
        return self.t_max / (self.steps - 1)

    @property
    def times(self) -> np.ndarray:
        times = self.h * np.arange(self.steps)
        times[-1] = self.t_max
        return times


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Time series of states with their Bloch vectors and purities.

    Attributes:
        times (list[float]): sample times.
        states (list[DensityMatrix]): state at each time.
        bloch (list[BlochVector]): Bloch vector at each time.
        purity (list[float]): Tr(rho^2) at each time.
    """
    times: list[float]
    states: list[DensityMatrix]
    bloch: list[BlochVector]
    purity: list[float]

    def __post_init__(self):
        lengths = {len(self.times), len(self.states), len(self.bloch), len(self.purity)}
        if len(lengths) != 1:
            raise ValueError(f"Trajectory lists differ in length: {sorted(lengths)}")

    @classmethod
    def from_states(cls, times, states: list[DensityMatrix]) -> 'Trajectory':
        return cls(
            times=[float(t) for t in times],
            states=list(states),
            bloch=[bloch_vector(rho) for rho in states],
            purity=[purity(rho) for rho in states],
        )

    def inversion(self) -> np.ndarray:
        return np.array([b.z for b in self.bloch])

    def coherence(self) -> np.ndarray:
        return np.array([rho.coherence for rho in self.states])

    def to_dataframe(self) -> pd.DataFrame:
        """One row per time: t, x, y, z, purity, trace."""
        return pd.DataFrame({
            't': self.times,
            'x': [b.x for b in self.bloch],
            'y': [b.y for b in self.bloch],
            'z': [b.z for b in self.bloch],
            'purity': self.purity,
            'trace': [float(np.trace(rho.matrix).real) for rho in self.states],
        })


def build_approx_generator(omega: float, gamma: float, tau: float) -> Generator:
    """
    Small-tau master equation generator: the Lindblad generator with kappa = tau w^2 / 2.

    Args:
        omega (float): angular frequency.
        gamma (float): decay rate, >= 0.
        tau (float): fluctuation scale, >= 0.

    Returns:
        Generator: build_generator(SystemParams(omega, gamma, tau * omega^2 / 2, tau)).
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    return build_generator(SystemParams(omega=omega, gamma=gamma, kappa=0.5 * tau * omega ** 2, tau=tau))


def integrate_linear_ode(M: np.ndarray, rho0: DensityMatrix, grid: TimeGrid,
                         trace_drift_tol: float = TRACE_DRIFT_TOL, record_every: int = 1) -> Trajectory:
    """
    Integrate d vec(rho)/dt = M vec(rho) with the classic fourth order Runge-Kutta scheme.

    One step of size grid.h is taken between consecutive grid points. States are never
    corrected: trace, Hermiticity and positivity defects are logged, and a trace drift
    beyond `trace_drift_tol` aborts the integration.

    Args:
        M (np.ndarray): 4x4 generator (the log generator, or an ordinary Lindblad generator).
        rho0 (DensityMatrix): initial state.
        grid (TimeGrid): the time grid.
        trace_drift_tol (float, optional): allowed |Tr(rho) - 1|. Defaults to 1e-8.
        record_every (int, optional): keep every record_every-th grid point; it must divide
            the number of steps. Defaults to 1.

    Returns:
        Trajectory: the state at every recorded grid point.

    Raises:
        TraceDriftError: If the trace drifts beyond trace_drift_tol.
    """
    M = np.asarray(M, dtype=complex)
    if M.shape != (4, 4):
        raise ValueError(f"Expected a 4x4 generator, got shape {M.shape}")
    if record_every < 1 or (grid.steps - 1) % record_every != 0:
        raise ValueError(f"record_every = {record_every} does not divide the {grid.steps - 1} steps")
    h = grid.h
    times = grid.times
    y = vec(rho0)
    states = [rho0]
    worst_hermiticity = 0.0
    worst_eigenvalue = 0.0

    for n in range(1, grid.steps):
        k1 = M @ y
        k2 = M @ (y + 0.5 * h * k1)
        k3 = M @ (y + 0.5 * h * k2)
        k4 = M @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        rho = DensityMatrix(unvec(y), validate=False)
        defects = rho.defects()
        if defects['trace'] > trace_drift_tol:
            raise TraceDriftError(f"Trace drifted by {defects['trace']:.3e} at t = {times[n]:.6g} "
                                  f"(h = {h:.3e}); reduce the step")
        if defects['hermiticity'] > HERMITIAN_TOL or defects['min_eigenvalue'] < -POSITIVITY_TOL:
            logger.warning(f"State at t = {times[n]:.6g} outside tolerances: {defects}")
        worst_hermiticity = max(worst_hermiticity, defects['hermiticity'])
        worst_eigenvalue = min(worst_eigenvalue, defects['min_eigenvalue'])
        if n % record_every == 0:
            states.append(rho)

    logger.debug(f"RK4 over {grid.steps - 1} steps (h = {h:.3e}): worst Hermiticity defect "
                 f"{worst_hermiticity:.3e}, smallest eigenvalue {worst_eigenvalue:.3e}")
    return Trajectory.from_states(times[::record_every], states)


def coherence_rate_gap(omega: float, gamma: float, tau: float) -> float:
    """
    Coherence decay rate of the small-tau generator, g/2 + 2 w^2 tau, minus the exact
    averaged rate (1/2 tau) ln[(1 + g tau/2)^2 + 4 w^2 tau^2].
    """
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    approx_rate = 0.5 * gamma + 2.0 * omega ** 2 * tau
    exact_rate = 0.5 * math.log1p(gamma * tau + 0.25 * (gamma * tau) ** 2 + 4.0 * (omega * tau) ** 2) / tau
    return approx_rate - exact_rate


def coherence_rate_gap_bound(omega: float, gamma: float, tau: float) -> float:
    """
    Upper bound tau (g + g^2 tau/4 + 4 w^2 tau)^2 / 4 on coherence_rate_gap.

    From x - x^2/2 <= ln(1 + x) <= x with x = g tau + (g tau)^2/4 + 4 (w tau)^2; at fixed w this is
    g^2 tau / 4 + O(tau^2). The gap is never below -g^2 tau / 8.
    """
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    return 0.25 * tau * (gamma + 0.25 * gamma ** 2 * tau + 4.0 * omega ** 2 * tau) ** 2


#region REGIME REPORT
@dataclass(frozen=True)
class RegimeThresholds:
    """Limits of the regime flags; the defaults mirror config/simulation_config.ini."""
    small_gamma_tau: float = 0.01
    small_omega_tau: float = 0.1
    zeno_gamma_tau: float = 1.0


@dataclass(frozen=True)
class RegimeReport:
    gamma_tau: float
    omega_tau: float
    omega_over_gamma: float
    small_tau_valid: bool
    zeno_regime: bool

    def as_dict(self) -> dict:
        return {
            'gamma_tau': self.gamma_tau,
            'omega_tau': self.omega_tau,
            'omega_over_gamma': self.omega_over_gamma,
            'small_tau_valid': self.small_tau_valid,
            'zeno_regime': self.zeno_regime,
        }


def regime_report(params: SystemParams, thresholds: RegimeThresholds = RegimeThresholds()) -> RegimeReport:
    """
    Dimensionless groups of a parameter set and the two regime flags.

    small_tau_valid: g tau <= small_gamma_tau and |w| tau <= small_omega_tau (the expansion
    behind build_approx_generator applies). zeno_regime: g tau >= zeno_gamma_tau (frozen decay).
    """
    gamma_tau = params.gamma * params.tau
    omega_tau = abs(params.omega) * params.tau
    if params.gamma > 0:
        omega_over_gamma = abs(params.omega) / params.gamma
    else:
        omega_over_gamma = math.inf if params.omega != 0 else math.nan
    return RegimeReport(
        gamma_tau=gamma_tau,
        omega_tau=omega_tau,
        omega_over_gamma=omega_over_gamma,
        small_tau_valid=gamma_tau <= thresholds.small_gamma_tau and omega_tau <= thresholds.small_omega_tau,
        zeno_regime=gamma_tau >= thresholds.zeno_gamma_tau,
    )
#endregion REGIME REPORT
