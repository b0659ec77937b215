import numpy as np
import pytest

from src.operator_algebra.operator_algebra import DensityMatrix
from src.generator.generator import SystemParams

# (omega, gamma, kappa, tau) combinations used across the suite
PARAMETER_SETS = [
    SystemParams(omega=0.0, gamma=1.0, kappa=0.0, tau=0.5),
    SystemParams(omega=10.0, gamma=1.0, kappa=0.3, tau=0.7),
    SystemParams(omega=2.5, gamma=0.4, kappa=0.05, tau=5.0),
    SystemParams(omega=1.0, gamma=1.0, kappa=0.0, tau=50.0),
]


def random_density_matrix(rng: np.random.Generator) -> DensityMatrix:
    """Full-rank random state A A^dag / Tr(A A^dag)."""
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = a @ a.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real)


def assert_valid_state(rho: DensityMatrix):
    defects = rho.defects()
    assert defects['trace'] <= 1e-12
    assert defects['hermiticity'] <= 1e-12
    assert defects['min_eigenvalue'] >= -1e-10


@pytest.fixture
def rng():
    return np.random.default_rng(20241104)


@pytest.fixture
def random_states(rng):
    return [random_density_matrix(rng) for _ in range(5)]


def max_abs_difference(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
