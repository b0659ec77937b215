"""
Operator Algebra Module

Fixed-size complex linear algebra for a two-level atom: the atomic operators,
density matrices and Bloch vectors, the column-stacking vectorization that
turns superoperators into 4x4 matrices, and the matrix functions (exponential,
principal logarithm, real power) consumed by the generator, random-time and
approximation modules.

Conventions:
    - basis order |g> = 0, |e> = 1, so sigma_z = diag(-1, +1)
    - vec(rho) stacks columns: (rho_gg, rho_eg, rho_ge, rho_ee)
    - vec(A rho B) = (B^T kron A) vec(rho)

Matrix functions are computed from an eigendecomposition. When the eigenvector
matrix is worse conditioned than `CONDITION_THRESHOLD` the scipy scaling and
squaring routines (expm / logm) take over and a warning is logged.

Dependencies:
- numpy: arrays, eigendecomposition, Kronecker products
- scipy.linalg: expm / logm fallbacks for ill-conditioned inputs
- src.color_logger: shared console logger
"""

from dataclasses import dataclass, InitVar

import numpy as np
import scipy.linalg

import sys
import os
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))
from src.color_logger import logger
from src.numeric_errors import BranchCutError, ConditioningError, ConvergenceError, PositivityError, StateValidityError

ComplexMatrix2 = np.ndarray
ComplexMatrix4 = np.ndarray

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10
BLOCH_TOL = 1e-12
CONDITION_THRESHOLD = 1e8
BRANCH_TOL = 1e-12
ROUND_TRIP_TOL = 1e-10

GROUND = 0
EXCITED = 1


#region ATOMIC OPERATORS
def atomic_operators() -> dict[str, ComplexMatrix2]:
    """
    Build the operators of the two-level atom in the basis (|g>, |e>).

    Returns:
        dict[str, np.ndarray]: 'sigma' = |g><e|, 'sigma_dagger', 'sigma_z' = sigma^dag sigma - sigma sigma^dag,
        'sigma_x' = sigma + sigma^dag and 'sigma_y' = i sigma - i sigma^dag, each a 2x2 complex array.
    """
    sigma = np.zeros((2, 2), dtype=complex)
    sigma[GROUND, EXCITED] = 1.0
    sigma_dagger = sigma.conj().T
    return {
        'sigma': sigma,
        'sigma_dagger': sigma_dagger,
        'sigma_z': sigma_dagger @ sigma - sigma @ sigma_dagger,
        'sigma_x': sigma + sigma_dagger,
        'sigma_y': 1j * sigma - 1j * sigma_dagger,
    }


def adjoint(A: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(A).conj().T
#endregion ATOMIC OPERATORS


#region STATES
@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Immutable 2x2 density matrix of the atom.

    The matrix is copied into a read-only complex array on construction and, unless
    `validate` is False, checked against the state tolerances:

        - Hermiticity defect max|rho - rho^dag| <= 1e-12
        - |Tr(rho) - 1| <= 1e-12
        - smallest eigenvalue >= -1e-10

    Attributes:
        matrix (np.ndarray): the 2x2 complex matrix.

    Raises:
        ValueError: If the shape is not 2x2.
        StateValidityError: If the matrix is not Hermitian or not of unit trace.
        PositivityError: If an eigenvalue lies below -1e-10.
    """
    matrix: np.ndarray
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        arr = np.array(self.matrix, dtype=complex, copy=True)
        if arr.shape != (2, 2):
            raise ValueError(f"A density matrix must be 2x2, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, 'matrix', arr)
        if validate:
            self.check()

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def trace_defect(self) -> float:
        return float(abs(np.trace(self.matrix) - 1.0))

    def min_eigenvalue(self) -> float:
        hermitian_part = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(hermitian_part)[0])

    def defects(self) -> dict[str, float]:
        """Return the three validity diagnostics (Hermiticity, trace, smallest eigenvalue) without raising."""
        return {
            'hermiticity': self.hermiticity_defect(),
            'trace': self.trace_defect(),
            'min_eigenvalue': self.min_eigenvalue(),
        }

    def is_valid(self) -> bool:
        d = self.defects()
        return (d['hermiticity'] <= HERMITIAN_TOL and d['trace'] <= TRACE_TOL
                and d['min_eigenvalue'] >= -POSITIVITY_TOL)

    def check(self):
        """
        Raise if the state violates any of the density matrix invariants.

        Raises:
            StateValidityError: On a Hermiticity or trace defect beyond 1e-12.
            PositivityError: On an eigenvalue below -1e-10.
        """
        d = self.defects()
        if d['hermiticity'] > HERMITIAN_TOL:
            raise StateValidityError(f"Density matrix is not Hermitian (defect {d['hermiticity']:.3e})")
        if d['trace'] > TRACE_TOL:
            raise StateValidityError(f"Density matrix trace deviates from 1 by {d['trace']:.3e}")
        if d['min_eigenvalue'] < -POSITIVITY_TOL:
            raise PositivityError(f"Density matrix has negative eigenvalue {d['min_eigenvalue']:.3e}")

    @property
    def populations(self) -> tuple[float, float]:
        """(rho_gg, rho_ee)"""
        return float(self.matrix[GROUND, GROUND].real), float(self.matrix[EXCITED, EXCITED].real)

    @property
    def coherence(self) -> complex:
        """rho_eg, which equals Tr(rho sigma)."""
        return complex(self.matrix[EXCITED, GROUND])


@dataclass(frozen=True)
class BlochVector:
    """Expectation values of sigma_x, sigma_y and sigma_z."""
    x: float
    y: float
    z: float

    def norm(self) -> float:
        return float(np.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2))


def expectation(rho: DensityMatrix | np.ndarray, A: np.ndarray) -> complex:
    """
    Expectation value Tr(rho A).

    Args:
        rho (DensityMatrix | np.ndarray): the state.
        A (np.ndarray): a 2x2 operator.

    Returns:
        complex: Tr(rho A); real up to rounding when A is Hermitian.
    """
    matrix = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return complex(np.trace(matrix @ A))


def bloch_vector(rho: DensityMatrix) -> BlochVector:
    ops = atomic_operators()
    return BlochVector(
        x=expectation(rho, ops['sigma_x']).real,
        y=expectation(rho, ops['sigma_y']).real,
        z=expectation(rho, ops['sigma_z']).real,
    )


def purity(rho: DensityMatrix) -> float:
    """Tr(rho^2)"""
    return float(np.trace(rho.matrix @ rho.matrix).real)


def bloch_state(x: float, y: float, z: float) -> DensityMatrix:
    """
    Build rho = (I + x sigma_x + y sigma_y + z sigma_z) / 2.

    Raises:
        ValueError: If the Bloch vector lies outside the unit ball.
    """
    radius_sq = x * x + y * y + z * z
    if radius_sq > 1.0 + BLOCH_TOL:
        raise ValueError(f"Bloch vector ({x}, {y}, {z}) lies outside the unit ball (|r|^2 = {radius_sq})")
    ops = atomic_operators()
    matrix = 0.5 * (np.eye(2) + x * ops['sigma_x'] + y * ops['sigma_y'] + z * ops['sigma_z'])
    return DensityMatrix(matrix)


def state_from_spec(spec: str) -> DensityMatrix:
    """
    Initial condition factory.

    Args:
        spec (str): 'excited', 'ground', 'mixed' or 'bloch:x,y,z' (case-insensitive).

    Returns:
        DensityMatrix: the requested state.

    Raises:
        ValueError: On an unknown form, a malformed Bloch triple, or a vector outside the unit ball.
    """
    normalized = spec.strip().lower()
    if normalized == 'excited':
        return bloch_state(0.0, 0.0, 1.0)
    if normalized == 'ground':
        return bloch_state(0.0, 0.0, -1.0)
    if normalized == 'mixed':
        return bloch_state(0.0, 0.0, 0.0)
    if normalized.startswith('bloch'):
        _, _, components = normalized.partition(':')
        parts = [p for p in components.replace('(', '').replace(')', '').split(',') if p.strip()]
        if len(parts) != 3:
            raise ValueError(f"Bloch state needs three components, got '{spec}'")
        try:
            x, y, z = (float(p) for p in parts)
        except ValueError as e:
            raise ValueError(f"Bloch components of '{spec}' are not numbers") from e
        return bloch_state(x, y, z)
    raise ValueError(f"Unknown initial state '{spec}', expected excited, ground, mixed or bloch:x,y,z")
#endregion STATES


#region VECTORIZATION
def vec(rho: DensityMatrix | np.ndarray) -> np.ndarray:
    """Column-stack a 2x2 matrix into (rho_gg, rho_eg, rho_ge, rho_ee)."""
    matrix = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    return matrix.flatten(order='F')


def unvec(v: np.ndarray) -> np.ndarray:
    """Inverse of vec: rebuild the 2x2 matrix from its column-stacked form."""
    v = np.asarray(v, dtype=complex)
    if v.shape != (4,):
        raise ValueError(f"Cannot unvectorize an array of shape {v.shape}, expected (4,)")
    return v.reshape((2, 2), order='F')


def left_superoperator(A: np.ndarray) -> ComplexMatrix4:
    """Superoperator of rho -> A rho."""
    return np.kron(np.eye(2), A)


def right_superoperator(B: np.ndarray) -> ComplexMatrix4:
    """Superoperator of rho -> rho B."""
    return np.kron(np.asarray(B).T, np.eye(2))


def commutator_superoperator(A: np.ndarray) -> ComplexMatrix4:
    """Superoperator of rho -> [A, rho]."""
    return left_superoperator(A) - right_superoperator(A)


def apply_superoperator(S: ComplexMatrix4, rho: DensityMatrix | np.ndarray) -> np.ndarray:
    """unvec(S vec(rho)) as a plain 2x2 array."""
    return unvec(S @ vec(rho))
#endregion VECTORIZATION


#region MATRIX FUNCTIONS
def eigen_decompose(A: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """
    Eigendecomposition with the condition number of the eigenvector matrix.

    Args:
        A (np.ndarray): square matrix.

    Returns:
        tuple: (eigenvalues, eigenvector matrix with eigenvectors as columns, condition number).
        The condition number is inf for a (numerically) defective matrix.
    """
    A = _as_square(A)
    values, vectors = np.linalg.eig(A)
    condition = float(np.linalg.cond(vectors))
    if not np.isfinite(condition):
        condition = np.inf
    return values, vectors, condition


def function_from_eigen(vectors: np.ndarray, function_values: np.ndarray) -> np.ndarray:
    """Assemble S diag(f) S^-1 without forming the inverse explicitly."""
    scaled = vectors * function_values[np.newaxis, :]
    return np.linalg.solve(vectors.T, scaled.T).T


def mat_exp(A: np.ndarray, condition_threshold: float = CONDITION_THRESHOLD) -> np.ndarray:
    """
    Matrix exponential.

    Uses the eigendecomposition of A; if the eigenvector matrix has a condition number
    above `condition_threshold` the scaling and squaring algorithm of scipy.linalg.expm is
    used instead.

    Args:
        A (np.ndarray): square complex matrix.
        condition_threshold (float, optional): switch-over condition number. Defaults to 1e8.

    Returns:
        np.ndarray: exp(A).

    Raises:
        ConvergenceError: If the result contains non-finite entries.
    """
    A = _as_square(A)
    values, vectors, condition = eigen_decompose(A)
    if condition > condition_threshold:
        logger.warning(f"mat_exp: eigenvector condition number {condition:.3e} above "
                       f"{condition_threshold:.1e}, falling back to scaling and squaring")
        result = scipy.linalg.expm(A)
    else:
        result = function_from_eigen(vectors, np.exp(values))
    if not np.all(np.isfinite(result)):
        raise ConvergenceError("Matrix exponential produced non-finite entries")
    return result


def check_branch(values: np.ndarray):
    """
    Make sure no eigenvalue lies on the closed negative real axis.

    Raises:
        BranchCutError: For an eigenvalue that is zero or real and negative.
    """
    values = np.atleast_1d(values)
    scale = np.maximum(1.0, np.abs(values))
    on_cut = (np.abs(values.imag) <= BRANCH_TOL * scale) & (values.real <= BRANCH_TOL * scale)
    if np.any(on_cut):
        raise BranchCutError(f"Eigenvalues {values[on_cut]} lie on the branch cut of the principal logarithm")


def mat_log_principal(A: np.ndarray, condition_threshold: float = CONDITION_THRESHOLD) -> np.ndarray:
    """
    Principal matrix logarithm.

    Args:
        A (np.ndarray): square matrix without eigenvalues on the closed negative real axis.
        condition_threshold (float, optional): eigenvector condition number above which
            scipy.linalg.logm (inverse scaling and squaring) is used. Defaults to 1e8.

    Returns:
        np.ndarray: Log(A) on the principal branch.

    Raises:
        BranchCutError: If an eigenvalue lies on the closed negative real axis.
        ConditioningError: If the fallback does not reproduce A to 1e-10 relative.
    """
    A = _as_square(A)
    values, vectors, condition = eigen_decompose(A)
    check_branch(values)
    if condition > condition_threshold:
        return _fallback_log(A, condition, condition_threshold)
    return function_from_eigen(vectors, np.log(values))


def mat_power(A: np.ndarray, p: float, condition_threshold: float = CONDITION_THRESHOLD) -> np.ndarray:
    """
    Real power A^p = exp(p Log A) on the principal branch.

    Args:
        A (np.ndarray): square matrix without eigenvalues on the closed negative real axis.
        p (float): the exponent.
        condition_threshold (float, optional): see mat_log_principal.

    Returns:
        np.ndarray: A^p.

    Raises:
        BranchCutError, ConditioningError: as raised by the logarithm.
    """
    A = _as_square(A)
    values, vectors, condition = eigen_decompose(A)
    check_branch(values)
    if condition > condition_threshold:
        return scipy.linalg.expm(p * _fallback_log(A, condition, condition_threshold))
    return function_from_eigen(vectors, np.exp(p * np.log(values)))


def _fallback_log(A: np.ndarray, condition: float, condition_threshold: float) -> np.ndarray:
    logger.warning(f"mat_log_principal: eigenvector condition number {condition:.3e} above "
                   f"{condition_threshold:.1e}, falling back to inverse scaling and squaring")
    log_A = scipy.linalg.logm(A)
    residual = np.linalg.norm(scipy.linalg.expm(log_A) - A) / max(np.linalg.norm(A), 1.0)
    if not np.isfinite(residual) or residual > ROUND_TRIP_TOL:
        raise ConditioningError(f"Matrix logarithm failed: condition number {condition:.3e}, "
                                f"exp(log A) residual {residual:.3e}")
    return log_A


def _as_square(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {A.shape}")
    return A
#endregion MATRIX FUNCTIONS
