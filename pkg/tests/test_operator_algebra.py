"""
Tests for the operator algebra: states, vectorization and matrix functions
"""
import numpy as np
import pytest
import scipy.linalg

from src.numeric_errors import BranchCutError, NumericContractError, PositivityError, StateValidityError
from src.operator_algebra.operator_algebra import (
    DensityMatrix, atomic_operators, adjoint, bloch_state, bloch_vector, purity, state_from_spec,
    expectation, vec, unvec, left_superoperator, right_superoperator, commutator_superoperator,
    apply_superoperator, eigen_decompose, mat_exp, mat_log_principal, mat_power)
from tests.conftest import assert_valid_state


def test_atomic_operators():
    ops = atomic_operators()
    np.testing.assert_array_equal(ops['sigma'], np.array([[0, 1], [0, 0]]))
    np.testing.assert_array_equal(ops['sigma_z'], np.diag([-1, 1]))
    np.testing.assert_array_equal(ops['sigma_y'], np.array([[0, 1j], [-1j, 0]]))
    for name in ('sigma_x', 'sigma_y', 'sigma_z'):
        np.testing.assert_array_equal(ops[name], adjoint(ops[name]))
    # sigma lowers |e> to |g>
    np.testing.assert_array_equal(ops['sigma'] @ np.array([0, 1]), np.array([1, 0]))


@pytest.mark.parametrize(
    "spec, expected_z",
    [
        ('excited', 1.0),
        ('ground', -1.0),
        ('mixed', 0.0),
        ('bloch:0.6,0,0.8', 0.8),
        (' Bloch:(0, 0.3, -0.4) ', -0.4),
    ]
)
def test_state_from_spec(spec, expected_z):
    rho = state_from_spec(spec)
    assert_valid_state(rho)
    assert bloch_vector(rho).z == pytest.approx(expected_z, abs=1e-15)


@pytest.mark.parametrize("spec", ['upper', 'bloch:1,1,1', 'bloch:0.1,0.2', 'bloch:a,b,c'])
def test_state_from_spec_rejects(spec):
    with pytest.raises(ValueError):
        state_from_spec(spec)


def test_density_matrix_is_read_only_copy():
    source = np.diag([0.25, 0.75]).astype(complex)
    rho = DensityMatrix(source)
    source[0, 0] = 1.0
    assert rho.matrix[0, 0] == 0.25
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 0.5


def test_density_matrix_validation():
    with pytest.raises(ValueError, match="2x2"):
        DensityMatrix(np.eye(3) / 3)
    with pytest.raises(StateValidityError, match="Hermitian"):
        DensityMatrix(np.array([[0.5, 0.1], [0.0, 0.5]]))
    with pytest.raises(StateValidityError, match="trace"):
        DensityMatrix(np.diag([0.5, 0.5 + 4e-8]))
    assert issubclass(StateValidityError, NumericContractError)
    assert not issubclass(StateValidityError, ValueError)
    with pytest.raises(PositivityError):
        DensityMatrix(np.diag([1.1, -0.1]))

    unchecked = DensityMatrix(np.diag([1.1, -0.1]), validate=False)
    assert not unchecked.is_valid()
    assert unchecked.defects()['min_eigenvalue'] == pytest.approx(-0.1)


def test_populations_and_coherence():
    rho = bloch_state(0.6, 0.0, 0.0)
    assert rho.populations == pytest.approx((0.5, 0.5))
    assert rho.coherence == pytest.approx(0.3)
    assert expectation(rho, atomic_operators()['sigma']) == pytest.approx(rho.coherence)


def test_bloch_vector_round_trip(random_states):
    for rho in random_states:
        b = bloch_vector(rho)
        rebuilt = bloch_state(b.x, b.y, b.z)
        np.testing.assert_allclose(rebuilt.matrix, rho.matrix, atol=1e-14)
        assert purity(rho) == pytest.approx(0.5 * (1.0 + b.norm() ** 2))


def test_bloch_state_outside_ball():
    with pytest.raises(ValueError, match="unit ball"):
        bloch_state(0.8, 0.8, 0.0)


def test_vec_is_column_stacking():
    rho = np.array([[1, 3], [2, 4]], dtype=complex)
    np.testing.assert_array_equal(vec(rho), np.array([1, 2, 3, 4]))
    np.testing.assert_array_equal(unvec(vec(rho)), rho)
    with pytest.raises(ValueError):
        unvec(np.zeros(3))


def test_superoperator_building_blocks(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    np.testing.assert_allclose(apply_superoperator(left_superoperator(a), rho), a @ rho, atol=1e-14)
    np.testing.assert_allclose(apply_superoperator(right_superoperator(b), rho), rho @ b, atol=1e-14)
    np.testing.assert_allclose(apply_superoperator(commutator_superoperator(a), rho), a @ rho - rho @ a, atol=1e-14)
    sandwich = left_superoperator(a) @ right_superoperator(b)
    np.testing.assert_allclose(apply_superoperator(sandwich, rho), a @ rho @ b, atol=1e-13)


def test_eigen_decompose_defective():
    _, _, condition = eigen_decompose(np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert condition > 1e8


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_matrix_functions_against_scipy(seed):
    rng = np.random.default_rng(seed)
    A = 0.5 * (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    np.testing.assert_allclose(mat_exp(A), scipy.linalg.expm(A), atol=1e-12)

    B = np.eye(4) + 0.15 * A
    log_B = mat_log_principal(B)
    np.testing.assert_allclose(log_B, scipy.linalg.logm(B), atol=1e-12)
    np.testing.assert_allclose(mat_exp(log_B), B, atol=1e-12)
    np.testing.assert_allclose(mat_power(B, 2.0), B @ B, atol=1e-12)
    np.testing.assert_allclose(mat_power(B, -1.0), np.linalg.inv(B), atol=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("similar", [False, True])
def test_mat_exp_of_commuting_sum(seed, similar):
    rng = np.random.default_rng(seed)
    A = np.diag(rng.normal(size=4) + 1j * rng.normal(size=4))
    B = np.diag(rng.normal(size=4) + 1j * rng.normal(size=4))
    if similar:
        S = np.eye(4) + 0.2 * rng.normal(size=(4, 4))
        S_inv = np.linalg.inv(S)
        A, B = S @ A @ S_inv, S @ B @ S_inv
    np.testing.assert_allclose(mat_exp(A + B), mat_exp(A) @ mat_exp(B), rtol=1e-11, atol=1e-11)


def test_defective_matrix_falls_back():
    jordan = np.array([[-1.0, 1.0], [0.0, -1.0]])
    np.testing.assert_allclose(mat_exp(jordan), np.exp(-1.0) * np.array([[1.0, 1.0], [0.0, 1.0]]), atol=1e-14)
    shifted = np.array([[2.0, 1.0], [0.0, 2.0]])
    expected_log = np.array([[np.log(2.0), 0.5], [0.0, np.log(2.0)]])
    np.testing.assert_allclose(mat_log_principal(shifted), expected_log, atol=1e-12)
    np.testing.assert_allclose(mat_power(shifted, 0.5) @ mat_power(shifted, 0.5), shifted, atol=1e-12)


@pytest.mark.parametrize("matrix", [np.diag([1.0, -2.0]), np.diag([1.0, 0.0])])
def test_log_branch_cut(matrix):
    with pytest.raises(BranchCutError):
        mat_log_principal(matrix)
    with pytest.raises(BranchCutError):
        mat_power(matrix, 0.5)


def test_log_principal_branch():
    rotation = np.array([[np.cos(3.0), -np.sin(3.0)], [np.sin(3.0), np.cos(3.0)]])
    log_rotation = mat_log_principal(rotation)
    np.testing.assert_allclose(np.sort(np.linalg.eigvals(log_rotation).imag), [-3.0, 3.0], atol=1e-12)
