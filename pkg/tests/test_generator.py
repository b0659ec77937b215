import numpy as np
import pytest

from src.operator_algebra.operator_algebra import apply_superoperator, state_from_spec, bloch_vector
from src.generator.generator import (
    SystemParams, Generator, build_generator, propagate_exact, steady_state, analytic_inversion,
    analytic_coherence, hamiltonian_superoperator, dissipator_superoperator, dephasing_superoperator)
from tests.conftest import PARAMETER_SETS, assert_valid_state


@pytest.mark.parametrize(
    "kwargs",
    [
        {'gamma': -1.0},
        {'kappa': -0.1},
        {'tau': -2.0},
        {'omega': float('nan')},
        {'gamma': float('inf')},
    ]
)
def test_system_params_rejects(kwargs):
    with pytest.raises(ValueError):
        SystemParams(**kwargs)


def test_generator_shape():
    with pytest.raises(ValueError, match="4x4"):
        Generator(np.zeros((2, 2)), SystemParams())


@pytest.mark.parametrize("params", PARAMETER_SETS)
def test_generator_preserves_trace_and_hermiticity(params, random_states):
    G = build_generator(params)
    assert G.trace_defect() <= 1e-12
    for rho in random_states:
        assert G.hermiticity_defect(rho.matrix) <= 1e-12


@pytest.mark.parametrize("omega, gamma", [(0.0, 1.0), (10.0, 1.0), (3.0, 0.2)])
def test_generator_spectrum(omega, gamma):
    G = build_generator(SystemParams(omega=omega, gamma=gamma))
    expected = [0.0, -gamma, -gamma / 2 + 2j * omega, -gamma / 2 - 2j * omega]
    key = lambda z: (round(z.real, 9), round(z.imag, 9))
    np.testing.assert_allclose(sorted(G.eigenvalues(), key=key), sorted(expected, key=key), atol=1e-12)


def test_zero_generator():
    G = build_generator(SystemParams())
    np.testing.assert_array_equal(G.matrix, np.zeros((4, 4)))


def test_generator_terms():
    excited = state_from_spec('excited').matrix
    np.testing.assert_allclose(apply_superoperator(dissipator_superoperator(2.0), excited),
                               2.0 * np.diag([1.0, -1.0]), atol=1e-15)
    # dephasing and precession never move populations
    diagonal = np.diag([0.3, 0.7])
    np.testing.assert_allclose(apply_superoperator(dephasing_superoperator(0.8), diagonal), 0.0, atol=1e-15)
    np.testing.assert_allclose(apply_superoperator(hamiltonian_superoperator(5.0), diagonal), 0.0, atol=1e-15)
    # coherence rho_eg: rotation -2 i w, dephasing -4 k
    unit_eg = np.array([[0.0, 0.0], [1.0, 0.0]])
    np.testing.assert_allclose(apply_superoperator(hamiltonian_superoperator(5.0), unit_eg), -10j * unit_eg, atol=1e-15)
    np.testing.assert_allclose(apply_superoperator(dephasing_superoperator(0.8), unit_eg), -3.2 * unit_eg, atol=1e-15)


@pytest.mark.parametrize("params", PARAMETER_SETS)
@pytest.mark.parametrize("t", [0.3, 1.0, 4.0])
def test_propagate_exact_matches_closed_forms(params, t):
    G = build_generator(params)
    rho0 = state_from_spec('bloch:0.6,0,0.8')
    rho_t = propagate_exact(G, rho0, t)
    assert_valid_state(rho_t)
    assert bloch_vector(rho_t).z == pytest.approx(analytic_inversion(0.8, params.gamma, t), abs=1e-12)
    assert rho_t.coherence == pytest.approx(analytic_coherence(rho0.coherence, params, t), abs=1e-12)


def test_propagate_exact_edges():
    G = build_generator(SystemParams(omega=1.0, gamma=1.0))
    rho0 = state_from_spec('excited')
    assert propagate_exact(G, rho0, 0.0) is rho0
    with pytest.raises(ValueError):
        propagate_exact(G, rho0, -1.0)


def test_steady_state_is_ground():
    G = build_generator(SystemParams(omega=3.0, gamma=0.5, kappa=0.1))
    np.testing.assert_allclose(steady_state(G).matrix, np.diag([1.0, 0.0]), atol=1e-12)


def test_analytic_inversion():
    assert analytic_inversion(1.0, 1.0, 1.0) == pytest.approx(2 * np.exp(-1.0) - 1, abs=1e-15)
    assert analytic_inversion(1.0, 1.0, 1.0) == pytest.approx(-0.264241, abs=1e-6)
    with pytest.raises(ValueError):
        analytic_inversion(1.5, 1.0, 1.0)
    with pytest.raises(ValueError):
        analytic_inversion(1.0, 1.0, -1.0)
