import numpy as np
import pytest

from src.numeric_errors import TraceDriftError
from src.operator_algebra.operator_algebra import state_from_spec, bloch_vector
from src.generator.generator import SystemParams, build_generator, propagate_exact, analytic_coherence
from src.random_time.random_time import (
    build_v_map, averaged_state_matrixfn, averaged_inversion_closed, averaged_coherence_closed)
from src.approx.approx import (
    TimeGrid, Trajectory, build_approx_generator, integrate_linear_ode, coherence_rate_gap,
    coherence_rate_gap_bound, RegimeThresholds, regime_report)
from tests.conftest import assert_valid_state, max_abs_difference


def test_time_grid():
    grid = TimeGrid(2.0, 5)
    assert grid.h == 0.5
    np.testing.assert_array_equal(grid.times, [0.0, 0.5, 1.0, 1.5, 2.0])
    with pytest.raises(ValueError):
        TimeGrid(0.0, 5)
    with pytest.raises(ValueError):
        TimeGrid(1.0, 1)


def test_trajectory_lengths():
    rho = state_from_spec('excited')
    with pytest.raises(ValueError, match="length"):
        Trajectory(times=[0.0, 1.0], states=[rho], bloch=[bloch_vector(rho)], purity=[1.0])


#region LOG GENERATOR ROUTE
LOG_ROUTE_PARAMS = SystemParams(omega=1.0, gamma=1.0, kappa=0.0, tau=0.5)


def test_log_generator_route_matches_matrix_function():
    G = build_generator(LOG_ROUTE_PARAMS)
    log_generator = build_v_map(G, LOG_ROUTE_PARAMS.tau, 0.0).log_generator
    rho0 = state_from_spec('bloch:0.6,0,0.8')
    grid = TimeGrid(5.0, 2001)
    trajectory = integrate_linear_ode(log_generator, rho0, grid)
    for n in range(0, grid.steps, 100):
        reference = averaged_state_matrixfn(build_v_map(G, LOG_ROUTE_PARAMS.tau, grid.times[n]), rho0)
        assert max_abs_difference(trajectory.states[n].matrix, reference.matrix) <= 1e-8
    for rho in trajectory.states:
        assert_valid_state(rho)


def test_rk4_is_fourth_order():
    G = build_generator(LOG_ROUTE_PARAMS)
    log_generator = build_v_map(G, LOG_ROUTE_PARAMS.tau, 0.0).log_generator
    rho0 = state_from_spec('bloch:0.6,0,0.8')
    t_max = 2.0
    reference = averaged_state_matrixfn(build_v_map(G, LOG_ROUTE_PARAMS.tau, t_max), rho0).matrix

    def final_error(steps):
        trajectory = integrate_linear_ode(log_generator, rho0, TimeGrid(t_max, steps))
        return max_abs_difference(trajectory.states[-1].matrix, reference)

    ratio = final_error(41) / final_error(81)
    assert 12.0 <= ratio <= 20.0


def test_trace_drift_aborts():
    with pytest.raises(TraceDriftError):
        integrate_linear_ode(-np.eye(4), state_from_spec('mixed'), TimeGrid(1.0, 11))
    with pytest.raises(ValueError, match="4x4"):
        integrate_linear_ode(np.eye(2), state_from_spec('mixed'), TimeGrid(1.0, 11))


def test_trajectory_dataframe():
    G = build_generator(SystemParams(omega=2.0, gamma=1.0))
    trajectory = integrate_linear_ode(G.matrix, state_from_spec('bloch:1,0,0'), TimeGrid(1.0, 201))
    df = trajectory.to_dataframe()
    assert list(df.columns) == ['t', 'x', 'y', 'z', 'purity', 'trace']
    assert len(df) == 201
    np.testing.assert_allclose(df['trace'], 1.0, atol=1e-12)
    exact = propagate_exact(G, state_from_spec('bloch:1,0,0'), 1.0)
    assert df['x'].iloc[-1] == pytest.approx(bloch_vector(exact).x, abs=1e-7)
    np.testing.assert_allclose(trajectory.inversion(), df['z'])


def test_recorded_states_follow_the_stride():
    G = build_generator(SystemParams(omega=2.0, gamma=1.0))
    rho0 = state_from_spec('bloch:1,0,0')
    full = integrate_linear_ode(G.matrix, rho0, TimeGrid(1.0, 101))
    strided = integrate_linear_ode(G.matrix, rho0, TimeGrid(1.0, 101), record_every=25)
    assert strided.times == full.times[::25]
    assert len(strided.states) == 5
    for kept, reference in zip(strided.states, full.states[::25]):
        np.testing.assert_array_equal(kept.matrix, reference.matrix)
    with pytest.raises(ValueError, match="record_every"):
        integrate_linear_ode(G.matrix, rho0, TimeGrid(1.0, 101), record_every=30)
#endregion LOG GENERATOR ROUTE


#region SMALL TAU ROUTE
def test_approx_generator_population_sector():
    omega, gamma, tau = 100.0, 1.0, 1e-3
    approx = build_approx_generator(omega, gamma, tau)
    plain = build_generator(SystemParams(omega=omega, gamma=gamma))
    assert approx.params.kappa == pytest.approx(0.5 * tau * omega ** 2)
    for index in (0, 3):
        np.testing.assert_array_equal(approx.matrix[index, :], plain.matrix[index, :])
        np.testing.assert_array_equal(approx.matrix[:, index], plain.matrix[:, index])
    with pytest.raises(ValueError):
        build_approx_generator(omega, gamma, -1.0)


def small_tau_errors(omega, gamma, tau, times):
    """Largest inversion and coherence errors of the small-tau generator against the exact average."""
    approx = build_approx_generator(omega, gamma, tau)
    exact_params = SystemParams(omega=omega, gamma=gamma)
    G = build_generator(exact_params)
    excited = state_from_spec('excited')
    inversion_error = 0.0
    coherence_error = 0.0
    for t in times:
        z_approx = bloch_vector(propagate_exact(approx, excited, t)).z
        inversion_error = max(inversion_error, abs(z_approx - averaged_inversion_closed(1.0, gamma, tau, t)))
        c_approx = analytic_coherence(0.5, approx.params, t)
        coherence_error = max(coherence_error, abs(c_approx - averaged_coherence_closed(0.5, exact_params, tau, t)))
        if t in (times[0], times[-1]):
            assert_valid_state(averaged_state_matrixfn(build_v_map(G, tau, t), excited))
    return inversion_error, coherence_error


def test_small_tau_route_converges():
    omega, gamma = 100.0, 1.0
    times = np.linspace(0.0, 5.0, 5001)
    inversion_error, coherence_error = small_tau_errors(omega, gamma, 1e-3, times)
    halved_inversion_error, halved_coherence_error = small_tau_errors(omega, gamma, 5e-4, times)
    assert inversion_error <= 1e-3
    assert inversion_error / halved_inversion_error >= 1.8
    assert coherence_error / halved_coherence_error >= 1.8


@pytest.mark.parametrize("gamma_tau", [1e-4, 1e-3])
def test_coherence_rate_gap(gamma_tau):
    gamma = 1.0
    omega = 100.0 * gamma
    tau = gamma_tau / gamma
    gap = coherence_rate_gap(omega, gamma, tau)
    assert -gamma ** 2 * tau / 8 <= gap <= coherence_rate_gap_bound(omega, gamma, tau)
    assert gap > 0


def test_coherence_rate_gap_without_precession():
    # w = 0: the gap is the second order decay correction
    tau = 1e-3
    assert coherence_rate_gap(0.0, 1.0, tau) == pytest.approx(tau / 8, rel=1e-2)
    with pytest.raises(ValueError):
        coherence_rate_gap(1.0, 1.0, 0.0)
#endregion SMALL TAU ROUTE


@pytest.mark.parametrize(
    "params, small_tau_valid, zeno_regime",
    [
        (SystemParams(omega=100.0, gamma=1.0, tau=1e-3), True, False),
        (SystemParams(omega=1.0, gamma=1.0, tau=50.0), False, True),
        (SystemParams(omega=1.0, gamma=1.0, tau=0.0), True, False),
        (SystemParams(omega=10.0, gamma=1.0, tau=0.5), False, False),
    ]
)
def test_regime_report(params, small_tau_valid, zeno_regime):
    report = regime_report(params)
    assert report.small_tau_valid is small_tau_valid
    assert report.zeno_regime is zeno_regime
    assert report.as_dict()['gamma_tau'] == params.gamma * params.tau


def test_regime_thresholds_are_configurable():
    params = SystemParams(omega=1.0, gamma=1.0, tau=0.5)
    assert regime_report(params, RegimeThresholds(zeno_gamma_tau=0.5)).zeno_regime
    assert np.isnan(regime_report(SystemParams()).omega_over_gamma)
