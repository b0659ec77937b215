"""
Random Time Decay Simulator

Command line front-end that writes the evolution-time density and the averaged
decay curves as CSV and validates the computational routes against each other.
Tunable defaults (grids, tolerances, quadrature, ODE step control, log level)
are read from 'config/simulation_config.ini'.

Subcommands:
    pdf       Gamma density of the evolution time on a t'/tau grid
    decay     averaged population inversion for several tau values
    compare   cross-route discrepancies (closed form, matrix function, quadrature,
              log-generator ODE, small-tau ODE); exit code 2 on a tolerance breach
    spectrum  eigenvalues of G, I - tau G and the log generator, effective decay rate

Exit codes:
    0 success, 1 usage error, 2 numeric contract breach

Dependencies:
- argparse: command line parsing
- pandas: result tables
- numpy: grids and linear algebra
- Custom modules:
  - file_handler.file_handler: configuration and CSV output
  - operator_algebra, generator, random_time, approx: the simulation itself

Usage:
    python src/pipeline.py decay --tau 0 --tau 0.5 --tau 5 --tau 50 --out output/decay.csv
    python src/pipeline.py compare --omega 10 --tau 0.5 --steps 21
"""

import argparse
from dataclasses import dataclass, field
import math
import sys
import os

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from scipy.special import gammainc, gammaincc

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from src.color_logger import logger, set_log_level
from src.numeric_errors import NumericContractError, StepBudgetError, ToleranceBreachError
from src.file_handler.file_handler import Config_File_Handler, Csv_File_Handler
from src.operator_algebra.operator_algebra import DensityMatrix, state_from_spec, bloch_vector
from src.generator.generator import SystemParams, build_generator, propagate_exact, dephasing_superoperator
from src.random_time.random_time import (
    GammaTimeDist, gamma_pdf, build_v_map, averaged_state_matrixfn, averaged_inversion_closed,
    averaged_state_closed, effective_decay_rate)
from src.random_time.quadrature import averaged_state_quadrature
from src.approx.approx import TimeGrid, build_approx_generator, integrate_linear_ode, regime_report

SUBCOMMANDS = ('pdf', 'decay', 'compare', 'spectrum')
METHODS = ('closed', 'matrixfn', 'quadrature')
DEFAULT_GAMMA_TAUS = (0.0, 0.5, 5.0, 50.0)
DEFAULT_RATIOS = (0.1, 1.0, 5.0)
EXACT_ROUTES = ('closed', 'quadrature', 'ode_log')
SPECTRUM_NOISE = 1e-13

CSV_SCHEMAS = """\
CSV schemas (comma separated, header row, 15 significant digits):
  pdf       t_prime_over_tau, pdf_t_over_tau=<r> for every ratio r
  decay     gamma_t (t when gamma = 0), sz_gamma_tau=<gamma*tau> (sz_tau=<tau> when gamma = 0)
            for every tau: the averaged inversion <sigma_z>
  compare   tau, t, closed_vs_matrixfn, quadrature_vs_matrixfn, ode_log_vs_matrixfn,
            ode_approx_vs_matrixfn: max-abs state discrepancy against the matrix-function route
  spectrum  text table, not CSV
"""


class Cli_Argument_Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with code 1 on usage errors."""
    def error(self, message):
        self.print_usage(sys.stderr)
        logger.error(f"{self.prog}: {message}")
        sys.exit(1)


@dataclass(frozen=True)
class RunConfig:
    """
    Validated settings of one command line run.

    Attributes:
        subcommand (str): one of pdf, decay, compare, spectrum.
        params (SystemParams): omega, gamma, kappa (tau is taken from tau_list).
        tau_list (list[float]): fluctuation scales, each >= 0.
        t_max (float): final laboratory time.
        steps (int): number of time grid points.
        initial (str): initial state, excited | ground | mixed | bloch:x,y,z.
        method (str): compute route of the decay subcommand.
        ratios (list[float]): t/tau values of the pdf subcommand.
        out (str | None): output file, None for standard output.
    """
    subcommand: str
    params: SystemParams
    tau_list: list[float]
    t_max: float
    steps: int
    initial: str = 'excited'
    method: str = 'closed'
    ratios: list[float] = field(default_factory=lambda: list(DEFAULT_RATIOS))
    out: str | None = None

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ValueError(f"Unknown subcommand '{self.subcommand}'")
        if self.method not in METHODS:
            raise ValueError(f"Unknown method '{self.method}', expected one of {METHODS}")
        if self.steps < 2:
            raise ValueError(f"--steps must be >= 2, got {self.steps}")
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise ValueError(f"--tmax must be > 0, got {self.t_max}")
        if self.subcommand in ('decay', 'compare') and not self.tau_list:
            raise ValueError("At least one --tau is required")
        if any(not math.isfinite(tau) or tau < 0 for tau in self.tau_list):
            raise ValueError(f"Every --tau must be finite and >= 0, got {self.tau_list}")
        if len(set(self.tau_list)) != len(self.tau_list):
            raise ValueError(f"--tau values must be distinct, got {self.tau_list}")
        if not self.ratios or any(not math.isfinite(r) or r <= 0 for r in self.ratios):
            raise ValueError(f"Every --ratio must be finite and > 0, got {self.ratios}")
        if len(set(self.ratios)) != len(self.ratios):
            raise ValueError(f"--ratio values must be distinct, got {self.ratios}")
        state_from_spec(self.initial)

    def initial_state(self) -> DensityMatrix:
        return state_from_spec(self.initial)


def build_parser() -> Cli_Argument_Parser:
    parser = Cli_Argument_Parser(
        prog='pipeline.py',
        description='Two-level atom with Gamma-distributed evolution time.',
        epilog=CSV_SCHEMAS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest='subcommand', required=True, parser_class=Cli_Argument_Parser)
    helps = {
        'pdf': 'Gamma density P(t, t\') on the grid t\'/tau in (0, 12]',
        'decay': 'averaged inversion <sigma_z>(t) for every --tau',
        'compare': 'cross-check all computational routes; exit 2 on a tolerance breach',
        'spectrum': 'eigenvalues of G, I - tau G and the log generator',
    }
    for name in SUBCOMMANDS:
        sub = subparsers.add_parser(name, help=helps[name], description=helps[name],
                                    epilog=CSV_SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
        sub.add_argument('--omega', type=float, default=0.0, help='angular frequency (default 0)')
        sub.add_argument('--gamma', type=float, default=1.0, help='decay rate (default 1)')
        sub.add_argument('--kappa', type=float, default=0.0, help='dephasing rate (default 0)')
        sub.add_argument('--tau', type=float, action='append', default=None,
                         help='fluctuation scale, repeatable (default gamma*tau = 0, 0.5, 5, 50; pdf: 1)')
        sub.add_argument('--tmax', type=float, default=10.0, help='final time (default 10)')
        sub.add_argument('--steps', type=int, default=None,
                         help='number of time points (default from the configuration file)')
        sub.add_argument('--initial', default='excited', help='excited | ground | mixed | bloch:x,y,z')
        sub.add_argument('--method', choices=METHODS, default='closed', help='decay compute route')
        sub.add_argument('--ratio', type=float, action='append', default=None,
                         help='t/tau value of a pdf column, repeatable (default 0.1, 1, 5)')
        sub.add_argument('--out', default=None, help='output file (default standard output)')
        sub.add_argument('--verbose', action='store_true', help='debug logging')
    return parser


def run_config_from_args(args: argparse.Namespace, default_steps: int) -> RunConfig:
    params = SystemParams(omega=args.omega, gamma=args.gamma, kappa=args.kappa)
    if args.tau is not None:
        tau_list = list(args.tau)
    elif args.subcommand == 'pdf':
        tau_list = [1.0]
    else:
        scale = args.gamma if args.gamma > 0 else 1.0
        tau_list = [gamma_tau / scale for gamma_tau in DEFAULT_GAMMA_TAUS]
    return RunConfig(
        subcommand=args.subcommand,
        params=params,
        tau_list=tau_list,
        t_max=args.tmax,
        steps=args.steps if args.steps is not None else default_steps,
        initial=args.initial,
        method=args.method,
        ratios=list(args.ratio) if args.ratio is not None else list(DEFAULT_RATIOS),
        out=args.out,
    )


#region PDF
def pdf_grid_mass(u: np.ndarray, values: np.ndarray, k: float, tau: float) -> float:
    """
    Probability mass of the density sampled on the grid u = t'/tau: trapezoid over the grid
    points plus the exact mass outside it, the head cell (0, u_1] and the tail (u_max, inf),
    from the regularized incomplete gamma functions.
    """
    return float(trapezoid(values * tau, u) + gammainc(k, u[0]) + gammaincc(k, u[-1]))


def cmd_pdf(config: RunConfig, settings: Config_File_Handler) -> pd.DataFrame:
    """
    Density of the evolution time for every t/tau ratio on the grid t'/tau in (0, u_max].

    Returns:
        pd.DataFrame: t_prime_over_tau and one pdf column per ratio.
    """
    grids = settings.grid_settings()
    tau = config.tau_list[0]
    if tau <= 0:
        raise ValueError(f"pdf needs tau > 0, got {tau}")
    u = grids.pdf_u_max * np.arange(1, grids.pdf_points + 1) / grids.pdf_points
    data = {'t_prime_over_tau': u}
    for ratio in config.ratios:
        d = GammaTimeDist(t=ratio * tau, tau=tau)
        values = gamma_pdf(d, u * tau)
        mass = pdf_grid_mass(u, values, d.shape, tau)
        logger.info(f"t/tau = {ratio:g}: {d.pdf_regime()} regime, grid mass {mass:.6f}")
        data[f'pdf_t_over_tau={ratio:g}'] = values
    return pd.DataFrame(data)
#endregion PDF


#region DECAY
def decay_column_name(gamma: float, tau: float) -> str:
    return f'sz_gamma_tau={gamma * tau:g}' if gamma > 0 else f'sz_tau={tau:g}'


def inversion_by_route(method: str, config: RunConfig, settings: Config_File_Handler,
                       tau: float, times: np.ndarray) -> np.ndarray:
    """Averaged inversion at every time through one compute route."""
    rho0 = config.initial_state()
    G = build_generator(config.params)
    values = []
    for t in times:
        if method == 'closed':
            rho_gg, rho_ee = rho0.populations
            values.append(averaged_inversion_closed(rho_ee - rho_gg, config.params.gamma, tau, t))
            continue
        if method == 'matrixfn':
            rho = averaged_state_matrixfn(build_v_map(G, tau, t), rho0)
        elif tau == 0 or t == 0:
            rho = propagate_exact(G, rho0, t)
        else:
            rho = averaged_state_quadrature(G, rho0, GammaTimeDist(t=t, tau=tau), settings.quadrature_config())
        values.append(bloch_vector(rho).z)
    return np.array(values)


def cmd_decay(config: RunConfig, settings: Config_File_Handler) -> pd.DataFrame:
    """
    Averaged inversion for every tau in the configuration.

    Routes other than the closed form are checked against it; a disagreement beyond the
    configured method tolerance aborts with a diagnostic dump.

    Raises:
        ToleranceBreachError: On a method disagreement.
    """
    times = TimeGrid(config.t_max, config.steps).times
    gamma = config.params.gamma
    tolerance = settings.compare_settings().method_disagreement_tol
    data = {'gamma_t' if gamma > 0 else 't': gamma * times if gamma > 0 else times}
    for tau in config.tau_list:
        values = inversion_by_route(config.method, config, settings, tau, times)
        if config.method != 'closed':
            reference = inversion_by_route('closed', config, settings, tau, times)
            gap = np.abs(values - reference)
            if np.max(gap) > tolerance:
                worst = int(np.argmax(gap))
                dump = pd.DataFrame({'t': times, config.method: values, 'closed': reference, 'gap': gap})
                logger.error(f"Method '{config.method}' disagrees with the closed form at tau = {tau:g}:\n"
                             f"{dump.iloc[max(worst - 3, 0):worst + 4].to_string(index=False)}")
                raise ToleranceBreachError(f"Method disagreement {gap[worst]:.3e} > {tolerance:.1e} "
                                           f"at t = {times[worst]:g}, tau = {tau:g}")
        data[decay_column_name(gamma, tau)] = values
    return pd.DataFrame(data)
#endregion DECAY


#region COMPARE
def ode_intervals(M: np.ndarray, t_max: float, output_intervals: int, min_intervals: int,
                  max_step_phase: float, max_intervals: int | None = None) -> int:
    """
    RK4 interval count: at least min_intervals, h * spectral radius <= max_step_phase,
    and a multiple of the output grid intervals.

    Raises:
        StepBudgetError: If the count exceeds max_intervals.
    """
    radius = float(np.max(np.abs(np.linalg.eigvals(M))))
    needed = max(min_intervals, math.ceil(t_max * radius / max_step_phase))
    intervals = output_intervals * math.ceil(needed / output_intervals)
    if max_intervals is not None and intervals > max_intervals:
        raise StepBudgetError(f"RK4 needs {intervals} steps (spectral radius {radius:.3e}, t_max = {t_max:g}), "
                              f"above the budget of {max_intervals}; raise [ode] max_intervals or shorten --tmax")
    return intervals


def route_trajectory_on_grid(M: np.ndarray, rho0: DensityMatrix, config: RunConfig,
                             settings: Config_File_Handler) -> list[DensityMatrix]:
    ode = settings.ode_settings()
    output_intervals = config.steps - 1
    intervals = ode_intervals(M, config.t_max, output_intervals, ode.min_intervals, ode.max_step_phase,
                              ode.max_intervals)
    trajectory = integrate_linear_ode(M, rho0, TimeGrid(config.t_max, intervals + 1), ode.trace_drift_tol,
                                      record_every=intervals // output_intervals)
    return trajectory.states


def compare_routes(config: RunConfig, settings: Config_File_Handler, tau: float) -> pd.DataFrame:
    """
    Max-abs state discrepancy of every route against the matrix-function route at one tau.

    The small-tau route integrates the small-tau generator plus the configured dephasing.
    """
    params = config.params
    G = build_generator(params)
    rho0 = config.initial_state()
    times = TimeGrid(config.t_max, config.steps).times
    q = settings.quadrature_config()

    log_generator = build_v_map(G, tau, 0.0).log_generator
    approx_matrix = build_approx_generator(params.omega, params.gamma, tau).matrix + dephasing_superoperator(params.kappa)
    ode_log_states = route_trajectory_on_grid(log_generator, rho0, config, settings)
    ode_approx_states = route_trajectory_on_grid(approx_matrix, rho0, config, settings)

    rows = []
    for n, t in enumerate(times):
        reference = averaged_state_matrixfn(build_v_map(G, tau, t), rho0).matrix
        closed = averaged_state_closed(params, rho0, tau, t).matrix
        if tau == 0 or t == 0:
            quadrature = propagate_exact(G, rho0, t).matrix
        else:
            quadrature = averaged_state_quadrature(G, rho0, GammaTimeDist(t=t, tau=tau), q).matrix
        rows.append({
            'tau': tau,
            't': t,
            'closed_vs_matrixfn': float(np.max(np.abs(closed - reference))),
            'quadrature_vs_matrixfn': float(np.max(np.abs(quadrature - reference))),
            'ode_log_vs_matrixfn': float(np.max(np.abs(ode_log_states[n].matrix - reference))),
            'ode_approx_vs_matrixfn': float(np.max(np.abs(ode_approx_states[n].matrix - reference))),
        })
    return pd.DataFrame(rows)


def cmd_compare(config: RunConfig, settings: Config_File_Handler) -> tuple[pd.DataFrame, pd.DataFrame, bool]:
    """
    Cross-check all routes for every tau.

    Returns:
        tuple: (per-time discrepancy table, per-tau summary, True iff the exact routes agree
        within the configured route tolerance). The small-tau route is reported, never judged.
    """
    route_tol = settings.compare_settings().route_tol
    table = pd.concat([compare_routes(config, settings, tau) for tau in config.tau_list], ignore_index=True)
    summary = table.groupby('tau', sort=False).max().drop(columns='t').reset_index()
    exact_columns = [f'{route}_vs_matrixfn' for route in EXACT_ROUTES]
    summary['exact_routes_ok'] = (summary[exact_columns] <= route_tol).all(axis=1)
    return table, summary, bool(summary['exact_routes_ok'].all())
#endregion COMPARE


#region SPECTRUM
def format_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real + 0.0:.15g}{z.imag + 0.0:+.15g}j"


def sorted_eigenvalues(M: np.ndarray) -> list[complex]:
    """Eigenvalues ordered by real then imaginary part; rounding noise below 1e-13 of the spectral scale is zeroed."""
    values = np.linalg.eigvals(M)
    floor = SPECTRUM_NOISE * max(1.0, float(np.max(np.abs(values))))
    cleaned = [complex(v.real if abs(v.real) > floor else 0.0, v.imag if abs(v.imag) > floor else 0.0)
               for v in values]
    return sorted(cleaned, key=lambda z: (round(z.real, 10), round(z.imag, 10)))


def cmd_spectrum(config: RunConfig, settings: Config_File_Handler) -> str:
    """Text table of the spectra behind the averaged dynamics, one block per tau."""
    params = config.params
    G = build_generator(params)
    thresholds = settings.regime_thresholds()
    blocks = []
    for tau in config.tau_list:
        ev = build_v_map(G, tau, 0.0)
        table = pd.DataFrame({
            'G': [format_complex(z) for z in sorted_eigenvalues(G.matrix)],
            'I - tau G': [format_complex(z) for z in sorted_eigenvalues(np.eye(4) - tau * G.matrix)],
            'log generator': [format_complex(z) for z in sorted_eigenvalues(ev.log_generator)],
        })
        rate = effective_decay_rate(params.gamma, tau)
        report = regime_report(SystemParams(params.omega, params.gamma, params.kappa, tau), thresholds)
        ratio = f"{rate / params.gamma:.15g} gamma" if params.gamma > 0 else "n/a"
        blocks.append(
            f"tau = {tau:.15g} (omega = {params.omega:.15g}, gamma = {params.gamma:.15g}, kappa = {params.kappa:.15g})\n"
            f"{table.to_string(index=False)}\n"
            f"effective decay rate (1/tau) ln(1 + gamma tau) = {rate:.15g} ({ratio})\n"
            f"gamma tau = {report.gamma_tau:.15g}, omega tau = {report.omega_tau:.15g}, "
            f"omega/gamma = {report.omega_over_gamma:.15g}, small_tau_valid = {report.small_tau_valid}, "
            f"zeno_regime = {report.zeno_regime}\n"
        )
    return '\n'.join(blocks)
#endregion SPECTRUM


def main(argv: list[str] | None = None) -> int:
    """
    Entry point: parse the arguments, load the configuration and run one subcommand.

    Returns:
        int: exit code (0 success, 1 usage error, 2 numeric contract breach).
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    settings = Config_File_Handler()
    set_log_level('DEBUG' if args.verbose else settings.log_level())
    default_steps = settings.grid_settings().decay_steps

    try:
        config = run_config_from_args(args, default_steps)
    except ValueError as e:
        logger.error(f"Invalid arguments: {e}")
        return 1

    output = Csv_File_Handler(config.out)
    try:
        if config.subcommand == 'pdf':
            output.save(cmd_pdf(config, settings))
        elif config.subcommand == 'decay':
            output.save(cmd_decay(config, settings))
        elif config.subcommand == 'compare':
            table, summary, ok = cmd_compare(config, settings)
            output.save(table)
            sys.stderr.write(f"Route discrepancies against the matrix function:\n{summary.to_string(index=False)}\n")
            if not ok:
                logger.error("Exact routes disagree beyond the route tolerance")
                return 2
        else:
            text = cmd_spectrum(config, settings)
            if config.out is None:
                sys.stdout.write(text)
            else:
                with open(config.out, 'w', encoding='utf-8', newline='') as f:
                    f.write(text)
    except NumericContractError as e:
        logger.error(f"Numeric contract breach: {e}")
        return 2
    except ValueError as e:
        logger.error(f"Invalid arguments: {e}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
