"""
The five CLI commands. Each one runs a module on a validated RunConfig, writes its output file
and returns the process exit code.
"""

from analysis.comparison import AnalysisError, ComparisonReport, compare, compare_ensemble, ensemble_node_totals, render_text
from analysis.diagnostics import poisson_arrivals_test
from analysis.identity_probe import identity_probe
from cli.output_writer import write_outputs
from cli.run_config import CompareBlock, RunConfig
from closed_form.closed_form_solution import build_constants
from closed_form.trajectories import asymptotic_column, closed_form_trajectory, constants_table, hypergeometric_trajectory
from common.custom_logging import get_custom_logger, get_general_logger
import common.settings_manager as settings_manager
from common.signal import Signal
from model.model_params import ModelParams
from model.trajectory import DegreeTrajectory, TrajectorySource
from oracle.ode_oracle import OdeConfig, integrate
from simulation.ensemble import EnsembleResult, ensemble

EXIT_OK = 0
EXIT_TOLERANCE_FAILURE = 1
EXIT_INPUT_ERROR = 2


def cmd_solve(config: RunConfig, threads: int | None = None) -> int:
    block = config.block
    params = config.params
    sol = build_constants(params, block.k_max)
    trajectory = closed_form_trajectory(sol, block.t_grid, method=block.method)
    asymptotic = asymptotic_column(params.m, trajectory.degrees)

    rows = trajectory.to_rows(params)
    for row in rows:
        row["asymptotic_p_k"] = float(asymptotic[row["k"]])

    result = {"rows": rows, "constants": constants_table(sol)}
    write_outputs(config, rows, result)
    return EXIT_OK


def cmd_oracle(config: RunConfig, threads: int | None = None) -> int:
    params = config.params
    trajectory = integrate(params, config.block)
    leaked = dict(zip(trajectory.times.tolist(), trajectory.leaked.tolist()))

    rows = trajectory.to_rows(params)
    for row in rows:
        row["leaked"] = leaked[row["t"]]

    summary = {"leaked_at_last_snapshot": float(trajectory.leaked[-1])}
    write_outputs(config, rows, {"trajectory": trajectory, "summary": summary}, summary)
    return EXIT_OK


def _log_progress(finished: int, total: int):
    get_custom_logger("simulation/ensemble").info(f"Replicas finished: {finished}/{total}")


def _run_ensemble(params: ModelParams, t_end: float, snapshots, replicas: int, seed: int, sampling_mode: str, threads: int | None) -> EnsembleResult:
    progress = Signal(int, int)
    progress.add(_log_progress, every=max(1, replicas // 10))
    return ensemble(params, t_end, snapshots, replicas, seed, threads=threads, sampling_mode=sampling_mode, progress=progress)


def cmd_simulate(config: RunConfig, threads: int | None = None) -> int:
    block = config.block
    params = config.params
    result = _run_ensemble(params, block.t_end, block.snapshots, block.replicas, block.seed, block.sampling_mode, threads)
    manifest = result.manifest(params)
    write_outputs(config, result.to_rows(), {"manifest": manifest, "ensemble": result}, manifest)
    return EXIT_OK


def _deterministic_trajectory(source: str, params: ModelParams, block: CompareBlock) -> DegreeTrajectory:
    if source == TrajectorySource.CLOSED_FORM.value:
        return closed_form_trajectory(build_constants(params, block.k_max), block.t_grid)
    if source == TrajectorySource.HYPERGEOMETRIC.value:
        return hypergeometric_trajectory(params, block.t_grid, block.k_max)
    settings = settings_manager.settings
    ode_config = OdeConfig(
        k_max=block.ode_k_max or max(settings.ode_default_k_max, block.k_max),
        rel_tol=block.ode_rel_tol or settings.ode_default_rel_tol,
        abs_tol=block.ode_abs_tol or settings.ode_default_abs_tol,
        t_snapshots=list(block.t_grid),
    )
    return integrate(params, ode_config)


def run_comparison(config: RunConfig, threads: int | None = None) -> tuple[ComparisonReport, dict]:
    """The comparison report plus any extra checks (ensemble node totals, Poisson arrivals)."""
    block = config.block
    params = config.params
    source_a, source_b = block.sources
    checks = {}

    if TrajectorySource.SIMULATION.value in block.sources:
        reference_source = source_b if source_a == TrajectorySource.SIMULATION.value else source_a
        reference = _deterministic_trajectory(reference_source, params, block)
        result = _run_ensemble(params, block.t_grid[-1], block.t_grid, block.replicas, block.seed, block.sampling_mode, threads)
        report = compare_ensemble(reference, result, tol=block.tol)
        checks["node_totals"] = ensemble_node_totals(result, params)
        try:
            checks["poisson_arrivals"] = poisson_arrivals_test(result, params)
        except AnalysisError as e:
            get_general_logger().info(f"Poisson arrivals test skipped: {e}")
        checks["manifest"] = result.manifest(params)
        return report, checks

    report_only = TrajectorySource.HYPERGEOMETRIC.value in block.sources
    trajectory_a = _deterministic_trajectory(source_a, params, block)
    trajectory_b = trajectory_a if source_b == source_a else _deterministic_trajectory(source_b, params, block)
    return compare(trajectory_a, trajectory_b, block.tol, report_only=report_only), checks


def _check_summary(check) -> dict:
    summary = {key: getattr(check, key) for key in check.__dataclass_fields__}
    for name in ("z_score", "passed"):
        if hasattr(check, name):
            summary[name] = getattr(check, name)
    return summary


def cmd_compare(config: RunConfig, threads: int | None = None) -> int:
    report, checks = run_comparison(config, threads)
    summary = report.summary()
    if "node_totals" in checks:
        summary["node_totals"] = [_check_summary(check) for check in checks["node_totals"]]
    if "poisson_arrivals" in checks:
        summary["poisson_arrivals"] = _check_summary(checks["poisson_arrivals"])

    write_outputs(config, report.to_rows(), {"summary": summary, "entries": report.to_rows(), "manifest": checks.get("manifest")}, summary)
    get_general_logger().info("Comparison result:\n" + render_text(report, max_rows=20))

    if report.failed:
        get_general_logger().error(f"Comparison failed: max relative difference {report.max_rel_diff} exceeds {report.tolerance}")
        return EXIT_TOLERANCE_FAILURE
    if report.report_only and not report.passed:
        get_general_logger().warning("Discrepancy reported, not failed: the hypergeometric form is compared for information only")
    return EXIT_OK


def cmd_identity(config: RunConfig, threads: int | None = None) -> int:
    block = config.block
    probe = identity_probe(block.m, block.lam, block.t, block.j_max)
    rows = [
        {"J": j, "partial_sum": partial_sum, "log10_abs_term": magnitude}
        for j, (partial_sum, magnitude) in enumerate(zip(probe.partial_sums, probe.term_log10_magnitudes))
    ]
    summary = {"lhs": probe.lhs, "converged": probe.converged, "converged_at": probe.converged_at}
    write_outputs(config, rows, probe.to_dict(), summary)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "identity": cmd_identity,
}
