"""
Numerical oracle: forward integration of the rate equations truncated at degree k_max.

    dN_k/dt = Λδ_{k,m} + Λm[π_{k-1}N_{k-1}(1-δ_{k,m}) - π_k N_k],  π_k = k/D(t)

The outflow from degree k_max is kept, so mass leaks out of the truncated system instead of piling up in
the last class; below k_max the truncated system is then exact. The leaked node mass is integrated as an
extra state component.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import DOP853

from common.custom_logging import get_custom_logger
from common.serialization import Deserializable
from model.model_params import ModelParams, d_of_t
from model.trajectory import DegreeTrajectory, TrajectorySource

STIFF_STEP_SIZE = 1e-9
STIFF_STEP_COUNT = 1000


class IntegrationError(RuntimeError):
    def __init__(self, message: str, last_good_time: float):
        super().__init__(f"{message} (last good time {last_good_time})")
        self.last_good_time = last_good_time


class OdeConfigError(ValueError):
    pass


@dataclass
class OdeConfig(Deserializable):
    k_max: int = 400
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    t_snapshots: list[float] = field(default_factory=lambda: [0.0])

    def __post_init__(self):
        if isinstance(self.k_max, bool) or not isinstance(self.k_max, int):
            raise OdeConfigError(f"k_max must be an integer, got {self.k_max!r}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise OdeConfigError(f"Tolerances must be > 0, got rel_tol={self.rel_tol}, abs_tol={self.abs_tol}")
        snapshots = [float(t) for t in self.t_snapshots]
        if not snapshots:
            raise OdeConfigError("t_snapshots is empty")
        if any(not t >= 0 for t in snapshots):
            raise OdeConfigError("Snapshot times must be >= 0")
        if any(b < a for a, b in zip(snapshots, snapshots[1:])):
            raise OdeConfigError("Snapshot times must be sorted")
        self.t_snapshots = snapshots

    def refined(self, factor: float = 0.5) -> "OdeConfig":
        return OdeConfig(k_max=self.k_max, rel_tol=self.rel_tol * factor, abs_tol=self.abs_tol * factor, t_snapshots=list(self.t_snapshots))


def _check_truncation(params: ModelParams, k_max: int):
    if k_max < params.m:
        raise OdeConfigError(f"k_max={k_max} is below m={params.m}")
    if params.max_initial_degree > k_max:
        raise OdeConfigError(f"k_max={k_max} cuts off initial degree {params.max_initial_degree}")


def rate_rhs(state: np.ndarray, t: float, params: ModelParams, k_max: int) -> np.ndarray:
    """dN_k/dt for k = m..k_max, outflow at k_max retained."""
    m = params.m
    state = np.asarray(state, dtype=float)
    if state.shape != (k_max - m + 1,):
        raise OdeConfigError(f"State has shape {state.shape}, expected ({k_max - m + 1},)")

    lam = float(params.lam)
    degrees = np.arange(m, k_max + 1, dtype=float)
    flux = lam * m * degrees * state / d_of_t(params, t)  # Λm·π_k·N_k

    derivative = -flux
    derivative[1:] += flux[:-1]
    derivative[0] += lam
    return derivative


def initial_state(params: ModelParams, k_max: int) -> np.ndarray:
    state = np.zeros(k_max - params.m + 1)
    for degree, count in params.initial_counts.items():
        state[degree - params.m] = float(count)
    return state


def integrate(params: ModelParams, cfg: OdeConfig) -> DegreeTrajectory:
    """Adaptive Dormand-Prince 8(5,3) integration; snapshots come from its 7th-order dense output."""
    _check_truncation(params, cfg.k_max)
    logger = get_custom_logger("oracle/ode")
    m, k_max = params.m, cfg.k_max
    lam_m = float(params.lam) * m

    def augmented_rhs(t, y):
        derivative = np.empty_like(y)
        derivative[:-1] = rate_rhs(y[:-1], t, params, k_max)
        derivative[-1] = lam_m * k_max * y[-2] / d_of_t(params, t)  # nodes leaving the last class
        return derivative

    y0 = np.append(initial_state(params, k_max), 0.0)
    snapshots = np.asarray(cfg.t_snapshots, dtype=float)
    results = np.empty((len(snapshots), len(y0)))

    next_snapshot = 0
    while next_snapshot < len(snapshots) and snapshots[next_snapshot] == 0.0:
        results[next_snapshot] = y0
        next_snapshot += 1

    t_end = float(snapshots[-1])
    if next_snapshot < len(snapshots):
        logger.debug(f"Integrating degrees {m}..{k_max} up to t={t_end} (rtol={cfg.rel_tol}, atol={cfg.abs_tol})")
        solver = DOP853(augmented_rhs, 0.0, y0, t_end, rtol=cfg.rel_tol, atol=cfg.abs_tol)
        small_steps = 0
        stiffness_reported = False
        steps = 0

        while next_snapshot < len(snapshots):
            last_good_time = solver.t
            message = solver.step()
            steps += 1
            if solver.status == "failed":
                raise IntegrationError(f"Integrator failed: {message}", last_good_time)
            if not np.all(np.isfinite(solver.y)):
                raise IntegrationError("Non-finite state", last_good_time)

            small_steps = small_steps + 1 if solver.step_size is not None and solver.step_size < STIFF_STEP_SIZE else 0
            if small_steps >= STIFF_STEP_COUNT and not stiffness_reported:
                logger.warning(f"Step size stayed below {STIFF_STEP_SIZE} for {STIFF_STEP_COUNT} steps near t={solver.t}, the system may be stiff")
                stiffness_reported = True

            if next_snapshot < len(snapshots) and snapshots[next_snapshot] <= solver.t:
                dense = solver.dense_output()
                while next_snapshot < len(snapshots) and snapshots[next_snapshot] <= solver.t:
                    results[next_snapshot] = dense(snapshots[next_snapshot])
                    next_snapshot += 1

            if solver.status == "finished" and next_snapshot < len(snapshots):
                raise IntegrationError("Integrator finished before the last snapshot", solver.t)

        logger.debug(f"Integration finished after {steps} steps")

    return DegreeTrajectory(
        times=snapshots,
        degrees=np.arange(m, k_max + 1),
        counts=results[:, :-1],
        source=TrajectorySource.ODE,
        leaked=results[:, -1],
    )


@dataclass(frozen=True)
class RefinementResult:
    max_abs_change: float
    worst_ratio: float  # change / (rel_tol·|N| + abs_tol) at the finer tolerances, worst entry

    @property
    def consistent(self) -> bool:
        return self.worst_ratio < 10.0


def refinement_check(params: ModelParams, cfg: OdeConfig) -> RefinementResult:
    """Integrates at cfg and at halved tolerances and measures how much the snapshots move."""
    coarse = integrate(params, cfg)
    finer_cfg = cfg.refined(0.5)
    fine = integrate(params, finer_cfg)
    change = np.abs(coarse.counts - fine.counts)
    scale = finer_cfg.rel_tol * np.abs(fine.counts) + finer_cfg.abs_tol
    return RefinementResult(max_abs_change=float(change.max()), worst_ratio=float((change / scale).max()))


@dataclass(frozen=True)
class TruncationStep:
    k_max: int
    max_change: float | None  # vs the previous k_max, over k <= probe_degree; None for the first


def truncation_study(params: ModelParams, cfg: OdeConfig, k_max_values=(100, 200, 400), probe_degree: int = 50) -> list[TruncationStep]:
    """Sensitivity of low degrees to the truncation degree."""
    logger = get_custom_logger("oracle/ode")
    steps = []
    previous = None
    columns = probe_degree - params.m + 1
    for k_max in k_max_values:
        if k_max < probe_degree:
            raise OdeConfigError(f"k_max={k_max} is below the probe degree {probe_degree}")
        trajectory = integrate(params, OdeConfig(k_max=k_max, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, t_snapshots=list(cfg.t_snapshots)))
        probe = trajectory.counts[:, :columns]
        change = None if previous is None else float(np.abs(probe - previous).max())
        steps.append(TruncationStep(k_max=k_max, max_change=change))
        logger.info(f"Truncation k_max={k_max}: max change of N_k (k <= {probe_degree}) = {change}")
        previous = probe
    return steps
