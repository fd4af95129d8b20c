"""
Event-driven simulation of the growth process itself.
Nodes arrive after exponential(Λ) waiting times and attach to m existing nodes chosen with probability
proportional to degree. Only degree classes are stored: attachment depends on degree alone.
"""

from dataclasses import dataclass, field
from enum import Enum
import logging

import numpy as np

from common.custom_logging import get_general_logger
from model.model_params import ModelParams, ValidationMode
from model.trajectory import DegreeTrajectory, TrajectorySource

CHECK_INTERVAL = 1000


class SimulationError(RuntimeError):
    def __init__(self, message: str, replica_index: int | None = None):
        prefix = "" if replica_index is None else f"Replica {replica_index}: "
        super().__init__(prefix + message)
        self.replica_index = replica_index


class SamplingMode(Enum):
    DISTINCT = "distinct"
    WITH_REPLACEMENT = "with_replacement"


@dataclass
class SimState:
    """
    Degree-class counts of one growing network; degree_counts[k] is the number of nodes of degree k.
    total_degree and node_count are running totals, checked against the counts by check_bookkeeping().
    """

    degree_counts: np.ndarray
    total_degree: int
    node_count: int
    clock: float = 0.0
    arrivals: int = 0
    max_initial_degree: int = 0

    @classmethod
    def from_params(cls, params: ModelParams) -> "SimState":
        size = max(params.max_initial_degree, params.m) + 2
        counts = np.zeros(size, dtype=np.int64)
        for degree, count in params.initial_counts.items():
            if count.denominator != 1:
                raise SimulationError(f"Initial count N_{degree}(0) = {count} is not a whole number of nodes")
            counts[degree] = int(count)
        return cls(
            degree_counts=counts,
            total_degree=int((np.arange(size) * counts).sum()),
            node_count=int(counts.sum()),
            max_initial_degree=params.max_initial_degree,
        )

    def ensure_degree(self, degree: int):
        if degree >= len(self.degree_counts):
            grown = np.zeros(max(2 * len(self.degree_counts), degree + 2), dtype=np.int64)
            grown[: len(self.degree_counts)] = self.degree_counts
            self.degree_counts = grown

    @property
    def max_degree(self) -> int:
        occupied = np.flatnonzero(self.degree_counts)
        return int(occupied[-1]) if len(occupied) else 0

    def check_bookkeeping(self, m: int, max_gain_per_arrival: int):
        if np.any(self.degree_counts < 0):
            raise SimulationError(f"Negative degree-class count at t={self.clock}")
        if int((np.arange(len(self.degree_counts)) * self.degree_counts).sum()) != self.total_degree:
            raise SimulationError(f"Degree sum drifted from its running total at t={self.clock}")
        if int(self.degree_counts.sum()) != self.node_count:
            raise SimulationError(f"Node count drifted from its running total at t={self.clock}")
        bound = max(self.max_initial_degree, m) + max_gain_per_arrival * self.arrivals
        if self.max_degree > bound:
            raise SimulationError(f"Degree {self.max_degree} exceeds the finite-support bound {bound} at t={self.clock}")


@dataclass
class SimulationRun:
    trajectory: DegreeTrajectory
    arrivals: np.ndarray  # arrivals so far, per snapshot
    fallback_arrivals: int = 0  # arrivals that found too few nodes (lenient mode only)
    flags: list[str] = field(default_factory=list)


def _pick_class(cumulative: np.ndarray, rng: np.random.Generator) -> int:
    # Integer weights k·n_k, so the draw is exact
    return int(np.searchsorted(cumulative, rng.integers(cumulative[-1]), side="right"))


def draw_targets(state: SimState, m: int, rng: np.random.Generator, mode: SamplingMode) -> list[tuple[int, int]]:
    """
    Targets of one arrival as (current degree, edges received) pairs, one pair per distinct target node.
    Distinct mode draws m nodes sequentially without replacement (each draw proportional to degree among
    the remaining candidates); with_replacement draws m times from the same pool.
    """
    occupied = np.flatnonzero(state.degree_counts)
    available = state.degree_counts[occupied].copy()
    if len(occupied) == 0:
        return []

    if mode is SamplingMode.DISTINCT:
        moves = []
        for _ in range(min(m, int(available.sum()))):
            class_index = _pick_class(np.cumsum(occupied * available), rng)
            available[class_index] -= 1
            moves.append((int(occupied[class_index]), 1))
        return moves

    cumulative = np.cumsum(occupied * available)
    hits: dict[tuple[int, int], int] = {}
    for _ in range(m):
        class_index = _pick_class(cumulative, rng)
        node = (int(occupied[class_index]), int(rng.integers(available[class_index])))  # which node of the class
        hits[node] = hits.get(node, 0) + 1
    return [(degree, edges) for (degree, _), edges in hits.items()]


def apply_arrival(state: SimState, m: int, moves: list[tuple[int, int]]):
    """Moves the targets up (all from the pre-arrival state) and adds the new node at degree m."""
    state.ensure_degree(max((degree + edges for degree, edges in moves), default=m) + 1)
    for degree, edges in moves:
        state.degree_counts[degree] -= 1
        state.degree_counts[degree + edges] += 1
    state.degree_counts[m] += 1
    state.node_count += 1
    state.total_degree += m + sum(edges for _, edges in moves)
    state.arrivals += 1


def _check_snapshots(snapshots, t_end: float) -> np.ndarray:
    if not t_end >= 0:
        raise SimulationError(f"t_end must be >= 0, got {t_end}")
    snapshots = np.asarray(list(snapshots), dtype=float)
    if len(snapshots) == 0:
        raise SimulationError("No snapshot times given")
    if np.any(np.diff(snapshots) < 0):
        raise SimulationError("Snapshot times must be sorted")
    if snapshots[0] < 0 or snapshots[-1] > t_end:
        raise SimulationError(f"Snapshot times must lie in [0, {t_end}]")
    return snapshots


def _check(state: SimState, m: int, max_gain: int, replica_index: int | None):
    try:
        state.check_bookkeeping(m, max_gain)
    except SimulationError as e:
        raise SimulationError(str(e), replica_index) from e


def run_simulation(
    params: ModelParams,
    t_end: float,
    seed,
    snapshots,
    sampling_mode: SamplingMode | str = SamplingMode.DISTINCT,
    replica_index: int | None = None,
    check_interval: int | None = None,
) -> SimulationRun:
    """
    One realization up to t_end. Snapshots record the state as of the last event before each snapshot time.
    `seed` is anything numpy.random.default_rng accepts (an integer or a SeedSequence).
    """
    mode = SamplingMode(sampling_mode)
    snapshots = _check_snapshots(snapshots, t_end)
    logger = get_general_logger()
    if check_interval is None:
        check_interval = 1 if logger.isEnabledFor(logging.DEBUG) else CHECK_INTERVAL

    m = params.m
    lenient = params.mode is ValidationMode.LENIENT
    needed = m if mode is SamplingMode.DISTINCT else 1
    max_gain = 1 if mode is SamplingMode.DISTINCT else m
    rng = np.random.default_rng(seed)
    try:
        state = SimState.from_params(params)
    except SimulationError as e:
        raise SimulationError(str(e), replica_index) from e

    recorded, arrivals = [], []
    fallback_arrivals = 0
    next_snapshot = 0
    mean_wait = 1.0 / float(params.lam)

    while True:
        next_time = state.clock + rng.exponential(mean_wait)
        while next_snapshot < len(snapshots) and snapshots[next_snapshot] < next_time:
            recorded.append(state.degree_counts.copy())
            arrivals.append(state.arrivals)
            next_snapshot += 1
        if next_time > t_end:
            break

        if state.node_count < needed:
            if not lenient:
                raise SimulationError(f"Only {state.node_count} nodes available for {m} attachments at t={next_time}", replica_index)
            fallback_arrivals += 1
        state.clock = next_time
        apply_arrival(state, m, draw_targets(state, m, rng, mode))

        if state.arrivals % check_interval == 0:
            _check(state, m, max_gain, replica_index)

    _check(state, m, max_gain, replica_index)

    max_degree = max(m, max((int(np.flatnonzero(c)[-1]) for c in recorded if c.any()), default=m))
    counts = np.zeros((len(recorded), max_degree - m + 1))
    for snapshot_index, snapshot_counts in enumerate(recorded):
        upper = min(len(snapshot_counts), max_degree + 1)
        counts[snapshot_index, : upper - m] = snapshot_counts[m:upper]

    flags = []
    if fallback_arrivals:
        flags.append(f"attach_to_all_available: {fallback_arrivals} arrivals found fewer than {needed} nodes")
        logger.warning(f"Simulation used the attach-to-all-available fallback for {fallback_arrivals} arrivals")

    trajectory = DegreeTrajectory(times=snapshots, degrees=np.arange(m, max_degree + 1), counts=counts, source=TrajectorySource.SIMULATION)
    return SimulationRun(trajectory=trajectory, arrivals=np.asarray(arrivals, dtype=np.int64), fallback_arrivals=fallback_arrivals, flags=flags)


def simulate(params: ModelParams, t_end: float, seed, snapshots, sampling_mode: SamplingMode | str = SamplingMode.DISTINCT) -> DegreeTrajectory:
    return run_simulation(params, t_end, seed, snapshots, sampling_mode).trajectory
