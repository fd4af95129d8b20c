from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
import math

import numpy as np

from common.custom_logging import get_custom_logger
from common.signal import Signal
from common.util import resolve_thread_count
from model.model_params import ModelParams
from model.trajectory import DegreeTrajectory, TrajectorySource
from simulation.growth_simulator import SamplingMode, SimulationError, SimulationRun, run_simulation


def replica_seed(base_seed: int, replica_index: int) -> np.random.SeedSequence:
    """Independent stream per replica, fixed by (base_seed, replica_index) alone."""
    return np.random.SeedSequence(base_seed, spawn_key=(replica_index,))


@dataclass(frozen=True)
class EnsembleResult:
    """
    Per-(snapshot, degree) sample mean and standard deviation over independent replicas.
    replica_totals[r, s] is Σ_k n_k of replica r at snapshot s; arrivals[r, s] its arrivals so far.
    """

    times: np.ndarray
    degrees: np.ndarray
    means: np.ndarray
    stddevs: np.ndarray
    replicas: int
    base_seed: int
    sampling_mode: SamplingMode
    replica_totals: np.ndarray
    arrivals: np.ndarray
    fallback_replicas: tuple[int, ...] = ()
    flags: tuple[str, ...] = field(default=())

    @property
    def stderrs(self) -> np.ndarray:
        return self.stddevs / math.sqrt(self.replicas)

    def total_mean(self, snapshot_index: int) -> float:
        return float(self.replica_totals[:, snapshot_index].mean())

    def total_stderr(self, snapshot_index: int) -> float:
        if self.replicas < 2:
            return 0.0
        return float(self.replica_totals[:, snapshot_index].std(ddof=1) / math.sqrt(self.replicas))

    def mean_trajectory(self) -> DegreeTrajectory:
        return DegreeTrajectory(times=self.times, degrees=self.degrees, counts=self.means, source=TrajectorySource.SIMULATION)

    def to_rows(self) -> list[dict]:
        """Rows (snapshot, t, k, mean, stddev, stderr) in snapshot-major order."""
        stderrs = self.stderrs
        rows = []
        for snapshot_index, t in enumerate(self.times):
            for degree_index, k in enumerate(self.degrees):
                rows.append(
                    {
                        "snapshot": snapshot_index,
                        "t": float(t),
                        "k": int(k),
                        "mean": float(self.means[snapshot_index, degree_index]),
                        "stddev": float(self.stddevs[snapshot_index, degree_index]),
                        "stderr": float(stderrs[snapshot_index, degree_index]),
                    }
                )
        return rows

    def manifest(self, params: ModelParams) -> dict:
        return {
            "params": params.to_dict(),
            "base_seed": self.base_seed,
            "replicas": self.replicas,
            "sampling_mode": self.sampling_mode.value,
            "snapshots": self.times,
            "fallback_replicas": list(self.fallback_replicas),
            "flags": list(self.flags),
        }

    def to_dict(self) -> dict:
        return {
            "times": self.times,
            "degrees": self.degrees,
            "means": self.means,
            "stddevs": self.stddevs,
            "stderrs": self.stderrs,
            "replicas": self.replicas,
            "base_seed": self.base_seed,
            "sampling_mode": self.sampling_mode.value,
            "arrivals": self.arrivals,
            "fallback_replicas": list(self.fallback_replicas),
            "flags": list(self.flags),
        }


def _aggregate(runs: list[SimulationRun], params: ModelParams, base_seed: int, mode: SamplingMode) -> EnsembleResult:
    m = params.m
    max_degree = max(int(run.trajectory.degrees[-1]) for run in runs)
    times = runs[0].trajectory.times
    stacked = np.zeros((len(runs), len(times), max_degree - m + 1))
    for replica_index, run in enumerate(runs):
        width = run.trajectory.counts.shape[1]
        stacked[replica_index, :, :width] = run.trajectory.counts

    stddevs = stacked.std(axis=0, ddof=1) if len(runs) > 1 else np.zeros(stacked.shape[1:])
    fallback_replicas = tuple(index for index, run in enumerate(runs) if run.fallback_arrivals)
    flags = tuple(sorted({flag.split(":")[0] for run in runs for flag in run.flags}))
    return EnsembleResult(
        times=times,
        degrees=np.arange(m, max_degree + 1),
        means=stacked.mean(axis=0),
        stddevs=stddevs,
        replicas=len(runs),
        base_seed=base_seed,
        sampling_mode=mode,
        replica_totals=stacked.sum(axis=2),
        arrivals=np.stack([run.arrivals for run in runs]),
        fallback_replicas=fallback_replicas,
        flags=flags,
    )


def ensemble(
    params: ModelParams,
    t_end: float,
    snapshots,
    replicas: int,
    base_seed: int,
    threads: int | None = None,
    sampling_mode: SamplingMode | str = SamplingMode.DISTINCT,
    progress: Signal | None = None,
) -> EnsembleResult:
    """
    Runs `replicas` independent simulations, concurrently when threads > 1.
    Results are stored by replica index, so the output does not depend on completion order.
    `progress`, if given, is a Signal(int, int) triggered with (finished, total).
    """
    logger = get_custom_logger("simulation/ensemble")
    if isinstance(replicas, bool) or not isinstance(replicas, int) or replicas < 1:
        raise SimulationError(f"replicas must be an integer >= 1, got {replicas!r}")
    if isinstance(base_seed, bool) or not isinstance(base_seed, int) or not 0 <= base_seed < 2**64:
        raise SimulationError(f"base_seed must be an unsigned 64-bit integer, got {base_seed!r}")
    mode = SamplingMode(sampling_mode)
    snapshots = list(snapshots)
    threads = resolve_thread_count(threads)

    def run_replica(replica_index: int) -> SimulationRun:
        return run_simulation(params, t_end, replica_seed(base_seed, replica_index), snapshots, mode, replica_index=replica_index)

    logger.info(f"Running {replicas} replicas to t={t_end} on {threads} threads (base seed {base_seed}, {mode.value})")
    runs: list[SimulationRun | None] = [None] * replicas
    report_every = max(1, replicas // 10)

    with ThreadPoolExecutor(max_workers=threads) as executor:
        futures = {executor.submit(run_replica, index): index for index in range(replicas)}
        finished = 0
        for future in as_completed(futures):
            index = futures[future]
            try:
                runs[index] = future.result()
            except SimulationError:
                for pending in futures:
                    pending.cancel()
                raise
            finished += 1
            if progress is not None:
                progress.trigger(finished, replicas)
            if finished % report_every == 0:
                logger.debug(f"{finished}/{replicas} replicas finished")

    result = _aggregate(runs, params, base_seed, mode)
    if result.fallback_replicas:
        logger.warning(f"{len(result.fallback_replicas)} replicas used the attach-to-all-available fallback")
    return result
