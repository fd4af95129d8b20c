from dataclasses import dataclass
from enum import Enum

import numpy as np

from model.model_params import ModelParams, n_of_t


class TrajectorySource(Enum):
    CLOSED_FORM = "closed_form"
    ODE = "ode"
    SIMULATION = "simulation"
    HYPERGEOMETRIC = "hypergeometric"


@dataclass(frozen=True)
class DegreeTrajectory:
    """
    Degree-class counts on a time grid: counts[snapshot, degree - degrees[0]].
    `leaked` holds, per snapshot, the node mass that left a truncated system (ODE only).
    """

    times: np.ndarray
    degrees: np.ndarray
    counts: np.ndarray
    source: TrajectorySource
    leaked: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "degrees", np.asarray(self.degrees, dtype=np.int64))
        object.__setattr__(self, "counts", np.asarray(self.counts, dtype=float))
        object.__setattr__(self, "source", TrajectorySource(self.source))
        if self.counts.shape != (len(self.times), len(self.degrees)):
            raise ValueError(f"counts has shape {self.counts.shape}, expected {(len(self.times), len(self.degrees))}")
        if self.leaked is not None:
            object.__setattr__(self, "leaked", np.asarray(self.leaked, dtype=float))
            if self.leaked.shape != self.times.shape:
                raise ValueError("leaked must hold one value per snapshot")

    def count(self, snapshot_index: int, k: int) -> float:
        return float(self.counts[snapshot_index, k - int(self.degrees[0])])

    def totals(self) -> np.ndarray:
        """Σ_k N_k per snapshot."""
        return self.counts.sum(axis=1)

    def to_rows(self, params: ModelParams) -> list[dict]:
        """Rows (k, t, N_k, p_k, source) in snapshot-major order."""
        rows = []
        for snapshot_index, t in enumerate(self.times):
            population = n_of_t(params, float(t))
            for degree_index, k in enumerate(self.degrees):
                value = float(self.counts[snapshot_index, degree_index])
                rows.append({"k": int(k), "t": float(t), "N_k": value, "p_k": value / population, "source": self.source.value})
        return rows

    def to_dict(self) -> dict:
        result = {
            "source": self.source.value,
            "times": self.times,
            "degrees": self.degrees,
            "counts": self.counts,
        }
        if self.leaked is not None:
            result["leaked"] = self.leaked
        return result
