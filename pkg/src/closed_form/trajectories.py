import numpy as np

from closed_form.closed_form_solution import ClosedFormSolution, asymptotic_pk, nk_series, nk_stable
from closed_form.hypergeometric_form import nk_hypergeometric
from model.model_params import ModelParams
from model.trajectory import DegreeTrajectory, TrajectorySource
from special.special_functions import ExactRational


def closed_form_trajectory(sol: ClosedFormSolution, t_grid, k_max: int | None = None, method: str = "series") -> DegreeTrajectory:
    """N_k(t) on a (t, k) grid from the series (or its stable regrouping)."""
    k_max = sol.k_max if k_max is None else k_max
    degrees = np.arange(sol.m, k_max + 1)
    times = np.asarray(list(t_grid), dtype=float)
    if method == "stable":
        counts = np.array([nk_stable(sol, degrees, float(t)) for t in times]).reshape(len(times), len(degrees))
    else:
        sol = sol.extended(k_max)
        counts = np.array([[nk_series(sol, int(k), float(t)) for k in degrees] for t in times]).reshape(len(times), len(degrees))
    return DegreeTrajectory(times=times, degrees=degrees, counts=counts, source=TrajectorySource.CLOSED_FORM)


def hypergeometric_trajectory(params: ModelParams, t_grid, k_max: int) -> DegreeTrajectory:
    degrees = np.arange(params.m, k_max + 1)
    times = np.asarray(list(t_grid), dtype=float)
    counts = np.array([[nk_hypergeometric(params, int(k), float(t)) for k in degrees] for t in times]).reshape(len(times), len(degrees))
    return DegreeTrajectory(times=times, degrees=degrees, counts=counts, source=TrajectorySource.HYPERGEOMETRIC)


def constants_table(sol: ClosedFormSolution) -> list[dict]:
    """Exact K_i and leading coefficients per degree, ready for JSON export."""
    return [
        {
            "i": i,
            "scaled_constant": sol.scaled_constants[i],
            "leading_coefficient": sol.leading_coeffs[i],
        }
        for i in range(sol.m, sol.k_max + 1)
    ]


def asymptotic_column(m: int, degrees) -> dict[int, ExactRational]:
    return {int(k): asymptotic_pk(m, int(k)) for k in degrees}
