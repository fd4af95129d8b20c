from dataclasses import dataclass

import numpy as np
from scipy import stats

from analysis.comparison import AnalysisError
from closed_form.closed_form_solution import ClosedFormSolution, initial_condition_part, nk_stable
from common.custom_logging import get_general_logger
from model.model_params import ModelParams, d_of_t, g, n_of_t

MIN_FIT_POINTS = 8
MIN_FIT_DECADES = 2.0
MIN_FIT_G = 10.0


@dataclass(frozen=True)
class ConservationReport:
    """
    Node and edge sums of the truncated closed form against N(t) and D(t).
    The tail bounds are the leading-term estimates (m+1)H_2/(2k_max²) for nodes and (m+1)H_2/k_max for edges.
    """

    t: float
    k_max: int
    node_defect: float
    edge_defect: float
    node_tail_bound: float
    edge_tail_bound: float
    total_degree: float

    @property
    def relative_edge_defect(self) -> float:
        return self.edge_defect / self.total_degree

    @property
    def tail_bound(self) -> dict:
        return {"nodes": self.node_tail_bound, "edges": self.edge_tail_bound}

    @property
    def within_bounds(self) -> bool:
        return abs(self.node_defect) <= self.node_tail_bound and abs(self.edge_defect) <= self.edge_tail_bound


def conservation_check(sol: ClosedFormSolution, t: float, k_max: int) -> ConservationReport:
    """
    N(t) - Σ_{k<=k_max} N_k(t) and D(t) - Σ_{k<=k_max} k·N_k(t), summed with the cancellation-free form.
    Lenient parameters carry their initial-condition defects into these numbers.
    """
    params = sol.params
    m = params.m
    if k_max < m:
        raise AnalysisError(f"k_max={k_max} is below m={m}")
    degrees = np.arange(m, k_max + 1)
    counts = nk_stable(sol, degrees, t)
    h2 = d_of_t(params, t)
    return ConservationReport(
        t=float(t),
        k_max=int(k_max),
        node_defect=float(n_of_t(params, t) - counts.sum()),
        edge_defect=float(h2 - (degrees * counts).sum()),
        node_tail_bound=(m + 1) * h2 / (2 * k_max**2),
        edge_tail_bound=(m + 1) * h2 / k_max,
        total_degree=h2,
    )


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of log|initial-condition residual| against log t."""

    k: int
    slope: float
    intercept: float
    r_squared: float
    t_min: float
    t_max: float
    points: int
    expected_slope: float

    def within(self, margin: float = 0.05) -> bool:
        return abs(self.slope - self.expected_slope) <= margin


def decay_fit(sol: ClosedFormSolution, k: int, t_grid) -> DecayFit:
    """
    The residual N_k(t) - leading_coeffs[k]·H_2(t) is exactly the initial-condition part of the series,
    which is evaluated directly so the subtraction never loses digits. Its dominant mode decays as t^{-m/2}.
    """
    params = sol.params
    m = params.m
    times = np.asarray(list(t_grid), dtype=float)
    if len(times) < MIN_FIT_POINTS:
        raise AnalysisError(f"Decay fit needs at least {MIN_FIT_POINTS} points, got {len(times)}")
    if times.min() <= 0 or np.log10(times.max() / times.min()) < MIN_FIT_DECADES:
        raise AnalysisError(f"Decay fit needs times spanning at least {MIN_FIT_DECADES:g} decades")
    if g(params, float(times.min())) < MIN_FIT_G:
        raise AnalysisError(f"Decay fit needs G(t) >= {MIN_FIT_G:g} over the whole grid, G({times.min()}) = {g(params, float(times.min()))}")
    if sol.scaled_constants[m] == 0:
        raise AnalysisError("leading constant vanishes; dominant decay order is next nonzero i")

    residuals = np.abs([initial_condition_part(sol, k, float(t)) for t in times])
    if np.any(residuals == 0):
        raise AnalysisError(f"Initial-condition residual of N_{k} vanishes on the grid")

    fit = stats.linregress(np.log(times), np.log(residuals))
    result = DecayFit(
        k=int(k),
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue**2),
        t_min=float(times.min()),
        t_max=float(times.max()),
        points=len(times),
        expected_slope=-m / 2,
    )
    get_general_logger().debug(f"Decay fit N_{k}: slope {result.slope:.4f} (expected {result.expected_slope}), R² {result.r_squared:.6f}")
    return result


@dataclass(frozen=True)
class PoissonTestResult:
    t: float
    expected_mean: float
    observed_mean: float
    statistic: float
    p_value: float
    bins: int
    alpha: float

    @property
    def passed(self) -> bool:
        return self.p_value >= self.alpha


def poisson_arrivals_test(ensemble_result, params: ModelParams, snapshot_index: int = -1, alpha: float = 0.01) -> PoissonTestResult:
    """
    Chi-squared goodness of fit of the per-replica arrival counts against Poisson(Λt).
    Neighbouring counts are pooled until every bin expects at least 5 replicas.
    """
    arrivals = np.asarray(ensemble_result.arrivals)[:, snapshot_index]
    t = float(ensemble_result.times[snapshot_index])
    rate = float(params.lam) * t
    replicas = len(arrivals)

    upper = int(max(arrivals.max(), stats.poisson.ppf(1 - 1e-9, rate)))
    values = np.arange(upper + 1)
    expected = replicas * stats.poisson.pmf(values, rate)
    expected[-1] += replicas * stats.poisson.sf(upper, rate)
    observed = np.bincount(arrivals, minlength=upper + 1)

    pooled_observed, pooled_expected = [], []
    observed_sum = expected_sum = 0.0
    for observed_count, expected_count in zip(observed, expected):
        observed_sum += observed_count
        expected_sum += expected_count
        if expected_sum >= 5:
            pooled_observed.append(observed_sum)
            pooled_expected.append(expected_sum)
            observed_sum = expected_sum = 0.0
    if pooled_expected:
        pooled_observed[-1] += observed_sum
        pooled_expected[-1] += expected_sum
    if len(pooled_expected) < 2:
        raise AnalysisError(f"Too few replicas ({replicas}) for a chi-squared test at t={t}")

    pooled_expected = np.asarray(pooled_expected)
    pooled_expected *= replicas / pooled_expected.sum()  # remove rounding in the pmf sum
    statistic, p_value = stats.chisquare(np.asarray(pooled_observed), pooled_expected)
    return PoissonTestResult(
        t=t,
        expected_mean=rate,
        observed_mean=float(arrivals.mean()),
        statistic=float(statistic),
        p_value=float(p_value),
        bins=len(pooled_expected),
        alpha=alpha,
    )
