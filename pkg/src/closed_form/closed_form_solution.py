"""
General series solution of the rate equations with its exact constants of integration.

    N_k(t) = (m+1)Γ(k)H_2(t)/Γ(k+3) + Σ_{i=m}^{k} C(k-1, i-1)·C_i/H_i(t)

C_i/H_i(t) is evaluated as K_i·G(t)^{-i} with K_i = C_i/H_i(0) exact, every G^{-i} <= 1 so nothing overflows.
The binomially weighted sum alternates in sign; it is summed in mpmath with enough digits to absorb the
cancellation, estimated from the exact weights.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math
import threading

import mpmath
import numpy as np
from scipy import special, stats

from common.custom_logging import get_general_logger
import common.settings_manager as settings_manager
from model.model_params import ModelParams, d_of_t, g, n_of_t
from special.special_functions import ExactRational, binomial, factorial, log10_abs

# Digits needed for a double-precision answer once the cancellation is absorbed
DOUBLE_DIGITS = 17
# Bound on the extra digits spent on values that decay below any useful magnitude (t close to 0, large k)
MAX_DECAY_DIGITS = 2000

_thread_contexts = threading.local()


class ClosedFormError(ValueError):
    pass


def _context(dps: int) -> mpmath.ctx_mp.MPContext:
    """A private mpmath context per thread, mpmath's global context is not thread-safe."""
    ctx = getattr(_thread_contexts, "ctx", None)
    if ctx is None:
        ctx = mpmath.MPContext()
        _thread_contexts.ctx = ctx
    ctx.dps = dps
    return ctx


def _to_mpf(ctx, value: Fraction):
    return ctx.mpf(value.numerator) / value.denominator


def _check_time(t: float):
    if not t >= 0:
        raise ClosedFormError(f"Time must be >= 0, got {t}")


def scaled_constant(params: ModelParams, i: int) -> ExactRational:
    """
    K_i = C_i/H_i(0) = (-1)^{i-m+1} Γ(i) D₀ / (Γ(i-m+1) Γ(m+1) (i+2)) + Σ_{ℓ=m}^{i} C(i-1, ℓ-1) (-1)^{i-ℓ} N_ℓ(0)
    """
    m = params.m
    sign = -1 if (i - m) % 2 == 0 else 1
    gamma_term = sign * factorial(i - 1) * params.d0 / (factorial(i - m) * factorial(m) * (i + 2))
    initial_term = ExactRational(0)
    for degree, count in params.initial_counts.items():
        if degree > i:
            break
        initial_term += binomial(i - 1, degree - 1) * (1 if (i - degree) % 2 == 0 else -1) * count
    return gamma_term + initial_term


def leading_coefficient(m: int, k: int) -> ExactRational:
    """(m+1)Γ(k)/Γ(k+3) = (m+1)/(k(k+1)(k+2)), the coefficient of H_2(t)."""
    return ExactRational(m + 1, k * (k + 1) * (k + 2))


@dataclass(frozen=True)
class ClosedFormSolution:
    """
    Precomputed exact constants for degrees m..k_max.
    Immutable once built; the weight cache only memoizes derived exact values.
    """

    params: ModelParams
    k_max: int
    scaled_constants: dict[int, ExactRational]
    leading_coeffs: dict[int, ExactRational]
    _weights: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def m(self) -> int:
        return self.params.m

    def constant_of_integration(self, i: int, ctx=None):
        """C_i = K_i·D₀^{i/2} (irrational in general, returned as mpf)."""
        i = self._check_degree(i)
        ctx = ctx or _context(DOUBLE_DIGITS + 10)
        return _to_mpf(ctx, self.scaled_constants[i]) * ctx.power(_to_mpf(ctx, self.params.d0), ctx.mpf(i) / 2)

    def extended(self, k_max: int) -> "ClosedFormSolution":
        """Same solution with constants up to a larger k_max, reusing every constant already computed."""
        if k_max <= self.k_max:
            return self
        return build_constants(self.params, k_max, previous=self)

    def _check_degree(self, k: int) -> int:
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
            raise ClosedFormError(f"Degree must be an integer, got {k!r}")
        if not self.m <= k <= self.k_max:
            raise ClosedFormError(f"Degree {k} outside the precomputed range {self.m}..{self.k_max}")
        return int(k)

    def mode_weights(self, k: int) -> list[ExactRational]:
        """Exact C(k-1, i-1)·K_i for i = m..k."""
        weights = self._weights.get(k)
        if weights is None:
            weights = [binomial(k - 1, i - 1) * self.scaled_constants[i] for i in range(self.m, k + 1)]
            self._weights[k] = weights
        return weights

    def working_digits(self, k: int, t: float | None = None, guard_digits: int | None = None) -> int:
        """
        Decimal digits for a double-precision N_k(t): the largest exact weight sets the cancellation, and
        for t > 0 the value itself is as small as (1 - 1/G)^k, which costs about -k·log10(1 - 1/G) more.
        """
        if guard_digits is None:
            guard_digits = settings_manager.settings.series_guard_digits
        magnitude = max((log10_abs(w) for w in self.mode_weights(k)), default=0.0)
        magnitude = max(magnitude, log10_abs(self.leading_coeffs[k] * self.params.d0), 0.0)
        digits = DOUBLE_DIGITS + guard_digits + math.ceil(magnitude) + len(str(k))
        if t:
            one_minus_inverse_g = -math.expm1(-math.log(g(self.params, t)))
            if one_minus_inverse_g > 0:
                digits += min(math.ceil(-k * math.log10(one_minus_inverse_g)), MAX_DECAY_DIGITS)
            else:
                digits += MAX_DECAY_DIGITS
        return digits


def build_constants(params: ModelParams, k_max: int, previous: ClosedFormSolution | None = None) -> ClosedFormSolution:
    """Exact K_i and leading coefficients for i = m..k_max."""
    if isinstance(k_max, bool) or not isinstance(k_max, int):
        raise ClosedFormError(f"k_max must be an integer, got {k_max!r}")
    if k_max < params.m:
        raise ClosedFormError(f"k_max={k_max} is below m={params.m}")

    scaled_constants: dict[int, ExactRational] = {}
    leading_coeffs: dict[int, ExactRational] = {}
    if previous is not None and previous.params == params:
        scaled_constants.update(previous.scaled_constants)
        leading_coeffs.update(previous.leading_coeffs)

    start = max(scaled_constants, default=params.m - 1) + 1
    for i in range(start, k_max + 1):
        scaled_constants[i] = scaled_constant(params, i)
        leading_coeffs[i] = leading_coefficient(params.m, i)

    get_general_logger().debug(f"Closed-form constants ready for degrees {params.m}..{k_max} (computed {max(0, k_max - start + 1)} new)")
    return ClosedFormSolution(params=params, k_max=k_max, scaled_constants=scaled_constants, leading_coeffs=leading_coeffs)


def _inverse_g(ctx, params: ModelParams, t: float):
    """1/G(t) at the context precision, with Λ, m, D₀ exact."""
    growth = 2 * params.lam * params.m / params.d0
    return 1 / ctx.sqrt(1 + _to_mpf(ctx, growth) * ctx.mpf(t))


def _h2(ctx, params: ModelParams, t: float):
    return _to_mpf(ctx, 2 * params.lam * params.m) * ctx.mpf(t) + _to_mpf(ctx, params.d0)


def _mode_sum(ctx, weights: list[ExactRational], m: int, x, derivative: bool = False):
    """Σ w_i x^i (or Σ i·w_i x^i) over i = m..m+len(weights)-1, Horner in x."""
    total = ctx.mpf(0)
    for offset in range(len(weights) - 1, -1, -1):
        weight = _to_mpf(ctx, weights[offset])
        if derivative:
            weight *= m + offset
        total = total * x + weight
    return total * x**m


def initial_condition_part_mp(sol: ClosedFormSolution, k: int, t: float, ctx):
    return _mode_sum(ctx, sol.mode_weights(k), sol.m, _inverse_g(ctx, sol.params, t))


def nk_series_mp(sol: ClosedFormSolution, k: int, t: float, ctx):
    leading = _to_mpf(ctx, sol.leading_coeffs[k]) * _h2(ctx, sol.params, t)
    return leading + initial_condition_part_mp(sol, k, t, ctx)


def nk_series(sol: ClosedFormSolution, k: int, t: float) -> float:
    """N_k(t) from the general series."""
    k = sol._check_degree(k)
    _check_time(t)
    ctx = _context(sol.working_digits(k, t))
    return float(nk_series_mp(sol, k, t, ctx))


def initial_condition_part(sol: ClosedFormSolution, k: int, t: float) -> float:
    """Σ C(k-1, i-1)·K_i·G(t)^{-i}, the decaying initial-condition modes alone."""
    k = sol._check_degree(k)
    _check_time(t)
    ctx = _context(sol.working_digits(k, t))
    return float(initial_condition_part_mp(sol, k, t, ctx))


def nk_series_derivative_mp(sol: ClosedFormSolution, k: int, t: float, ctx):
    # d/dt G^{-i} = -i·G^{-i}·Λm/H_2(t)
    lam_m = _to_mpf(ctx, sol.params.lam * sol.m)
    x = _inverse_g(ctx, sol.params, t)
    leading = 2 * lam_m * _to_mpf(ctx, sol.leading_coeffs[k])
    return leading - lam_m / _h2(ctx, sol.params, t) * _mode_sum(ctx, sol.mode_weights(k), sol.m, x, derivative=True)


def nk_series_derivative(sol: ClosedFormSolution, k: int, t: float) -> float:
    """Term-wise time derivative dN_k/dt of the series."""
    k = sol._check_degree(k)
    _check_time(t)
    ctx = _context(sol.working_digits(k, t))
    return float(nk_series_derivative_mp(sol, k, t, ctx))


def rate_equation_residual(sol: ClosedFormSolution, k: int, t: float) -> tuple[float, float]:
    """
    (lhs, rhs) of the rate equation for degree k at time t:
    lhs = d/dt of the series, rhs = Λδ_{k,m} + Λm[(k-1)N_{k-1}(1-δ_{k,m}) - kN_k]/D(t).
    """
    k = sol._check_degree(k)
    _check_time(t)
    ctx = _context(sol.working_digits(k, t))
    m = sol.m
    lam = _to_mpf(ctx, sol.params.lam)
    d = _h2(ctx, sol.params, t)
    rhs = -lam * m * k * nk_series_mp(sol, k, t, ctx) / d
    if k == m:
        rhs += lam
    else:
        rhs += lam * m * (k - 1) * nk_series_mp(sol, k - 1, t, ctx) / d
    return float(nk_series_derivative_mp(sol, k, t, ctx)), float(rhs)


def nk_series_exact(sol: ClosedFormSolution, k: int, g_value: Fraction | int = 1) -> ExactRational:
    """
    The series in exact rationals for a rational value of G(t) (G = 1 at t = 0).
    H_2(t) = D₀·G² and G^{-i} stay exact, so the initial conditions are recovered with no rounding at all.
    """
    k = sol._check_degree(k)
    g_value = Fraction(g_value)
    if g_value < 1:
        raise ClosedFormError(f"G(t) >= 1 for every t >= 0, got {g_value}")
    x = 1 / g_value
    total = sol.leading_coeffs[k] * sol.params.d0 * g_value**2
    for offset, weight in enumerate(sol.mode_weights(k)):
        total += weight * x ** (sol.m + offset)
    return total


def time_for_g(params: ModelParams, g_value: Fraction | int) -> Fraction:
    """The time at which G(t) takes the given value: t = (G² - 1)·D₀/(2Λm)."""
    g_value = Fraction(g_value)
    return (g_value**2 - 1) * params.d0 / (2 * params.lam * params.m)


def nk_stable(sol: ClosedFormSolution, ks, t: float) -> np.ndarray:
    """
    Cancellation-free regrouping of the series, vectorized over degrees:

        N_k(t) = (m+1)H_2(t)/(k(k+1)(k+2)) · Q(m+2, k-m+1, 1/G) + Σ_ℓ N_ℓ(0)·C(k-1, ℓ-1)·G^{-ℓ}(1 - 1/G)^{k-ℓ}

    Q is the regularized upper incomplete beta function. Every term is non-negative,
    so double precision holds for any k; no precomputed constants are needed beyond the parameters.
    """
    _check_time(t)
    params = sol.params
    m = params.m
    ks = np.atleast_1d(np.asarray(ks, dtype=np.int64))
    if np.any(ks < m):
        raise ClosedFormError(f"Degrees must be >= m={m}")

    x = 1.0 / math.sqrt(2.0 * float(params.lam) * m * t / float(params.d0) + 1.0)
    kf = ks.astype(float)
    leading = (m + 1) * d_of_t(params, t) / (kf * (kf + 1.0) * (kf + 2.0))
    values = leading * special.betaincc(m + 2, kf - m + 1.0, x)

    for degree, count in params.initial_counts.items():
        # C(k-1, ℓ-1)·x^{ℓ-1}(1-x)^{k-ℓ} is the binomial pmf, zero for k < ℓ
        values = values + float(count) * x * stats.binom.pmf(degree - 1, ks - 1, x)
    return values


def degree_distribution(sol: ClosedFormSolution, t: float, k_max: int | None = None, method: str = "series") -> np.ndarray:
    """p_k(t) = N_k(t)/N(t) for k = m..k_max."""
    k_max = sol.k_max if k_max is None else k_max
    if method == "series":
        if k_max > sol.k_max:
            sol = sol.extended(k_max)
        counts = np.array([nk_series(sol, k, t) for k in range(sol.m, k_max + 1)])
    elif method == "stable":
        counts = nk_stable(sol, np.arange(sol.m, k_max + 1), t)
    else:
        raise ClosedFormError(f"Unknown evaluation method {method!r}, expected 'series' or 'stable'")
    return counts / n_of_t(sol.params, t)


def asymptotic_pk(m: int, k: int) -> ExactRational:
    """t → ∞ limit of p_k: 2m(m+1)/(k(k+1)(k+2)), since H_2(t)/N(t) → 2m."""
    if k < m:
        raise ClosedFormError(f"Degree {k} is below m={m}")
    return ExactRational(2 * m * (m + 1), k * (k + 1) * (k + 2))


@dataclass(frozen=True)
class RecursionStep:
    """Exact coefficients of one degree's solution: h2_coefficient·H_2 + Σ mode_coefficients[i]·C_i/H_i."""

    k: int
    h2_coefficient: ExactRational
    mode_coefficients: dict[int, ExactRational]


def recursive_coefficients(m: int, k_max: int) -> list[RecursionStep]:
    """
    Re-derives each degree's coefficients from the previous degree through the integrating-factor recursion
        N_{k+1} = [Λm ∫ (k/H_2) N_k H_{k+1} dt + C_{k+1}] / H_{k+1}
    using ∫H_n dt = H_{n+2}/(Λm(n+2)): a·H_2 maps to k·a/(k+3)·H_2 and b·C_i/H_i to k·b/(k+1-i)·C_i/H_i.
    """
    if k_max < m:
        raise ClosedFormError(f"k_max={k_max} is below m={m}")

    steps = [RecursionStep(k=m, h2_coefficient=ExactRational(1, m * (m + 2)), mode_coefficients={m: ExactRational(1)})]
    for k in range(m, k_max):
        previous = steps[-1]
        modes = {i: k * b / (k + 1 - i) for i, b in previous.mode_coefficients.items()}
        modes[k + 1] = ExactRational(1)
        steps.append(RecursionStep(k=k + 1, h2_coefficient=k * previous.h2_coefficient / (k + 3), mode_coefficients=modes))
    return steps
