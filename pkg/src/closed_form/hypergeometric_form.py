"""
The single-formula solution for the standard initial conditions, written with ₂F₁:

    N_k(t) = (m+1)Γ(k)H_2(t)/Γ(k+3) - A_k(t)/G^m(t) + (G(t)-1)^{k-m}Γ(k)/(G^k(t)Γ(k-m+1))
    A_k(t) = Γ(k)·₂F₁(m+2, m-k; m+3; 1/G(t)) / ((m+2)Γ(m+1)Γ(k-m+1))

It is evaluated exactly as printed. It does not reduce to the series solution (at t = 0 it gives 4/3 instead
of N_1(0) = 1 for m = 1); the discrepancy is reported by the analysis layer, never corrected here.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

from closed_form.closed_form_solution import ClosedFormError
from model.model_params import ModelParams, d_of_t, g
from special.special_functions import gamma_ratio, hyp2f1_terminating


@dataclass(frozen=True)
class HyperFormInputs:
    """A_k, G and the three assembled terms of the printed formula at one (k, t)."""

    k: int
    t: float
    a_k: float
    g_value: float
    leading_term: float
    hypergeometric_term: float  # -A_k/G^m
    binomial_term: float  # (G-1)^{k-m}Γ(k)/(G^kΓ(k-m+1))

    @property
    def total(self) -> float:
        return self.leading_term + self.hypergeometric_term + self.binomial_term


def _check_standard_shape(params: ModelParams):
    m = params.m
    if dict(params.initial_counts) != {m: 1} or params.d0 != 2 * m:
        raise ClosedFormError("The hypergeometric form only holds for standard initial conditions (N_k(0) = δ_{k,m}, D₀ = 2m)")


def hyper_form_inputs(params: ModelParams, k: int, t: float) -> HyperFormInputs:
    _check_standard_shape(params)
    m = params.m
    if isinstance(k, bool) or not isinstance(k, int) or k < m:
        raise ClosedFormError(f"Degree must be an integer >= m={m}, got {k!r}")
    if not t >= 0:
        raise ClosedFormError(f"Time must be >= 0, got {t}")

    g_value = g(params, t)
    # Exact argument: the terminating series alternates and would cancel in floats for large k - m
    x = Fraction(1.0 / g_value)
    f = hyp2f1_terminating(m + 2, m - k, m + 3, x)
    a_k = float(gamma_ratio(k, k - m + 1) * f / ((m + 2) * math.factorial(m)))

    leading = float(Fraction(m + 1, k * (k + 1) * (k + 2))) * d_of_t(params, t)
    hypergeometric = -a_k / g_value**m
    # (G-1)^{k-m}/G^k = (1-1/G)^{k-m}·G^{-m}, 0^0 = 1 at t = 0
    binomial = float(gamma_ratio(k, k - m + 1)) * (1.0 - 1.0 / g_value) ** (k - m) / g_value**m

    return HyperFormInputs(
        k=k,
        t=t,
        a_k=a_k,
        g_value=g_value,
        leading_term=leading,
        hypergeometric_term=hypergeometric,
        binomial_term=binomial,
    )


def nk_hypergeometric(params: ModelParams, k: int, t: float) -> float:
    """N_k(t) from the printed hypergeometric formula."""
    return hyper_form_inputs(params, k, t).total
