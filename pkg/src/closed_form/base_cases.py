"""
Hand-derived solutions for the three lowest degrees, evaluated literally as printed.
They exist as an independent cross-check of the general series.
"""

from fractions import Fraction

from closed_form.closed_form_solution import ClosedFormError, ClosedFormSolution, _context, _h2, _inverse_g, _to_mpf, build_constants
from model.model_params import ModelParams

BASE_CASE_DIGITS = 40


def base_case_constants(params: ModelParams) -> tuple[Fraction, Fraction, Fraction]:
    """
    C_m, C_{m+1}, C_{m+2} from their own hand-derived formulas, scaled by H_i(0):
        C_m     = (N_m(0) - H_2(0)/(m(m+2)))·H_m(0)
        C_{m+1} = (N_{m+1}(0) - m·N_m(0) + H_2(0)/(m+3))·H_{m+1}(0)
        C_{m+2} = (N_{m+2}(0) - (m+1)N_{m+1}(0) + m(m+1)/2·N_m(0) - (m+1)H_2(0)/(2(m+4)))·H_{m+2}(0)
    """
    m = params.m
    d0 = params.d0
    n_m, n_m1, n_m2 = (params.initial_count(m + j) for j in range(3))
    k_m = n_m - d0 / (m * (m + 2))
    k_m1 = n_m1 - m * n_m + d0 / (m + 3)
    k_m2 = n_m2 - (m + 1) * n_m1 + Fraction(m * (m + 1), 2) * n_m - (m + 1) * d0 / (2 * (m + 4))
    return k_m, k_m1, k_m2


def base_case(params: ModelParams, j: int, t: float, sol: ClosedFormSolution | None = None) -> float:
    """
    N_{m+j}(t) for j in {0, 1, 2}:
        N_m     = H_2/(m(m+2)) + C_m/H_m
        N_{m+1} = H_2/((m+2)(m+3)) + m·C_m/H_m + C_{m+1}/H_{m+1}
        N_{m+2} = (m+1)H_2/((m+4)(m+3)(m+2)) + (m+1)m·C_m/(2H_m) + (m+1)C_{m+1}/H_{m+1} + C_{m+2}/H_{m+2}
    """
    if j not in (0, 1, 2):
        raise ClosedFormError(f"Base cases exist for j in {{0, 1, 2}}, got {j!r}")
    if not t >= 0:
        raise ClosedFormError(f"Time must be >= 0, got {t}")

    m = params.m
    if sol is None or sol.k_max < m + 2:
        sol = build_constants(params, m + 2)
    k_m, k_m1, k_m2 = (sol.scaled_constants[m + i] for i in range(3))

    ctx = _context(BASE_CASE_DIGITS)
    x = _inverse_g(ctx, params, t)
    h2 = _h2(ctx, params, t)

    def mode(constant: Fraction, i: int):
        # C_i/H_i(t) = K_i·G(t)^{-i}
        return _to_mpf(ctx, constant) * x**i

    if j == 0:
        value = h2 / (m * (m + 2)) + mode(k_m, m)
    elif j == 1:
        value = h2 / ((m + 2) * (m + 3)) + m * mode(k_m, m) + mode(k_m1, m + 1)
    else:
        value = (
            (m + 1) * h2 / ((m + 4) * (m + 3) * (m + 2))
            + ctx.mpf((m + 1) * m) / 2 * mode(k_m, m)
            + (m + 1) * mode(k_m1, m + 1)
            + mode(k_m2, m + 2)
        )
    return float(value)
