"""
Special case m = 1, Λ = 1, N_ℓ(0) = 2δ_{ℓ,1}, D₀ = 2 (two nodes joined by one edge):

    N_k(t) = 4(t+1)/(k(k+1)(k+2)) + (t+1)^{-1/2} Σ_{j=0}^{k-1} [Γ(k)/Γ(k-j)]·(-1)^j(2j+4)/(j!(j+3))·(t+1)^{-j/2}
"""

from fractions import Fraction
import math

from closed_form.closed_form_solution import DOUBLE_DIGITS, ClosedFormError, _context, _to_mpf
from special.special_functions import factorial, gamma_ratio, log10_abs


def krapivsky_redner_coefficients(k: int) -> list[Fraction]:
    """Exact [Γ(k)/Γ(k-j)]·(-1)^j(2j+4)/(j!(j+3)) for j = 0..k-1."""
    return [gamma_ratio(k, k - j) * (-1) ** j * (2 * j + 4) / (factorial(j) * (j + 3)) for j in range(k)]


def nk_krapivsky_redner(k: int, t: float) -> float:
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ClosedFormError(f"Degree must be an integer >= 1, got {k!r}")
    if not t >= 0:
        raise ClosedFormError(f"Time must be >= 0, got {t}")

    coefficients = krapivsky_redner_coefficients(k)
    magnitude = max(max(log10_abs(c) for c in coefficients), 0.0)
    ctx = _context(DOUBLE_DIGITS + 20 + math.ceil(magnitude))

    s = 1 + ctx.mpf(t)
    y = 1 / ctx.sqrt(s)
    total = ctx.mpf(0)
    for coefficient in reversed(coefficients):  # Horner in (t+1)^{-1/2}
        total = total * y + _to_mpf(ctx, coefficient)
    return float(4 * s / (k * (k + 1) * (k + 2)) + total * y)
