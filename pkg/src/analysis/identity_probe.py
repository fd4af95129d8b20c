"""
Numerical probe of the conjectured identity

    Σ_{j>=0} [Γ(j+m)/Γ(j+1)]·₂F₁(m+2, -j; m+3; 1/√(Λt+1)) = (1+Λt)^{m/2}(Γ(m) - m)/((m+2)Γ(m+1))

The probe only reports partial sums next to the right-hand side; it never decides whether the identity holds.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

from analysis.comparison import AnalysisError
from common.custom_logging import get_general_logger
from special.special_functions import gamma_ratio, hyp2f1_terminating, log10_abs

CONVERGENCE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class IdentityProbeResult:
    m: int
    lam: float
    t: float
    lhs: float
    partial_sums: list[float]
    term_log10_magnitudes: list[float]  # log10|term_j|, -inf for vanishing terms
    converged_at: int | None  # first J from which every partial sum stays within tolerance of lhs

    @property
    def converged(self) -> bool:
        return self.converged_at is not None

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "lambda": self.lam,
            "t": self.t,
            "lhs": self.lhs,
            "converged": self.converged,
            "converged_at": self.converged_at,
            "tolerance": CONVERGENCE_TOLERANCE,
            "partial_sums": [{"J": j, "partial_sum": s, "log10_abs_term": mag} for j, (s, mag) in enumerate(zip(self.partial_sums, self.term_log10_magnitudes))],
        }


def identity_lhs(m: int, lam: float, t: float) -> float:
    """(1+Λt)^{m/2}(Γ(m) - m)/((m+2)Γ(m+1))."""
    return (1 + lam * t) ** (m / 2) * (math.factorial(m - 1) - m) / ((m + 2) * math.factorial(m))


def identity_probe(m: int, lam: float, t: float, j_max: int) -> IdentityProbeResult:
    """
    Partial sums for J = 0..j_max. The argument 1/√(Λt+1) is taken as the exact rational value of its double,
    so every term and partial sum is an exact rational; magnitudes are tracked as log10 of those rationals.
    """
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise AnalysisError(f"m must be an integer >= 1, got {m!r}")
    if isinstance(j_max, bool) or not isinstance(j_max, int) or j_max < 1:
        raise AnalysisError(f"j_max must be an integer >= 1, got {j_max!r}")
    if not lam > 0:
        raise AnalysisError(f"lambda must be > 0, got {lam}")
    if not t > 0:
        raise AnalysisError(f"t must be > 0, got {t}")

    lhs = identity_lhs(m, lam, t)
    x = Fraction(1.0 / math.sqrt(lam * t + 1.0))

    partial_sums, magnitudes = [], []
    total = Fraction(0)
    for j in range(j_max + 1):
        term = gamma_ratio(j + m, j + 1) * hyp2f1_terminating(m + 2, -j, m + 3, x)
        total += term
        partial_sums.append(float(total))
        magnitudes.append(log10_abs(term))

    converged_at = None
    for j in range(len(partial_sums) - 1, -1, -1):
        if abs(partial_sums[j] - lhs) > CONVERGENCE_TOLERANCE:
            break
        converged_at = j
    if converged_at == j_max:
        converged_at = None  # a single final hit is not convergence

    get_general_logger().info(
        f"Identity probe m={m}, Λt={lam * t}: lhs {lhs}, last partial sum {partial_sums[-1]}, "
        + ("partial sums settle on lhs" if converged_at is not None else "no convergence to lhs")
    )
    return IdentityProbeResult(
        m=m,
        lam=float(lam),
        t=float(t),
        lhs=lhs,
        partial_sums=partial_sums,
        term_log10_magnitudes=magnitudes,
        converged_at=converged_at,
    )
