"""
Exact combinatorial arithmetic and the terminating Gauss hypergeometric function.

Every t-independent constant of the closed forms is built from these in exact rationals,
the alternating sums involved lose all significant digits in floating point by degree ~30.
"""

from fractions import Fraction
import math

ExactRational = Fraction


class SpecialFunctionError(ValueError):
    pass


def _require_int(value, name: str):
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecialFunctionError(f"{name} must be an integer, got {value!r}")


def factorial(n: int) -> ExactRational:
    _require_int(n, "n")
    if n < 0:
        raise SpecialFunctionError(f"factorial is undefined for negative n={n}")
    return ExactRational(math.factorial(n))


def binomial(n: int, k: int) -> ExactRational:
    """C(n, k), zero when k < 0 or k > n."""
    _require_int(n, "n")
    _require_int(k, "k")
    if n < 0:
        raise SpecialFunctionError(f"binomial expects n >= 0, got n={n}")
    if k < 0 or k > n:
        return ExactRational(0)
    return ExactRational(math.comb(n, k))


def pochhammer(a: int, n: int) -> ExactRational:
    """Rising factorial (a)_n = a(a+1)...(a+n-1), (a)_0 = 1."""
    _require_int(a, "a")
    _require_int(n, "n")
    if n < 0:
        raise SpecialFunctionError(f"pochhammer expects n >= 0, got n={n}")
    return ExactRational(math.prod(range(a, a + n)))


def gamma_ratio(a: int, b: int) -> ExactRational:
    """Γ(a)/Γ(b) for positive integers."""
    _require_int(a, "a")
    _require_int(b, "b")
    if a < 1 or b < 1:
        raise SpecialFunctionError(f"gamma_ratio needs positive integer arguments, got ({a}, {b})")
    return ExactRational(math.factorial(a - 1), math.factorial(b - 1))


def hyp2f1_coefficients(a: int, b: int, c: int) -> list[ExactRational]:
    """Exact series coefficients (a)_n (b)_n / ((c)_n n!) for n = 0..|b|."""
    _require_int(a, "a")
    _require_int(b, "b")
    _require_int(c, "c")
    if b > 0:
        raise SpecialFunctionError(f"Only terminating series are supported (b <= 0), got b={b}")
    if c <= 0:
        raise SpecialFunctionError(f"c must be positive, got c={c}")

    coefficients = [ExactRational(1)]
    term = ExactRational(1)
    for n in range(-b):
        # Ratio of consecutive terms: (a+n)(b+n) / ((c+n)(n+1))
        term = term * (a + n) * (b + n) / ((c + n) * (n + 1))
        coefficients.append(term)
    return coefficients


def hyp2f1_terminating(a: int, b: int, c: int, x):
    """
    ₂F₁(a, b; c; x) for b <= 0, a polynomial of degree |b| in x.

    The polynomial is always summed in exact rationals. An exact x (Fraction or int) gives an exact
    result; a float x is taken as the rational value of its double and the sum is rounded once.
    """
    coefficients = hyp2f1_coefficients(a, b, c)

    exact_argument = isinstance(x, (Fraction, int)) and not isinstance(x, bool)
    if not exact_argument:
        x = float(x)
        if not math.isfinite(x):
            raise SpecialFunctionError(f"x must be finite, got {x}")

    argument = ExactRational(x)
    total = ExactRational(0)
    for coefficient in reversed(coefficients):  # Horner
        total = total * argument + coefficient
    return total if exact_argument else float(total)


def chu_vandermonde(a: int, j: int, c: int) -> ExactRational:
    """₂F₁(a, -j; c; 1) = (c-a)_j / (c)_j."""
    _require_int(j, "j")
    if j < 0:
        raise SpecialFunctionError(f"j must be >= 0, got {j}")
    denominator = pochhammer(c, j)
    if denominator == 0:
        raise SpecialFunctionError(f"(c)_j vanishes for c={c}, j={j}")
    return pochhammer(c - a, j) / denominator


def log10_abs(value: ExactRational) -> float:
    """log10|value| of an exact rational of any size, -inf for zero."""
    value = ExactRational(value)
    if value == 0:
        return -math.inf
    return math.log10(abs(value.numerator)) - math.log10(value.denominator)
