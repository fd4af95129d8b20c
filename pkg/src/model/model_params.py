"""
Parameterization of one growth-model instance and the elementary scalars every other module uses:
D(t) = 2Λmt + D₀ (twice the edge count), N(t) = Λt + N₀, H_k(t) = D(t)^{k/2} and G(t) = H_1(t)/H_1(0).
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
import math
from types import MappingProxyType
from typing import Mapping

from common.custom_logging import get_general_logger


class ModelParamsError(ValueError):
    pass


class ValidationMode(Enum):
    STRICT = "strict"
    LENIENT = "lenient"


class PresetIC(Enum):
    STANDARD = "standard"
    KRAPIVSKY_REDNER = "krapivsky_redner"
    CUSTOM = "custom"


def to_exact(value, name: str) -> Fraction:
    """Exact rational for a JSON number; floats are read through their shortest decimal repr (0.1 -> 1/10)."""
    if isinstance(value, bool):
        raise ModelParamsError(f"{name} must be a number, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ModelParamsError(f"{name} must be finite, got {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError:
            pass
    raise ModelParamsError(f"{name} must be a number, got {value!r}")


@dataclass(frozen=True)
class ConsistencyReport:
    node_sum: Fraction
    edge_sum: Fraction
    node_defect: Fraction  # n0 - Σ N_ℓ(0)
    edge_defect: Fraction  # d0 - Σ ℓ·N_ℓ(0)

    @property
    def consistent(self) -> bool:
        return self.node_defect == 0 and self.edge_defect == 0

    def describe(self) -> list[str]:
        messages = []
        if self.node_defect != 0:
            messages.append(f"sum of initial counts is {self.node_sum} but n0 is {self.node_sum + self.node_defect}")
        if self.edge_defect != 0:
            messages.append(f"sum of degree x count is {self.edge_sum} but d0 is {self.edge_sum + self.edge_defect}")
        return messages


@dataclass(frozen=True)
class ModelParams:
    """
    Immutable parameters (Λ, m, D₀, N₀, {N_ℓ(0)}).
    D₀ and N₀ are stored independently of the initial counts so that inconsistent presets stay representable;
    strict mode rejects such inconsistencies, lenient mode keeps them as recorded defects.
    """

    lam: Fraction
    m: int
    d0: Fraction
    n0: Fraction
    initial_counts: Mapping[int, Fraction]
    mode: ValidationMode = ValidationMode.STRICT
    preset: PresetIC = PresetIC.CUSTOM
    defects: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lam", to_exact(self.lam, "lambda"))
        object.__setattr__(self, "d0", to_exact(self.d0, "d0"))
        object.__setattr__(self, "n0", to_exact(self.n0, "n0"))
        object.__setattr__(self, "mode", ValidationMode(self.mode))
        object.__setattr__(self, "preset", PresetIC(self.preset))

        if isinstance(self.m, bool) or not isinstance(self.m, int) or self.m < 1:
            raise ModelParamsError(f"m must be an integer >= 1, got {self.m!r}")
        if self.lam <= 0:
            raise ModelParamsError(f"lambda must be > 0, got {self.lam}")
        if self.d0 <= 0:
            raise ModelParamsError(f"d0 must be > 0, got {self.d0}")
        if self.n0 <= 0:
            raise ModelParamsError(f"n0 must be > 0, got {self.n0}")

        counts = {}
        for degree, count in dict(self.initial_counts).items():
            if isinstance(degree, bool) or not isinstance(degree, int):
                raise ModelParamsError(f"initial_counts keys must be integer degrees, got {degree!r}")
            if degree < self.m:
                raise ModelParamsError(f"initial_counts degree {degree} is below m={self.m}")
            exact_count = to_exact(count, f"initial_counts[{degree}]")
            if exact_count < 0:
                raise ModelParamsError(f"initial_counts[{degree}] must be >= 0, got {exact_count}")
            if exact_count != 0:
                counts[degree] = exact_count
        object.__setattr__(self, "initial_counts", MappingProxyType(dict(sorted(counts.items()))))

        report = self.consistency_report()
        if not report.consistent:
            if self.mode is ValidationMode.STRICT:
                raise ModelParamsError("Inconsistent initial conditions (strict mode): " + "; ".join(report.describe()))
            object.__setattr__(self, "defects", tuple(report.describe()))
            for message in self.defects:
                get_general_logger().warning(f"Lenient model parameters: {message}")

    def consistency_report(self) -> ConsistencyReport:
        node_sum = sum(self.initial_counts.values(), Fraction(0))
        edge_sum = sum((degree * count for degree, count in self.initial_counts.items()), Fraction(0))
        return ConsistencyReport(node_sum=node_sum, edge_sum=edge_sum, node_defect=self.n0 - node_sum, edge_defect=self.d0 - edge_sum)

    def initial_count(self, degree: int) -> Fraction:
        """N_ℓ(0), zero for degrees absent from the initial counts."""
        return self.initial_counts.get(degree, Fraction(0))

    @property
    def max_initial_degree(self) -> int:
        return max(self.initial_counts, default=self.m)

    def to_dict(self) -> dict:
        return {
            "lambda": _exact_to_json(self.lam),
            "m": self.m,
            "d0": _exact_to_json(self.d0),
            "n0": _exact_to_json(self.n0),
            "initial_counts": {str(degree): _exact_to_json(count) for degree, count in self.initial_counts.items()},
            "mode": self.mode.value,
            "preset": self.preset.value,
        }

    @classmethod
    def from_dict(cls, dict_object: dict) -> "ModelParams":
        """Builds params from the JSON document; a `preset` key alone (plus optional m/lambda) selects a preset."""
        if not isinstance(dict_object, dict):
            raise ModelParamsError(f"Model parameters must be a JSON object, got {type(dict_object).__name__}")

        try:
            preset_tag = PresetIC(dict_object.get("preset", PresetIC.CUSTOM.value))
        except ValueError:
            raise ModelParamsError(f"Unknown preset {dict_object.get('preset')!r}") from None

        if preset_tag is not PresetIC.CUSTOM and "initial_counts" not in dict_object:
            return preset(preset_tag, m=dict_object.get("m", 1), lam=dict_object.get("lambda", 1))

        missing = [key for key in ("lambda", "m", "d0", "n0", "initial_counts") if key not in dict_object]
        if missing:
            raise ModelParamsError(f"Model parameters are missing keys: {', '.join(missing)}")
        if not isinstance(dict_object["initial_counts"], dict):
            raise ModelParamsError("initial_counts must be an object of degree -> count")

        try:
            initial_counts = {int(degree): count for degree, count in dict_object["initial_counts"].items()}
        except ValueError as e:
            raise ModelParamsError(f"initial_counts keys must be stringified integers: {e}") from None

        try:
            mode = ValidationMode(dict_object.get("mode", ValidationMode.STRICT.value))
        except ValueError:
            raise ModelParamsError(f"mode must be 'strict' or 'lenient', got {dict_object.get('mode')!r}") from None

        return cls(
            lam=dict_object["lambda"],
            m=dict_object["m"],
            d0=dict_object["d0"],
            n0=dict_object["n0"],
            initial_counts=initial_counts,
            mode=mode,
            preset=preset_tag,
        )


def _exact_to_json(value: Fraction):
    if value.denominator == 1:
        return value.numerator
    as_float = float(value)
    # Keep the exact value when the float would not read back to it
    return as_float if Fraction(repr(as_float)) == value else f"{value.numerator}/{value.denominator}"


def preset(tag: PresetIC | str, m: int = 1, lam=1) -> ModelParams:
    """
    standard: N₀ = m+1, D₀ = 2m, N_k(0) = δ_{k,m}; only loads in lenient mode (Σ N_k(0) = 1 ≠ m+1).
    krapivsky_redner: m = 1, Λ = 1, N₀ = D₀ = 2, N_ℓ(0) = 2δ_{ℓ,1}; strictly consistent.
    """
    tag = PresetIC(tag)
    if tag is PresetIC.STANDARD:
        return ModelParams(lam=lam, m=m, d0=2 * m, n0=m + 1, initial_counts={m: 1}, mode=ValidationMode.LENIENT, preset=tag)
    if tag is PresetIC.KRAPIVSKY_REDNER:
        if m != 1 or Fraction(lam) != 1:
            get_general_logger().warning("krapivsky_redner preset fixes m=1 and lambda=1, ignoring the requested values")
        return ModelParams(lam=1, m=1, d0=2, n0=2, initial_counts={1: 2}, mode=ValidationMode.STRICT, preset=tag)
    raise ModelParamsError("The custom preset has no defaults, give the full parameter set instead")


def _check_time(t: float):
    if not t >= 0:  # also rejects NaN
        raise ModelParamsError(f"Time must be >= 0, got {t}")


def d_of_t(params: ModelParams, t: float) -> float:
    """D(t) = 2Λmt + D₀, twice the edge count."""
    _check_time(t)
    return 2.0 * float(params.lam) * params.m * t + float(params.d0)


def n_of_t(params: ModelParams, t: float) -> float:
    """N(t) = Λt + N₀."""
    _check_time(t)
    return float(params.lam) * t + float(params.n0)


def h(params: ModelParams, k: float, t: float) -> float:
    """Integrating factor H_k(t) = D(t)^{k/2}; H_{k+n} = H_k·H_n."""
    if k == 0:
        _check_time(t)
        return 1.0
    if k == 2:
        return d_of_t(params, t)
    return math.pow(d_of_t(params, t), k / 2.0)


def g(params: ModelParams, t: float) -> float:
    """G(t) = H_1(t)/H_1(0) = √(2Λmt/D₀ + 1)."""
    _check_time(t)
    return math.sqrt(2.0 * float(params.lam) * params.m * t / float(params.d0) + 1.0)


def h_integral(params: ModelParams, k: float, t: float) -> float:
    """Antiderivative ∫H_k dt = H_{k+2}(t)/(Λm(k+2)), valid for k ≠ -2."""
    if k == -2:
        raise ModelParamsError("The antiderivative of H_-2 is logarithmic, k = -2 is not supported")
    return h(params, k + 2, t) / (float(params.lam) * params.m * (k + 2))
