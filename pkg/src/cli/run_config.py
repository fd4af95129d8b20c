"""
Run configuration: a JSON document holding the model parameters, one block per command and the output target.

    {
        "params": {"lambda": 1, "m": 1, "d0": 2, "n0": 2, "initial_counts": {"1": 2}, "mode": "strict"},
        "solve": {"k_max": 5, "t_grid": [0, 3]},
        "output": {"path": "output/solve.csv", "format": "csv"}
    }

Only the block of the invoked command is read. Validation errors carry the line of the offending key.
"""

from dataclasses import dataclass, field
import json
import os
import re

from common.serialization import Deserializable, SerializationError, load_from_json_file, to_jsonable
import common.settings_manager as settings_manager
from common.util import is_valid_filename
from model.model_params import ModelParams, ModelParamsError
from model.trajectory import TrajectorySource
from oracle.ode_oracle import OdeConfig, OdeConfigError
from simulation.growth_simulator import SamplingMode

OUTPUT_FORMATS = ("csv", "json")
BLOCK_KEYS = {"solve": "solve", "oracle": "ode", "simulate": "simulate", "compare": "compare", "identity": "identity"}


class RunConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        location = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            location = f"line {line}: "
        super().__init__(location + message)
        self.line = line


def _check_int(value, name: str, minimum: int | None = None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise RunConfigError(f"{name} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise RunConfigError(f"{name} must be >= {minimum}, got {value}")


def _check_times(values, name: str) -> list[float]:
    if not isinstance(values, list) or not values:
        raise RunConfigError(f"{name} must be a non-empty list of times")
    try:
        times = [float(v) for v in values]
    except (TypeError, ValueError):
        raise RunConfigError(f"{name} must contain numbers only")
    if any(not t >= 0 for t in times):
        raise RunConfigError(f"{name} must contain times >= 0")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise RunConfigError(f"{name} must be strictly increasing")
    return times


@dataclass
class SolveBlock(Deserializable):
    k_max: int
    t_grid: list[float]
    method: str = "series"

    def __post_init__(self):
        _check_int(self.k_max, "k_max", 1)
        self.t_grid = _check_times(self.t_grid, "t_grid")
        if self.method not in ("series", "stable"):
            raise RunConfigError(f"method must be 'series' or 'stable', got {self.method!r}")


@dataclass
class SimulateBlock(Deserializable):
    t_end: float
    snapshots: list[float]
    replicas: int = 1
    seed: int = 0
    sampling_mode: str = "distinct"

    def __post_init__(self):
        _check_int(self.replicas, "replicas", 1)
        _check_int(self.seed, "seed", 0)
        self.snapshots = _check_times(self.snapshots, "snapshots")
        if not float(self.t_end) >= self.snapshots[-1]:
            raise RunConfigError(f"t_end must be >= the last snapshot {self.snapshots[-1]}")
        self.t_end = float(self.t_end)
        self.sampling_mode = SamplingMode(self.sampling_mode).value


@dataclass
class CompareBlock(Deserializable):
    sources: list[str]
    tol: float
    k_max: int
    t_grid: list[float]
    ode_k_max: int | None = None
    ode_rel_tol: float | None = None
    ode_abs_tol: float | None = None
    replicas: int = 1000
    seed: int = 0
    sampling_mode: str = "distinct"

    def __post_init__(self):
        if not isinstance(self.sources, list) or len(self.sources) != 2:
            raise RunConfigError("sources must name exactly two of " + ", ".join(s.value for s in TrajectorySource))
        try:
            self.sources = [TrajectorySource(source).value for source in self.sources]
        except ValueError as e:
            raise RunConfigError(f"sources: {e}")
        if self.sources.count(TrajectorySource.SIMULATION.value) == 2:
            raise RunConfigError("sources: an ensemble can only be compared with a deterministic source")
        if isinstance(self.tol, bool) or not isinstance(self.tol, (int, float)) or not self.tol >= 0:
            raise RunConfigError(f"tol must be a number >= 0, got {self.tol!r}")
        self.tol = float(self.tol)
        _check_int(self.k_max, "k_max", 1)
        self.t_grid = _check_times(self.t_grid, "t_grid")
        if self.ode_k_max is not None:
            _check_int(self.ode_k_max, "ode_k_max", 1)
        _check_int(self.replicas, "replicas", 1)
        _check_int(self.seed, "seed", 0)
        self.sampling_mode = SamplingMode(self.sampling_mode).value


@dataclass
class IdentityBlock(Deserializable):
    m: int
    lam: float
    t: float
    j_max: int = 50

    @classmethod
    def from_dict(cls, dict_object: dict):
        if isinstance(dict_object, dict) and "lambda" in dict_object:
            dict_object = {("lam" if key == "lambda" else key): value for key, value in dict_object.items()}
        return super().from_dict(dict_object)

    def __post_init__(self):
        _check_int(self.m, "m", 1)
        _check_int(self.j_max, "j_max", 1)
        if isinstance(self.lam, bool) or not isinstance(self.lam, (int, float)) or not self.lam > 0:
            raise RunConfigError(f"lambda must be a number > 0, got {self.lam!r}")
        if isinstance(self.t, bool) or not isinstance(self.t, (int, float)) or not self.t > 0:
            raise RunConfigError(f"t must be a number > 0, got {self.t!r}")
        self.lam, self.t = float(self.lam), float(self.t)

    def to_dict(self) -> dict:
        return {"m": self.m, "lambda": self.lam, "t": self.t, "j_max": self.j_max}


BLOCK_TYPES = {"solve": SolveBlock, "oracle": OdeConfig, "simulate": SimulateBlock, "compare": CompareBlock, "identity": IdentityBlock}


@dataclass
class RunConfig:
    command: str
    block: object
    output_path: str
    output_format: str
    params: ModelParams | None = None
    source_path: str | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        """The fully resolved configuration, embedded in every output file."""
        resolved = {"command": self.command}
        if self.params is not None:
            resolved["params"] = self.params.to_dict()
        resolved[BLOCK_KEYS[self.command]] = to_jsonable(self.block)
        resolved["output"] = {"path": self.output_path, "format": self.output_format}
        return resolved


def _line_of(text: str, *keys: str) -> int | None:
    """1-based line of the first key, then of each following key after it."""
    lines = text.splitlines()
    start = 0
    found = None
    for key in keys:
        pattern = re.compile(rf'"{re.escape(key)}"\s*:')
        for index in range(start, len(lines)):
            if pattern.search(lines[index]):
                found, start = index + 1, index
                break
        else:
            return found
    return found


def _field_in_message(message: str, field_names) -> str | None:
    for name in sorted(field_names, key=len, reverse=True):
        if re.search(rf"\b{re.escape(name)}\b", message):
            return name
    return None


def _build_block(command: str, raw_block, text: str, path: str):
    block_key = BLOCK_KEYS[command]
    block_type = BLOCK_TYPES[command]
    if command == "oracle" and isinstance(raw_block, dict):
        settings = settings_manager.settings
        raw_block = {
            "k_max": settings.ode_default_k_max,
            "rel_tol": settings.ode_default_rel_tol,
            "abs_tol": settings.ode_default_abs_tol,
            **raw_block,
        }
    try:
        return block_type.from_dict(raw_block)
    except (RunConfigError, OdeConfigError, SerializationError, ValueError) as e:
        message = str(e)
        field_name = _field_in_message(message, list(raw_block) if isinstance(raw_block, dict) else [])
        line = _line_of(text, block_key, field_name) if field_name else _line_of(text, block_key)
        raise RunConfigError(f"'{block_key}': {message}", line, path) from e


def load_run_config(
    command: str,
    config_path: str,
    seed: int | None = None,
    out: str | None = None,
    output_format: str | None = None,
) -> RunConfig:
    """Reads and validates the configuration of one command, applying the command-line overrides."""
    if command not in BLOCK_KEYS:
        raise RunConfigError(f"Unknown command {command!r}, expected one of {', '.join(BLOCK_KEYS)}")
    try:
        with open(config_path, "r", encoding="utf-8") as file:
            text = file.read()
        document = load_from_json_file(config_path)
    except FileNotFoundError as e:
        raise RunConfigError(f"Config file not found: {config_path}") from e
    except SerializationError as e:
        raise RunConfigError(str(e)) from e
    if not isinstance(document, dict):
        raise RunConfigError("The config must be a JSON object", 1, config_path)

    block_key = BLOCK_KEYS[command]
    if block_key not in document:
        raise RunConfigError(f"Missing '{block_key}' block for command '{command}'", None, config_path)
    block = _build_block(command, document[block_key], text, config_path)

    params = None
    if command != "identity":
        if "params" not in document:
            raise RunConfigError("Missing 'params' block", None, config_path)
        try:
            params = ModelParams.from_dict(document["params"])
        except (ModelParamsError, SerializationError) as e:
            raw = document["params"] if isinstance(document["params"], dict) else {}
            field_name = _field_in_message(str(e), list(raw) + ["lambda"])
            raise RunConfigError(f"'params': {e}", _line_of(text, "params", field_name) if field_name else _line_of(text, "params"), config_path) from e

    if seed is not None:
        if not hasattr(block, "seed"):
            raise RunConfigError(f"--seed has no effect on command '{command}'")
        _check_int(seed, "--seed", 0)
        block.seed = seed

    output = document.get("output", {})
    if not isinstance(output, dict):
        raise RunConfigError("'output' must be an object", _line_of(text, "output"), config_path)
    output_format = output_format or output.get("format") or settings_manager.settings.default_format
    if output_format not in OUTPUT_FORMATS:
        raise RunConfigError(f"Output format must be one of {OUTPUT_FORMATS}, got {output_format!r}", _line_of(text, "output", "format"), config_path)
    output_path = out or output.get("path") or os.path.join(settings_manager.settings.output_directory, f"{command}.{output_format}")
    if not is_valid_filename(os.path.basename(output_path)):
        raise RunConfigError(f"Invalid output file name: {output_path!r}", _line_of(text, "output", "path"), config_path)

    config = RunConfig(command=command, block=block, output_path=output_path, output_format=output_format, params=params, source_path=config_path)
    _check_against_params(config, text)
    return config


def _check_against_params(config: RunConfig, text: str):
    params = config.params
    if params is None:
        return
    k_max = getattr(config.block, "k_max", None)
    if k_max is not None and k_max < params.m:
        raise RunConfigError(f"k_max={k_max} is below m={params.m}", _line_of(text, BLOCK_KEYS[config.command], "k_max"), config.source_path)


def resolved_config_json(config: RunConfig) -> str:
    """Compact, key-sorted JSON of the resolved config, for single-line embedding."""
    return json.dumps(to_jsonable(config.to_dict()), sort_keys=True, separators=(",", ":"))
