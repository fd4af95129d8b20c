import dataclasses
from enum import Enum
from fractions import Fraction
import json
import math
import os

import numpy as np

from common.custom_logging import get_general_logger


class SerializationError(Exception):
    pass


class Deserializable:
    """Base class for dataclass instances that can be built from a plain dictionary."""

    @classmethod
    def from_dict(cls, dict_object: dict):
        if not isinstance(dict_object, dict):
            raise SerializationError(f"{cls.__name__} expects a JSON object, got {type(dict_object).__name__}")
        known_fields = {field.name for field in dataclasses.fields(cls)}
        # Only pass keys that exist in the class
        for key in dict_object:
            if key not in known_fields:
                get_general_logger().warning(f"{cls.__name__}: ignoring unknown key '{key}'")
        try:
            return cls(**{key: value for key, value in dict_object.items() if key in known_fields})
        except TypeError as e:
            raise SerializationError(f"{cls.__name__}: {e}") from e


def encode_fraction(value: Fraction, digits: int = 30) -> dict:
    """Exact rational as numerator/denominator plus a decimal string for humans."""
    return {
        "numerator": str(value.numerator),
        "denominator": str(value.denominator),
        "decimal": fraction_to_decimal_string(value, digits),
    }


def decode_fraction(encoded: dict) -> Fraction:
    try:
        return Fraction(int(encoded["numerator"]), int(encoded["denominator"]))
    except (KeyError, ValueError, ZeroDivisionError) as e:
        raise SerializationError(f"Invalid encoded fraction {encoded}: {e}") from e


def fraction_to_decimal_string(value: Fraction, digits: int = 30) -> str:
    """Decimal expansion with `digits` significant digits, computed with integers only."""
    if value == 0:
        return "0"
    sign = "-" if value < 0 else ""
    value = abs(value)
    # Scale so the integer part carries the requested significant digits
    exponent = len(str(value.numerator)) - len(str(value.denominator))
    shift = digits - exponent
    scaled = value * Fraction(10) ** shift if shift >= 0 else value / Fraction(10) ** (-shift)
    mantissa = round(scaled)
    text = str(mantissa)
    point = len(text) - shift
    if point <= 0:
        text = "0." + "0" * (-point) + text
    elif point >= len(text):
        text = text + "0" * (point - len(text))
    else:
        text = text[:point] + "." + text[point:]
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return sign + text


def to_jsonable(obj):
    """
    Recursively converts an object to plain JSON types.
    Handles dataclasses, Fractions, numpy arrays/scalars and non-finite floats.
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_dict"):
            return to_jsonable(obj.to_dict())
        return {field.name: to_jsonable(getattr(obj, field.name)) for field in dataclasses.fields(obj)}
    elif isinstance(obj, Fraction):
        return encode_fraction(obj)
    elif isinstance(obj, np.ndarray):
        return [to_jsonable(item) for item in obj.tolist()]
    elif isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    elif isinstance(obj, (list, tuple)):
        return [to_jsonable(item) for item in obj]
    elif isinstance(obj, dict):
        return {str(key): to_jsonable(value) for key, value in obj.items()}
    elif isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)  # "inf" / "nan", JSON has no literal for them
    elif isinstance(obj, Enum):
        return obj.value
    else:
        return obj


def to_json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=4)


def save_as_json_file(obj, file_path) -> None:
    """
    Saves an object to a JSON file, creating the parent directories.
    """
    file_path = os.path.abspath(file_path)
    os.makedirs(os.path.dirname(file_path), exist_ok=True)

    with open(file_path, "w", encoding="utf-8", newline="\n") as file:
        file.write(to_json(obj))
        file.write("\n")


def load_from_json_file(file_path) -> dict:
    """
    Loads a JSON document, reporting the line of a syntax error.
    """
    with open(file_path, "r", encoding="utf-8") as file:
        text = file.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SerializationError(f"{file_path}: line {e.lineno}, column {e.colno}: {e.msg}") from e
