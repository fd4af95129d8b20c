import json
import os
import sys

import pathvalidate

from common.custom_logging import get_general_logger

THREADS_ENV_VAR = "ABNET_THREADS"
UNKNOWN_VERSION = "0.0.0+unknown"


def project_root_directory() -> str:
    """The repository root (parent of 'src'), whatever the current working directory."""
    if hasattr(sys, "_MEIPASS"):
        # In bundled app, use PyInstaller's _MEIPASS
        return os.path.abspath(os.path.join(sys._MEIPASS, os.pardir))
    return os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def resolve_relative_path(relative_path: str) -> str:
    """
    Resolves absolute path to resource, required for PyInstaller compatibility.
    :param relative_path: The relative path to the resource, from the root directory
    :return: The absolute path to the resource
    """
    return os.path.join(project_root_directory(), relative_path)


def is_valid_filename(filename: str) -> bool:
    """
    Checks if the given string is a valid filename on every supported platform.
    """
    try:
        pathvalidate.validate_filename(filename, platform="universal")
    except pathvalidate.ValidationError:
        return False
    return True


def read_artifact_version() -> str:
    """The version string from metadata.json, embedded in every output file."""
    try:
        with open(resolve_relative_path("metadata.json"), "r", encoding="utf-8") as file:
            return str(json.load(file)["version"])
    except (OSError, ValueError, KeyError) as e:
        get_general_logger().warning(f"Could not read artifact version from metadata.json: {e}")
        return UNKNOWN_VERSION


def resolve_thread_count(requested: int | None = None) -> int:
    """
    Number of ensemble worker threads.
    Priority: ABNET_THREADS, then the explicit request, then settings, then available parallelism.
    """
    from common.settings_manager import settings

    env_value = os.environ.get(THREADS_ENV_VAR)
    if env_value:
        try:
            threads = int(env_value)
            if threads >= 1:
                return threads
        except ValueError:
            pass
        get_general_logger().warning(f"{THREADS_ENV_VAR}={env_value!r} is not a positive integer, ignoring it.")

    for candidate in (requested, settings.default_threads):
        if candidate is not None and candidate >= 1:
            return candidate

    return max(1, os.cpu_count() or 1)


def format_float(value: float) -> str:
    """17 significant digits, '.' decimal point, no thousands separator."""
    return format(float(value), ".17g")
