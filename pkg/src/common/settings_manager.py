from dataclasses import dataclass
import difflib
import os

from ruamel.yaml import YAML, CommentedMap

from common import util
from common.custom_logging import VALID_LOG_LEVELS, get_general_logger

CONFIG_RELATIVE_PATH = "config/app_config.yaml"


# Defaults values and the "struct" settings object
@dataclass
class Settings:
    general_log_level: str = "INFO"
    log_to_file: bool = True
    default_threads: int = 0  # 0 means "use available parallelism"
    default_format: str = "csv"
    output_directory: str = "output"
    series_guard_digits: int = 20
    ode_default_k_max: int = 400
    ode_default_rel_tol: float = 1e-10
    ode_default_abs_tol: float = 1e-14


settings = Settings()


def load_configs(config_path: str | None = None):
    """
    Set module-level settings from the app_config.yaml file.
    A missing file is created with the defaults.
    """
    config_path = config_path or util.resolve_relative_path(CONFIG_RELATIVE_PATH)
    get_general_logger().debug(f"Loading app settings from {config_path}")

    yaml = YAML()
    try:
        with open(config_path, "r") as file:
            loaded_configs_dict = yaml.load(file)
    except FileNotFoundError:
        get_general_logger().warning(f"{config_path} not found. Defaults will be used and written to it.")
        save_configs(config_path)
        return
    except Exception as e:
        get_general_logger().error(f"Error loading {config_path}: {e}")
        return

    if loaded_configs_dict:
        apply_settings_dictionary(loaded_configs_dict)

    get_general_logger().debug("App settings loaded successfully.")


def save_configs(config_path: str | None = None):
    """
    Save the current settings to the app_config.yaml file.
    Includes hard-coded comments into the output file.
    """
    # NOTE: The order of the properties in the dataclass drives the layout of the yaml file
    config_path = config_path or util.resolve_relative_path(CONFIG_RELATIVE_PATH)
    get_general_logger().debug(f"Saving app settings to {config_path}")

    yaml = YAML()
    yaml_data = CommentedMap()

    for key, value in vars(settings).items():
        yaml_data[key] = value

    yaml_data.yaml_set_start_comment("Application settings for abnet\nRun-specific parameters belong in the JSON run configuration, not here")

    yaml_data.yaml_set_comment_before_after_key("general_log_level", before='One of "DEBUG", "INFO", "WARNING", "ERROR"')
    yaml_data.yaml_set_comment_before_after_key("default_threads", before="\nEnsemble worker threads, 0 uses every available core (ABNET_THREADS wins over this)")
    yaml_data.yaml_set_comment_before_after_key("default_format", before='\n"csv" or "json"')
    yaml_data.yaml_set_comment_before_after_key("series_guard_digits", before="\nExtra decimal digits carried beyond the estimated cancellation when summing the series")
    yaml_data.yaml_set_comment_before_after_key("ode_default_k_max", before="\nDefaults for the rate-equation integrator")

    os.makedirs(os.path.dirname(os.path.abspath(config_path)), exist_ok=True)

    try:
        with open(config_path, "w") as file:
            yaml.dump(yaml_data, file)
    except Exception as e:
        get_general_logger().error(f"Error saving {config_path}: {e}")
        return

    get_general_logger().debug("App settings saved successfully.")


def __warn_of_incorrect_key(key: str):
    suggestions = difflib.get_close_matches(key, vars(settings).keys(), n=1, cutoff=0.1)
    if suggestions:
        get_general_logger().warning(f"app_config.yaml: {key} is not a known setting. Did you mean '{suggestions[0]}'?")
    else:
        get_general_logger().warning(f"app_config.yaml: {key} is not a known setting.")


def apply_settings_dictionary(dictionary: dict):
    """
    Safely apply the settings from a dictionary to the settings object.
    """
    for key, value in dictionary.items():
        if not hasattr(settings, key):
            __warn_of_incorrect_key(key)
            continue

        expected_type = type(getattr(settings, key))
        if expected_type is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)  # "1" in yaml is a valid float setting

        if not isinstance(value, expected_type):
            get_general_logger().warning(f"app_config.yaml: {key} is not the correct type. Expected {expected_type}, got {value}:{type(value)}")
            continue

        if key == "general_log_level" and value.upper() not in VALID_LOG_LEVELS:
            get_general_logger().warning(f"app_config.yaml: general_log_level must be one of {VALID_LOG_LEVELS}")
            continue
        if key == "default_format" and value not in ("csv", "json"):
            get_general_logger().warning("app_config.yaml: default_format must be 'csv' or 'json'")
            continue

        setattr(settings, key, value)
