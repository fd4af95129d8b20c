import argparse
import sys

from cli.commands import COMMANDS, EXIT_INPUT_ERROR
from cli.run_config import load_run_config
import common.custom_logging as custom_logging
from common.custom_logging import get_general_logger
from common.serialization import SerializationError
import common.settings_manager as settings_manager
from common.util import read_artifact_version, resolve_relative_path
from oracle.ode_oracle import IntegrationError
from simulation.growth_simulator import SimulationError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abnet", description="Scale-free growth rate equations: closed form, ODE oracle and stochastic simulation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {read_artifact_version()}")
    parser.add_argument("command", choices=list(COMMANDS), help="What to run.")
    parser.add_argument("config", help="Path to the JSON run configuration.")
    parser.add_argument("--seed", type=int, help="Override the seed of simulate/compare runs.")
    parser.add_argument("--out", help="Override the output file path.")
    parser.add_argument("--format", choices=["csv", "json"], help="Override the output format.")
    parser.add_argument("--threads", type=int, help="Ensemble worker threads (ABNET_THREADS takes precedence).")
    parser.add_argument("--log-level", choices=custom_logging.VALID_LOG_LEVELS, help="Override the configured log level.")
    parser.add_argument("--app-config", help="Path to the application settings file (default: config/app_config.yaml).")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    # NOTE: settings decide whether file logging starts, so they are read with console logging only
    custom_logging.initialize(log_to_file=False)
    settings_manager.load_configs(args.app_config)
    custom_logging.configure_from_settings(settings_manager.settings, resolve_relative_path("logs"), args.log_level)
    get_general_logger().debug(f"abnet {read_artifact_version()}: {args.command} {args.config}")

    try:
        config = load_run_config(args.command, args.config, seed=args.seed, out=args.out, output_format=args.format)
        exit_code = COMMANDS[args.command](config, threads=args.threads)
    except (ValueError, SerializationError, SimulationError, IntegrationError, OSError) as e:
        get_general_logger().error(f"{args.command} failed: {e}")
        return EXIT_INPUT_ERROR

    get_general_logger().info(f"{args.command} finished with exit code {exit_code}")
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
