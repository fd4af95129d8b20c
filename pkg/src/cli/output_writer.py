import csv
import json
import os

from cli.run_config import RunConfig, resolved_config_json
from common.custom_logging import get_general_logger
from common.serialization import save_as_json_file, to_jsonable
from common.util import format_float, read_artifact_version


def _cell(value) -> str:
    if isinstance(value, float):
        return format_float(value)
    if value is None:
        return ""
    return str(value)


def write_csv(path: str, rows: list[dict], config: RunConfig, summary: dict | None = None) -> None:
    """
    CSV with '.' decimals and 17 significant digits. Leading '#' lines carry the artifact version,
    the resolved config and, when given, the run summary, each as one line of compact JSON.
    """
    path = os.path.abspath(path)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as file:
        file.write(f"# version: {read_artifact_version()}\n")
        file.write(f"# config: {resolved_config_json(config)}\n")
        if summary is not None:
            file.write(f"# summary: {json.dumps(to_jsonable(summary), sort_keys=True, separators=(',', ':'))}\n")
        if rows:
            writer = csv.writer(file, lineterminator="\n")
            headers = list(rows[0].keys())
            writer.writerow(headers)
            for row in rows:
                writer.writerow([_cell(row.get(header)) for header in headers])
    get_general_logger().info(f"Wrote {len(rows)} rows to {path}")


def write_json(path: str, result: dict, config: RunConfig) -> None:
    document = {
        "version": read_artifact_version(),
        "config": config.to_dict(),
        "result": result,
    }
    save_as_json_file(document, path)
    get_general_logger().info(f"Wrote {path}")


def write_outputs(config: RunConfig, rows: list[dict], result: dict, summary: dict | None = None) -> str:
    """Writes the command's output in the configured format; returns the path written."""
    if config.output_format == "json":
        write_json(config.output_path, result, config)
    else:
        write_csv(config.output_path, rows, config, summary)
    return config.output_path
