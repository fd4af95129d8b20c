import json

import pytest

from app import main


@pytest.fixture
def app_config(tmp_path):
    path = tmp_path / "app_config.yaml"
    path.write_text("general_log_level: WARNING\nlog_to_file: false\n")
    return str(path)


@pytest.fixture
def run_cli(tmp_path, app_config):
    """Writes the run config as JSON and runs the CLI on it; returns (exit code, output path)."""

    def run(command: str, document: dict, *extra: str, out_name: str | None = None):
        config_path = tmp_path / f"{command}_config.json"
        config_path.write_text(json.dumps(document, indent=4))
        out_path = tmp_path / "out" / (out_name or f"{command}.csv")
        code = main([command, str(config_path), "--app-config", app_config, "--out", str(out_path), *extra])
        return code, out_path

    return run

