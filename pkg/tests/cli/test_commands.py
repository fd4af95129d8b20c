import csv
import json

import pytest

from app import main
from common.util import read_artifact_version

KR = {"preset": "krapivsky_redner"}
EXACT_COMPARE = {
    "sources": ["closed_form", "ode"],
    "tol": 1e-6,
    "k_max": 40,
    "t_grid": [0, 1, 5, 20, 50],
    "ode_k_max": 100,
    "ode_abs_tol": 1e-20,
}


def read_csv_output(path) -> tuple[dict, list[dict]]:
    """Header comments as a dict plus the data rows."""
    header, data_lines = {}, []
    with open(path, encoding="utf-8") as file:
        for line in file:
            if line.startswith("# "):
                key, _, value = line[2:].rstrip("\n").partition(": ")
                header[key] = value
            else:
                data_lines.append(line)
    return header, list(csv.DictReader(data_lines))


def test_solve_writes_csv_with_provenance(run_cli):
    code, out = run_cli("solve", {"params": KR, "solve": {"k_max": 5, "t_grid": [0, 3]}})
    assert code == 0

    header, rows = read_csv_output(out)
    assert header["version"] == read_artifact_version()
    config = json.loads(header["config"])
    assert config["command"] == "solve"
    assert config["solve"]["k_max"] == 5
    assert config["params"]["preset"] == "krapivsky_redner"

    assert len(rows) == 10
    row = next(row for row in rows if row["k"] == "1" and row["t"] == "3")
    assert row["N_k"] == "3.3333333333333335"
    assert row["asymptotic_p_k"] == "0.66666666666666663"
    assert row["source"] == "closed_form"


def test_solve_json_exports_exact_constants(run_cli):
    code, out = run_cli("solve", {"params": KR, "solve": {"k_max": 3, "t_grid": [1]}}, "--format", "json", out_name="solve.json")
    assert code == 0
    document = json.loads(out.read_text())
    assert document["version"] == read_artifact_version()
    assert document["config"]["output"]["format"] == "json"
    constants = document["result"]["constants"]
    assert constants[1]["scaled_constant"] == {"numerator": "-3", "denominator": "2", "decimal": "-1.5"}


def test_oracle_reports_leaked_mass(run_cli):
    code, out = run_cli("oracle", {"params": KR, "ode": {"k_max": 10, "t_snapshots": [0, 1, 30]}})
    assert code == 0
    header, rows = read_csv_output(out)
    assert float(json.loads(header["summary"])["leaked_at_last_snapshot"]) > 0
    assert {row["source"] for row in rows} == {"ode"}
    assert all(float(row["leaked"]) == 0.0 for row in rows if row["t"] == "0")


def test_closed_form_agrees_with_oracle(run_cli):
    code, out = run_cli("compare", {"params": KR, "compare": EXACT_COMPARE})
    assert code == 0
    header, rows = read_csv_output(out)
    summary = json.loads(header["summary"])
    assert summary["passed"] is True
    assert summary["max_rel_diff"] <= 1e-6
    assert set(rows[0]) == {"t", "k", "value_a", "value_b", "abs_diff", "rel_diff"}


def test_tolerance_failure_exits_with_one(run_cli):
    code, _ = run_cli("compare", {"params": KR, "compare": {**EXACT_COMPARE, "tol": 0.0}})
    assert code == 1


def test_hypergeometric_discrepancy_does_not_fail_the_run(run_cli):
    document = {
        "params": {"preset": "standard", "m": 1},
        "compare": {"sources": ["closed_form", "hypergeometric"], "tol": 1e-6, "k_max": 4, "t_grid": [0, 2]},
    }
    code, out = run_cli("compare", document)
    assert code == 0
    summary = json.loads(read_csv_output(out)[0]["summary"])
    assert summary["report_only"] is True
    assert summary["passed"] is False


def test_ensemble_comparison_adds_checks(run_cli):
    document = {
        "params": KR,
        "compare": {"sources": ["closed_form", "simulation"], "tol": 1.0, "k_max": 5, "t_grid": [2, 5], "replicas": 40, "seed": 3},
    }
    code, out = run_cli("compare", document, "--format", "json", out_name="compare.json")
    assert code == 0
    result = json.loads(out.read_text())["result"]
    assert [check["t"] for check in result["summary"]["node_totals"]] == [2.0, 5.0]
    assert "max_abs_mean_field_gap" in result["summary"]
    assert result["manifest"]["base_seed"] == 3
    assert result["manifest"]["replicas"] == 40


def test_simulate_is_reproducible(run_cli):
    document = {"params": KR, "simulate": {"t_end": 20, "snapshots": [5, 20], "replicas": 1, "seed": 42}}
    code, out = run_cli("simulate", document)
    assert code == 0
    first = out.read_bytes()

    code, out = run_cli("simulate", document)
    assert code == 0
    assert out.read_bytes() == first

    header, rows = read_csv_output(out)
    assert json.loads(header["summary"])["base_seed"] == 42
    assert all(row["stddev"] == "0" for row in rows)


def test_simulate_honours_thread_override(run_cli, monkeypatch):
    document = {"params": KR, "simulate": {"t_end": 5, "snapshots": [5], "replicas": 8, "seed": 5}}
    code, out = run_cli("simulate", document, "--threads", "1")
    single = out.read_bytes()
    monkeypatch.setenv("ABNET_THREADS", "3")
    code_env, out = run_cli("simulate", document, "--threads", "1")
    assert code == code_env == 0
    assert out.read_bytes() == single


def test_seed_flag_changes_the_run(run_cli):
    document = {"params": KR, "simulate": {"t_end": 30, "snapshots": [30], "replicas": 3, "seed": 1}}
    code, out = run_cli("simulate", document, "--seed", "2")
    assert code == 0
    header, _ = read_csv_output(out)
    assert json.loads(header["config"])["simulate"]["seed"] == 2


def test_identity_probe_for_m_one(run_cli):
    code, out = run_cli("identity", {"identity": {"m": 1, "lambda": 1, "t": 3, "j_max": 8}})
    assert code == 0
    header, rows = read_csv_output(out)
    assert json.loads(header["summary"])["lhs"] == 0.0
    assert [row["J"] for row in rows] == [str(j) for j in range(9)]


@pytest.mark.parametrize(
    "document",
    [
        {"params": KR},
        {"params": KR, "solve": {"k_max": 0, "t_grid": [1]}},
        {"params": {"preset": "standard", "m": 1, "mode": "strict", "lambda": 1, "d0": 2, "n0": 2, "initial_counts": {"1": 1}}, "solve": {"k_max": 3, "t_grid": [1]}},
    ],
)
def test_input_errors_exit_with_two(run_cli, document):
    code, out = run_cli("solve", document)
    assert code == 2
    assert not out.exists()


def test_missing_config_file_exits_with_two(tmp_path, app_config):
    assert main(["solve", str(tmp_path / "nope.json"), "--app-config", app_config]) == 2


def test_simulation_errors_exit_with_two(run_cli):
    params = {"lambda": 1, "m": 3, "d0": 6, "n0": 2, "initial_counts": {"3": 2}}
    code, _ = run_cli("simulate", {"params": params, "simulate": {"t_end": 50, "snapshots": [50], "replicas": 2}})
    assert code == 2


def test_unknown_command_is_rejected_by_the_parser(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["plot", str(tmp_path / "run.json")])
    assert info.value.code == 2
