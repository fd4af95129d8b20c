import numpy as np
import pytest

from analysis.comparison import (
    AnalysisError,
    NodeTotalCheck,
    compare,
    compare_ensemble,
    ensemble_node_totals,
    hypergeometric_discrepancy,
    render_text,
)
from closed_form.closed_form_solution import build_constants
from closed_form.trajectories import closed_form_trajectory
from model.model_params import preset
from model.trajectory import DegreeTrajectory
from oracle.ode_oracle import OdeConfig, integrate
from simulation.ensemble import EnsembleResult
from simulation.growth_simulator import SamplingMode


def _trajectory(times, degrees, counts, source="closed_form"):
    return DegreeTrajectory(times=times, degrees=degrees, counts=counts, source=source)


def _ensemble_result(means, stddevs, replica_totals, times=(1.0,), degrees=(1, 2)):
    replica_totals = np.asarray(replica_totals, dtype=float)
    return EnsembleResult(
        times=np.asarray(times, dtype=float),
        degrees=np.asarray(degrees),
        means=np.asarray(means, dtype=float),
        stddevs=np.asarray(stddevs, dtype=float),
        replicas=len(replica_totals),
        base_seed=0,
        sampling_mode=SamplingMode.DISTINCT,
        replica_totals=replica_totals,
        arrivals=(replica_totals - 2).astype(np.int64),
    )


def test_comparison_is_symmetric():
    a = _trajectory([0.0, 1.0], [1, 2], [[2.0, 0.0], [3.0, 0.5]])
    b = _trajectory([0.0, 1.0], [1, 2], [[2.0, 0.0], [3.3, 0.45]], source="ode")
    forward, backward = compare(a, b, 0.2), compare(b, a, 0.2)
    assert forward.max_rel_diff == backward.max_rel_diff == pytest.approx(0.1)
    assert forward.max_abs_diff == pytest.approx(0.3)
    assert forward.worst_entry == (1.0, 2)
    assert forward.passed and not compare(a, b, 0.05).passed


def test_comparison_uses_the_common_grid():
    a = _trajectory([0.0, 1.0, 2.0], [1, 2, 3], np.ones((3, 3)))
    b = _trajectory([1.0, 2.0, 5.0], [2, 3, 4], np.ones((3, 3)), source="ode")
    report = compare(a, b, 0.0)
    assert report.times.tolist() == [1.0, 2.0]
    assert report.degrees.tolist() == [2, 3]
    assert report.passed
    assert report.entry(2.0, 3) == {"t": 2.0, "k": 3, "a": 1.0, "b": 1.0, "abs_diff": 0.0, "rel_diff": 0.0}


def test_tiny_entries_do_not_decide():
    a = _trajectory([1.0], [1, 2], [[1.0, 1e-12]])
    b = _trajectory([1.0], [1, 2], [[1.0, 3e-12]], source="ode")
    report = compare(a, b, 1e-6)
    assert report.rel_diff[0, 1] == pytest.approx(2 / 3)
    assert report.passed and report.max_rel_diff == 0.0


def test_disjoint_grids_are_an_error():
    a = _trajectory([0.0], [1], [[1.0]])
    b = _trajectory([1.0], [1], [[1.0]], source="ode")
    with pytest.raises(AnalysisError):
        compare(a, b, 0.1)
    with pytest.raises(AnalysisError):
        compare(a, a, -1.0)


def test_closed_form_and_oracle_agree(kr_params):
    t_grid = [0.0, 1.0, 5.0, 20.0, 50.0]
    closed = closed_form_trajectory(build_constants(kr_params, 40), t_grid)
    oracle = integrate(kr_params, OdeConfig(k_max=100, rel_tol=1e-10, abs_tol=1e-20, t_snapshots=t_grid))
    report = compare(closed, oracle, 1e-6)
    assert report.degrees.tolist() == list(range(1, 41))
    assert report.passed, report.summary()


def test_hypergeometric_discrepancy_is_reported_not_failed():
    report = hypergeometric_discrepancy(preset("standard", m=1), 3, [0.0, 10.0])
    assert report.entry(0.0, 1)["rel_diff"] == pytest.approx(0.25)
    assert report.report_only
    assert not report.passed and not report.failed


def test_ensemble_comparison_reports_z_scores_and_gap():
    reference = _trajectory([1.0], [1, 2], [[1.8, 1.0]])
    result = _ensemble_result(means=[[2.0, 1.0]], stddevs=[[1.0, 0.0]], replica_totals=[[3.0], [3.0], [3.0], [3.0]])
    report = compare_ensemble(reference, result)

    assert report.source_b == "simulation"
    np.testing.assert_allclose(report.z_scores, [[0.4, 0.0]])
    assert report.mean_field_gap[0, 0] == pytest.approx(0.2 / 1.8)
    assert report.max_rel_diff == pytest.approx(0.1)
    assert not report.passed

    summary = report.summary()
    assert summary["max_abs_z_score"] == pytest.approx(0.4)
    assert summary["max_abs_mean_field_gap"] == pytest.approx(0.2 / 1.8)
    assert "z_score" in report.to_rows()[0]


def test_ensemble_gate_looks_at_the_reference_only():
    reference = _trajectory([1.0], [1, 2], [[0.8, 2.0]])
    result = _ensemble_result(means=[[1.05, 2.02]], stddevs=[[0.5, 0.5]], replica_totals=[[3.0], [3.0], [3.0], [3.0]])
    report = compare_ensemble(reference, result)

    np.testing.assert_array_equal(report.significant, [[False, True]])
    assert report.max_rel_diff == pytest.approx(0.02 / 2.02)
    assert report.passed


def test_node_totals_against_expectation(kr_params):
    result = _ensemble_result(means=[[3.0, 1.0]], stddevs=[[0.5, 0.5]], replica_totals=[[3.0], [5.0], [4.0], [4.0]], times=(2.0,))
    (check,) = ensemble_node_totals(result, kr_params)
    assert check.expected == 4.0 and check.mean == 4.0
    assert check.stderr == pytest.approx(np.sqrt(2 / 3) / 2)
    assert check.z_score == 0.0 and check.passed


def test_node_total_without_spread():
    assert NodeTotalCheck(t=1.0, expected=3.0, mean=3.0, stderr=0.0).passed
    assert not NodeTotalCheck(t=1.0, expected=3.0, mean=4.0, stderr=0.0).passed
    assert NodeTotalCheck(t=1.0, expected=3.0, mean=4.0, stderr=0.25).z_score == 4.0


def test_text_rendering():
    a = _trajectory([0.0, 1.0], [1, 2, 3], np.ones((2, 3)))
    text = render_text(compare(a, a, 0.0), max_rows=4)
    assert "max_rel_diff" in text
    assert "value_a" in text and "rel_diff" in text
    assert text.endswith("... 2 more rows")
