import numpy as np
import pytest

from model.trajectory import DegreeTrajectory, TrajectorySource


def _trajectory(**kwargs):
    values = {
        "times": [0.0, 3.0],
        "degrees": [1, 2],
        "counts": [[2.0, 0.0], [10 / 3, 1.0]],
        "source": "closed_form",
    }
    values.update(kwargs)
    return DegreeTrajectory(**values)


def test_count_and_totals():
    trajectory = _trajectory()
    assert trajectory.count(1, 1) == pytest.approx(10 / 3)
    assert trajectory.count(0, 2) == 0.0
    np.testing.assert_allclose(trajectory.totals(), [2.0, 10 / 3 + 1])
    assert trajectory.source is TrajectorySource.CLOSED_FORM


def test_rows_are_snapshot_major(kr_params):
    rows = _trajectory().to_rows(kr_params)
    assert [(row["t"], row["k"]) for row in rows] == [(0.0, 1), (0.0, 2), (3.0, 1), (3.0, 2)]
    assert rows[2]["p_k"] == pytest.approx((10 / 3) / 5)
    assert rows[0]["source"] == "closed_form"


def test_shape_mismatch_is_rejected():
    with pytest.raises(ValueError):
        _trajectory(counts=[[1.0, 2.0]])
    with pytest.raises(ValueError):
        _trajectory(leaked=[0.0])


def test_leaked_is_serialized_when_present():
    trajectory = _trajectory(source="ode", leaked=[0.0, 1e-9])
    assert "leaked" in trajectory.to_dict()
    assert "leaked" not in _trajectory().to_dict()
