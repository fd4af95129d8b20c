from fractions import Fraction

import numpy as np
import pytest

from model.model_params import ModelParams, preset
from model.trajectory import TrajectorySource
from simulation.growth_simulator import (
    SamplingMode,
    SimState,
    SimulationError,
    apply_arrival,
    draw_targets,
    run_simulation,
    simulate,
)


@pytest.fixture
def crowded_params():
    """Two nodes of degree 3, so three distinct targets are never available."""
    return ModelParams(lam=1, m=3, d0=6, n0=2, initial_counts={3: 2})


def _degree_sums(trajectory):
    return trajectory.counts @ trajectory.degrees.astype(float)


def test_same_seed_same_run(kr_params):
    first = run_simulation(kr_params, 50.0, 7, [0.0, 10.0, 50.0])
    second = run_simulation(kr_params, 50.0, 7, [0.0, 10.0, 50.0])
    np.testing.assert_array_equal(first.trajectory.counts, second.trajectory.counts)
    np.testing.assert_array_equal(first.arrivals, second.arrivals)


def test_different_seeds_differ(kr_params):
    first = run_simulation(kr_params, 100.0, 1, [100.0])
    second = run_simulation(kr_params, 100.0, 2, [100.0])
    assert not np.array_equal(first.trajectory.counts, second.trajectory.counts) or first.arrivals[0] != second.arrivals[0]


def test_zero_horizon_keeps_initial_state(kr_params):
    trajectory = simulate(kr_params, 0.0, 3, [0.0])
    assert trajectory.source is TrajectorySource.SIMULATION
    assert trajectory.degrees.tolist() == [1]
    assert trajectory.counts.tolist() == [[2.0]]


@pytest.mark.parametrize("mode", list(SamplingMode))
def test_node_and_degree_totals_follow_arrivals(kr_params, mode):
    run = run_simulation(kr_params, 30.0, 11, [0.0, 5.0, 15.0, 30.0], sampling_mode=mode, check_interval=1)
    arrivals = run.arrivals.astype(float)
    assert np.all(np.diff(run.arrivals) >= 0)
    np.testing.assert_array_equal(run.trajectory.totals(), 2 + arrivals)
    np.testing.assert_array_equal(_degree_sums(run.trajectory), 2 + 2 * arrivals)


def test_with_replacement_keeps_degree_sum(crowded_params):
    run = run_simulation(crowded_params, 40.0, 5, [40.0], sampling_mode="with_replacement", check_interval=1)
    arrivals = float(run.arrivals[-1])
    assert arrivals > 0
    assert run.trajectory.totals()[0] == 2 + arrivals
    assert _degree_sums(run.trajectory)[0] == 6 + 6 * arrivals
    assert run.fallback_arrivals == 0


def test_strict_mode_fails_without_enough_distinct_targets(crowded_params):
    with pytest.raises(SimulationError, match="Replica 4: Only 2 nodes") as info:
        run_simulation(crowded_params, 50.0, 0, [50.0], replica_index=4)
    assert info.value.replica_index == 4


def test_lenient_mode_attaches_to_all_available():
    params = preset("standard", m=2)
    run = run_simulation(params, 20.0, 9, [20.0], check_interval=1)
    arrivals = float(run.arrivals[-1])
    # The first arrival finds one node and makes a single edge
    assert run.fallback_arrivals == 1
    assert run.flags and run.flags[0].startswith("attach_to_all_available")
    assert run.trajectory.totals()[0] == 1 + arrivals
    assert _degree_sums(run.trajectory)[0] == 2 + 3 + 4 * (arrivals - 1)


def test_fractional_initial_counts_cannot_be_simulated():
    params = ModelParams(lam=1, m=1, d0=Fraction(1, 2), n0=Fraction(1, 2), initial_counts={1: Fraction(1, 2)})
    with pytest.raises(SimulationError, match="whole number"):
        simulate(params, 1.0, 0, [1.0])


@pytest.mark.parametrize("t_end, snapshots", [(1.0, [0.5, 0.2]), (1.0, [2.0]), (-1.0, [0.0]), (1.0, [])])
def test_invalid_snapshots(kr_params, t_end, snapshots):
    with pytest.raises(SimulationError):
        simulate(kr_params, t_end, 0, snapshots)


def test_distinct_targets_from_a_single_class():
    state = SimState(degree_counts=np.array([0, 3, 0], dtype=np.int64), total_degree=3, node_count=3)
    moves = draw_targets(state, 3, np.random.default_rng(0), SamplingMode.DISTINCT)
    assert moves == [(1, 1), (1, 1), (1, 1)]


def test_repeated_hits_move_a_node_by_its_multiplicity():
    state = SimState(degree_counts=np.array([0, 1], dtype=np.int64), total_degree=1, node_count=1)
    moves = draw_targets(state, 3, np.random.default_rng(0), SamplingMode.WITH_REPLACEMENT)
    assert moves == [(1, 3)]
    apply_arrival(state, 3, moves)
    assert state.degree_counts[3] == 1 and state.degree_counts[4] == 1
    assert state.total_degree == 1 + 3 + 3
    state.check_bookkeeping(3, max_gain_per_arrival=3)


def test_arrival_moves_target_and_adds_node(kr_params):
    state = SimState.from_params(kr_params)
    apply_arrival(state, 1, [(1, 1)])
    assert state.degree_counts[1] == 2 and state.degree_counts[2] == 1
    assert (state.total_degree, state.node_count, state.arrivals) == (4, 3, 1)
    state.check_bookkeeping(1, max_gain_per_arrival=1)


def test_bookkeeping_detects_drift(kr_params):
    state = SimState.from_params(kr_params)
    state.total_degree += 1
    with pytest.raises(SimulationError, match="Degree sum"):
        state.check_bookkeeping(1, 1)

    state = SimState.from_params(kr_params)
    state.ensure_degree(5)
    state.degree_counts[5] = 1
    state.node_count += 1
    state.total_degree += 5
    with pytest.raises(SimulationError, match="finite-support"):
        state.check_bookkeeping(1, 1)
