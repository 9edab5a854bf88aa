import numpy as np
import pytest

from app.core.exceptions import ConfigurationError
from app.core.lane_graph import LaneGraph
from app.core.matching import (
    MatchConfig,
    TimestepAssignment,
    Trajectory,
    assign_timesteps,
    assignment_confidence,
    build_intervals,
)

from .helpers import segment, two_lane_graph


def _single_lane():
    return LaneGraph([segment("lane", [(0, 0), (15, 0), (30, 0)])])


def test_confidence_formula():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        d = float(rng.uniform(0.0, 20.0))
        d_th = float(rng.uniform(0.1, 10.0))
        assert assignment_confidence(d, d_th) == max(0.0, 1.0 - d / d_th)
    assert assignment_confidence(0.0, 5.0) == 1.0
    assert assignment_confidence(5.0, 5.0) == 0.0
    assert assignment_confidence(7.0, 5.0) == 0.0


def test_confidence_rejects_non_positive_threshold():
    with pytest.raises(ConfigurationError):
        assignment_confidence(1.0, 0.0)


def test_threshold_is_strict():
    traj = Trajectory("a", 10.0, [(15.0, 2.5), (15.0, 2.4)])
    assignments = assign_timesteps(traj, _single_lane(), MatchConfig(d_th=5.0, p_th=0.5))
    assert assignments[0].entries == ()
    assert assignments[1].segment_ids == ["lane"]
    assert assignments[1].confidence_of("lane") == pytest.approx(0.52)


def test_empty_timesteps_are_kept():
    traj = Trajectory("a", 10.0, [(5.0, 0.0), (5.0, 50.0), (6.0, 0.5)])
    assignments = assign_timesteps(traj, _single_lane(), MatchConfig())
    assert [assignment.timestep for assignment in assignments] == [0, 1, 2]
    assert [assignment.segment_ids for assignment in assignments] == [["lane"], [], ["lane"]]
    intervals = build_intervals(assignments)
    assert [(interval.start, interval.end) for interval in intervals] == [(0, 0), (2, 2)]


def test_assignments_to_overlapping_lanes(two_lane_graph):
    traj = Trajectory("a", 10.0, [(10.0, 1.75), (10.0, 0.0)])
    assignments = assign_timesteps(traj, two_lane_graph, MatchConfig())
    assert assignments[0].segment_ids == ["l0", "r0"]
    assert assignments[0].confidence_of("l0") == pytest.approx(0.65)
    assert assignments[1].segment_ids == ["r0"]
    assert assignments[1].confidence_of("l0") == 0.0


def _random_assignments(rng, timesteps, lanes):
    assignments = []
    for t in range(timesteps):
        entries = tuple(
            (f"s{lane}", float(rng.uniform(0.51, 1.0)))
            for lane in range(lanes)
            if rng.random() < 0.6
        )
        assignments.append(TimestepAssignment(t, entries))
    return assignments


def test_intervals_reconstruct_assignments():
    rng = np.random.default_rng(2)
    for _ in range(500):
        timesteps = int(rng.integers(1, 25))
        assignments = _random_assignments(rng, timesteps, int(rng.integers(1, 5)))
        intervals = build_intervals(assignments)

        covered = {
            (interval.segment_id, t)
            for interval in intervals
            for t in range(interval.start, interval.end + 1)
        }
        assigned = {
            (segment_id, assignment.timestep)
            for assignment in assignments
            for segment_id in assignment.segment_ids
        }
        assert covered == assigned

        for interval in intervals:
            assert (interval.segment_id, interval.start - 1) not in assigned
            assert (interval.segment_id, interval.end + 1) not in assigned
            for t in range(interval.start, interval.end + 1):
                assert interval.confidence_at(t) == assignments[t].confidence_of(interval.segment_id)


def test_intervals_are_sorted_by_start_then_id():
    assignments = [
        TimestepAssignment(0, (("b", 0.9),)),
        TimestepAssignment(1, (("a", 0.8), ("b", 0.9))),
        TimestepAssignment(2, (("a", 0.8),)),
    ]
    intervals = build_intervals(assignments)
    assert [(i.segment_id, i.start, i.end) for i in intervals] == [("b", 0, 1), ("a", 1, 2)]


def test_no_assignments_no_intervals():
    assert build_intervals([]) == []
    assert build_intervals([TimestepAssignment(0), TimestepAssignment(1)]) == []


@pytest.mark.parametrize("kwargs", [
    {"d_th": 0.0},
    {"d_th": -1.0},
    {"p_th": 1.0},
    {"p_th": -0.1},
    {"search_radius": 0.0},
])
def test_invalid_match_config(kwargs):
    with pytest.raises(ConfigurationError):
        MatchConfig(**kwargs)


def test_match_config_from_dict():
    config = MatchConfig.from_dict({"d_th": 4.0, "search_radius": 6.0})
    assert config.d_th == 4.0
    assert config.p_th == 0.5
    assert config.radius == 6.0
    assert MatchConfig().radius == 5.0


def test_trajectory_rejects_bad_sample_rate():
    with pytest.raises(ConfigurationError):
        Trajectory("a", 0.0, [(0, 0)])


def test_trajectory_positions_are_read_only():
    traj = Trajectory("a", 10.0, [(i, 0) for i in range(10)], first_timestep=3)
    assert len(traj) == 10
    assert traj.positions.shape == (10, 2)
    with pytest.raises(ValueError):
        traj.positions[0, 0] = 1.0


@pytest.mark.parametrize("radius", [2.5, 3.0, 5.0, 50.0])
def test_assignments_do_not_depend_on_search_radius(radius):
    # d_th * (1 - p_th) = 2.5 bounds every accepted distance
    graph = two_lane_graph()
    rng = np.random.default_rng(23)
    for i in range(30):
        start = rng.uniform((-5.0, -5.0), (40.0, 8.5))
        positions = start + np.cumsum(rng.normal(0.0, 1.0, size=(25, 2)), axis=0)
        traj = Trajectory(f"a{i}", 10.0, positions)
        expected = assign_timesteps(traj, graph, MatchConfig())
        actual = assign_timesteps(traj, graph, MatchConfig(search_radius=radius))
        assert [a.entries for a in actual] == [e.entries for e in expected]
