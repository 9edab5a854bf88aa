import numpy as np
import pytest

from app.core.exceptions import PathExplosionError
from app.core.lane_graph import ConnectivityKind, LaneGraph, connectivity
from app.core.matching import (
    AssignmentInterval,
    MatchConfig,
    Trajectory,
    assign_timesteps,
    build_intervals,
)
from app.core.sequence import (
    LaneSequence,
    enumerate_sequences,
    maneuver_confidence,
    select_best,
)

from .helpers import segment


def _random_graph(rng, lanes):
    ids = [f"s{i}" for i in range(lanes)]
    segments = []
    for i, segment_id in enumerate(ids):
        others = [other for other in ids if other != segment_id]
        successors = [other for other in others if rng.random() < 0.4]
        left = others[int(rng.integers(len(others)))] if others and rng.random() < 0.4 else None
        right = others[int(rng.integers(len(others)))] if others and rng.random() < 0.4 else None
        segments.append(segment(segment_id, [(i, 0), (i + 1, 0)], successors=successors, left=left, right=right))
    return LaneGraph(segments), ids


def _random_intervals(rng, ids, timesteps, count):
    intervals = {}
    for _ in range(count):
        start = int(rng.integers(timesteps))
        end = int(rng.integers(start, timesteps))
        segment_id = ids[int(rng.integers(len(ids)))]
        confidences = tuple(float(c) for c in rng.uniform(0.5, 1.0, size=end - start + 1))
        intervals[(segment_id, start, end)] = AssignmentInterval(segment_id, start, end, confidences)
    return list(intervals.values())


def _oracle(intervals, graph, timesteps):
    """Plain recursive enumeration of every valid chain."""
    found = []

    def extend(chain):
        if chain[-1].start <= timesteps - 1 <= chain[-1].end:
            found.append(chain)
        for candidate in intervals:
            if any(candidate is member for member in chain):
                continue
            previous = chain[-1]
            if not previous.start <= candidate.start <= previous.end + 1:
                continue
            if connectivity(graph, previous.segment_id, candidate.segment_id) is ConnectivityKind.UNCONNECTED:
                continue
            extend(chain + [candidate])

    for interval in intervals:
        if interval.start == 0:
            extend([interval])
    return found


def _key(chain):
    return tuple((interval.segment_id, interval.start, interval.end) for interval in chain)


def test_enumeration_matches_recursive_oracle():
    rng = np.random.default_rng(17)
    for _ in range(200):
        graph, ids = _random_graph(rng, int(rng.integers(1, 6)))
        timesteps = int(rng.integers(1, 10))
        intervals = _random_intervals(rng, ids, timesteps, int(rng.integers(0, 13)))

        sequences = enumerate_sequences(intervals, graph, timesteps, max_sequences=10 ** 6)
        expected = _oracle(intervals, graph, timesteps)

        assert sorted(_key(seq.segments) for seq in sequences) == sorted(_key(chain) for chain in expected)
        for seq in sequences:
            assert len(seq.transitions) == len(seq.segments) - 1
            for previous, following, kind in zip(seq.segments, seq.segments[1:], seq.transitions):
                assert kind == connectivity(graph, previous.segment_id, following.segment_id)
                assert kind is not ConnectivityKind.UNCONNECTED


def test_removing_an_inner_interval_only_drops_sequences():
    rng = np.random.default_rng(29)
    for _ in range(200):
        graph, ids = _random_graph(rng, int(rng.integers(1, 6)))
        timesteps = int(rng.integers(3, 10))
        intervals = _random_intervals(rng, ids, timesteps, int(rng.integers(1, 13)))
        inner = [i for i in intervals if not i.contains(0) and not i.contains(timesteps - 1)]
        if not inner:
            continue
        removed = inner[int(rng.integers(len(inner)))]
        remaining = [i for i in intervals if i is not removed]

        full = {_key(seq.segments) for seq in enumerate_sequences(intervals, graph, timesteps, 10 ** 6)}
        reduced = {_key(seq.segments) for seq in enumerate_sequences(remaining, graph, timesteps, 10 ** 6)}
        assert reduced <= full


def test_enumeration_is_deterministic():
    rng = np.random.default_rng(31)
    for _ in range(100):
        graph, ids = _random_graph(rng, int(rng.integers(1, 6)))
        timesteps = int(rng.integers(1, 10))
        intervals = _random_intervals(rng, ids, timesteps, int(rng.integers(0, 13)))
        first = enumerate_sequences(intervals, graph, timesteps, 10 ** 6)
        second = enumerate_sequences(intervals, graph, timesteps, 10 ** 6)
        assert [(_key(s.segments), s.confidence, s.transitions) for s in first] == [
            (_key(s.segments), s.confidence, s.transitions) for s in second
        ]


def test_sequence_confidence_equals_maneuver_confidence(two_lane_graph):
    rng = np.random.default_rng(23)
    config = MatchConfig()
    for _ in range(50):
        x = np.linspace(0.0, 55.0, 40)
        y = np.linspace(rng.uniform(-1.0, 4.5), rng.uniform(-1.0, 4.5), 40)
        traj = Trajectory("a", 10.0, np.column_stack([x, y]))
        assignments = assign_timesteps(traj, two_lane_graph, config)
        intervals = build_intervals(assignments)
        for seq in enumerate_sequences(intervals, two_lane_graph, len(traj)):
            assert seq.confidence == pytest.approx(maneuver_confidence(seq, assignments), abs=1e-12)
            assert 0.0 <= seq.confidence <= 1.0


def test_lane_change_sequence(two_lane_graph):
    # right lane for 2 s, then on the left lane
    positions = [(i * 1.0, 0.0) for i in range(20)] + [(20.0 + i, 3.5) for i in range(20)]
    traj = Trajectory("a", 10.0, positions)
    assignments = assign_timesteps(traj, two_lane_graph, MatchConfig())
    sequences = enumerate_sequences(build_intervals(assignments), two_lane_graph, len(traj))
    best = select_best(sequences)
    assert best.segment_ids == ("r0", "l0", "l1")
    assert best.transitions == (ConnectivityKind.LEFT_NEIGHBOR, ConnectivityKind.SUCCESSOR)
    assert best.lane_change_count == 1
    assert best.confidence == pytest.approx(1.0)


def test_search_continues_past_last_timestep():
    graph = LaneGraph([
        segment("a", [(0, 0), (10, 0)], successors=["b"]),
        segment("b", [(10, 0), (20, 0)], predecessors=["a"]),
    ])
    intervals = [
        AssignmentInterval("a", 0, 4, (0.9,) * 5),
        AssignmentInterval("b", 3, 4, (0.8,) * 2),
    ]
    sequences = enumerate_sequences(intervals, graph, 5)
    assert [seq.segment_ids for seq in sequences] == [("a",), ("a", "b")]


def test_gap_breaks_the_chain():
    graph = LaneGraph([
        segment("a", [(0, 0), (10, 0)], successors=["b"]),
        segment("b", [(10, 0), (20, 0)], predecessors=["a"]),
    ])
    intervals = [
        AssignmentInterval("a", 0, 2, (0.9,) * 3),
        AssignmentInterval("b", 4, 5, (0.9,) * 2),
    ]
    assert enumerate_sequences(intervals, graph, 6) == []
    intervals[1] = AssignmentInterval("b", 3, 5, (0.9,) * 3)
    assert [seq.segment_ids for seq in enumerate_sequences(intervals, graph, 6)] == [("a", "b")]


def test_no_root_no_sequences(two_lane_graph):
    intervals = [AssignmentInterval("r0", 1, 5, (0.9,) * 5)]
    assert enumerate_sequences(intervals, two_lane_graph, 6) == []
    assert enumerate_sequences([], two_lane_graph, 6) == []
    assert enumerate_sequences(intervals, two_lane_graph, 0) == []


def test_path_explosion_guard(two_lane_graph):
    # between both lanes, every neighbor hop yields another sequence
    traj = Trajectory("a", 10.0, [(i * 0.5, 1.75) for i in range(40)])
    intervals = build_intervals(assign_timesteps(traj, two_lane_graph, MatchConfig()))
    assert len(enumerate_sequences(intervals, two_lane_graph, len(traj))) > 1
    with pytest.raises(PathExplosionError) as excinfo:
        enumerate_sequences(intervals, two_lane_graph, len(traj), max_sequences=1)
    assert excinfo.value.limit == 1


def _sequence(ids, kinds, confidence):
    intervals = tuple(AssignmentInterval(segment_id, 0, 0, (1.0,)) for segment_id in ids)
    return LaneSequence(intervals, tuple(kinds), confidence)


def test_select_best_prefers_confidence():
    low = _sequence(["a"], [], 0.7)
    high = _sequence(["b", "c"], [ConnectivityKind.LEFT_NEIGHBOR], 0.9)
    assert select_best([low, high]) is high


def test_select_best_tie_breaks():
    lane_change = _sequence(["a", "b"], [ConnectivityKind.LEFT_NEIGHBOR], 0.8)
    longer = _sequence(["a", "c", "d"], [ConnectivityKind.SUCCESSOR] * 2, 0.8)
    shorter = _sequence(["a", "e"], [ConnectivityKind.SUCCESSOR], 0.8)
    same_length = _sequence(["a", "d"], [ConnectivityKind.SUCCESSOR], 0.8)

    assert select_best([lane_change, longer]) is longer
    assert select_best([longer, shorter]) is shorter
    assert select_best([shorter, same_length]) is same_length
    assert select_best([lane_change, longer, shorter, same_length]) is same_length


def test_select_best_of_nothing():
    assert select_best([]) is None
