import math

import numpy as np
import pytest
from shapely import affinity
from shapely.geometry import LineString, Point

from app.core.exceptions import UnknownSegmentError
from app.core.lane_graph import (
    ConnectivityKind,
    GridIndex,
    LaneGraph,
    ViolationKind,
    connectivity,
    menger_curvatures,
    path_to_centerline_distances,
    point_to_centerline_distance,
    segment_max_curvature,
    segment_orientation_change,
    validate_graph,
)

from .helpers import arc, segment


def _random_polyline(rng, points):
    steps = rng.normal(0.0, 5.0, size=(points - 1, 2))
    start = rng.uniform(-20.0, 20.0, size=(1, 2))
    return np.vstack([start, start + np.cumsum(steps, axis=0)])


def test_point_distance_matches_shapely():
    rng = np.random.default_rng(7)
    for _ in range(500):
        polyline = _random_polyline(rng, int(rng.integers(2, 8)))
        point = rng.uniform(-40.0, 40.0, size=2)
        distance = point_to_centerline_distance(point, segment("s", polyline))
        assert distance == pytest.approx(LineString(polyline).distance(Point(point)), abs=1e-3)


def test_point_distance_below_dense_sampling():
    rng = np.random.default_rng(11)
    for _ in range(100):
        polyline = _random_polyline(rng, 4)
        line = LineString(polyline)
        point = rng.uniform(-40.0, 40.0, size=2)
        samples = np.array([
            line.interpolate(s).coords[0]
            for s in np.linspace(0.0, line.length, 2000)
        ])
        sampled = np.hypot(samples[:, 0] - point[0], samples[:, 1] - point[1]).min()
        distance = point_to_centerline_distance(point, segment("s", polyline))
        assert distance <= sampled + 1e-9
        assert sampled - distance < 1e-3 + line.length / 2000


def test_path_distances_identical_to_point_distances():
    rng = np.random.default_rng(3)
    polyline = _random_polyline(rng, 6)
    lane = segment("s", polyline)
    points = rng.uniform(-30.0, 30.0, size=(50, 2))
    vectorized = path_to_centerline_distances(points, lane)
    for point, distance in zip(points, vectorized):
        assert point_to_centerline_distance(point, lane) == distance


def test_distance_to_single_point_centerline():
    lane = segment("p", [(1.0, 1.0)])
    assert point_to_centerline_distance((4.0, 5.0), lane) == 5.0


@pytest.mark.parametrize("radius", [5.0, 10.0, 50.0])
def test_curvature_of_circle_samples(radius):
    curvatures = menger_curvatures(arc(radius, np.pi / 2, points=20))
    assert np.all(np.abs(curvatures - 1.0 / radius) <= 1e-9 / radius)


def test_straight_centerline_has_zero_curvature():
    assert segment_max_curvature(segment("s", [(0, 0), (5, 0), (10, 0)])) == 0.0
    assert segment_max_curvature(segment("s", [(0, 0), (10, 0)])) == 0.0


def test_orientation_change_sign():
    left = segment("left", arc(15.0, np.pi / 2))
    right = segment("right", arc(15.0, -np.pi / 2, start_angle=np.pi / 2))
    straight = segment("straight", [(0, 0), (10, 0), (20, 0)])
    # chord headings lag the tangent by half a sample step at both ends
    expected = np.pi / 2 * (1 - 1 / 15)
    assert segment_orientation_change(left) == pytest.approx(expected)
    assert segment_orientation_change(right) == pytest.approx(-expected)
    assert segment_orientation_change(straight) == 0.0


def test_orientation_change_of_u_turn_is_pi():
    u_turn = segment("u", [(0, 0), (10, 0), (10, 5), (0, 5)])
    assert segment_orientation_change(u_turn) == math.pi


def test_connectivity(two_lane_graph):
    assert connectivity(two_lane_graph, "r0", "r1") is ConnectivityKind.SUCCESSOR
    assert connectivity(two_lane_graph, "r0", "l0") is ConnectivityKind.LEFT_NEIGHBOR
    assert connectivity(two_lane_graph, "l1", "r1") is ConnectivityKind.RIGHT_NEIGHBOR
    assert connectivity(two_lane_graph, "r1", "r0") is ConnectivityKind.UNCONNECTED
    assert connectivity(two_lane_graph, "r0", "l1") is ConnectivityKind.UNCONNECTED


def test_connectivity_prefers_successor():
    graph = LaneGraph([
        segment("a", [(0, 0), (10, 0)], successors=["b"], left="b"),
        segment("b", [(10, 0), (20, 0)], predecessors=["a"]),
    ])
    assert connectivity(graph, "a", "b") is ConnectivityKind.SUCCESSOR


def test_connectivity_unknown_id(two_lane_graph):
    with pytest.raises(UnknownSegmentError) as excinfo:
        connectivity(two_lane_graph, "r0", "missing")
    assert excinfo.value.segment_id == "missing"
    with pytest.raises(UnknownSegmentError):
        connectivity(two_lane_graph, "missing", "r0")


def test_segments_within_filters_exactly(two_lane_graph):
    within = two_lane_graph.segments_within((10.0, 0.5), 2.5)
    assert [segment_id for segment_id, _ in within] == ["r0"]
    assert within[0][1] == pytest.approx(0.5)
    ids = [segment_id for segment_id, _ in two_lane_graph.segments_within((30.0, 1.75), 2.5)]
    assert ids == ["l0", "l1", "r0", "r1"]


def test_grid_index_candidates_are_superset():
    rng = np.random.default_rng(5)
    segments = [segment(f"s{i}", _random_polyline(rng, 3)) for i in range(30)]
    graph = LaneGraph(segments, cell_size=7.0)
    index = GridIndex(segments, cell_size=7.0)
    for _ in range(100):
        point = rng.uniform(-40.0, 40.0, size=2)
        expected = {
            lane.segment_id for lane in segments
            if point_to_centerline_distance(point, lane) <= 4.0
        }
        assert expected <= index.candidates(point, 4.0)
        assert {segment_id for segment_id, _ in graph.segments_within(point, 4.0)} == expected


def test_valid_graph_has_no_violations(two_lane_graph):
    assert validate_graph(two_lane_graph) == []


def test_dangling_successor_is_reported():
    graph = LaneGraph([segment("a", [(0, 0), (10, 0)], successors=["ghost"])])
    violations = validate_graph(graph)
    assert [violation.kind for violation in violations] == [ViolationKind.DANGLING_ID]
    assert "ghost" in str(violations[0])


def test_asymmetric_link_is_reported():
    graph = LaneGraph([
        segment("a", [(0, 0), (10, 0)], successors=["b"]),
        segment("b", [(10, 0), (20, 0)]),
    ])
    kinds = [violation.kind for violation in validate_graph(graph)]
    assert kinds == [ViolationKind.ASYMMETRIC_LINK]


def test_degenerate_centerlines_are_reported():
    graph = LaneGraph([
        segment("single", [(0, 0)]),
        segment("repeated", [(0, 0), (0, 0), (5, 0)]),
    ])
    violations = validate_graph(graph)
    assert {violation.segment_id for violation in violations} == {"single", "repeated"}
    assert all(violation.kind is ViolationKind.DEGENERATE_CENTERLINE for violation in violations)


def test_unknown_segment_lookup(two_lane_graph):
    assert "r0" in two_lane_graph
    assert "x" not in two_lane_graph
    assert len(two_lane_graph) == 4
    with pytest.raises(UnknownSegmentError):
        two_lane_graph.segment("x")


def test_curvature_survives_rigid_motion():
    rng = np.random.default_rng(13)
    for _ in range(50):
        line = LineString(_random_polyline(rng, 6))
        moved = affinity.translate(
            affinity.rotate(line, float(rng.uniform(0.0, 360.0)), origin=(0, 0)),
            xoff=float(rng.uniform(-100, 100)),
            yoff=float(rng.uniform(-100, 100)),
        )
        original = segment_max_curvature(segment("s", np.asarray(line.coords)))
        assert segment_max_curvature(segment("s", np.asarray(moved.coords))) == pytest.approx(original, rel=1e-9, abs=1e-12)


def test_orientation_change_flips_under_mirror():
    rng = np.random.default_rng(17)
    for _ in range(50):
        line = LineString(_random_polyline(rng, int(rng.integers(2, 8))))
        mirrored = affinity.scale(line, xfact=1.0, yfact=-1.0, origin=(0, 0))
        original = segment_orientation_change(segment("s", np.asarray(line.coords)))
        if abs(original) > math.pi - 1e-9:
            continue
        flipped = segment_orientation_change(segment("s", np.asarray(mirrored.coords)))
        assert flipped == pytest.approx(-original, abs=1e-12)
