"""
Lane graph module for LAMA.
Holds the HD-map lane graph and the geometric primitives on lane centerlines.
"""
import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np

from .exceptions import UnknownSegmentError
from .logging import get_logger

_LOGGER = get_logger(__name__)


class TurnDirection(str, Enum):
    """Turn direction attribute of a lane segment."""
    NONE = "none"
    LEFT = "left"
    RIGHT = "right"


class ConnectivityKind(str, Enum):
    """How one lane segment connects to another."""
    SUCCESSOR = "successor"
    LEFT_NEIGHBOR = "left_neighbor"
    RIGHT_NEIGHBOR = "right_neighbor"
    UNCONNECTED = "unconnected"


class ViolationKind(str, Enum):
    """Kinds of broken lane graph invariants."""
    DANGLING_ID = "dangling_id"
    ASYMMETRIC_LINK = "asymmetric_link"
    DEGENERATE_CENTERLINE = "degenerate_centerline"


@dataclass(frozen=True)
class GraphViolation:
    """One broken lane graph invariant."""
    kind: ViolationKind
    segment_id: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind.value}({self.segment_id}): {self.detail}"


@dataclass(frozen=True, eq=False)
class LaneSegment:
    """Lane segment with centerline (meters) and connectivity."""
    segment_id: str
    centerline: np.ndarray
    turn_direction: Optional[TurnDirection] = None
    successors: Tuple[str, ...] = ()
    predecessors: Tuple[str, ...] = ()
    left_neighbor: Optional[str] = None
    right_neighbor: Optional[str] = None

    def __post_init__(self):
        centerline = np.array(self.centerline, dtype=float).reshape(-1, 2)
        centerline.setflags(write=False)
        object.__setattr__(self, "centerline", centerline)
        object.__setattr__(self, "successors", tuple(self.successors))
        object.__setattr__(self, "predecessors", tuple(self.predecessors))

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        """Centerline bounding box (min_x, min_y, max_x, max_y)."""
        min_x, min_y = self.centerline.min(axis=0)
        max_x, max_y = self.centerline.max(axis=0)
        return float(min_x), float(min_y), float(max_x), float(max_y)

    def referenced_ids(self) -> Iterator[Tuple[str, str]]:
        """Yield (relation, id) for every segment this one references."""
        for successor in self.successors:
            yield "successor", successor
        for predecessor in self.predecessors:
            yield "predecessor", predecessor
        if self.left_neighbor is not None:
            yield "left_neighbor", self.left_neighbor
        if self.right_neighbor is not None:
            yield "right_neighbor", self.right_neighbor


class GridIndex:
    """Grid-bucket spatial index over centerline bounding boxes."""

    def __init__(self, segments: Iterable[LaneSegment], cell_size: float = 10.0):
        self.cell_size = cell_size
        self._cells: Dict[Tuple[int, int], List[str]] = defaultdict(list)
        for segment in segments:
            if len(segment.centerline) == 0:
                continue
            min_x, min_y, max_x, max_y = segment.bounds
            for cell in self._cells_in_box(min_x, min_y, max_x, max_y):
                self._cells[cell].append(segment.segment_id)

    def _cells_in_box(
        self, min_x: float, min_y: float, max_x: float, max_y: float
    ) -> Iterator[Tuple[int, int]]:
        x0, x1 = math.floor(min_x / self.cell_size), math.floor(max_x / self.cell_size)
        y0, y1 = math.floor(min_y / self.cell_size), math.floor(max_y / self.cell_size)
        for i in range(x0, x1 + 1):
            for j in range(y0, y1 + 1):
                yield i, j

    def candidates(self, points: np.ndarray, radius: float) -> Set[str]:
        """Ids of all segments whose bounding box may lie within radius of any point."""
        found: Set[str] = set()
        cells: Set[Tuple[int, int]] = set()
        for x, y in np.asarray(points, dtype=float).reshape(-1, 2):
            cells.update(self._cells_in_box(x - radius, y - radius, x + radius, y + radius))
        for cell in cells:
            found.update(self._cells.get(cell, ()))
        return found


class LaneGraph:
    """Immutable lane graph with a spatial index."""

    def __init__(self, segments: Iterable[LaneSegment], cell_size: float = 10.0):
        """Initialize lane graph."""
        self._segments: Dict[str, LaneSegment] = {}
        for segment in segments:
            self._segments[segment.segment_id] = segment
        self.spatial_index = GridIndex(self._segments.values(), cell_size=cell_size)

    def __contains__(self, segment_id: str) -> bool:
        return segment_id in self._segments

    def __iter__(self) -> Iterator[LaneSegment]:
        return iter(self._segments.values())

    def __len__(self) -> int:
        return len(self._segments)

    @property
    def segment_ids(self) -> List[str]:
        return list(self._segments)

    def segment(self, segment_id: str) -> LaneSegment:
        """Get a segment by id."""
        try:
            return self._segments[segment_id]
        except KeyError:
            raise UnknownSegmentError(segment_id) from None

    def segments_within(self, point: Sequence[float], radius: float) -> List[Tuple[str, float]]:
        """All (segment id, distance) with centerline within radius of point, sorted by id."""
        point = np.asarray(point, dtype=float)
        result = []
        for segment_id in sorted(self.spatial_index.candidates(point, radius)):
            distance = point_to_centerline_distance(point, self._segments[segment_id])
            if distance <= radius:
                result.append((segment_id, distance))
        return result

    def segments_near_path(self, points: np.ndarray, radius: float) -> List[LaneSegment]:
        """Candidate segments for a whole path; a superset of every per-point query."""
        return [
            self._segments[segment_id]
            for segment_id in sorted(self.spatial_index.candidates(points, radius))
        ]


def _points_to_polyline_distances(points: np.ndarray, polyline: np.ndarray) -> np.ndarray:
    """Distance from each point (M, 2) to a polyline (N, 2)."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(polyline) == 1:
        return np.hypot(points[:, 0] - polyline[0, 0], points[:, 1] - polyline[0, 1])

    start = polyline[:-1]
    delta = polyline[1:] - start
    length_sq = delta[:, 0] * delta[:, 0] + delta[:, 1] * delta[:, 1]

    # (M, N-1) offsets from every sub-segment start
    offset_x = points[:, 0, None] - start[None, :, 0]
    offset_y = points[:, 1, None] - start[None, :, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (offset_x * delta[None, :, 0] + offset_y * delta[None, :, 1]) / length_sq[None, :]
    t = np.where(length_sq[None, :] > 0.0, np.clip(t, 0.0, 1.0), 0.0)
    dx = offset_x - t * delta[None, :, 0]
    dy = offset_y - t * delta[None, :, 1]
    return np.hypot(dx, dy).min(axis=1)


def point_to_centerline_distance(point: Sequence[float], segment: LaneSegment) -> float:
    """Shortest Euclidean distance between a point and the segment centerline."""
    return float(_points_to_polyline_distances(np.asarray(point, dtype=float), segment.centerline)[0])


def path_to_centerline_distances(points: np.ndarray, segment: LaneSegment) -> np.ndarray:
    """Vectorized point_to_centerline_distance over many points."""
    return _points_to_polyline_distances(points, segment.centerline)


def menger_curvatures(polyline: np.ndarray) -> np.ndarray:
    """Menger curvature of every consecutive point triple."""
    polyline = np.asarray(polyline, dtype=float).reshape(-1, 2)
    if len(polyline) < 3:
        return np.zeros(0)
    p0, p1, p2 = polyline[:-2], polyline[1:-1], polyline[2:]
    # 2 * triangle area
    cross = np.abs(
        (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
        - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0])
    )
    a = np.hypot(p1[:, 0] - p0[:, 0], p1[:, 1] - p0[:, 1])
    b = np.hypot(p2[:, 0] - p1[:, 0], p2[:, 1] - p1[:, 1])
    c = np.hypot(p2[:, 0] - p0[:, 0], p2[:, 1] - p0[:, 1])
    denominator = a * b * c
    with np.errstate(divide="ignore", invalid="ignore"):
        curvature = np.where(denominator > 0.0, 2.0 * cross / denominator, 0.0)
    return curvature


def segment_max_curvature(segment: LaneSegment) -> float:
    """Maximum Menger curvature (1/m) along the segment centerline."""
    curvatures = menger_curvatures(segment.centerline)
    if curvatures.size == 0:
        return 0.0
    return float(curvatures.max())


def segment_orientation_change(segment: LaneSegment) -> float:
    """Heading of the last sub-segment minus heading of the first, left positive."""
    centerline = segment.centerline
    if len(centerline) < 2:
        return 0.0
    first = centerline[1] - centerline[0]
    last = centerline[-1] - centerline[-2]
    # argument of last * conj(first)
    real = last[0] * first[0] + last[1] * first[1]
    imag = last[1] * first[0] - last[0] * first[1]
    angle = math.atan2(imag, real)
    return math.pi if angle <= -math.pi else angle


def connectivity(graph: LaneGraph, from_id: str, to_id: str) -> ConnectivityKind:
    """Connectivity from one segment to another; successor wins ties."""
    source = graph.segment(from_id)
    graph.segment(to_id)
    if to_id in source.successors:
        return ConnectivityKind.SUCCESSOR
    if source.left_neighbor == to_id:
        return ConnectivityKind.LEFT_NEIGHBOR
    if source.right_neighbor == to_id:
        return ConnectivityKind.RIGHT_NEIGHBOR
    return ConnectivityKind.UNCONNECTED


def validate_graph(graph: LaneGraph) -> List[GraphViolation]:
    """Return one violation per broken lane graph invariant; empty when valid."""
    violations: List[GraphViolation] = []
    for segment in graph:
        centerline = segment.centerline
        if len(centerline) < 2:
            violations.append(GraphViolation(
                ViolationKind.DEGENERATE_CENTERLINE,
                segment.segment_id,
                f"centerline has {len(centerline)} point(s)",
            ))
        elif np.any(np.all(np.diff(centerline, axis=0) == 0.0, axis=1)):
            violations.append(GraphViolation(
                ViolationKind.DEGENERATE_CENTERLINE,
                segment.segment_id,
                "centerline has coinciding consecutive points",
            ))

        for relation, other_id in segment.referenced_ids():
            if other_id not in graph:
                violations.append(GraphViolation(
                    ViolationKind.DANGLING_ID,
                    segment.segment_id,
                    f"{relation} {other_id!r} does not exist",
                ))
                continue
            other = graph.segment(other_id)
            if relation == "successor" and segment.segment_id not in other.predecessors:
                violations.append(GraphViolation(
                    ViolationKind.ASYMMETRIC_LINK,
                    segment.segment_id,
                    f"successor {other_id!r} does not list it as predecessor",
                ))
            elif relation == "predecessor" and segment.segment_id not in other.successors:
                violations.append(GraphViolation(
                    ViolationKind.ASYMMETRIC_LINK,
                    segment.segment_id,
                    f"predecessor {other_id!r} does not list it as successor",
                ))

    if violations:
        _LOGGER.debug("Lane graph violations found", count=len(violations))
    return violations
