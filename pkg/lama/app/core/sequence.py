"""
Lane sequence module for LAMA.
Enumerates connectivity-valid lane sequences by depth-first search and
selects the one with the highest maneuver confidence.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .exceptions import PathExplosionError
from .lane_graph import ConnectivityKind, LaneGraph, connectivity
from .logging import get_logger
from .matching import AssignmentInterval, TimestepAssignment

_LOGGER = get_logger(__name__)

DEFAULT_MAX_SEQUENCES = 10_000

LANE_CHANGE_KINDS = (ConnectivityKind.LEFT_NEIGHBOR, ConnectivityKind.RIGHT_NEIGHBOR)


@dataclass(frozen=True)
class LaneSequence:
    """Ordered chain of assignment intervals connected in the lane graph."""
    segments: Tuple[AssignmentInterval, ...]
    transitions: Tuple[ConnectivityKind, ...]
    confidence: float

    @property
    def segment_ids(self) -> Tuple[str, ...]:
        return tuple(interval.segment_id for interval in self.segments)

    @property
    def lane_change_count(self) -> int:
        return sum(1 for kind in self.transitions if kind in LANE_CHANGE_KINDS)

    def __len__(self) -> int:
        return len(self.segments)


def _per_timestep_confidences(
    intervals: Sequence[AssignmentInterval], timestep_count: int
) -> List[float]:
    """Max confidence over covering intervals per timestep, 0 where uncovered."""
    values = [0.0] * timestep_count
    for interval in intervals:
        for t in range(interval.start, interval.end + 1):
            confidence = interval.confidence_at(t)
            if confidence > values[t]:
                values[t] = confidence
    return values


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def follows(previous: AssignmentInterval, following: AssignmentInterval) -> bool:
    """Temporal ordering between consecutive sequence intervals."""
    return previous.start <= following.start <= previous.end + 1


def enumerate_sequences(
    intervals: Sequence[AssignmentInterval],
    graph: LaneGraph,
    timestep_count: int,
    max_sequences: int = DEFAULT_MAX_SEQUENCES,
) -> List[LaneSequence]:
    """Every valid lane sequence from a t=0 interval to a t=T-1 interval, in DFS order."""
    if timestep_count < 1:
        return []
    nodes = sorted(intervals, key=lambda interval: (interval.start, interval.segment_id))
    last = timestep_count - 1

    edges: Dict[int, List[Tuple[int, ConnectivityKind]]] = {}
    for i, source in enumerate(nodes):
        edges[i] = []
        for j, target in enumerate(nodes):
            if i == j or not follows(source, target):
                continue
            kind = connectivity(graph, source.segment_id, target.segment_id)
            if kind is not ConnectivityKind.UNCONNECTED:
                edges[i].append((j, kind))

    sequences: List[LaneSequence] = []
    roots = [i for i, node in enumerate(nodes) if node.contains(0)]

    def visit(path: List[int], kinds: List[ConnectivityKind]) -> None:
        node = nodes[path[-1]]
        if node.contains(last):
            if len(sequences) >= max_sequences:
                _LOGGER.warning("Lane sequence search aborted", limit=max_sequences)
                raise PathExplosionError(max_sequences)
            chain = tuple(nodes[i] for i in path)
            confidence = _mean(_per_timestep_confidences(chain, timestep_count))
            sequences.append(LaneSequence(chain, tuple(kinds), confidence))
        for j, kind in edges[path[-1]]:
            if j in path:
                continue
            path.append(j)
            kinds.append(kind)
            visit(path, kinds)
            path.pop()
            kinds.pop()

    for root in roots:
        visit([root], [])

    _LOGGER.debug(
        "Lane sequences enumerated",
        intervals=len(nodes),
        roots=len(roots),
        sequences=len(sequences),
    )
    return sequences


def maneuver_confidence(
    seq: LaneSequence,
    assignments: Sequence[TimestepAssignment],
) -> float:
    """Mean over all timesteps of the best covering assignment confidence."""
    values = []
    for assignment in assignments:
        t = assignment.timestep
        best = 0.0
        for interval in seq.segments:
            if interval.contains(t):
                best = max(best, assignment.confidence_of(interval.segment_id))
        values.append(best)
    return _mean(values)


def _selection_key(seq: LaneSequence):
    return (-seq.confidence, seq.lane_change_count, len(seq), seq.segment_ids)


def select_best(sequences: Sequence[LaneSequence]) -> Optional[LaneSequence]:
    """Highest confidence; ties prefer fewer lane changes, then shorter, then id order."""
    if not sequences:
        return None
    return min(sequences, key=_selection_key)
