"""
Dynamics module for LAMA.
Per-agent dynamic properties and numeric histograms.
"""
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .exceptions import ConfigurationError, UndefinedQuantityError
from .lane_graph import LaneGraph, segment_max_curvature
from .logging import get_logger
from .matching import Trajectory
from .sequence import LaneSequence

OUT_OF_RANGE = "out of range"
UNLABELED = "unlabeled"

_LOGGER = get_logger(__name__)


@dataclass(frozen=True)
class DynamicsSummary:
    """Dynamic properties of one agent trajectory."""
    agent_id: str
    avg_velocity: Optional[float]
    avg_acceleration: Optional[float]
    max_driven_curvature: Optional[float] = None


def _speeds(traj: Trajectory) -> np.ndarray:
    steps = np.diff(traj.positions, axis=0)
    return np.hypot(steps[:, 0], steps[:, 1]) * traj.sample_rate


def average_velocity(traj: Trajectory) -> float:
    """Mean finite-difference speed (m/s)."""
    if len(traj) < 2:
        raise UndefinedQuantityError(
            f"average velocity needs at least 2 positions, agent {traj.agent_id} has {len(traj)}"
        )
    return float(_speeds(traj).mean())


def average_acceleration(traj: Trajectory) -> float:
    """Mean signed change of speed (m/s^2); braking is negative."""
    if len(traj) < 3:
        raise UndefinedQuantityError(
            f"average acceleration needs at least 3 positions, agent {traj.agent_id} has {len(traj)}"
        )
    return float((np.diff(_speeds(traj)) * traj.sample_rate).mean())


def max_driven_curvature(seq: LaneSequence, graph: LaneGraph) -> float:
    """Maximum centerline curvature (1/m) over the segments of a lane sequence."""
    return max(segment_max_curvature(graph.segment(segment_id)) for segment_id in seq.segment_ids)


def _defined(quantity: Callable[[Trajectory], float], traj: Trajectory) -> Optional[float]:
    try:
        return quantity(traj)
    except UndefinedQuantityError as e:
        _LOGGER.warning("Dynamics undefined", agent_id=traj.agent_id, error=str(e))
        return None


def summarize_dynamics(
    traj: Trajectory,
    seq: Optional[LaneSequence],
    graph: LaneGraph,
) -> DynamicsSummary:
    """Dynamics of one agent; each quantity is None where it is undefined.

    Curvature is absent without a lane sequence.
    """
    return DynamicsSummary(
        agent_id=traj.agent_id,
        avg_velocity=_defined(average_velocity, traj),
        avg_acceleration=_defined(average_acceleration, traj),
        max_driven_curvature=max_driven_curvature(seq, graph) if seq is not None else None,
    )


def check_edges(edges: Sequence[float]) -> np.ndarray:
    """Validate bin edges: at least two, strictly increasing."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2:
        raise ConfigurationError(f"bin edges need at least 2 values, got {edges.tolist()}")
    if not np.all(np.diff(edges) > 0):
        raise ConfigurationError(f"bin edges must be strictly increasing, got {edges.tolist()}")
    return edges


def assign_bin(value: float, edges: Sequence[float]) -> Optional[int]:
    """Bin index with half-open bins [e_i, e_i+1) and a closed final bin; None outside."""
    edges = np.asarray(edges, dtype=float)
    if not np.isfinite(value) or value < edges[0] or value > edges[-1]:
        return None
    if value == edges[-1]:
        return len(edges) - 2
    return int(np.searchsorted(edges, value, side="right")) - 1


def _format_edge(value: float) -> str:
    return f"{value:g}"


def bin_labels(edges: Sequence[float], scale: float = 1.0) -> List[str]:
    """Labels such as "[0, 4)" ... "[16, 20]"; edges are multiplied by scale for display."""
    scaled = [round(float(edge) * scale, 9) for edge in edges]
    labels = [
        f"[{_format_edge(low)}, {_format_edge(high)})"
        for low, high in zip(scaled[:-2], scaled[1:-1])
    ]
    labels.append(f"[{_format_edge(scaled[-2])}, {_format_edge(scaled[-1])}]")
    return labels


def bin_label(value: Optional[float], edges: Sequence[float], scale: float = 1.0) -> str:
    """Group label of a value; missing values are unlabeled."""
    if value is None:
        return UNLABELED
    index = assign_bin(value, edges)
    if index is None:
        return OUT_OF_RANGE
    return bin_labels(edges, scale)[index]


@dataclass
class Histogram:
    """Counts per bin plus under- and overflow."""
    edges: List[float]
    counts: List[int]
    underflow: int = 0
    overflow: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts) + self.underflow + self.overflow

    def merge(self, other: "Histogram") -> "Histogram":
        """Combine two histograms over identical edges."""
        if list(self.edges) != list(other.edges):
            raise ConfigurationError("cannot merge histograms with different edges")
        return Histogram(
            edges=list(self.edges),
            counts=[a + b for a, b in zip(self.counts, other.counts)],
            underflow=self.underflow + other.underflow,
            overflow=self.overflow + other.overflow,
        )


def build_histogram(samples: Sequence[float], edges: Sequence[float]) -> Histogram:
    """Histogram with half-open bins and a right-closed final bin.

    Non-finite samples are counted as overflow.
    """
    edges = check_edges(edges)
    counts = [0] * (len(edges) - 1)
    underflow = overflow = 0
    for value in samples:
        index = assign_bin(value, edges)
        if index is not None:
            counts[index] += 1
        elif np.isfinite(value) and value < edges[0]:
            underflow += 1
        else:
            overflow += 1
    return Histogram(edges=edges.tolist(), counts=counts, underflow=underflow, overflow=overflow)
