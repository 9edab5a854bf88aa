"""
Matching module for LAMA.
Computes per-timestep agent-lane assignments and condenses them into
agent-lane assignment intervals.
"""
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import ConfigurationError
from .lane_graph import LaneGraph, path_to_centerline_distances
from .logging import get_logger

_LOGGER = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Agent positions (meters) sampled at a fixed rate."""
    agent_id: str
    sample_rate: float
    positions: np.ndarray
    first_timestep: int = 0

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ConfigurationError(f"sample_rate must be positive, got {self.sample_rate}")
        positions = np.array(self.positions, dtype=float).reshape(-1, 2)
        positions.setflags(write=False)
        object.__setattr__(self, "positions", positions)

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class TimestepAssignment:
    """Lane segments an agent is assigned to at one timestep."""
    timestep: int
    entries: Tuple[Tuple[str, float], ...] = ()

    @property
    def segment_ids(self) -> List[str]:
        return [segment_id for segment_id, _ in self.entries]

    def confidence_of(self, segment_id: str) -> float:
        """Assignment confidence for a segment, 0 when not assigned."""
        for entry_id, confidence in self.entries:
            if entry_id == segment_id:
                return confidence
        return 0.0


@dataclass(frozen=True)
class AssignmentInterval:
    """Maximal run of timesteps during which an agent is assigned to one segment."""
    segment_id: str
    start: int
    end: int
    confidences: Tuple[float, ...] = field(default=(), compare=False, repr=False)

    def contains(self, timestep: int) -> bool:
        return self.start <= timestep <= self.end

    def confidence_at(self, timestep: int) -> float:
        """Stored assignment confidence at a covered timestep."""
        return self.confidences[timestep - self.start]


@dataclass(frozen=True)
class MatchConfig:
    """Thresholds for agent-lane matching."""
    d_th: float = 5.0
    p_th: float = 0.5
    search_radius: Optional[float] = None

    def __post_init__(self):
        if not self.d_th > 0:
            raise ConfigurationError(f"d_th must be positive, got {self.d_th}")
        if not 0 <= self.p_th < 1:
            raise ConfigurationError(f"p_th must lie in [0, 1), got {self.p_th}")
        if self.search_radius is not None and not self.search_radius > 0:
            raise ConfigurationError(f"search_radius must be positive, got {self.search_radius}")

    @property
    def radius(self) -> float:
        return self.d_th if self.search_radius is None else self.search_radius

    @classmethod
    def from_dict(cls, config: Dict) -> "MatchConfig":
        """Create config from dictionary."""
        return cls(
            d_th=config.get("d_th", cls.d_th),
            p_th=config.get("p_th", cls.p_th),
            search_radius=config.get("search_radius"),
        )


def assignment_confidence(d: float, d_th: float) -> float:
    """Assignment confidence max(0, 1 - d / d_th)."""
    if not d_th > 0:
        raise ConfigurationError(f"d_th must be positive, got {d_th}")
    return max(0.0, 1.0 - d / d_th)


def assign_timesteps(
    traj: Trajectory,
    graph: LaneGraph,
    cfg: MatchConfig,
) -> List[TimestepAssignment]:
    """Per-timestep assignments above p_th; empty timesteps are kept."""
    positions = traj.positions
    per_timestep: List[List[Tuple[str, float]]] = [[] for _ in range(len(positions))]
    radius = cfg.radius

    for segment in graph.segments_near_path(positions, radius):
        distances = path_to_centerline_distances(positions, segment)
        for t in np.flatnonzero(distances <= radius):
            confidence = assignment_confidence(float(distances[t]), cfg.d_th)
            if confidence > cfg.p_th:
                per_timestep[t].append((segment.segment_id, confidence))

    unmatched = sum(1 for entries in per_timestep if not entries)
    if unmatched:
        _LOGGER.debug("Timesteps without lane", agent_id=traj.agent_id, count=unmatched, total=len(positions))

    # candidates arrive sorted by id, so entries stay sorted
    return [
        TimestepAssignment(timestep=t, entries=tuple(entries))
        for t, entries in enumerate(per_timestep)
    ]


def build_intervals(assignments: Sequence[TimestepAssignment]) -> List[AssignmentInterval]:
    """One interval per segment and maximal run of consecutive assigned timesteps."""
    runs: Dict[str, List[List]] = defaultdict(list)
    for assignment in assignments:
        t = assignment.timestep
        for segment_id, confidence in assignment.entries:
            segment_runs = runs[segment_id]
            if segment_runs and segment_runs[-1][1] == t - 1:
                segment_runs[-1][1] = t
                segment_runs[-1][2].append(confidence)
            else:
                segment_runs.append([t, t, [confidence]])

    intervals = [
        AssignmentInterval(segment_id, start, end, tuple(confidences))
        for segment_id, segment_runs in runs.items()
        for start, end, confidences in segment_runs
    ]
    intervals.sort(key=lambda interval: (interval.start, interval.segment_id))
    return intervals
