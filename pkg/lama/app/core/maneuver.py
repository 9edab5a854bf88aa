"""
Maneuver module for LAMA.
Derives turn and lane-change maneuvers from a driven lane sequence.
"""
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Optional

from .exceptions import ConfigurationError
from .lane_graph import (
    ConnectivityKind,
    LaneGraph,
    LaneSegment,
    TurnDirection,
    segment_max_curvature,
    segment_orientation_change,
)
from .sequence import LaneSequence


class TurnManeuver(str, Enum):
    """Turn maneuver of a lane sequence."""
    GOING_STRAIGHT = "going_straight"
    TURNING_LEFT = "turning_left"
    TURNING_RIGHT = "turning_right"
    BOTH = "both"

    @property
    def label(self) -> str:
        return _TURN_LABELS[self]


class LaneChangeManeuver(str, Enum):
    """Lane-change maneuver of a lane sequence."""
    FOLLOWING_LANE = "following_lane"
    CHANGING_LANE_LEFT = "changing_lane_left"
    CHANGING_LANE_RIGHT = "changing_lane_right"
    BOTH = "both"

    @property
    def label(self) -> str:
        return _LANE_CHANGE_LABELS[self]


_TURN_LABELS = {
    TurnManeuver.GOING_STRAIGHT: "Going straight",
    TurnManeuver.TURNING_LEFT: "Turning left",
    TurnManeuver.TURNING_RIGHT: "Turning right",
    TurnManeuver.BOTH: "Both",
}

_LANE_CHANGE_LABELS = {
    LaneChangeManeuver.FOLLOWING_LANE: "Following lane",
    LaneChangeManeuver.CHANGING_LANE_LEFT: "Changing lane left",
    LaneChangeManeuver.CHANGING_LANE_RIGHT: "Changing lane right",
    LaneChangeManeuver.BOTH: "Both",
}

MIRRORED_TURN = {
    TurnManeuver.GOING_STRAIGHT: TurnManeuver.GOING_STRAIGHT,
    TurnManeuver.TURNING_LEFT: TurnManeuver.TURNING_RIGHT,
    TurnManeuver.TURNING_RIGHT: TurnManeuver.TURNING_LEFT,
    TurnManeuver.BOTH: TurnManeuver.BOTH,
}

MIRRORED_LANE_CHANGE = {
    LaneChangeManeuver.FOLLOWING_LANE: LaneChangeManeuver.FOLLOWING_LANE,
    LaneChangeManeuver.CHANGING_LANE_LEFT: LaneChangeManeuver.CHANGING_LANE_RIGHT,
    LaneChangeManeuver.CHANGING_LANE_RIGHT: LaneChangeManeuver.CHANGING_LANE_LEFT,
    LaneChangeManeuver.BOTH: LaneChangeManeuver.BOTH,
}


@dataclass(frozen=True)
class ManeuverLabel:
    """Turn and lane-change maneuver of one agent."""
    turn: TurnManeuver
    lane_change: LaneChangeManeuver
    source_sequence_confidence: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.source_sequence_confidence <= 1.0:
            raise ValueError(
                f"confidence must lie in [0, 1], got {self.source_sequence_confidence}"
            )

    def same_maneuver(self, other: "ManeuverLabel") -> bool:
        """Compare maneuvers, ignoring the confidence."""
        return self.turn == other.turn and self.lane_change == other.lane_change

    def mirrored(self) -> "ManeuverLabel":
        """Label of the scene reflected about the x-axis."""
        return ManeuverLabel(
            turn=MIRRORED_TURN[self.turn],
            lane_change=MIRRORED_LANE_CHANGE[self.lane_change],
            source_sequence_confidence=self.source_sequence_confidence,
        )


@dataclass(frozen=True)
class TurnInferenceConfig:
    """Thresholds for inferring missing turn directions."""
    curvature_min: float = 0.02
    orientation_min: float = 0.436

    def __post_init__(self):
        if not self.curvature_min > 0:
            raise ConfigurationError(f"curvature_min must be positive, got {self.curvature_min}")
        if not self.orientation_min > 0:
            raise ConfigurationError(
                f"orientation_min must be positive, got {self.orientation_min}"
            )

    @classmethod
    def from_dict(cls, config: Dict) -> "TurnInferenceConfig":
        """Create config from dictionary."""
        return cls(
            curvature_min=config.get("curvature_min", cls.curvature_min),
            orientation_min=config.get("orientation_min", cls.orientation_min),
        )


def infer_turn_direction(
    segment: LaneSegment,
    graph: LaneGraph,
    cfg: TurnInferenceConfig,
) -> TurnDirection:
    """Turn direction from curvature, orientation change and predecessor count.

    Geometric evidence (curvature above curvature_min and an orientation change
    beyond orientation_min) is always required. A segment with two or more
    predecessors, i.e. one that starts inside an intersection, qualifies at
    orientation_min; any other segment must turn by more than twice that.
    """
    orientation = segment_orientation_change(segment)
    if segment_max_curvature(segment) <= cfg.curvature_min:
        return TurnDirection.NONE

    merges = sum(1 for predecessor in segment.predecessors if predecessor in graph) >= 2
    magnitude = abs(orientation)
    if magnitude <= cfg.orientation_min:
        return TurnDirection.NONE
    if not merges and magnitude <= 2 * cfg.orientation_min:
        return TurnDirection.NONE
    return TurnDirection.LEFT if orientation > 0 else TurnDirection.RIGHT


def segment_turn_direction(
    segment: LaneSegment,
    graph: LaneGraph,
    cfg: TurnInferenceConfig,
) -> TurnDirection:
    """Stored turn direction, inferred when the map lacks the attribute."""
    if segment.turn_direction is not None:
        return segment.turn_direction
    return infer_turn_direction(segment, graph, cfg)


def derive_turn_maneuver(
    seq: LaneSequence,
    graph: LaneGraph,
    cfg: TurnInferenceConfig,
) -> TurnManeuver:
    """Turn maneuver from the set of turn directions along the sequence."""
    directions = {
        segment_turn_direction(graph.segment(segment_id), graph, cfg)
        for segment_id in seq.segment_ids
    }
    directions.discard(TurnDirection.NONE)
    if not directions:
        return TurnManeuver.GOING_STRAIGHT
    if directions == {TurnDirection.LEFT}:
        return TurnManeuver.TURNING_LEFT
    if directions == {TurnDirection.RIGHT}:
        return TurnManeuver.TURNING_RIGHT
    return TurnManeuver.BOTH


def derive_lane_change_maneuver(seq: LaneSequence) -> LaneChangeManeuver:
    """Lane-change maneuver from the neighbor transitions of the sequence."""
    counts = Counter(seq.transitions)
    left = counts[ConnectivityKind.LEFT_NEIGHBOR]
    right = counts[ConnectivityKind.RIGHT_NEIGHBOR]
    if left and right:
        return LaneChangeManeuver.BOTH
    if left:
        return LaneChangeManeuver.CHANGING_LANE_LEFT
    if right:
        return LaneChangeManeuver.CHANGING_LANE_RIGHT
    return LaneChangeManeuver.FOLLOWING_LANE


def derive_label(
    seq: LaneSequence,
    graph: LaneGraph,
    cfg: TurnInferenceConfig,
) -> ManeuverLabel:
    """Both maneuvers of a lane sequence."""
    return ManeuverLabel(
        turn=derive_turn_maneuver(seq, graph, cfg),
        lane_change=derive_lane_change_maneuver(seq),
        source_sequence_confidence=seq.confidence,
    )


@dataclass
class ManeuverDistribution:
    """Categorical turn and lane-change counts over a set of agents."""
    turn: Dict[TurnManeuver, int]
    lane_change: Dict[LaneChangeManeuver, int]
    unlabeled: int = 0

    @property
    def labeled(self) -> int:
        return sum(self.turn.values())

    def turn_ratio(self, maneuver: TurnManeuver) -> Optional[float]:
        """Share of labeled agents, None when nothing is labeled."""
        return self.turn[maneuver] / self.labeled if self.labeled else None

    def lane_change_ratio(self, maneuver: LaneChangeManeuver) -> Optional[float]:
        return self.lane_change[maneuver] / self.labeled if self.labeled else None


def count_maneuvers(labels: Iterable[Optional[ManeuverLabel]]) -> ManeuverDistribution:
    """Count maneuvers; None labels (no lane sequence) count as unlabeled."""
    turns = Counter({maneuver: 0 for maneuver in TurnManeuver})
    lane_changes = Counter({maneuver: 0 for maneuver in LaneChangeManeuver})
    unlabeled = 0
    for label in labels:
        if label is None:
            unlabeled += 1
            continue
        turns[label.turn] += 1
        lane_changes[label.lane_change] += 1
    return ManeuverDistribution(turn=dict(turns), lane_change=dict(lane_changes), unlabeled=unlabeled)
