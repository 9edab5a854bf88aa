"""
Metrics module for LAMA.
Multi-modal displacement errors and grouped evaluation with mean and std.
"""
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np

from .exceptions import ShapeError
from .logging import get_logger

_LOGGER = get_logger(__name__)

DEFAULT_MODES = 6


class GroupingDimension(str, Enum):
    """Dimensions samples can be grouped by."""
    VELOCITY = "velocity"
    ACCELERATION = "acceleration"
    CURVATURE = "curvature"
    TURN = "turn"
    LANE_CHANGE = "lane_change"


@dataclass(frozen=True, eq=False)
class PredictionSet:
    """K predicted modes of one agent, shape (K, H, 2)."""
    agent_id: str
    scene_id: str
    modes: np.ndarray

    def __post_init__(self):
        modes = np.asarray(self.modes, dtype=float)
        if modes.ndim != 3 or modes.shape[2] != 2:
            raise ShapeError(
                f"modes of {self.scene_id}/{self.agent_id} must have shape (K, H, 2), got {modes.shape}"
            )
        if modes.shape[0] < 1 or modes.shape[1] < 1:
            raise ShapeError(f"{self.scene_id}/{self.agent_id} needs K >= 1 modes of H >= 1 points")
        modes.setflags(write=False)
        object.__setattr__(self, "modes", modes)

    @property
    def mode_count(self) -> int:
        return self.modes.shape[0]

    @property
    def horizon(self) -> int:
        return self.modes.shape[1]

    def first_modes(self, k: int) -> "PredictionSet":
        """The first k modes."""
        return PredictionSet(self.agent_id, self.scene_id, self.modes[:k])


@dataclass(frozen=True)
class MetricRecord:
    """Per-sample displacement errors and group keys."""
    agent_id: str
    scene_id: str
    min_ade: float
    min_fde: float
    velocity_bin: str
    acceleration_bin: str
    curvature_bin: str
    turn: str
    lane_change: str
    model: str = "model"

    def group_key(self, grouping: GroupingDimension) -> str:
        return {
            GroupingDimension.VELOCITY: self.velocity_bin,
            GroupingDimension.ACCELERATION: self.acceleration_bin,
            GroupingDimension.CURVATURE: self.curvature_bin,
            GroupingDimension.TURN: self.turn,
            GroupingDimension.LANE_CHANGE: self.lane_change,
        }[grouping]


@dataclass(frozen=True)
class GroupStats:
    """Count, mean and std of both metrics in one group; means are None when empty."""
    group: str
    n: int
    ade_mean: Optional[float] = None
    ade_std: Optional[float] = None
    fde_mean: Optional[float] = None
    fde_std: Optional[float] = None


@dataclass(frozen=True)
class GroupedReport:
    """Grouped evaluation along one dimension."""
    dimension: GroupingDimension
    rows: List[GroupStats]

    @property
    def total(self) -> int:
        return sum(row.n for row in self.rows)

    def row(self, group: str) -> GroupStats:
        for row in self.rows:
            if row.group == group:
                return row
        raise KeyError(group)


def _mode_errors(pred: PredictionSet, gt: np.ndarray) -> np.ndarray:
    gt = np.asarray(gt, dtype=float)
    if gt.shape != (pred.horizon, 2):
        raise ShapeError(
            f"ground truth of {pred.scene_id}/{pred.agent_id} has shape {gt.shape}, "
            f"predictions have horizon {pred.horizon}"
        )
    delta = pred.modes - gt[None, :, :]
    return np.hypot(delta[..., 0], delta[..., 1])


def min_ade(pred: PredictionSet, gt: np.ndarray) -> float:
    """Minimum over modes of the mean Euclidean error."""
    return float(_mode_errors(pred, gt).mean(axis=1).min())


def min_fde(pred: PredictionSet, gt: np.ndarray) -> float:
    """Minimum over modes of the endpoint Euclidean error."""
    return float(_mode_errors(pred, gt)[:, -1].min())


def grouped_evaluate(
    records: Sequence[MetricRecord],
    grouping: GroupingDimension,
    groups: Sequence[str],
    ddof: int = 0,
) -> GroupedReport:
    """Count, mean and std of min_ade and min_fde per group.

    Every group in ``groups`` gets a row, empty ones included; keys outside
    ``groups`` are appended in first-seen order. ddof=0 is the population std.
    """
    ade: Dict[str, List[float]] = defaultdict(list)
    fde: Dict[str, List[float]] = defaultdict(list)
    order = list(groups)
    for record in records:
        key = record.group_key(grouping)
        if key not in order:
            _LOGGER.warning("Record outside known groups", group=key, dimension=grouping.value)
            order.append(key)
        ade[key].append(record.min_ade)
        fde[key].append(record.min_fde)

    rows = []
    for group in order:
        n = len(ade[group])
        if n == 0:
            rows.append(GroupStats(group=group, n=0))
            continue
        ade_values = np.asarray(ade[group])
        fde_values = np.asarray(fde[group])
        rows.append(GroupStats(
            group=group,
            n=n,
            ade_mean=float(ade_values.mean()),
            ade_std=float(ade_values.std(ddof=ddof)) if n > ddof else None,
            fde_mean=float(fde_values.mean()),
            fde_std=float(fde_values.std(ddof=ddof)) if n > ddof else None,
        ))
    return GroupedReport(dimension=grouping, rows=rows)
