"""Builders shared by the tests."""
from typing import Dict, Optional, Sequence

import numpy as np
from shapely.geometry import LineString

from app.core.lane_graph import LaneGraph, LaneSegment, TurnDirection
from app.core.matching import Trajectory
from app.database.models import Scene


def segment(
    segment_id: str,
    points: Sequence[Sequence[float]],
    successors: Sequence[str] = (),
    predecessors: Sequence[str] = (),
    left: Optional[str] = None,
    right: Optional[str] = None,
    turn: Optional[TurnDirection] = None,
) -> LaneSegment:
    return LaneSegment(
        segment_id=segment_id,
        centerline=np.asarray(points, dtype=float),
        turn_direction=turn,
        successors=tuple(successors),
        predecessors=tuple(predecessors),
        left_neighbor=left,
        right_neighbor=right,
    )


def two_lane_graph() -> LaneGraph:
    return LaneGraph([
        segment("r0", [(0, 0), (15, 0), (30, 0)], successors=["r1"], left="l0"),
        segment("r1", [(30, 0), (45, 0), (60, 0)], predecessors=["r0"], left="l1"),
        segment("l0", [(0, 3.5), (15, 3.5), (30, 3.5)], successors=["l1"], right="r0"),
        segment("l1", [(30, 3.5), (45, 3.5), (60, 3.5)], predecessors=["l0"], right="r1"),
    ])


def arc(radius: float, sweep: float, points: int = 16, center=(0.0, 0.0), start_angle: float = -np.pi / 2):
    """Circle samples from start_angle, counter-clockwise for positive sweep."""
    angles = start_angle + np.linspace(0.0, sweep, points)
    return np.column_stack([center[0] + radius * np.cos(angles), center[1] + radius * np.sin(angles)])


def drive(points: Sequence[Sequence[float]], speed: float, count: int, agent_id: str = "agent", rate: float = 10.0,
          start: float = 0.0) -> Trajectory:
    """Constant-speed positions along a polyline."""
    line = LineString(points)
    positions = [
        line.interpolate(start + speed / rate * i).coords[0]
        for i in range(count)
    ]
    return Trajectory(agent_id, rate, np.asarray(positions))


def scene(
    graph: LaneGraph,
    agents: Sequence[Trajectory],
    targets: Optional[Sequence[str]] = None,
    scene_id: str = "scene",
    split: str = "default",
    ground_truth: Optional[Dict] = None,
) -> Scene:
    return Scene(
        scene_id=scene_id,
        sample_rate=agents[0].sample_rate if agents else 10.0,
        graph=graph,
        agents={traj.agent_id: traj for traj in agents},
        target_agent_ids=tuple(targets if targets is not None else [traj.agent_id for traj in agents]),
        split=split,
        ground_truth=ground_truth or {},
    )
