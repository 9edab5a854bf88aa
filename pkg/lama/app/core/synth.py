"""
Synthetic scene generator for LAMA.
Builds small lane graphs with a target agent driving a known maneuver recipe,
so extraction can be checked against the intended label.
"""
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..database.models import DEFAULT_SPLIT, Scene
from .exceptions import ConfigurationError
from .lane_graph import LaneGraph, LaneSegment, TurnDirection
from .logging import get_logger
from .maneuver import LaneChangeManeuver, ManeuverLabel, TurnManeuver
from .matching import Trajectory

_LOGGER = get_logger(__name__)

SAMPLE_RATE = 10.0
LANE_WIDTH = 3.5
TURN_RADIUS = 15.0
ARC_POINTS = 16
SPEED_RANGE = (6.0, 12.0)
# lateral distance covered by a lane change, in meters of travel
CHANGE_LENGTH = 15.0

TARGET_AGENT = "agent_0"
BACKGROUND_AGENT = "agent_1"

_MIRRORED_DIRECTION = {
    TurnDirection.NONE: TurnDirection.NONE,
    TurnDirection.LEFT: TurnDirection.RIGHT,
    TurnDirection.RIGHT: TurnDirection.LEFT,
}

_FOLLOW_STRAIGHT = ManeuverLabel(TurnManeuver.GOING_STRAIGHT, LaneChangeManeuver.FOLLOWING_LANE)


class _GraphBuilder:
    """Mutable lane graph under construction."""

    def __init__(self):
        self._segments: Dict[str, Dict] = {}

    def add(self, centerline: np.ndarray, turn: TurnDirection = TurnDirection.NONE) -> str:
        segment_id = f"seg_{len(self._segments):02d}"
        self._segments[segment_id] = {
            "centerline": np.asarray(centerline, dtype=float),
            "turn": turn,
            "successors": [],
            "predecessors": [],
            "left": None,
            "right": None,
        }
        return segment_id

    def connect(self, from_id: str, to_id: str) -> None:
        self._segments[from_id]["successors"].append(to_id)
        self._segments[to_id]["predecessors"].append(from_id)

    def neighbors(self, right_id: str, left_id: str) -> None:
        self._segments[right_id]["left"] = left_id
        self._segments[left_id]["right"] = right_id

    def build(self, with_turn_attributes: bool) -> LaneGraph:
        return LaneGraph(
            LaneSegment(
                segment_id=segment_id,
                centerline=entry["centerline"],
                turn_direction=entry["turn"] if with_turn_attributes else None,
                successors=tuple(entry["successors"]),
                predecessors=tuple(entry["predecessors"]),
                left_neighbor=entry["left"],
                right_neighbor=entry["right"],
            )
            for segment_id, entry in self._segments.items()
        )


def _line(start: Tuple[float, float], end: Tuple[float, float], spacing: float = 5.0) -> np.ndarray:
    start, end = np.asarray(start, dtype=float), np.asarray(end, dtype=float)
    count = max(2, int(np.ceil(np.linalg.norm(end - start) / spacing)) + 1)
    return np.linspace(start, end, count)


def _arc(start: Tuple[float, float], left: bool, radius: float = TURN_RADIUS) -> np.ndarray:
    """Quarter circle leaving start heading +x, bending left (+y) or right (-y)."""
    sign = 1.0 if left else -1.0
    center = np.array([start[0], start[1] + sign * radius])
    angles = -sign * np.pi / 2 + sign * np.linspace(0.0, np.pi / 2, ARC_POINTS)
    return center + radius * np.column_stack([np.cos(angles), np.sin(angles)])


def _lane_change(x_start: float, y_from: float, y_to: float, step: float = 0.5) -> np.ndarray:
    """Smoothstep lateral move over CHANGE_LENGTH meters of travel along +x."""
    x = np.append(np.arange(x_start, x_start + CHANGE_LENGTH, step), x_start + CHANGE_LENGTH)
    u = (x - x_start) / CHANGE_LENGTH
    y = y_from + (y_to - y_from) * u * u * (3.0 - 2.0 * u)
    return np.column_stack([x, y])


def _join(*pieces: np.ndarray) -> np.ndarray:
    path = np.vstack(pieces)
    keep = np.ones(len(path), dtype=bool)
    keep[1:] = np.any(np.diff(path, axis=0) != 0.0, axis=1)
    return path[keep]


def _path_length(path: np.ndarray) -> float:
    steps = np.diff(path, axis=0)
    return float(np.hypot(steps[:, 0], steps[:, 1]).sum())


def _resample(path: np.ndarray, start: float, spacing: float, count: int) -> np.ndarray:
    """Points at constant arc-length spacing along a polyline."""
    steps = np.diff(path, axis=0)
    arclength = np.concatenate([[0.0], np.cumsum(np.hypot(steps[:, 0], steps[:, 1]))])
    s = start + spacing * np.arange(count)
    return np.column_stack([
        np.interp(s, arclength, path[:, 0]),
        np.interp(s, arclength, path[:, 1]),
    ])


def _parallel_lanes(builder: _GraphBuilder, count: int, length: float) -> List[List[str]]:
    """Two lanes along +x at y=0 (right) and y=LANE_WIDTH (left), count segments each."""
    lanes = []
    for lane in range(2):
        y = lane * LANE_WIDTH
        ids = [
            builder.add(_line((i * length, y), ((i + 1) * length, y)))
            for i in range(count)
        ]
        for previous, following in zip(ids, ids[1:]):
            builder.connect(previous, following)
        lanes.append(ids)
    for right_id, left_id in zip(lanes[0], lanes[1]):
        builder.neighbors(right_id, left_id)
    return lanes


def _turn_branches(
    builder: _GraphBuilder,
    from_id: str,
    start: Tuple[float, float],
    kinds: Tuple[str, ...] = ("left", "straight", "right"),
) -> Dict[str, str]:
    """Branches leaving from_id at start, by kind; turns continue into an exit lane."""
    branches = {}
    for kind in kinds:
        if kind == "straight":
            branches[kind] = builder.add(_line(start, (start[0] + 30.0, start[1])))
            continue
        left = kind == "left"
        sign = 1.0 if left else -1.0
        turn = builder.add(_arc(start, left=left), TurnDirection.LEFT if left else TurnDirection.RIGHT)
        end = (start[0] + TURN_RADIUS, start[1] + sign * TURN_RADIUS)
        exit_lane = builder.add(_line(end, (end[0], end[1] + sign * 30.0)))
        builder.connect(turn, exit_lane)
        branches[kind] = turn
    for branch in branches.values():
        builder.connect(from_id, branch)
    return branches


_Layout = Tuple[_GraphBuilder, np.ndarray, np.ndarray, ManeuverLabel]


def _straight(rng: np.random.Generator) -> _Layout:
    builder = _GraphBuilder()
    lane = [builder.add(_line((i * 30.0, 0.0), ((i + 1) * 30.0, 0.0))) for i in range(3)]
    for previous, following in zip(lane, lane[1:]):
        builder.connect(previous, following)
    path = _line((0.0, 0.0), (90.0, 0.0))
    return builder, path, path, _FOLLOW_STRAIGHT


def _left_turn(rng: np.random.Generator) -> _Layout:
    builder = _GraphBuilder()
    approach = builder.add(_line((0.0, 0.0), (30.0, 0.0)))
    _turn_branches(builder, approach, (30.0, 0.0))
    path = _join(
        _line((0.0, 0.0), (30.0, 0.0)),
        _arc((30.0, 0.0), left=True),
        _line((45.0, 15.0), (45.0, 45.0)),
    )
    background = _line((0.0, 0.0), (60.0, 0.0))
    label = ManeuverLabel(TurnManeuver.TURNING_LEFT, LaneChangeManeuver.FOLLOWING_LANE)
    return builder, path, background, label


def _left_change(rng: np.random.Generator) -> _Layout:
    builder = _GraphBuilder()
    _parallel_lanes(builder, count=3, length=30.0)
    x_start = 33.0 + rng.uniform(0.0, 5.0)
    path = _join(
        _line((0.0, 0.0), (x_start, 0.0)),
        _lane_change(x_start, 0.0, LANE_WIDTH),
        _line((x_start + CHANGE_LENGTH, LANE_WIDTH), (90.0, LANE_WIDTH)),
    )
    background = _line((0.0, LANE_WIDTH), (90.0, LANE_WIDTH))
    label = ManeuverLabel(TurnManeuver.GOING_STRAIGHT, LaneChangeManeuver.CHANGING_LANE_LEFT)
    return builder, path, background, label


def _change_both(rng: np.random.Generator) -> _Layout:
    builder = _GraphBuilder()
    _parallel_lanes(builder, count=5, length=25.0)
    left_start = 28.0 + rng.uniform(0.0, 3.0)
    right_start = 78.0 + rng.uniform(0.0, 3.0)
    path = _join(
        _line((0.0, 0.0), (left_start, 0.0)),
        _lane_change(left_start, 0.0, LANE_WIDTH),
        _line((left_start + CHANGE_LENGTH, LANE_WIDTH), (right_start, LANE_WIDTH)),
        _lane_change(right_start, LANE_WIDTH, 0.0),
        _line((right_start + CHANGE_LENGTH, 0.0), (125.0, 0.0)),
    )
    background = _line((0.0, LANE_WIDTH), (125.0, LANE_WIDTH))
    label = ManeuverLabel(TurnManeuver.GOING_STRAIGHT, LaneChangeManeuver.BOTH)
    return builder, path, background, label


def _left_change_left_turn(rng: np.random.Generator) -> _Layout:
    builder = _GraphBuilder()
    right_lane, left_lane = _parallel_lanes(builder, count=2, length=30.0)
    left_branches = _turn_branches(builder, left_lane[-1], (60.0, LANE_WIDTH), ("left", "straight"))
    right_branches = _turn_branches(builder, right_lane[-1], (60.0, 0.0), ("straight", "right"))
    builder.neighbors(right_branches["straight"], left_branches["straight"])
    x_start = 33.0 + rng.uniform(0.0, 5.0)
    path = _join(
        _line((0.0, 0.0), (x_start, 0.0)),
        _lane_change(x_start, 0.0, LANE_WIDTH),
        _line((x_start + CHANGE_LENGTH, LANE_WIDTH), (60.0, LANE_WIDTH)),
        _arc((60.0, LANE_WIDTH), left=True),
        _line((75.0, LANE_WIDTH + TURN_RADIUS), (75.0, LANE_WIDTH + TURN_RADIUS + 30.0)),
    )
    background = _line((0.0, 0.0), (90.0, 0.0))
    label = ManeuverLabel(TurnManeuver.TURNING_LEFT, LaneChangeManeuver.CHANGING_LANE_LEFT)
    return builder, path, background, label


# recipe -> (native layout, mirrored)
RECIPES: Dict[str, Tuple[Callable[[np.random.Generator], _Layout], bool]] = {
    "straight": (_straight, False),
    "left_turn": (_left_turn, False),
    "right_turn": (_left_turn, True),
    "left_change": (_left_change, False),
    "right_change": (_left_change, True),
    "change_both": (_change_both, False),
    "left_change_left_turn": (_left_change_left_turn, False),
    "right_change_right_turn": (_left_change_left_turn, True),
}


def _drive(
    path: np.ndarray,
    rng: np.random.Generator,
    agent_id: str,
    count: Optional[int] = None,
) -> Trajectory:
    """Constant-speed drive along path; with count given the speed is fitted to the path."""
    length = _path_length(path)
    if count is None:
        start = rng.uniform(2.0, 4.0)
        spacing = rng.uniform(*SPEED_RANGE) / SAMPLE_RATE
        count = int((length - start - 2.0) // spacing) + 1
    else:
        start = 2.0
        spacing = (length - 4.0) / (count - 1)
    return Trajectory(agent_id, SAMPLE_RATE, _resample(path, start, spacing, count))


def _with_noise(traj: Trajectory, noise: float, rng: np.random.Generator) -> Trajectory:
    if noise == 0.0:
        return traj
    positions = traj.positions + rng.normal(0.0, noise, size=traj.positions.shape)
    return Trajectory(traj.agent_id, traj.sample_rate, positions, traj.first_timestep)


def synth_scene(
    recipe: str,
    noise: float = 0.0,
    seed: int = 0,
    with_turn_attributes: bool = True,
    split: str = DEFAULT_SPLIT,
) -> Scene:
    """Deterministic scene for a maneuver recipe; ground truth holds the intended labels."""
    if recipe not in RECIPES:
        raise ConfigurationError(
            f"unknown recipe {recipe!r}, expected one of {', '.join(RECIPES)}"
        )
    if not noise >= 0.0:
        raise ConfigurationError(f"noise must be non-negative, got {noise}")

    layout, mirrored = RECIPES[recipe]
    rng = np.random.default_rng(seed)
    builder, path, background_path, label = layout(rng)
    target = _drive(path, rng, TARGET_AGENT)
    background = _drive(background_path, rng, BACKGROUND_AGENT, count=len(target))
    scene = Scene(
        scene_id=f"{recipe}_{seed}",
        sample_rate=SAMPLE_RATE,
        graph=builder.build(with_turn_attributes),
        agents={
            TARGET_AGENT: _with_noise(target, noise, rng),
            BACKGROUND_AGENT: _with_noise(background, noise, rng),
        },
        target_agent_ids=(TARGET_AGENT,),
        split=split,
        ground_truth={TARGET_AGENT: label, BACKGROUND_AGENT: _FOLLOW_STRAIGHT},
    )
    if mirrored:
        scene = mirror_scene(scene)
    _LOGGER.debug("Scene synthesized", scene_id=scene.scene_id, timesteps=len(target), noise=noise)
    return scene


def _mirror_points(points: np.ndarray) -> np.ndarray:
    return points * np.array([1.0, -1.0])


def mirror_scene(scene: Scene) -> Scene:
    """Reflect a scene about the x-axis; left and right swap everywhere."""
    graph = LaneGraph(
        LaneSegment(
            segment_id=segment.segment_id,
            centerline=_mirror_points(segment.centerline),
            turn_direction=(
                _MIRRORED_DIRECTION[segment.turn_direction]
                if segment.turn_direction is not None
                else None
            ),
            successors=segment.successors,
            predecessors=segment.predecessors,
            left_neighbor=segment.right_neighbor,
            right_neighbor=segment.left_neighbor,
        )
        for segment in scene.graph
    )
    return Scene(
        scene_id=scene.scene_id,
        sample_rate=scene.sample_rate,
        graph=graph,
        agents={
            agent_id: Trajectory(
                traj.agent_id, traj.sample_rate, _mirror_points(traj.positions), traj.first_timestep
            )
            for agent_id, traj in scene.agents.items()
        },
        target_agent_ids=scene.target_agent_ids,
        split=scene.split,
        ground_truth={agent_id: label.mirrored() for agent_id, label in scene.ground_truth.items()},
    )
