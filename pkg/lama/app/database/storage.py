"""
Storage module for LAMA.
Loads and saves scene and prediction files (versioned JSON).
"""
import json
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
from pydantic import ValidationError

from ..api.schemas import PredictionFileSchema, SceneSchema
from ..core.exceptions import SceneParseError, SceneSchemaError, SceneValidationError, ShapeError
from ..core.lane_graph import LaneGraph, LaneSegment, validate_graph
from ..core.logging import get_logger
from ..core.maneuver import ManeuverLabel
from ..core.matching import Trajectory
from ..core.metrics import PredictionSet
from .models import SCHEMA_VERSION, PredictionFile, Scene

_LOGGER = get_logger(__name__)

PathLike = Union[str, Path]


def _xy(points: List[List[float]]) -> np.ndarray:
    return np.array([point[:2] for point in points], dtype=float).reshape(-1, 2)


def _read_json(path: PathLike) -> Any:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneParseError(str(path), e.msg, line=e.lineno, column=e.colno) from e


def _write_json(data: Dict[str, Any], path: PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
        f.write("\n")


def scene_from_dict(data: Any, path: PathLike = "<memory>") -> Scene:
    """Validate a parsed scene document and build the in-memory scene."""
    try:
        schema = SceneSchema.model_validate(data)
    except ValidationError as e:
        raise SceneSchemaError(str(path), e.errors()) from e

    graph = LaneGraph(
        LaneSegment(
            segment_id=segment.id,
            centerline=_xy(segment.centerline),
            turn_direction=segment.turn_direction,
            successors=tuple(segment.successors),
            predecessors=tuple(segment.predecessors),
            left_neighbor=segment.left_neighbor,
            right_neighbor=segment.right_neighbor,
        )
        for segment in schema.lane_segments
    )
    agents = {
        agent.id: Trajectory(
            agent_id=agent.id,
            sample_rate=schema.sample_rate,
            positions=_xy(agent.positions),
            first_timestep=agent.first_timestep,
        )
        for agent in schema.agents
    }

    violations: List[Any] = list(validate_graph(graph))
    for agent_id in schema.target_agent_ids:
        if agent_id not in agents:
            violations.append(f"target agent {agent_id!r} does not exist")
    for agent_id in schema.ground_truth:
        if agent_id not in agents:
            violations.append(f"ground truth for unknown agent {agent_id!r}")
    if violations:
        raise SceneValidationError(str(path), violations)

    return Scene(
        scene_id=schema.scene_id,
        sample_rate=schema.sample_rate,
        graph=graph,
        agents=agents,
        target_agent_ids=tuple(schema.target_agent_ids),
        split=schema.split,
        ground_truth={
            agent_id: ManeuverLabel(turn=label.turn, lane_change=label.lane_change)
            for agent_id, label in schema.ground_truth.items()
        },
    )


def load_scene(path: PathLike) -> Scene:
    """Load and fully validate a scene file."""
    scene = scene_from_dict(_read_json(path), path)
    _LOGGER.debug(
        "Scene loaded",
        path=str(path),
        scene_id=scene.scene_id,
        agents=len(scene.agents),
        segments=len(scene.graph),
    )
    return scene


def scene_to_dict(scene: Scene) -> Dict[str, Any]:
    """Serializable scene document."""
    return {
        "schema_version": SCHEMA_VERSION,
        "scene_id": scene.scene_id,
        "sample_rate": scene.sample_rate,
        "split": scene.split,
        "target_agent_ids": list(scene.target_agent_ids),
        "agents": [
            {
                "id": traj.agent_id,
                "first_timestep": traj.first_timestep,
                "positions": traj.positions.tolist(),
            }
            for traj in scene.agents.values()
        ],
        "lane_segments": [
            {
                "id": segment.segment_id,
                "centerline": segment.centerline.tolist(),
                "turn_direction": (
                    segment.turn_direction.value if segment.turn_direction is not None else None
                ),
                "successors": list(segment.successors),
                "predecessors": list(segment.predecessors),
                "left_neighbor": segment.left_neighbor,
                "right_neighbor": segment.right_neighbor,
            }
            for segment in scene.graph
        ],
        "ground_truth": {
            agent_id: {"turn": label.turn.value, "lane_change": label.lane_change.value}
            for agent_id, label in scene.ground_truth.items()
        },
    }


def save_scene(scene: Scene, path: PathLike) -> None:
    """Write a scene file."""
    _write_json(scene_to_dict(scene), path)


def load_predictions(path: PathLike) -> PredictionFile:
    """Load a prediction file; every entry must hold K modes of equal horizon."""
    data = _read_json(path)
    try:
        schema = PredictionFileSchema.model_validate(data)
    except ValidationError as e:
        raise SceneSchemaError(str(path), e.errors()) from e

    prediction_file = PredictionFile(model=schema.model)
    duplicates = []
    for entry in schema.predictions:
        key = (entry.scene_id, entry.agent_id)
        if key in prediction_file.predictions:
            duplicates.append(f"duplicate prediction for {entry.scene_id}/{entry.agent_id}")
            continue
        horizons = {len(mode) for mode in entry.modes}
        if len(horizons) != 1:
            raise ShapeError(
                f"{path}: modes of {entry.scene_id}/{entry.agent_id} have different horizons "
                f"{sorted(horizons)}"
            )
        modes = np.array([[point[:2] for point in mode] for mode in entry.modes], dtype=float)
        prediction_file.add(PredictionSet(entry.agent_id, entry.scene_id, modes))
    if duplicates:
        raise SceneValidationError(str(path), duplicates)

    _LOGGER.debug("Predictions loaded", path=str(path), model=schema.model, count=len(prediction_file))
    return prediction_file


def save_predictions(prediction_file: PredictionFile, path: PathLike) -> None:
    """Write a prediction file."""
    _write_json(
        {
            "schema_version": SCHEMA_VERSION,
            "model": prediction_file.model,
            "predictions": [
                {
                    "scene_id": prediction.scene_id,
                    "agent_id": prediction.agent_id,
                    "modes": prediction.modes.tolist(),
                }
                for prediction in prediction_file
            ],
        },
        path,
    )
