from typing import Annotated, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, FiniteFloat, model_validator

from ..core.lane_graph import TurnDirection
from ..core.maneuver import LaneChangeManeuver, TurnManeuver

# [x, y] or [x, y, z]; z is dropped on ingest
Point = Annotated[List[FiniteFloat], Field(min_length=2, max_length=3)]


class LaneSegmentSchema(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    id: str
    centerline: List[Point] = Field(min_length=1)
    turn_direction: Optional[TurnDirection] = None
    successors: List[str] = []
    predecessors: List[str] = []
    left_neighbor: Optional[str] = None
    right_neighbor: Optional[str] = None


class AgentSchema(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    id: str
    first_timestep: int = Field(default=0, ge=0)
    positions: List[Point] = Field(min_length=2)


class ManeuverLabelSchema(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    turn: TurnManeuver
    lane_change: LaneChangeManeuver


class SceneSchema(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    schema_version: Literal[1] = 1
    scene_id: str
    sample_rate: float = Field(gt=0)
    split: str = "default"
    target_agent_ids: List[str]
    agents: List[AgentSchema]
    lane_segments: List[LaneSegmentSchema]
    ground_truth: Dict[str, ManeuverLabelSchema] = {}

    @model_validator(mode="after")
    def unique_ids(self) -> "SceneSchema":
        for name, ids in (
            ("agent", [agent.id for agent in self.agents]),
            ("lane segment", [segment.id for segment in self.lane_segments]),
        ):
            duplicates = sorted({value for value in ids if ids.count(value) > 1})
            if duplicates:
                raise ValueError(f"duplicate {name} ids: {', '.join(duplicates)}")
        return self


class PredictionSchema(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    scene_id: str
    agent_id: str
    # K modes of H points each
    modes: List[List[Point]] = Field(min_length=1)


class PredictionFileSchema(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    schema_version: Literal[1] = 1
    model: str = "model"
    predictions: List[PredictionSchema]
