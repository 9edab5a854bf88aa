"""
Data models for LAMA.
In-memory scene and prediction files.
"""
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Tuple

from ..core.lane_graph import LaneGraph
from ..core.maneuver import ManeuverLabel
from ..core.matching import Trajectory
from ..core.metrics import PredictionSet

SCHEMA_VERSION = 1
DEFAULT_SPLIT = "default"

PredictionKey = Tuple[str, str]


@dataclass(frozen=True, eq=False)
class Scene:
    """One driving scene: agents, their lane graph and optional ground-truth labels."""
    scene_id: str
    sample_rate: float
    graph: LaneGraph
    agents: Dict[str, Trajectory]
    target_agent_ids: Tuple[str, ...]
    split: str = DEFAULT_SPLIT
    ground_truth: Dict[str, ManeuverLabel] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "target_agent_ids", tuple(self.target_agent_ids))

    def selected_agents(self, all_agents: bool = False) -> List[Trajectory]:
        """Target agents in file order, or every agent sorted by id."""
        if all_agents:
            return [self.agents[agent_id] for agent_id in sorted(self.agents)]
        return [self.agents[agent_id] for agent_id in self.target_agent_ids]


@dataclass(eq=False)
class PredictionFile:
    """Predicted modes of one model, keyed by (scene_id, agent_id)."""
    model: str
    predictions: Dict[PredictionKey, PredictionSet] = field(default_factory=dict)

    def __iter__(self) -> Iterator[PredictionSet]:
        return iter(self.predictions.values())

    def __len__(self) -> int:
        return len(self.predictions)

    def add(self, prediction: PredictionSet) -> None:
        self.predictions[(prediction.scene_id, prediction.agent_id)] = prediction
