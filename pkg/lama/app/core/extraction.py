"""
Maneuver extraction for LAMA.
Runs matching, lane sequence search and maneuver derivation for one agent.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .exceptions import PathExplosionError
from .lane_graph import LaneGraph
from .logging import get_logger
from .maneuver import ManeuverLabel, TurnInferenceConfig, derive_label
from .matching import MatchConfig, Trajectory, assign_timesteps, build_intervals
from .sequence import DEFAULT_MAX_SEQUENCES, LaneSequence, enumerate_sequences, select_best

_LOGGER = get_logger(__name__)


class ExtractionStatus(str, Enum):
    """Outcome of extracting one agent."""
    OK = "ok"
    NO_ROOT_ASSIGNMENT = "no root assignment"
    NO_PATH = "no path"
    PATH_EXPLOSION = "path explosion"


@dataclass(frozen=True)
class ExtractionResult:
    """Selected lane sequence and label of one agent, or the reason there is none."""
    agent_id: str
    status: ExtractionStatus
    sequence: Optional[LaneSequence] = None
    label: Optional[ManeuverLabel] = None

    @property
    def ok(self) -> bool:
        return self.status is ExtractionStatus.OK


class ManeuverExtractor:
    """Extracts the driven lane sequence and maneuvers of agents on one lane graph."""

    def __init__(
        self,
        graph: LaneGraph,
        match_config: Optional[MatchConfig] = None,
        turn_config: Optional[TurnInferenceConfig] = None,
        max_sequences: int = DEFAULT_MAX_SEQUENCES,
    ):
        """Initialize extractor."""
        self.graph = graph
        self.match_config = match_config or MatchConfig()
        self.turn_config = turn_config or TurnInferenceConfig()
        self.max_sequences = max_sequences

    def extract(self, traj: Trajectory) -> ExtractionResult:
        """Extract the best lane sequence and its maneuver label."""
        assignments = assign_timesteps(traj, self.graph, self.match_config)
        intervals = build_intervals(assignments)
        if not any(interval.contains(0) for interval in intervals):
            _LOGGER.debug("No root assignment", agent_id=traj.agent_id)
            return ExtractionResult(traj.agent_id, ExtractionStatus.NO_ROOT_ASSIGNMENT)

        try:
            sequences = enumerate_sequences(
                intervals, self.graph, len(assignments), max_sequences=self.max_sequences
            )
        except PathExplosionError:
            _LOGGER.warning("Path explosion", agent_id=traj.agent_id, limit=self.max_sequences)
            return ExtractionResult(traj.agent_id, ExtractionStatus.PATH_EXPLOSION)

        best = select_best(sequences)
        if best is None:
            _LOGGER.debug("No lane sequence", agent_id=traj.agent_id, intervals=len(intervals))
            return ExtractionResult(traj.agent_id, ExtractionStatus.NO_PATH)

        label = derive_label(best, self.graph, self.turn_config)
        return ExtractionResult(traj.agent_id, ExtractionStatus.OK, sequence=best, label=label)
