"""
Exceptions for LAMA.
Every error raised on purpose by the package derives from LamaError.
"""
from typing import Any, Dict, List, Optional, Sequence, Tuple


class LamaError(Exception):
    """Base class for LAMA errors."""
    pass


class ConfigurationError(LamaError):
    """Invalid thresholds, bin edges, recipes or configuration files."""
    pass


class UnknownSegmentError(LamaError):
    """A lane segment id does not resolve inside the lane graph."""

    def __init__(self, segment_id: str):
        super().__init__(f"Unknown lane segment id: {segment_id!r}")
        self.segment_id = segment_id


class UndefinedQuantityError(LamaError):
    """A dynamic quantity is undefined for the given trajectory."""
    pass


class ShapeError(LamaError):
    """Horizon or mode shapes do not match."""
    pass


class SceneParseError(LamaError):
    """A scene or prediction file is not well-formed JSON."""

    def __init__(self, path: str, message: str, line: Optional[int] = None, column: Optional[int] = None):
        location = f"{path}:{line}:{column}" if line is not None else path
        super().__init__(f"{location}: {message}")
        self.path = path
        self.line = line
        self.column = column


class SceneSchemaError(LamaError):
    """A file parses but does not match the documented schema."""

    def __init__(self, path: str, errors: Sequence[Dict[str, Any]]):
        details = "; ".join(
            f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}"
            for error in errors
        )
        super().__init__(f"{path}: schema error: {details}")
        self.path = path
        self.errors = list(errors)


class SceneValidationError(LamaError):
    """A file matches the schema but breaks a graph or scene invariant."""

    def __init__(self, path: str, violations: Sequence[Any]):
        details = "; ".join(str(violation) for violation in violations)
        super().__init__(f"{path}: validation error: {details}")
        self.path = path
        self.violations = list(violations)


class UnresolvedPredictionError(LamaError):
    """Predictions reference (scene, agent) pairs without a scene target."""

    def __init__(self, missing: List[Tuple[str, str]]):
        keys = ", ".join(f"{scene_id}/{agent_id}" for scene_id, agent_id in missing)
        super().__init__(f"Predictions without a scene target: {keys}")
        self.missing = missing


class PathExplosionError(LamaError):
    """The lane sequence search enumerated more sequences than allowed."""

    def __init__(self, limit: int):
        super().__init__(f"Lane sequence search exceeded {limit} sequences")
        self.limit = limit
