"""Configuration management for LAMA."""
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

import voluptuous as vol
import yaml

from .dynamics import check_edges
from .exceptions import ConfigurationError
from .logging import get_logger
from .maneuver import TurnInferenceConfig
from .matching import MatchConfig
from .metrics import DEFAULT_MODES
from .sequence import DEFAULT_MAX_SEQUENCES

_LOGGER = get_logger(__name__)

HORIZON_PRESETS = {
    "argoverse": (20, 30),
    "waymo": (10, 80),
}

OUTPUT_FORMATS = ("csv", "json")


@dataclass(frozen=True)
class BinConfig:
    """Histogram and grouping bin edges."""
    velocity: Tuple[float, ...] = (0.0, 4.0, 8.0, 12.0, 16.0, 20.0)
    acceleration: Tuple[float, ...] = (-2.5, -1.5, -0.5, 0.5, 1.5, 2.5)
    curvature: Tuple[float, ...] = (0.0, 0.05, 0.10, 0.15, 0.20, 0.25)
    # curvature labels are shown in 1e-2 1/m
    curvature_label_scale: float = 100.0

    def __post_init__(self):
        for name in ("velocity", "acceleration", "curvature"):
            edges = tuple(float(edge) for edge in getattr(self, name))
            check_edges(edges)
            object.__setattr__(self, name, edges)

    @classmethod
    def from_dict(cls, config: Dict) -> "BinConfig":
        """Create config from dictionary."""
        return cls(
            velocity=tuple(config.get("velocity", cls.velocity)),
            acceleration=tuple(config.get("acceleration", cls.acceleration)),
            curvature=tuple(config.get("curvature", cls.curvature)),
            curvature_label_scale=config.get("curvature_label_scale", cls.curvature_label_scale),
        )


@dataclass(frozen=True)
class HorizonConfig:
    """Split of a target trajectory into observed history and predicted future."""
    obs_steps: int = 20
    pred_steps: int = 30

    def __post_init__(self):
        if self.obs_steps < 0 or self.pred_steps < 1:
            raise ConfigurationError(
                f"invalid horizon split {self.obs_steps}/{self.pred_steps}"
            )

    @classmethod
    def preset(cls, name: str) -> "HorizonConfig":
        """Horizon split of a known dataset setup."""
        try:
            obs_steps, pred_steps = HORIZON_PRESETS[name]
        except KeyError:
            raise ConfigurationError(f"unknown horizon preset {name!r}") from None
        return cls(obs_steps=obs_steps, pred_steps=pred_steps)

    @classmethod
    def from_dict(cls, config: Dict) -> "HorizonConfig":
        """Create config from dictionary."""
        base = cls.preset(config["preset"]) if "preset" in config else cls()
        return cls(
            obs_steps=config.get("obs_steps", base.obs_steps),
            pred_steps=config.get("pred_steps", base.pred_steps),
        )


@dataclass(frozen=True)
class LamaConfig:
    """Complete analysis configuration."""
    match: MatchConfig = field(default_factory=MatchConfig)
    turn_inference: TurnInferenceConfig = field(default_factory=TurnInferenceConfig)
    bins: BinConfig = field(default_factory=BinConfig)
    horizon: HorizonConfig = field(default_factory=HorizonConfig)
    modes: int = DEFAULT_MODES
    std_ddof: int = 0
    max_sequences: int = DEFAULT_MAX_SEQUENCES
    output_format: str = "csv"
    all_agents: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.modes < 1:
            raise ConfigurationError(f"modes must be at least 1, got {self.modes}")
        if self.std_ddof not in (0, 1):
            raise ConfigurationError(f"std_ddof must be 0 or 1, got {self.std_ddof}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigurationError(f"unknown output format {self.output_format!r}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be at least 1, got {self.workers}")
        if self.max_sequences < 1:
            raise ConfigurationError(f"max_sequences must be at least 1, got {self.max_sequences}")

    @classmethod
    def from_dict(cls, config: Dict) -> "LamaConfig":
        """Create config from dictionary."""
        return cls(
            match=MatchConfig.from_dict(config.get("match", {})),
            turn_inference=TurnInferenceConfig.from_dict(config.get("turn_inference", {})),
            bins=BinConfig.from_dict(config.get("bins", {})),
            horizon=HorizonConfig.from_dict(config.get("horizon", {})),
            modes=config.get("modes", DEFAULT_MODES),
            std_ddof=config.get("std_ddof", 0),
            max_sequences=config.get("max_sequences", DEFAULT_MAX_SEQUENCES),
            output_format=config.get("output_format", "csv"),
            all_agents=config.get("all_agents", False),
            workers=config.get("workers", 1),
        )

    def to_dict(self) -> Dict[str, Any]:
        """Plain dictionary matching CONFIG_SCHEMA."""
        return {
            "match": {
                "d_th": self.match.d_th,
                "p_th": self.match.p_th,
                "search_radius": self.match.search_radius,
            },
            "turn_inference": {
                "curvature_min": self.turn_inference.curvature_min,
                "orientation_min": self.turn_inference.orientation_min,
            },
            "bins": {
                "velocity": list(self.bins.velocity),
                "acceleration": list(self.bins.acceleration),
                "curvature": list(self.bins.curvature),
                "curvature_label_scale": self.bins.curvature_label_scale,
            },
            "horizon": {
                "obs_steps": self.horizon.obs_steps,
                "pred_steps": self.horizon.pred_steps,
            },
            "modes": self.modes,
            "std_ddof": self.std_ddof,
            "max_sequences": self.max_sequences,
            "output_format": self.output_format,
            "all_agents": self.all_agents,
            "workers": self.workers,
        }

    def with_overrides(self, **overrides: Any) -> "LamaConfig":
        """Copy with command-line overrides applied; None values are ignored."""
        overrides = {key: value for key, value in overrides.items() if value is not None}
        match = self.match
        if "d_th" in overrides or "p_th" in overrides:
            match = MatchConfig(
                d_th=overrides.pop("d_th", match.d_th),
                p_th=overrides.pop("p_th", match.p_th),
                search_radius=match.search_radius,
            )
        horizon = self.horizon
        if "horizon_preset" in overrides:
            horizon = HorizonConfig.preset(overrides.pop("horizon_preset"))
        if "obs_steps" in overrides or "pred_steps" in overrides:
            horizon = HorizonConfig(
                obs_steps=overrides.pop("obs_steps", horizon.obs_steps),
                pred_steps=overrides.pop("pred_steps", horizon.pred_steps),
            )
        bins = self.bins
        bin_overrides = {
            name: tuple(overrides.pop(f"bins_{name}"))
            for name in ("velocity", "acceleration", "curvature")
            if f"bins_{name}" in overrides
        }
        if bin_overrides:
            bins = replace(bins, **bin_overrides)
        return replace(self, match=match, horizon=horizon, bins=bins, **overrides)


_EDGES = vol.All([vol.Coerce(float)], vol.Length(min=2))


class ConfigManager:
    """Configuration manager for LAMA."""

    CONFIG_SCHEMA = vol.Schema({
        vol.Optional("match"): {
            vol.Optional("d_th"): vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False)),
            vol.Optional("p_th"): vol.All(vol.Coerce(float), vol.Range(min=0, max=1, max_included=False)),
            vol.Optional("search_radius"): vol.Any(None, vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))),
        },
        vol.Optional("turn_inference"): {
            vol.Optional("curvature_min"): vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False)),
            vol.Optional("orientation_min"): vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False)),
        },
        vol.Optional("bins"): {
            vol.Optional("velocity"): _EDGES,
            vol.Optional("acceleration"): _EDGES,
            vol.Optional("curvature"): _EDGES,
            vol.Optional("curvature_label_scale"): vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False)),
        },
        vol.Optional("horizon"): {
            vol.Optional("preset"): vol.In(sorted(HORIZON_PRESETS)),
            vol.Optional("obs_steps"): vol.All(int, vol.Range(min=0)),
            vol.Optional("pred_steps"): vol.All(int, vol.Range(min=1)),
        },
        vol.Optional("modes"): vol.All(int, vol.Range(min=1)),
        vol.Optional("std_ddof"): vol.In([0, 1]),
        vol.Optional("max_sequences"): vol.All(int, vol.Range(min=1)),
        vol.Optional("output_format"): vol.In(OUTPUT_FORMATS),
        vol.Optional("all_agents"): bool,
        vol.Optional("workers"): vol.All(int, vol.Range(min=1)),
    })

    def __init__(self, config_path: Optional[str] = None):
        """Initialize configuration manager."""
        self.config_path = config_path
        self.config: Dict[str, Any] = {}
        self.lama_config = LamaConfig()

        if config_path:
            self.load_config()

    def load_config(self) -> None:
        """Load configuration from file."""
        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                config = yaml.safe_load(f) or {}
            config = self.CONFIG_SCHEMA(config)
            self.lama_config = LamaConfig.from_dict(config)
            self.config = config
        except OSError as e:
            _LOGGER.error("Failed to read configuration", path=self.config_path, error=str(e))
            raise ConfigurationError(f"{self.config_path}: {e}") from e
        except (yaml.YAMLError, vol.Invalid) as e:
            _LOGGER.error("Failed to load configuration", path=self.config_path, error=str(e))
            raise ConfigurationError(f"{self.config_path}: {e}") from e

    def save_config(self) -> None:
        """Save current configuration to file."""
        if not self.config_path:
            raise ConfigurationError("No config path specified")

        with open(self.config_path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.lama_config.to_dict(), f, sort_keys=False)
