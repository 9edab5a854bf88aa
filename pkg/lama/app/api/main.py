"""
Command line interface for LAMA.
Exit codes: 0 success, 1 usage or configuration error, 2 input validation error,
3 path explosion guard tripped on every scene.
"""
import argparse
import sys
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from .. import __version__
from ..core.config import HORIZON_PRESETS, OUTPUT_FORMATS, ConfigManager, LamaConfig
from ..core.exceptions import ConfigurationError, LamaError, PathExplosionError
from ..core.logging import get_logger, setup_logging
from ..core.synth import RECIPES
from ..database.storage import load_predictions
from ..utils.report_utils import ReportTable, write_tables
from .commands import (
    cmd_analyze,
    cmd_evaluate,
    cmd_synth,
    cmd_validate,
    extract_table,
    guard_tripped_everywhere,
    load_scenes,
    process_scenes,
)

_LOGGER = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID_INPUT = 2
EXIT_GUARD = 3

_U64_MAX = 2 ** 64 - 1


class LamaArgumentParser(argparse.ArgumentParser):
    """Argument parser that exits with the usage error code."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _edges(value: str) -> List[float]:
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {value!r}") from None


def _seed(value: str) -> int:
    seed = int(value)
    if not 0 <= seed <= _U64_MAX:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {value}")
    return seed


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def _analysis_options() -> argparse.ArgumentParser:
    parent = LamaArgumentParser(add_help=False)
    parent.add_argument("scenes", nargs="+", type=Path, help="scene files or directories of *.json scenes")
    parent.add_argument("--d-th", type=float, help="distance threshold in meters (default 5.0)")
    parent.add_argument("--p-th", type=float, help="assignment confidence threshold (default 0.5)")
    parent.add_argument("--bins-velocity", type=_edges, help="comma-separated velocity bin edges")
    parent.add_argument("--bins-acceleration", type=_edges, help="comma-separated acceleration bin edges")
    parent.add_argument("--bins-curvature", type=_edges, help="comma-separated curvature bin edges (1/m)")
    parent.add_argument("--max-sequences", type=_positive_int, help="lane sequence search limit")
    parent.add_argument("--format", choices=OUTPUT_FORMATS, help="report format (default csv)")
    parent.add_argument("--output", type=Path, help="write the report to this file instead of stdout")
    parent.add_argument("--output-dir", type=Path, help="write one file per report table")
    parent.add_argument("--workers", type=_positive_int, help="worker processes (default 1)")
    parent.add_argument("--all-agents", action="store_true", help="process every agent, not only targets")
    return parent


def build_parser() -> argparse.ArgumentParser:
    """Build the command line parser."""
    parser = LamaArgumentParser(prog="lama", description="Lane-graph maneuver analysis")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", type=Path, help="YAML configuration file")
    parser.add_argument("--log-level", help="log level (default: LOG_LEVEL or INFO)")
    parser.add_argument("--log-format", choices=("json", "console"), default="json")

    subparsers = parser.add_subparsers(dest="command", required=True)
    options = _analysis_options()

    extract = subparsers.add_parser("extract", parents=[options], help="extract maneuver labels")
    extract.set_defaults(handler=_run_extract)

    analyze = subparsers.add_parser("analyze", parents=[options], help="dataset dynamics and maneuvers")
    analyze.add_argument("--svg", type=Path, help="directory for SVG bar charts")
    analyze.set_defaults(handler=_run_analyze)

    evaluate = subparsers.add_parser("evaluate", parents=[options], help="grouped minADE/minFDE tables")
    evaluate.add_argument("--predictions", type=Path, action="append", required=True,
                          help="prediction file; repeat for several models")
    evaluate.add_argument("--modes", type=_positive_int, help="modes K per agent (default 6)")
    evaluate.add_argument("--horizon", choices=sorted(HORIZON_PRESETS), help="horizon preset")
    evaluate.add_argument("--obs-steps", type=int, help="observed timesteps before the prediction")
    evaluate.add_argument("--pred-steps", type=_positive_int, help="predicted timesteps")
    evaluate.set_defaults(handler=_run_evaluate)

    synth = subparsers.add_parser("synth", help="write synthetic scenes with ground-truth labels")
    synth.add_argument("--recipe", action="append", choices=sorted(RECIPES),
                       help="maneuver recipe; repeat for several (default: all)")
    synth.add_argument("--count", type=_positive_int, default=1, help="scenes per recipe")
    synth.add_argument("--seed", type=_seed, default=0, help="seed of the first scene")
    synth.add_argument("--noise", type=float, default=0.0, help="position noise sigma in meters")
    synth.add_argument("--split", default="default", help="dataset split name")
    synth.add_argument("--no-turn-attributes", action="store_true",
                       help="omit lane turn directions so they must be inferred")
    synth.add_argument("--output-dir", type=Path, required=True)
    synth.set_defaults(handler=_run_synth)

    validate = subparsers.add_parser("validate", help="check scene files")
    validate.add_argument("scenes", nargs="+", type=Path, help="scene files or directories")
    validate.set_defaults(handler=_run_validate)
    return parser


def expand_paths(paths: Iterable[Path]) -> List[Path]:
    """Files as given; directories expand to their *.json files in name order."""
    expanded = []
    for path in paths:
        if path.is_dir():
            expanded.extend(sorted(path.glob("*.json")))
        else:
            expanded.append(path)
    return expanded


def build_config(args: argparse.Namespace) -> LamaConfig:
    """File configuration with command-line overrides applied."""
    config = ConfigManager(str(args.config)).lama_config if args.config else LamaConfig()
    return config.with_overrides(
        d_th=getattr(args, "d_th", None),
        p_th=getattr(args, "p_th", None),
        bins_velocity=getattr(args, "bins_velocity", None),
        bins_acceleration=getattr(args, "bins_acceleration", None),
        bins_curvature=getattr(args, "bins_curvature", None),
        max_sequences=getattr(args, "max_sequences", None),
        output_format=getattr(args, "format", None),
        workers=getattr(args, "workers", None),
        all_agents=True if getattr(args, "all_agents", False) else None,
        modes=getattr(args, "modes", None),
        horizon_preset=getattr(args, "horizon", None),
        obs_steps=getattr(args, "obs_steps", None),
        pred_steps=getattr(args, "pred_steps", None),
    )


def _emit(tables: Sequence[ReportTable], args: argparse.Namespace, config: LamaConfig) -> None:
    if args.output_dir is not None:
        paths = write_tables(tables, config.output_format, output_dir=args.output_dir)
        _LOGGER.info("Report written", files=[str(path) for path in paths])
    elif args.output is not None:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        with open(args.output, "w", encoding="utf-8", newline="") as f:
            write_tables(tables, config.output_format, stream=f)
    else:
        write_tables(tables, config.output_format, stream=sys.stdout)


def _run_extract(args: argparse.Namespace, config: LamaConfig) -> int:
    scenes = load_scenes(expand_paths(args.scenes))
    analyses = process_scenes(scenes, config)
    _emit([extract_table(analyses)], args, config)
    if guard_tripped_everywhere(analyses):
        _LOGGER.error("Path explosion guard tripped on every scene", scenes=len(scenes))
        return EXIT_GUARD
    return EXIT_OK


def _run_analyze(args: argparse.Namespace, config: LamaConfig) -> int:
    scenes = load_scenes(expand_paths(args.scenes))
    _emit(cmd_analyze(scenes, config, svg_dir=args.svg), args, config)
    return EXIT_OK


def _run_evaluate(args: argparse.Namespace, config: LamaConfig) -> int:
    scenes = load_scenes(expand_paths(args.scenes))
    prediction_files = [load_predictions(path) for path in args.predictions]
    _emit(cmd_evaluate(scenes, prediction_files, config), args, config)
    return EXIT_OK


def _run_synth(args: argparse.Namespace, config: LamaConfig) -> int:
    cmd_synth(
        recipes=args.recipe or list(RECIPES),
        count=args.count,
        seed=args.seed,
        output_dir=args.output_dir,
        noise=args.noise,
        with_turn_attributes=not args.no_turn_attributes,
        split=args.split,
    )
    return EXIT_OK


def _run_validate(args: argparse.Namespace, config: LamaConfig) -> int:
    paths = expand_paths(args.scenes)
    failures = cmd_validate(paths)
    for path, error in failures:
        print(error, file=sys.stderr)
        for violation in getattr(error, "violations", []):
            print(f"{path}: {violation}", file=sys.stderr)
    _LOGGER.info("Scenes validated", files=len(paths), failed=len(failures))
    return EXIT_INVALID_INPUT if failures else EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line interface and return the exit code."""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, json_logs=args.log_format == "json")

    try:
        config = build_config(args)
        return args.handler(args, config)
    except ConfigurationError as e:
        _LOGGER.error("Configuration error", error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except PathExplosionError as e:
        _LOGGER.error("Path explosion", error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_GUARD
    except (LamaError, OSError) as e:
        _LOGGER.error("Invalid input", error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
