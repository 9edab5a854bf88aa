"""
Commands for LAMA.
Extraction, dataset analysis, grouped evaluation, scene synthesis and validation
over scene files. Scenes are processed independently and merged in scene-id order.
"""
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import repeat
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..core.config import LamaConfig
from ..core.dynamics import (
    OUT_OF_RANGE,
    UNLABELED,
    DynamicsSummary,
    Histogram,
    bin_label,
    bin_labels,
    build_histogram,
    summarize_dynamics,
)
from ..core.exceptions import (
    LamaError,
    SceneValidationError,
    ShapeError,
    UnresolvedPredictionError,
)
from ..core.extraction import ExtractionResult, ExtractionStatus, ManeuverExtractor
from ..core.logging import bind_scene_context, get_logger, logging_options, performance, setup_logging
from ..core.maneuver import (
    LaneChangeManeuver,
    ManeuverDistribution,
    ManeuverLabel,
    TurnManeuver,
    count_maneuvers,
)
from ..core.metrics import GroupingDimension, MetricRecord, grouped_evaluate, min_ade, min_fde
from ..core.synth import synth_scene
from ..core.visualization import ChartGenerator
from ..database.models import PredictionFile, Scene
from ..database.storage import load_scene, save_scene
from ..utils.report_utils import ReportTable

_LOGGER = get_logger(__name__)

ALL_SPLITS = "all"

EXTRACT_COLUMNS = [
    "scene_id",
    "split",
    "agent_id",
    "status",
    "turn",
    "lane_change",
    "confidence",
    "lane_sequence",
    "expected_turn",
    "expected_lane_change",
]

_DYNAMICS_AXES = {
    "velocity": "Average velocity (m/s)",
    "acceleration": "Average acceleration (m/s^2)",
    "curvature": "Maximum curvature (1e-2 1/m)",
}


@dataclass(frozen=True)
class AgentAnalysis:
    """Extraction and dynamics of one agent in one scene."""
    scene_id: str
    split: str
    result: ExtractionResult
    dynamics: Optional[DynamicsSummary] = None
    expected: Optional[ManeuverLabel] = None

    @property
    def agent_id(self) -> str:
        return self.result.agent_id

    @property
    def label(self) -> Optional[ManeuverLabel]:
        return self.result.label


def analyze_scene(scene: Scene, config: LamaConfig) -> List[AgentAnalysis]:
    """Extract every selected agent of one scene; agent failures become statuses."""
    extractor = ManeuverExtractor(
        scene.graph,
        match_config=config.match,
        turn_config=config.turn_inference,
        max_sequences=config.max_sequences,
    )
    analyses = []
    with bind_scene_context(scene.scene_id):
        for traj in scene.selected_agents(config.all_agents):
            result = extractor.extract(traj)
            analyses.append(AgentAnalysis(
                scene_id=scene.scene_id,
                split=scene.split,
                result=result,
                dynamics=summarize_dynamics(traj, result.sequence, scene.graph),
                expected=scene.ground_truth.get(traj.agent_id),
            ))
        _LOGGER.debug("Scene extracted", agents=len(analyses))
    return analyses


@performance("process_scenes")
def process_scenes(scenes: Sequence[Scene], config: LamaConfig) -> List[AgentAnalysis]:
    """Analyze scenes on config.workers processes; output is ordered by (scene, agent)."""
    scenes = sorted(scenes, key=lambda scene: scene.scene_id)
    if config.workers > 1 and len(scenes) > 1:
        with ProcessPoolExecutor(
            max_workers=config.workers,
            initializer=setup_logging,
            initargs=logging_options(),
        ) as executor:
            per_scene = list(executor.map(analyze_scene, scenes, repeat(config), chunksize=16))
    else:
        per_scene = [analyze_scene(scene, config) for scene in scenes]

    analyses = [analysis for scene_analyses in per_scene for analysis in scene_analyses]
    analyses.sort(key=lambda analysis: (analysis.scene_id, analysis.agent_id))
    return analyses


def load_scenes(paths: Iterable[Path]) -> List[Scene]:
    """Load scene files; scene ids must be unique."""
    scenes: Dict[str, Scene] = {}
    for path in paths:
        scene = load_scene(path)
        if scene.scene_id in scenes:
            raise SceneValidationError(str(path), [f"duplicate scene id {scene.scene_id!r}"])
        scenes[scene.scene_id] = scene
    return [scenes[scene_id] for scene_id in sorted(scenes)]


def guard_tripped_everywhere(analyses: Sequence[AgentAnalysis]) -> bool:
    """True when every scene had at least one agent abort on the path explosion guard."""
    tripped: Dict[str, bool] = defaultdict(bool)
    for analysis in analyses:
        tripped[analysis.scene_id] |= analysis.result.status is ExtractionStatus.PATH_EXPLOSION
    return bool(tripped) and all(tripped.values())


def cmd_extract(scenes: Sequence[Scene], config: LamaConfig) -> ReportTable:
    """Maneuver label table with one row per (scene, agent)."""
    return extract_table(process_scenes(scenes, config))


def extract_table(analyses: Sequence[AgentAnalysis]) -> ReportTable:
    table = ReportTable("maneuvers", list(EXTRACT_COLUMNS))
    for analysis in analyses:
        result = analysis.result
        table.add_row(
            scene_id=analysis.scene_id,
            split=analysis.split,
            agent_id=analysis.agent_id,
            status=result.status.value,
            turn=result.label.turn.label if result.ok else None,
            lane_change=result.label.lane_change.label if result.ok else None,
            confidence=result.sequence.confidence if result.ok else None,
            lane_sequence=">".join(result.sequence.segment_ids) if result.ok else None,
            expected_turn=analysis.expected.turn.label if analysis.expected else None,
            expected_lane_change=analysis.expected.lane_change.label if analysis.expected else None,
        )
    return table


def _dynamics_values(analysis: AgentAnalysis) -> Dict[str, Optional[float]]:
    dynamics = analysis.dynamics
    if dynamics is None:
        return {"velocity": None, "acceleration": None, "curvature": None}
    return {
        "velocity": dynamics.avg_velocity,
        "acceleration": dynamics.avg_acceleration,
        "curvature": dynamics.max_driven_curvature,
    }


def _edges(config: LamaConfig, quantity: str) -> Tuple[float, ...]:
    return getattr(config.bins, quantity)


def _scale(quantity: str, config: LamaConfig) -> float:
    return config.bins.curvature_label_scale if quantity == "curvature" else 1.0


@dataclass
class SplitAnalysis:
    """Histograms and maneuver distribution of one dataset split."""
    split: str
    agents: int
    histograms: Dict[str, Histogram]
    unlabeled: Dict[str, int]
    maneuvers: ManeuverDistribution


def summarize_splits(analyses: Sequence[AgentAnalysis], config: LamaConfig) -> List[SplitAnalysis]:
    """Per-split summaries in split-name order, followed by the merged "all" split."""
    by_split: Dict[str, List[AgentAnalysis]] = defaultdict(list)
    for analysis in analyses:
        by_split[analysis.split].append(analysis)

    summaries = []
    for split in sorted(by_split):
        members = by_split[split]
        histograms = {}
        unlabeled = {}
        for quantity in _DYNAMICS_AXES:
            values = [_dynamics_values(analysis)[quantity] for analysis in members]
            samples = [value for value in values if value is not None]
            histograms[quantity] = build_histogram(samples, _edges(config, quantity))
            unlabeled[quantity] = len(values) - len(samples)
        summaries.append(SplitAnalysis(
            split=split,
            agents=len(members),
            histograms=histograms,
            unlabeled=unlabeled,
            maneuvers=count_maneuvers(analysis.label for analysis in members),
        ))

    if summaries:
        summaries.append(_merge_splits(summaries))
    return summaries


def _merge_splits(summaries: Sequence[SplitAnalysis]) -> SplitAnalysis:
    first = summaries[0]
    histograms = dict(first.histograms)
    unlabeled = dict(first.unlabeled)
    turn = dict(first.maneuvers.turn)
    lane_change = dict(first.maneuvers.lane_change)
    for summary in summaries[1:]:
        for quantity, histogram in summary.histograms.items():
            histograms[quantity] = histograms[quantity].merge(histogram)
            unlabeled[quantity] += summary.unlabeled[quantity]
        for maneuver, count in summary.maneuvers.turn.items():
            turn[maneuver] += count
        for maneuver, count in summary.maneuvers.lane_change.items():
            lane_change[maneuver] += count
    return SplitAnalysis(
        split=ALL_SPLITS,
        agents=sum(summary.agents for summary in summaries),
        histograms=histograms,
        unlabeled=unlabeled,
        maneuvers=ManeuverDistribution(
            turn=turn,
            lane_change=lane_change,
            unlabeled=sum(summary.maneuvers.unlabeled for summary in summaries),
        ),
    )


def _ratio(count: int, total: int) -> Optional[float]:
    return count / total if total else None


def analysis_tables(summaries: Sequence[SplitAnalysis], config: LamaConfig) -> List[ReportTable]:
    """Dynamics histograms and maneuver distributions as report tables."""
    tables = []
    for quantity in _DYNAMICS_AXES:
        table = ReportTable(f"{quantity}_histogram", ["split", "bin", "count", "ratio"])
        labels = bin_labels(_edges(config, quantity), _scale(quantity, config))
        for summary in summaries:
            histogram = summary.histograms[quantity]
            for label, count in zip(labels, histogram.counts):
                table.add_row(split=summary.split, bin=label, count=count,
                              ratio=_ratio(count, summary.agents))
            outside = histogram.underflow + histogram.overflow
            table.add_row(split=summary.split, bin=OUT_OF_RANGE, count=outside,
                          ratio=_ratio(outside, summary.agents))
            missing = summary.unlabeled[quantity]
            table.add_row(split=summary.split, bin=UNLABELED, count=missing,
                          ratio=_ratio(missing, summary.agents))
        tables.append(table)

    for name, maneuvers in (("turn", TurnManeuver), ("lane_change", LaneChangeManeuver)):
        table = ReportTable(f"{name}_distribution", ["split", "maneuver", "count", "ratio"])
        for summary in summaries:
            distribution = summary.maneuvers
            if name == "turn":
                counts, ratio = distribution.turn, distribution.turn_ratio
            else:
                counts, ratio = distribution.lane_change, distribution.lane_change_ratio
            for maneuver in maneuvers:
                table.add_row(split=summary.split, maneuver=maneuver.label, count=counts[maneuver],
                              ratio=ratio(maneuver))
            table.add_row(split=summary.split, maneuver=UNLABELED,
                          count=distribution.unlabeled, ratio=None)
        tables.append(table)
    return tables


def render_charts(
    summaries: Sequence[SplitAnalysis],
    config: LamaConfig,
    svg_dir: Path,
    charts: Optional[ChartGenerator] = None,
) -> List[Path]:
    """One SVG bar chart per split and histogram or distribution."""
    charts = charts or ChartGenerator()
    written = []
    for summary in summaries:
        for quantity, xlabel in _DYNAMICS_AXES.items():
            svg = charts.histogram_chart(
                summary.histograms[quantity],
                bin_labels(_edges(config, quantity), _scale(quantity, config)),
                title=f"{quantity.capitalize()} ({summary.split})",
                xlabel=xlabel,
            )
            written.append(charts.save(svg, svg_dir / f"{summary.split}_{quantity}.svg"))
        distribution = summary.maneuvers
        for name, counts in (("turn", distribution.turn), ("lane_change", distribution.lane_change)):
            svg = charts.bar_chart(
                [maneuver.label for maneuver in counts],
                list(counts.values()),
                title=f"{name.replace('_', ' ').capitalize()} maneuvers ({summary.split})",
                xlabel="Maneuver",
            )
            written.append(charts.save(svg, svg_dir / f"{summary.split}_{name}.svg"))
    return written


def cmd_analyze(
    scenes: Sequence[Scene],
    config: LamaConfig,
    svg_dir: Optional[Path] = None,
) -> List[ReportTable]:
    """Dataset analysis report per split plus "all"; optional SVG charts."""
    summaries = summarize_splits(process_scenes(scenes, config), config)
    if svg_dir is not None:
        paths = render_charts(summaries, config, Path(svg_dir))
        _LOGGER.info("Charts written", count=len(paths), directory=str(svg_dir))
    return analysis_tables(summaries, config)


def resolve_predictions(
    scenes: Sequence[Scene],
    prediction_files: Sequence[PredictionFile],
    all_agents: bool = False,
) -> None:
    """Every prediction key must name a selected agent of a provided scene."""
    selectable = {
        (scene.scene_id, traj.agent_id)
        for scene in scenes
        for traj in scene.selected_agents(all_agents)
    }
    missing = sorted({
        key
        for prediction_file in prediction_files
        for key in prediction_file.predictions
        if key not in selectable
    })
    if missing:
        raise UnresolvedPredictionError(missing)


def group_labels(dimension: GroupingDimension, config: LamaConfig) -> List[str]:
    """Column groups of one evaluation table, in table order."""
    if dimension is GroupingDimension.TURN:
        return [maneuver.label for maneuver in TurnManeuver] + [UNLABELED]
    if dimension is GroupingDimension.LANE_CHANGE:
        return [maneuver.label for maneuver in LaneChangeManeuver] + [UNLABELED]
    quantity = dimension.value
    return bin_labels(_edges(config, quantity), _scale(quantity, config)) + [OUT_OF_RANGE, UNLABELED]


def _metric_record(
    analysis: AgentAnalysis,
    ade: float,
    fde: float,
    model: str,
    config: LamaConfig,
) -> MetricRecord:
    values = _dynamics_values(analysis)
    bins = {
        quantity: bin_label(values[quantity], _edges(config, quantity), _scale(quantity, config))
        for quantity in _DYNAMICS_AXES
    }
    label = analysis.label
    return MetricRecord(
        agent_id=analysis.agent_id,
        scene_id=analysis.scene_id,
        min_ade=ade,
        min_fde=fde,
        velocity_bin=bins["velocity"],
        acceleration_bin=bins["acceleration"],
        curvature_bin=bins["curvature"],
        turn=label.turn.label if label else UNLABELED,
        lane_change=label.lane_change.label if label else UNLABELED,
        model=model,
    )


def metric_records(
    scenes: Sequence[Scene],
    analyses: Sequence[AgentAnalysis],
    prediction_files: Sequence[PredictionFile],
    config: LamaConfig,
) -> List[MetricRecord]:
    """One record per model and predicted agent; ground truth follows the observed history."""
    by_id = {scene.scene_id: scene for scene in scenes}
    obs_steps, pred_steps = config.horizon.obs_steps, config.horizon.pred_steps
    records = []
    for prediction_file in prediction_files:
        for analysis in analyses:
            key = (analysis.scene_id, analysis.agent_id)
            if key not in prediction_file.predictions:
                continue
            prediction = prediction_file.predictions[key]
            positions = by_id[analysis.scene_id].agents[analysis.agent_id].positions
            if len(positions) < obs_steps + pred_steps:
                raise ShapeError(
                    f"{analysis.scene_id}/{analysis.agent_id} has {len(positions)} positions, "
                    f"horizon needs {obs_steps} + {pred_steps}"
                )
            if prediction.horizon != pred_steps:
                raise ShapeError(
                    f"{prediction_file.model}: {analysis.scene_id}/{analysis.agent_id} predicts "
                    f"{prediction.horizon} steps, horizon is {pred_steps}"
                )
            if prediction.mode_count < config.modes:
                _LOGGER.warning(
                    "Fewer modes than requested",
                    model=prediction_file.model,
                    scene_id=analysis.scene_id,
                    agent_id=analysis.agent_id,
                    modes=prediction.mode_count,
                    requested=config.modes,
                )
            prediction = prediction.first_modes(config.modes)
            gt = positions[obs_steps:obs_steps + pred_steps]
            records.append(_metric_record(
                analysis,
                min_ade(prediction, gt),
                min_fde(prediction, gt),
                prediction_file.model,
                config,
            ))
    return records


_METRICS = (("minADE", "ade"), ("minFDE", "fde"))


def evaluation_tables(records: Sequence[MetricRecord], models: Sequence[str], config: LamaConfig) -> List[ReportTable]:
    """One table per grouping dimension; rows per model, metric and statistic."""
    tables = []
    for dimension in GroupingDimension:
        groups = group_labels(dimension, config)
        table = ReportTable(dimension.value, ["model", "metric", "statistic"] + groups)
        for model in models:
            model_records = [record for record in records if record.model == model]
            report = grouped_evaluate(model_records, dimension, groups, ddof=config.std_ddof)
            # groups outside the known labels still get a column
            for row in report.rows:
                if row.group not in table.columns:
                    table.columns.append(row.group)
            for metric, prefix in _METRICS:
                for statistic in ("n", "mean", "std"):
                    values = {
                        row.group: (
                            row.n if statistic == "n" else getattr(row, f"{prefix}_{statistic}")
                        )
                        for row in report.rows
                    }
                    table.add_row(model=model, metric=metric, statistic=statistic, **values)
        tables.append(table)
    return tables


def cmd_evaluate(
    scenes: Sequence[Scene],
    prediction_files: Sequence[PredictionFile],
    config: LamaConfig,
) -> List[ReportTable]:
    """Grouped minADE/minFDE tables for every prediction model."""
    resolve_predictions(scenes, prediction_files, config.all_agents)
    analyses = process_scenes(scenes, config)
    records = metric_records(scenes, analyses, prediction_files, config)
    models = list(dict.fromkeys(prediction_file.model for prediction_file in prediction_files))
    _LOGGER.info("Evaluation samples", samples=len(records), models=len(models))
    return evaluation_tables(records, models, config)


def cmd_synth(
    recipes: Sequence[str],
    count: int,
    seed: int,
    output_dir: Path,
    noise: float = 0.0,
    with_turn_attributes: bool = True,
    split: str = "default",
) -> List[Path]:
    """Write count scenes per recipe, seeded seed, seed + 1, ..."""
    written = []
    for offset in range(count):
        for recipe in recipes:
            scene = synth_scene(
                recipe,
                noise=noise,
                seed=seed + offset,
                with_turn_attributes=with_turn_attributes,
                split=split,
            )
            path = Path(output_dir) / f"{scene.scene_id}.json"
            save_scene(scene, path)
            written.append(path)
    _LOGGER.info("Scenes synthesized", count=len(written), directory=str(output_dir))
    return written


def cmd_validate(paths: Iterable[Path]) -> List[Tuple[Path, LamaError]]:
    """Load every scene file and collect the ones that fail."""
    failures = []
    for path in paths:
        try:
            load_scene(path)
        except LamaError as e:
            failures.append((Path(path), e))
    return failures

