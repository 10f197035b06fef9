"""End-to-end benchmark orchestration.

Loads a manifest, runs the requested illustration methods over every
storyline, joins the results with human or simulated judgments, and emits
per-method quality reports plus a corpus-level summary. All outputs are
deterministic given the manifest and seed.
"""

import json
import logging
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .fileio import atomic_write_text
from .illustrators import (
    ALL_METHODS,
    IllustratorConfig,
    illustrator_config_from_dict,
    run_method,
)
from .quality_metric import (
    ConsensusJudgment,
    CorrelationUndefinedError,
    JudgmentSet,
    MetricParams,
    aggregate_judgments,
    correlate,
    load_judgments,
    story_quality,
)
from .story_model import (
    IllustratedStoryline,
    Storyline,
    illustrated_record,
    load_corpus,
    load_storylines,
)
from .synthetic import GroundTruth, load_ground_truth, simulate_annotator
from .text_retrieval import build_index
from .visual_features import MediaFeatureStore, load_concepts, load_embeddings

logger = logging.getLogger(__name__)

DEFAULT_ANNOTATORS = 3


@dataclass(frozen=True)
class RunManifest:
    """Declarative description of one benchmark run.

    Judgments come either from a judgment file or from simulated
    annotators against planted ground truth; at least one source is
    required for quality aggregates. random_seed feeds synthetic-data
    concerns only (simulated annotators and the random baseline).
    """

    event_name: str
    corpus_path: Path
    storyline_paths: tuple[Path, ...]
    methods: tuple[str, ...]
    output_dir: Path
    concepts_path: Optional[Path] = None
    embeddings_path: Optional[Path] = None
    media_dir: Optional[Path] = None
    judgments_path: Optional[Path] = None
    ground_truth_path: Optional[Path] = None
    annotators: int = DEFAULT_ANNOTATORS
    noise_rate: float = 0.0
    config: IllustratorConfig = field(default_factory=IllustratorConfig)
    metric: MetricParams = field(default_factory=MetricParams)
    random_seed: int = 0

    def __post_init__(self):
        if not self.methods:
            raise ValueError("manifest needs at least one method")
        for method in self.methods:
            if method not in ALL_METHODS:
                raise ValueError(
                    f"unknown method {method!r}; valid methods: {', '.join(ALL_METHODS)}"
                )
        if self.annotators < 1:
            raise ValueError("annotators must be >= 1")
        if not 0.0 <= self.noise_rate <= 1.0:
            raise ValueError("noise_rate must be in [0, 1]")


def load_manifest(path: Path) -> RunManifest:
    """Read a manifest file; relative paths resolve against its directory."""
    path = Path(path)
    base = path.parent
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)

    def resolve(value: Optional[str]) -> Optional[Path]:
        if value is None:
            return None
        candidate = Path(value)
        return candidate if candidate.is_absolute() else base / candidate

    config_raw = raw.get("config", {})
    config = illustrator_config_from_dict(config_raw) if config_raw else IllustratorConfig()
    metric_raw = raw.get("metric", {})
    metric = MetricParams(**metric_raw) if metric_raw else MetricParams()
    try:
        return RunManifest(
            event_name=str(raw["event_name"]),
            corpus_path=resolve(raw["corpus"]),
            storyline_paths=tuple(resolve(p) for p in raw["storylines"]),
            methods=tuple(raw["methods"]),
            output_dir=resolve(raw.get("output_dir", "out")),
            concepts_path=resolve(raw.get("concepts")),
            embeddings_path=resolve(raw.get("embeddings")),
            media_dir=resolve(raw.get("media_dir")),
            judgments_path=resolve(raw.get("judgments")),
            ground_truth_path=resolve(raw.get("ground_truth")),
            annotators=int(raw.get("annotators", DEFAULT_ANNOTATORS)),
            noise_rate=float(raw.get("noise_rate", 0.0)),
            config=config,
            metric=metric,
            random_seed=int(raw.get("random_seed", 0)),
        )
    except KeyError as exc:
        raise ValueError(f"manifest missing field {exc}") from None


@dataclass(frozen=True)
class MethodReport:
    method_name: str
    per_story_quality: tuple[tuple[str, float], ...]
    mean_quality: Optional[float]
    median_quality: Optional[float]
    no_illustration_count: int
    excluded_story_ids: tuple[str, ...]
    pearson: Optional[float] = None
    spearman: Optional[float] = None


def _validate_paths(manifest: RunManifest) -> None:
    paths = [manifest.corpus_path, *manifest.storyline_paths]
    for optional in (
        manifest.concepts_path,
        manifest.embeddings_path,
        manifest.judgments_path,
        manifest.ground_truth_path,
    ):
        if optional is not None:
            paths.append(optional)
    for p in paths:
        if not Path(p).exists():
            raise FileNotFoundError(f"manifest references missing path: {p}")


def _zero_no_illustration(
    consensus: ConsensusJudgment, illustrated: IllustratedStoryline
) -> ConsensusJudgment:
    """Force relevance 0 on NO_ILLUSTRATION positions before scoring."""
    if len(illustrated.choices) != len(consensus.segment_scores):
        raise ValueError(
            f"story {illustrated.story_id}: {len(illustrated.choices)} choices vs "
            f"{len(consensus.segment_scores)} judged segments"
        )
    segment_scores = tuple(
        0 if choice is None else score
        for score, choice in zip(consensus.segment_scores, illustrated.choices)
    )
    return ConsensusJudgment(
        story_id=consensus.story_id,
        segment_scores=segment_scores,
        transition_scores=consensus.transition_scores,
        annotator_count=consensus.annotator_count,
        overall_rating=consensus.overall_rating,
        method_name=consensus.method_name,
    )


def _method_report(
    method: str,
    storylines: Sequence[Storyline],
    illustrated: dict[str, IllustratedStoryline],
    judgments: dict[str, list[JudgmentSet]],
    params: MetricParams,
) -> MethodReport:
    per_story: list[tuple[str, float]] = []
    ratings: list[float] = []
    excluded: list[str] = []
    no_illustration = 0
    for storyline in sorted(storylines, key=lambda s: s.story_id):
        item = illustrated[storyline.story_id]
        no_illustration += item.no_illustration_count()
        sets = judgments.get(storyline.story_id, [])
        if not sets:
            excluded.append(storyline.story_id)
            continue
        consensus = _zero_no_illustration(aggregate_judgments(sets), item)
        quality = story_quality(consensus.segment_scores, consensus.transition_scores, params)
        per_story.append((storyline.story_id, quality))
        ratings.append(consensus.overall_rating)
    values = [q for _, q in per_story]
    pearson = spearman = None
    if len(values) >= 3:
        try:
            pearson, spearman = correlate(values, ratings)
        except CorrelationUndefinedError:
            pass
    return MethodReport(
        method_name=method,
        per_story_quality=tuple(per_story),
        mean_quality=statistics.fmean(values) if values else None,
        median_quality=statistics.median(values) if values else None,
        no_illustration_count=no_illustration,
        excluded_story_ids=tuple(excluded),
        pearson=pearson,
        spearman=spearman,
    )


def _format_optional(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.6f}"


def write_method_table(report: MethodReport, path: Path) -> None:
    lines = ["story_id\tquality"]
    for story_id, quality in report.per_story_quality:
        lines.append(f"{story_id}\t{quality:.6f}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_summary(reports: Sequence[MethodReport], path: Path) -> None:
    lines = []
    for report in reports:
        lines.append(f"method: {report.method_name}")
        lines.append(f"  stories scored:      {len(report.per_story_quality)}")
        lines.append(f"  mean quality:        {_format_optional(report.mean_quality)}")
        lines.append(f"  median quality:      {_format_optional(report.median_quality)}")
        lines.append(f"  no-illustration:     {report.no_illustration_count}")
        lines.append(f"  excluded (unjudged): {len(report.excluded_story_ids)}")
        lines.append(f"  pearson vs ratings:  {_format_optional(report.pearson)}")
        lines.append(f"  spearman vs ratings: {_format_optional(report.spearman)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def run_benchmark(manifest: RunManifest) -> list[MethodReport]:
    """Illustrate, judge, and score every (method, story) pair.

    Persists illustrated storylines under output_dir/illustrated/<method>/,
    one table per method under output_dir/reports/, and a human-readable
    summary. Stories without judgments are excluded from aggregates and
    listed in the report.
    """
    _validate_paths(manifest)
    corpus = load_corpus(manifest.corpus_path)
    storylines: list[Storyline] = []
    for storyline_path in manifest.storyline_paths:
        storylines.extend(load_storylines(storyline_path))
    storylines_by_id = {s.story_id: s for s in storylines}
    index = build_index(corpus)
    concepts = load_concepts(manifest.concepts_path) if manifest.concepts_path else None
    embeddings = load_embeddings(manifest.embeddings_path) if manifest.embeddings_path else None
    features = MediaFeatureStore.from_corpus(
        corpus,
        base_dir=manifest.media_dir,
        concepts=concepts,
        embeddings=embeddings,
        histogram_bins=8,
    )
    truth: Optional[GroundTruth] = None
    if manifest.ground_truth_path is not None:
        truth = load_ground_truth(manifest.ground_truth_path)
    file_judgments: list[JudgmentSet] = []
    if manifest.judgments_path is not None:
        file_judgments = load_judgments(manifest.judgments_path)

    output_dir = Path(manifest.output_dir)
    reports: list[MethodReport] = []
    for method in manifest.methods:
        illustrated: dict[str, IllustratedStoryline] = {}
        for storyline in sorted(storylines, key=lambda s: s.story_id):
            item = run_method(
                method, storyline, corpus, index, manifest.config, features,
                seed=manifest.random_seed,
            )
            illustrated[storyline.story_id] = item
            atomic_write_text(
                output_dir / "illustrated" / method / f"{storyline.story_id}.json",
                json.dumps(illustrated_record(item), indent=2, sort_keys=True) + "\n",
            )

        judgments: dict[str, list[JudgmentSet]] = {}
        if truth is not None:
            ordered = [illustrated[s.story_id] for s in sorted(storylines, key=lambda s: s.story_id)]
            for annotator_index in range(manifest.annotators):
                annotator_id = f"sim{annotator_index + 1}"
                for judgment in simulate_annotator(
                    ordered,
                    storylines_by_id,
                    truth,
                    manifest.noise_rate,
                    manifest.random_seed,
                    annotator_id,
                    manifest.metric,
                ):
                    judgments.setdefault(judgment.story_id, []).append(judgment)
        else:
            for judgment in file_judgments:
                if judgment.method_name and judgment.method_name != method:
                    continue
                if judgment.story_id in storylines_by_id:
                    judgments.setdefault(judgment.story_id, []).append(judgment)

        report = _method_report(method, storylines, illustrated, judgments, manifest.metric)
        reports.append(report)
        write_method_table(report, output_dir / "reports" / f"{method}.table")

    write_summary(reports, output_dir / "reports" / "summary")
    return reports
