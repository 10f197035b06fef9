"""Storyline quality scoring, annotator aggregation, and correlation stats.

The score combines first-segment relevance (weight alpha) with the
averaged perceived quality of neighbouring segment pairs, where beta
trades segment relevance against transition coherence. Defaults
alpha=0.1, beta=0.6 are the calibrated values.
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .fileio import atomic_write_text, dumps_record

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.1
DEFAULT_BETA = 0.6

JUDGMENT_VALUES = (0, 1, 2)
OVERALL_RATING_MIN = 1
OVERALL_RATING_MAX = 5


class CorrelationUndefinedError(ValueError):
    """A correlation was requested on constant or too-short input."""


@dataclass(frozen=True)
class MetricParams:
    """alpha boosts the first segment; beta > 0.5 keeps zero-relevance
    illustrations penalized. allow_low_beta downgrades the beta bound
    violation to a warning for sensitivity experiments."""

    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    allow_low_beta: bool = False

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must be in (0, 1]")
        if self.beta <= 0.5:
            if not self.allow_low_beta:
                raise ValueError("beta must exceed 0.5 (set allow_low_beta to override)")
            logger.warning("beta=%s <= 0.5: zero-relevance damping no longer holds", self.beta)

    def max_quality(self) -> float:
        """Upper bound of story_quality; independent of segment count."""
        return 2 * self.alpha + (1 - self.alpha) * (3 - self.beta)


@dataclass(frozen=True)
class JudgmentSet:
    """One annotator's ratings of one illustrated storyline.

    method_name identifies which illustration of the story was judged;
    it may be empty for externally produced judgment files.
    """

    story_id: str
    annotator_id: str
    segment_scores: tuple[int, ...]
    transition_scores: tuple[int, ...]
    overall_rating: int
    method_name: str = ""

    def __post_init__(self):
        if len(self.segment_scores) < 1:
            raise ValueError("segment_scores must be non-empty")
        if len(self.transition_scores) != len(self.segment_scores) - 1:
            raise ValueError(
                f"expected {len(self.segment_scores) - 1} transition scores, "
                f"got {len(self.transition_scores)}"
            )
        for value in self.segment_scores + self.transition_scores:
            if value not in JUDGMENT_VALUES:
                raise ValueError(f"judgment value {value!r} not in {{0,1,2}}")
        if not OVERALL_RATING_MIN <= self.overall_rating <= OVERALL_RATING_MAX:
            raise ValueError(
                f"overall_rating {self.overall_rating} outside "
                f"[{OVERALL_RATING_MIN}, {OVERALL_RATING_MAX}]"
            )


@dataclass(frozen=True)
class ConsensusJudgment:
    """Per-position medians over one or more annotators (ties round down)."""

    story_id: str
    segment_scores: tuple[int, ...]
    transition_scores: tuple[int, ...]
    annotator_count: int
    overall_rating: float = 0.0
    method_name: str = ""


def _check_judgment_value(value: int, name: str) -> None:
    if value not in JUDGMENT_VALUES:
        raise ValueError(f"{name} must be in {{0,1,2}}, got {value!r}")


def pairwise_quality(s_prev: int, s_cur: int, t_prev: int, beta: float) -> float:
    """Perceived quality of two neighbouring segment illustrations."""
    _check_judgment_value(s_prev, "s_prev")
    _check_judgment_value(s_cur, "s_cur")
    _check_judgment_value(t_prev, "t_prev")
    return beta * (s_cur + s_prev) + (1.0 - beta) * (s_prev * s_cur + t_prev)


def story_quality(
    segment_scores: Sequence[int],
    transition_scores: Sequence[int],
    params: MetricParams = MetricParams(),
) -> float:
    """Overall quality of an illustrated story of N >= 2 segments.

    alpha * s_1 + (1-alpha) / (2(N-1)) * sum of pairwise qualities.
    Single-segment stories are undefined and rejected.
    """
    n = len(segment_scores)
    if n < 2:
        raise ValueError("story_quality needs at least 2 segments")
    if len(transition_scores) != n - 1:
        raise ValueError(
            f"expected {n - 1} transition scores, got {len(transition_scores)}"
        )
    total = 0.0
    for i in range(1, n):
        total += pairwise_quality(
            segment_scores[i - 1], segment_scores[i], transition_scores[i - 1], params.beta
        )
    return params.alpha * segment_scores[0] + (1.0 - params.alpha) / (2.0 * (n - 1)) * total


def _median_round_down(values: Sequence[int]) -> int:
    """Median of small integer sets; a .5 median rounds down (conservative)."""
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2 == 1:
        return ordered[mid]
    return math.floor((ordered[mid - 1] + ordered[mid]) / 2.0)


def aggregate_judgments(judgment_sets: Sequence[JudgmentSet]) -> ConsensusJudgment:
    """Per-position median across annotators of the same story."""
    if not judgment_sets:
        raise ValueError("at least one judgment set is required")
    first = judgment_sets[0]
    for js in judgment_sets[1:]:
        if js.story_id != first.story_id:
            raise ValueError(f"mixed story_ids: {js.story_id!r} vs {first.story_id!r}")
        if len(js.segment_scores) != len(first.segment_scores):
            raise ValueError("mismatched segment_scores lengths")
    segment_scores = tuple(
        _median_round_down([js.segment_scores[i] for js in judgment_sets])
        for i in range(len(first.segment_scores))
    )
    transition_scores = tuple(
        _median_round_down([js.transition_scores[i] for js in judgment_sets])
        for i in range(len(first.transition_scores))
    )
    overall_values = sorted(js.overall_rating for js in judgment_sets)
    mid = len(overall_values) // 2
    if len(overall_values) % 2 == 1:
        overall = float(overall_values[mid])
    else:
        overall = (overall_values[mid - 1] + overall_values[mid]) / 2.0
    return ConsensusJudgment(
        story_id=first.story_id,
        segment_scores=segment_scores,
        transition_scores=transition_scores,
        annotator_count=len(judgment_sets),
        overall_rating=overall,
        method_name=first.method_name,
    )


def _rank_with_ties(values: np.ndarray) -> np.ndarray:
    """Average ranks (1-based); tied values share the mean of their ranks."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float((xc**2).sum()) * float((yc**2).sum()))
    if denom == 0.0:
        raise CorrelationUndefinedError("correlation undefined for constant input")
    return float((xc * yc).sum()) / denom


def correlate(
    metric_scores: Sequence[float], overall_ratings: Sequence[float]
) -> tuple[float, float]:
    """(Pearson r, Spearman rho) between metric values and human ratings.

    Spearman is Pearson over average ranks. Raises
    CorrelationUndefinedError for constant inputs or fewer than 3 pairs.
    """
    if len(metric_scores) != len(overall_ratings):
        raise ValueError("input lengths differ")
    if len(metric_scores) < 3:
        raise CorrelationUndefinedError("need at least 3 pairs")
    x = np.asarray(metric_scores, dtype=np.float64)
    y = np.asarray(overall_ratings, dtype=np.float64)
    pearson = _pearson(x, y)
    spearman = _pearson(_rank_with_ties(x), _rank_with_ties(y))
    return pearson, spearman


def judgment_record(js: JudgmentSet) -> dict:
    record = {
        "story_id": js.story_id,
        "annotator_id": js.annotator_id,
        "segment_scores": list(js.segment_scores),
        "transition_scores": list(js.transition_scores),
        "overall_rating": js.overall_rating,
    }
    if js.method_name:
        record["method_name"] = js.method_name
    return record


def parse_judgment(raw: dict) -> JudgmentSet:
    for key in ("story_id", "annotator_id", "segment_scores", "transition_scores", "overall_rating"):
        if key not in raw:
            raise ValueError(f"judgment missing field {key!r}")
    return JudgmentSet(
        story_id=str(raw["story_id"]),
        annotator_id=str(raw["annotator_id"]),
        segment_scores=tuple(int(v) for v in raw["segment_scores"]),
        transition_scores=tuple(int(v) for v in raw["transition_scores"]),
        overall_rating=int(raw["overall_rating"]),
        method_name=str(raw.get("method_name", "")),
    )


def load_judgments(path: Path) -> list[JudgmentSet]:
    judgments = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                judgments.append(parse_judgment(json.loads(line)))
            except (json.JSONDecodeError, ValueError, TypeError) as exc:
                logger.warning("%s:%d: skipping malformed judgment: %s", path, lineno, exc)
    return judgments


def save_judgments(judgments: Sequence[JudgmentSet], path: Path) -> None:
    atomic_write_text(
        Path(path), "".join(dumps_record(judgment_record(j)) + "\n" for j in judgments)
    )
