"""Segment-illustration baselines: text, social-signal, concept, and temporal.

Every method draws from the same BM25 candidate pool per segment and picks
one media item (or NO_ILLUSTRATION when the pool is empty), so methods
differ only in how they re-rank a shared pool.
"""

import logging
import random
from collections import Counter
from dataclasses import dataclass
from datetime import date, timedelta, timezone
from typing import Callable, Optional

import numpy as np

from .story_model import (
    NO_ILLUSTRATION,
    Corpus,
    IllustratedStoryline,
    Storyline,
    StorySegment,
)
from .text_retrieval import Bm25Params, InvertedIndex, rank_documents
from .transition_engine import (
    TransitionCostFn,
    TransitionKind,
    media_pair_cost,
    select_sequence_dp,
)
from .visual_features import MediaFeatureStore, hamming_distance

logger = logging.getLogger(__name__)

ILLUSTRATOR_METHODS = (
    "bm25",
    "retweets",
    "duplicates",
    "concept_pool",
    "concept_query",
    "temporal",
)

TRANSITION_METHODS = tuple(f"transition_{kind.value}" for kind in TransitionKind)

# "random" is the seeded uniform baseline the benchmark compares against.
ALL_METHODS = ILLUSTRATOR_METHODS + ("random",) + TRANSITION_METHODS


@dataclass(frozen=True)
class IllustratorConfig:
    method: str = "bm25"
    pool_size: int = 50
    duplicate_hamming_threshold: int = 10
    prf_depth: int = 10
    concept_top_k: int = 10
    temporal_sigma_days: float = 1.0
    bm25: Bm25Params = Bm25Params()

    def __post_init__(self):
        if self.method not in ALL_METHODS:
            raise ValueError(
                f"unknown method {self.method!r}; valid methods: {', '.join(ALL_METHODS)}"
            )
        if self.pool_size < 1:
            raise ValueError("pool_size must be >= 1")
        if self.duplicate_hamming_threshold < 0:
            raise ValueError("duplicate_hamming_threshold must be >= 0")
        if self.prf_depth < 1:
            raise ValueError("prf_depth must be >= 1")
        if self.concept_top_k < 1:
            raise ValueError("concept_top_k must be >= 1")
        if self.temporal_sigma_days <= 0:
            raise ValueError("temporal_sigma_days must be > 0")


def illustrator_config_from_dict(raw: dict) -> IllustratorConfig:
    """Build a config from file keys; the bm25 entry nests Bm25Params fields."""
    data = dict(raw)
    bm25_raw = data.pop("bm25", None)
    if bm25_raw is not None:
        data["bm25"] = Bm25Params(**bm25_raw)
    return IllustratorConfig(**data)


@dataclass(frozen=True)
class Candidate:
    media_id: str
    doc_id: str
    score: float


@dataclass(frozen=True)
class CandidatePool:
    segment_id: str
    candidates: tuple[Candidate, ...]

    def __len__(self) -> int:
        return len(self.candidates)


def candidate_pool(
    segment: StorySegment,
    corpus: Corpus,
    index: InvertedIndex,
    config: IllustratorConfig,
) -> CandidatePool:
    """Top pool_size docs by BM25 on the segment description, one candidate
    per media item, restricted to documents that carry media."""
    if index.doc_count == 0:
        return CandidatePool(segment.segment_id, ())
    ranked = rank_documents(index, config.bm25, segment.description, index.doc_count)
    candidates: list[Candidate] = []
    docs_taken = 0
    for doc_id, score in ranked:
        doc = corpus.by_id[doc_id]
        if not doc.media:
            continue
        docs_taken += 1
        if docs_taken > config.pool_size:
            break
        for ref in doc.media:
            candidates.append(Candidate(media_id=ref.media_id, doc_id=doc_id, score=score))
    return CandidatePool(segment.segment_id, tuple(candidates))


def story_pools(
    storyline: Storyline,
    corpus: Corpus,
    index: InvertedIndex,
    config: IllustratorConfig,
) -> list[CandidatePool]:
    return [candidate_pool(segment, corpus, index, config) for segment in storyline.segments]


# Per-segment rerank: maps a non-empty pool to the chosen candidate.
PoolPicker = Callable[[CandidatePool], Candidate]


def _pick_per_segment(
    storyline: Storyline, pools: list[CandidatePool], picker: PoolPicker, method_name: str
) -> IllustratedStoryline:
    choices: list[Optional[str]] = []
    for pool in pools:
        if not pool.candidates:
            choices.append(NO_ILLUSTRATION)
        else:
            choices.append(picker(pool).media_id)
    return IllustratedStoryline(
        story_id=storyline.story_id, method_name=method_name, choices=tuple(choices)
    )


def _bm25_order_key(candidate: Candidate) -> tuple:
    return (-candidate.score, candidate.doc_id)


def illustrate_bm25(
    storyline: Storyline, corpus: Corpus, index: InvertedIndex, config: IllustratorConfig
) -> IllustratedStoryline:
    """Head of the BM25 pool per segment."""
    pools = story_pools(storyline, corpus, index, config)
    return _pick_per_segment(storyline, pools, lambda pool: pool.candidates[0], "bm25")


def illustrate_retweets(
    storyline: Storyline, corpus: Corpus, index: InvertedIndex, config: IllustratorConfig
) -> IllustratedStoryline:
    """Re-rank each pool by retweet count; BM25 order breaks ties."""
    pools = story_pools(storyline, corpus, index, config)

    def picker(pool: CandidatePool) -> Candidate:
        return min(
            pool.candidates,
            key=lambda c: (-corpus.by_id[c.doc_id].retweets,) + _bm25_order_key(c),
        )

    return _pick_per_segment(storyline, pools, picker, "retweets")


def _duplicate_clusters(
    pool: CandidatePool, features: MediaFeatureStore, threshold: int
) -> dict[str, int]:
    """Single-link clusters over the pool's perceptual hashes; returns
    media_id -> cluster size. Unhashable media form singleton clusters."""
    media_ids = []
    seen = set()
    for c in pool.candidates:
        if c.media_id not in seen:
            seen.add(c.media_id)
            media_ids.append(c.media_id)
    hashes = {m: features.dhash(m) for m in media_ids}
    parent = {m: m for m in media_ids}

    def find(m: str) -> str:
        while parent[m] != m:
            parent[m] = parent[parent[m]]
            m = parent[m]
        return m

    hashable = [m for m in media_ids if hashes[m] is not None]
    for i, a in enumerate(hashable):
        for b in hashable[i + 1 :]:
            if hamming_distance(hashes[a], hashes[b]) <= threshold:
                parent[find(a)] = find(b)

    sizes = Counter(find(m) for m in media_ids)
    return {m: sizes[find(m)] for m in media_ids}


def illustrate_duplicates(
    storyline: Storyline,
    corpus: Corpus,
    index: InvertedIndex,
    config: IllustratorConfig,
    features: MediaFeatureStore,
) -> IllustratedStoryline:
    """Score each candidate by the size of its near-duplicate cluster."""
    pools = story_pools(storyline, corpus, index, config)

    def picker(pool: CandidatePool) -> Candidate:
        cluster_sizes = _duplicate_clusters(pool, features, config.duplicate_hamming_threshold)
        return min(
            pool.candidates,
            key=lambda c: (-cluster_sizes[c.media_id],) + _bm25_order_key(c),
        )

    return _pick_per_segment(storyline, pools, picker, "duplicates")


def illustrate_concept_pool(
    storyline: Storyline,
    corpus: Corpus,
    index: InvertedIndex,
    config: IllustratorConfig,
    features: MediaFeatureStore,
) -> IllustratedStoryline:
    """Pick the image sharing the most of the pool's most frequent concepts."""
    pools = story_pools(storyline, corpus, index, config)

    def picker(pool: CandidatePool) -> Candidate:
        frequency: Counter = Counter()
        for c in pool.candidates:
            annotation = features.concepts(c.media_id)
            if annotation:
                frequency.update(annotation.labels())
        top_labels = {
            label
            for label, _ in sorted(frequency.items(), key=lambda kv: (-kv[1], kv[0]))[
                : config.concept_top_k
            ]
        }

        def overlap(c: Candidate) -> int:
            annotation = features.concepts(c.media_id)
            return len(annotation.labels() & top_labels) if annotation else 0

        return min(pool.candidates, key=lambda c: (-overlap(c),) + _bm25_order_key(c))

    return _pick_per_segment(storyline, pools, picker, "concept_pool")


def illustrate_concept_query(
    storyline: Storyline,
    corpus: Corpus,
    index: InvertedIndex,
    config: IllustratorConfig,
    features: MediaFeatureStore,
) -> IllustratedStoryline:
    """Pseudo-relevance feedback over concepts: labels frequent in the
    top-ranked docs re-rank the whole pool."""
    pools = story_pools(storyline, corpus, index, config)

    def picker(pool: CandidatePool) -> Candidate:
        prf_docs: list[str] = []
        for c in pool.candidates:  # pool is BM25-ordered; docs repeat per media
            if c.doc_id not in prf_docs:
                prf_docs.append(c.doc_id)
            if len(prf_docs) >= config.prf_depth:
                break
        prf_doc_set = set(prf_docs)
        weights: Counter = Counter()
        for c in pool.candidates:
            if c.doc_id in prf_doc_set:
                annotation = features.concepts(c.media_id)
                if annotation:
                    weights.update(annotation.labels())

        def prf_score(c: Candidate) -> int:
            annotation = features.concepts(c.media_id)
            if not annotation:
                return 0
            return sum(weights[label] for label in annotation.labels())

        return min(pool.candidates, key=lambda c: (-prf_score(c),) + _bm25_order_key(c))

    return _pick_per_segment(storyline, pools, picker, "concept_query")


def daily_volume_prior(corpus: Corpus, sigma_days: float) -> dict[date, float]:
    """Gaussian-smoothed share of daily posting volume over the corpus span.

    The kernel is normalized per day (no boundary damping), so a uniform
    volume profile yields a uniform prior; the smoothed profile is then
    normalized to sum to 1 across the span.
    """
    if len(corpus) == 0:
        return {}
    days = [doc.timestamp.astimezone(timezone.utc).date() for doc in corpus]
    start, end = min(days), max(days)
    n_days = (end - start).days + 1
    volume = np.zeros(n_days)
    for day in days:
        volume[(day - start).days] += 1
    offsets = np.arange(n_days)
    diff = offsets[:, None] - offsets[None, :]
    kernel = np.exp(-(diff.astype(np.float64) ** 2) / (2.0 * sigma_days**2))
    smoothed = (kernel * volume[None, :]).sum(axis=1) / kernel.sum(axis=1)
    prior = smoothed / smoothed.sum()
    return {start + timedelta(days=int(o)): float(p) for o, p in zip(offsets, prior)}


def illustrate_temporal(
    storyline: Storyline, corpus: Corpus, index: InvertedIndex, config: IllustratorConfig
) -> IllustratedStoryline:
    """Weight BM25 scores by a smoothed daily posting-volume prior."""
    prior = daily_volume_prior(corpus, config.temporal_sigma_days)
    pools = story_pools(storyline, corpus, index, config)

    def picker(pool: CandidatePool) -> Candidate:
        def weighted(c: Candidate) -> float:
            day = corpus.by_id[c.doc_id].timestamp.astimezone(timezone.utc).date()
            return c.score * prior.get(day, 0.0)

        return min(pool.candidates, key=lambda c: (-weighted(c),) + _bm25_order_key(c))

    return _pick_per_segment(storyline, pools, picker, "temporal")


def illustrate_random(
    storyline: Storyline,
    corpus: Corpus,
    index: InvertedIndex,
    config: IllustratorConfig,
    seed: int,
) -> IllustratedStoryline:
    """Uniform choice from each pool; seeded per (seed, story, segment)."""
    pools = story_pools(storyline, corpus, index, config)
    choices: list[Optional[str]] = []
    for pool in pools:
        if not pool.candidates:
            choices.append(NO_ILLUSTRATION)
        else:
            rng = random.Random(f"{seed}:{storyline.story_id}:{pool.segment_id}")
            choices.append(rng.choice(pool.candidates).media_id)
    return IllustratedStoryline(
        story_id=storyline.story_id, method_name="random", choices=tuple(choices)
    )


def illustrate_transition(
    storyline: Storyline,
    corpus: Corpus,
    index: InvertedIndex,
    config: IllustratorConfig,
    features: MediaFeatureStore,
    kind: TransitionKind,
) -> IllustratedStoryline:
    """Choose one item per segment minimizing summed transition cost.

    Segments with empty pools become NO_ILLUSTRATION; the chain is
    optimized independently over each contiguous run of non-empty pools.
    """
    pools = story_pools(storyline, corpus, index, config)
    method_name = f"transition_{kind.value}"
    cost = media_pair_cost(TransitionCostFn(kind), features)
    choices: list[Optional[str]] = [NO_ILLUSTRATION] * len(pools)

    run: list[int] = []
    runs: list[list[int]] = []
    for position, pool in enumerate(pools):
        if pool.candidates:
            run.append(position)
        elif run:
            runs.append(run)
            run = []
    if run:
        runs.append(run)

    for segment_run in runs:
        run_pools = [[c.media_id for c in pools[p].candidates] for p in segment_run]
        result = select_sequence_dp(run_pools, cost, method_name)
        for position, chosen_index in zip(segment_run, result.chosen_indices):
            choices[position] = pools[position].candidates[chosen_index].media_id

    return IllustratedStoryline(
        story_id=storyline.story_id, method_name=method_name, choices=tuple(choices)
    )


def run_method(
    method: str,
    storyline: Storyline,
    corpus: Corpus,
    index: InvertedIndex,
    config: IllustratorConfig,
    features: MediaFeatureStore,
    seed: int = 0,
) -> IllustratedStoryline:
    """Dispatch a method name to its illustrator."""
    if method == "bm25":
        return illustrate_bm25(storyline, corpus, index, config)
    if method == "retweets":
        return illustrate_retweets(storyline, corpus, index, config)
    if method == "duplicates":
        return illustrate_duplicates(storyline, corpus, index, config, features)
    if method == "concept_pool":
        return illustrate_concept_pool(storyline, corpus, index, config, features)
    if method == "concept_query":
        return illustrate_concept_query(storyline, corpus, index, config, features)
    if method == "temporal":
        return illustrate_temporal(storyline, corpus, index, config)
    if method == "random":
        return illustrate_random(storyline, corpus, index, config, seed)
    if method in TRANSITION_METHODS:
        kind = TransitionKind(method.removeprefix("transition_"))
        return illustrate_transition(storyline, corpus, index, config, features, kind)
    raise ValueError(f"unknown method {method!r}; valid methods: {', '.join(ALL_METHODS)}")
