"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
lines as they execute.
"""

import functools
import random
import time

import numpy as np
import pytest

from storyweave.benchmark_harness import RunManifest, run_benchmark
from storyweave.quality_metric import (
    MetricParams,
    aggregate_judgments,
    correlate,
    story_quality,
)
from storyweave.synthetic import (
    generate_synthetic_event,
    graded_illustrations,
    simulate_annotator,
)
from storyweave.text_retrieval import Bm25Params, build_index, rank_documents
from storyweave.transition_engine import (
    select_sequence_bruteforce,
    select_sequence_dp,
)
from storyweave.visual_features import (
    ImagePixels,
    color_histogram,
    hamming_distance,
    mean_luminance,
    perceptual_hash,
    visual_entropy,
)

from test_text_retrieval import FIXTURE_DOCS, FIXTURE_EXPECTED, fixture_corpus

DEFAULTS = MetricParams()


def criterion(name, time_limit=None):
    """Print one pass/fail line per acceptance criterion."""

    def decorator(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.monotonic()
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"ACCEPTANCE {name}: FAIL ({time.monotonic() - start:.2f}s)")
                raise
            elapsed = time.monotonic() - start
            print(f"ACCEPTANCE {name}: PASS ({elapsed:.2f}s)")
            if time_limit is not None:
                assert elapsed < time_limit, f"{name} exceeded {time_limit}s ({elapsed:.2f}s)"
        return wrapper

    return decorator


@criterion("metric-exactness", time_limit=5.0)
def test_metric_exactness():
    assert abs(story_quality([2, 2, 2, 2], [2, 2, 2], DEFAULTS) - 2.36) <= 1e-9
    assert abs(story_quality([0, 0, 0, 0], [0, 0, 0], DEFAULTS) - 0.0) <= 1e-9
    assert abs(story_quality([2, 0, 1], [1, 2], DEFAULTS) - 0.875) <= 1e-9


@criterion("metric-properties", time_limit=5.0)
def test_metric_properties():
    rng = random.Random(1234)
    bound = DEFAULTS.max_quality()
    checked = 0
    while checked < 10_000:
        n = rng.choice((2, 3, 4, 8))
        s = [rng.randint(0, 2) for _ in range(n)]
        t = [rng.randint(0, 2) for _ in range(n - 1)]
        quality = story_quality(s, t, DEFAULTS)

        assert -1e-12 <= quality <= bound + 1e-12

        position = rng.randrange(n + n - 1)
        if position < n and s[position] < 2:
            bumped = list(s)
            bumped[position] += 1
            assert story_quality(bumped, t, DEFAULTS) >= quality - 1e-12
        elif position >= n and t[position - n] < 2:
            bumped_t = list(t)
            bumped_t[position - n] += 1
            assert story_quality(s, bumped_t, DEFAULTS) >= quality - 1e-12

        checked += 1

    for cs in (0, 1, 2):
        for ct in (0, 1, 2):
            reference = story_quality([cs] * 2, [ct], DEFAULTS)
            for n in (3, 4, 8):
                value = story_quality([cs] * n, [ct] * (n - 1), DEFAULTS)
                assert abs(value - reference) <= 1e-12


@criterion("transition-optimizer", time_limit=10.0)
def test_transition_optimizer_dp_equals_bruteforce():
    rng = random.Random(20240607)
    mismatches = 0
    for _ in range(1_000):
        n_segments = rng.randint(1, 4)
        pools = [list(range(rng.randint(1, 6))) for _ in range(n_segments)]
        matrices = [
            [[rng.random() * 10 for _ in pools[i + 1]] for _ in pools[i]]
            for i in range(n_segments - 1)
        ]

        def cost(i, a, b):
            return matrices[i][a][b]

        dp = select_sequence_dp(pools, cost)
        brute = select_sequence_bruteforce(pools, cost)
        if dp.chosen_indices != brute.chosen_indices or dp.total_cost != brute.total_cost:
            mismatches += 1
    assert mismatches == 0


@criterion("retrieval-oracle", time_limit=5.0)
def test_retrieval_oracle():
    index = build_index(fixture_corpus())
    for query, expected in FIXTURE_EXPECTED.items():
        ranked = rank_documents(index, Bm25Params(), query, len(FIXTURE_DOCS))
        assert [doc_id for doc_id, _ in ranked] == expected, query


@criterion("feature-invariants", time_limit=5.0)
def test_feature_invariants():
    rng = np.random.default_rng(77)

    def solid(r, g, b):
        pixels = np.zeros((16, 16, 3), dtype=np.uint8)
        pixels[..., 0], pixels[..., 1], pixels[..., 2] = r, g, b
        return ImagePixels(pixels)

    fixtures = [
        solid(255, 255, 255),
        solid(0, 0, 0),
        solid(255, 0, 0),
        ImagePixels(rng.integers(0, 256, (24, 31, 3)).astype(np.uint8)),
        ImagePixels(rng.integers(0, 256, (7, 5, 3)).astype(np.uint8)),
    ]
    for img in fixtures:
        hist = color_histogram(img, 8)
        assert abs(float(hist.values.sum()) - 1.0) <= 1e-9
        assert 0.0 <= visual_entropy(img) <= 8.0
        assert hamming_distance(perceptual_hash(img), perceptual_hash(img)) == 0

    assert mean_luminance(solid(255, 255, 255)) == pytest.approx(255.0, abs=1e-9)
    assert mean_luminance(solid(0, 0, 0)) == pytest.approx(0.0, abs=1e-9)
    assert mean_luminance(solid(255, 0, 0)) == pytest.approx(76.245, abs=1e-9)


@pytest.fixture(scope="module")
def synthetic_event(tmp_path_factory):
    return generate_synthetic_event(101, 170, 8, tmp_path_factory.mktemp("accept"))


def _manifest(event, out_dir, methods):
    return RunManifest(
        event_name="riverfest",
        corpus_path=event.corpus_path,
        storyline_paths=(event.storylines_path,),
        methods=methods,
        output_dir=out_dir,
        concepts_path=event.concepts_path,
        embeddings_path=event.embeddings_path,
        media_dir=event.out_dir,
        ground_truth_path=event.ground_truth_path,
        annotators=3,
        noise_rate=0.0,
        random_seed=101,
    )


@criterion("end-to-end-synthetic-benchmark", time_limit=60.0)
def test_end_to_end_synthetic_benchmark(synthetic_event, tmp_path_factory):
    # (a) BM25 beats the seeded random baseline by >= 0.5 at noise 0
    out_dir = tmp_path_factory.mktemp("bench_out")
    bm25, rnd = run_benchmark(_manifest(synthetic_event, out_dir, ("bm25", "random")))
    assert bm25.mean_quality is not None and rnd.mean_quality is not None
    assert bm25.mean_quality - rnd.mean_quality >= 0.5

    # (b) metric tracks simulated overall ratings across 40 graded stories
    corr_dir = tmp_path_factory.mktemp("corr")
    event40 = generate_synthetic_event(202, 600, 40, corr_dir)
    graded = graded_illustrations(event40.storylines, event40.corpus, event40.truth)
    stories_by_id = {s.story_id: s for s in event40.storylines}
    by_story = {}
    for annotator in ("sim1", "sim2", "sim3"):
        for judgment in simulate_annotator(
            graded, stories_by_id, event40.truth, 0.1, 202, annotator
        ):
            by_story.setdefault(judgment.story_id, []).append(judgment)
    metric_values = []
    ratings = []
    for story_id in sorted(by_story):
        consensus = aggregate_judgments(by_story[story_id])
        metric_values.append(
            story_quality(consensus.segment_scores, consensus.transition_scores, DEFAULTS)
        )
        ratings.append(consensus.overall_rating)
    assert len(metric_values) == 40
    _, spearman = correlate(metric_values, ratings)
    assert spearman >= 0.9


@criterion("determinism", time_limit=60.0)
def test_determinism_byte_identical_reports(synthetic_event, tmp_path_factory):
    first_dir = tmp_path_factory.mktemp("det1")
    second_dir = tmp_path_factory.mktemp("det2")
    methods = ("bm25", "retweets", "temporal", "random")
    run_benchmark(_manifest(synthetic_event, first_dir, methods))
    run_benchmark(_manifest(synthetic_event, second_dir, methods))
    first_files = sorted(p for p in first_dir.rglob("*") if p.is_file())
    assert first_files
    for path in first_files:
        twin = second_dir / path.relative_to(first_dir)
        assert path.read_bytes() == twin.read_bytes(), path.name
