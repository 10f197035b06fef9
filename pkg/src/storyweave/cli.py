"""Command-line entry point.

Exit codes: 0 success, 1 validation/usage error, 2 runtime error.
Set STORYWEAVE_LOG to control log verbosity (DEBUG/INFO/WARNING/ERROR).
"""

import json
import logging
import os
import sys
from pathlib import Path

import click

from . import __version__
from .benchmark_harness import load_manifest, run_benchmark
from .fileio import atomic_write_text
from .illustrators import (
    ALL_METHODS,
    IllustratorConfig,
    illustrator_config_from_dict,
    run_method,
)
from .quality_metric import (
    CorrelationUndefinedError,
    MetricParams,
    aggregate_judgments,
    correlate,
    load_judgments,
    story_quality,
)
from .story_model import (
    filter_corpus,
    load_corpus,
    load_crawl_spec,
    load_illustrated,
    load_storylines,
    save_corpus,
    save_illustrated,
)
from .synthetic import generate_synthetic_event
from .text_retrieval import Bm25Params, build_index, rank_documents
from .visual_features import MediaFeatureStore, load_concepts, load_embeddings

logger = logging.getLogger(__name__)

_SETTINGS = {"max_content_width": 80, "terminal_width": 80}


@click.group(context_settings=_SETTINGS)
@click.version_option(version=__version__, prog_name="storyweave")
def cli():
    """Illustrate news storylines with social media and evaluate the result."""


@cli.command("filter", context_settings=_SETTINGS)
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Corpus file (one JSON document per line).")
@click.option("--spec", "spec_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Crawl spec file (event terms, hashtags, span).")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path),
              help="Destination for the filtered corpus.")
def cmd_filter(corpus_path: Path, spec_path: Path, out_path: Path):
    """Keep only documents matching the crawl spec."""
    corpus = load_corpus(corpus_path)
    spec = load_crawl_spec(spec_path)
    kept = filter_corpus(corpus, spec)
    save_corpus(kept, out_path)
    click.echo(f"kept {len(kept)} dropped {len(corpus) - len(kept)}")


@cli.command("rank", context_settings=_SETTINGS)
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Corpus file to index.")
@click.option("--query", required=True, help="Free-text query.")
@click.option("--k", default=10, show_default=True, help="Number of results.")
def cmd_rank(corpus_path: Path, query: str, k: int):
    """Rank corpus documents against a query with BM25."""
    if k < 1:
        raise click.UsageError("--k must be >= 1")
    corpus = load_corpus(corpus_path)
    index = build_index(corpus)
    for doc_id, score in rank_documents(index, Bm25Params(), query, k):
        click.echo(f"{doc_id}\t{score:.6f}")


def _load_config(config_path: Path | None, method: str) -> IllustratorConfig:
    if config_path is None:
        return IllustratorConfig(method=method)
    with open(config_path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    raw["method"] = method
    try:
        return illustrator_config_from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise click.UsageError(f"bad config: {exc}") from exc


@cli.command("illustrate", context_settings=_SETTINGS)
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Corpus file (pre-filtered to the event).")
@click.option("--stories", "stories_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Storyline file (one JSON storyline per line).")
@click.option("--method", required=True, help="Illustration method to run.")
@click.option("--concepts", "concepts_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Concept sidecar file.")
@click.option("--embeddings", "embeddings_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Embedding sidecar file.")
@click.option("--media-dir", "media_dir", type=click.Path(exists=True, file_okay=False, path_type=Path),
              help="Base directory for relative media paths.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Illustrator config file (JSON).")
@click.option("--seed", default=0, show_default=True,
              help="Seed for the random baseline.")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path),
              help="Destination for illustrated storyline records.")
def cmd_illustrate(corpus_path, stories_path, method, concepts_path, embeddings_path,
                   media_dir, config_path, seed, out_path):
    """Choose one media item per segment with one method."""
    if method not in ALL_METHODS:
        raise click.UsageError(
            f"unknown method {method!r}; valid methods: {', '.join(ALL_METHODS)}"
        )
    corpus = load_corpus(corpus_path)
    storylines = load_storylines(stories_path)
    index = build_index(corpus)
    config = _load_config(config_path, method)
    features = MediaFeatureStore.from_corpus(
        corpus,
        base_dir=media_dir if media_dir is not None else Path(corpus_path).parent,
        concepts=load_concepts(concepts_path) if concepts_path else None,
        embeddings=load_embeddings(embeddings_path) if embeddings_path else None,
    )
    results = [
        run_method(method, storyline, corpus, index, config, features, seed=seed)
        for storyline in sorted(storylines, key=lambda s: s.story_id)
    ]
    save_illustrated(results, out_path)
    empty = sum(r.no_illustration_count() for r in results)
    click.echo(f"illustrated {len(results)} stories ({empty} segments without illustration)")


@cli.command("evaluate", context_settings=_SETTINGS)
@click.option("--illustrated", "illustrated_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Illustrated storyline records to score.")
@click.option("--judgments", "judgments_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Judgment records (one JSON object per line).")
@click.option("--alpha", default=0.1, show_default=True,
              help="First-segment weight of the quality score.")
@click.option("--beta", default=0.6, show_default=True,
              help="Relevance/coherence trade-off of the quality score.")
@click.option("--out", "out_path", type=click.Path(path_type=Path),
              help="Optional destination for the machine-readable report.")
def cmd_evaluate(illustrated_path, judgments_path, alpha, beta, out_path):
    """Score illustrated storylines against collected judgments."""
    try:
        params = MetricParams(alpha=alpha, beta=beta)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    illustrated = load_illustrated(illustrated_path)
    judgments = load_judgments(judgments_path)

    by_story: dict[str, list] = {}
    for judgment in judgments:
        by_story.setdefault(judgment.story_id, []).append(judgment)

    rows = []
    ratings = []
    for item in sorted(illustrated, key=lambda i: i.story_id):
        sets = [
            j for j in by_story.get(item.story_id, [])
            if not j.method_name or not item.method_name or j.method_name == item.method_name
        ]
        if not sets:
            click.echo(f"{item.story_id}\texcluded (no judgments)")
            continue
        consensus = aggregate_judgments(sets)
        segment_scores = tuple(
            0 if choice is None else score
            for score, choice in zip(consensus.segment_scores, item.choices)
        )
        quality = story_quality(segment_scores, consensus.transition_scores, params)
        rows.append((item.story_id, quality))
        ratings.append(consensus.overall_rating)
        click.echo(f"{item.story_id}\t{quality:.6g}")

    if rows:
        values = [q for _, q in rows]
        mean = sum(values) / len(values)
        click.echo(f"mean\t{mean:.6g}")
        try:
            pearson, spearman = correlate(values, ratings)
            click.echo(f"pearson\t{pearson:.6f}")
            click.echo(f"spearman\t{spearman:.6f}")
        except CorrelationUndefinedError as exc:
            click.echo(f"correlation\tn/a ({exc})")
    if out_path is not None:
        lines = ["story_id\tquality"] + [f"{s}\t{q:.6f}" for s, q in rows]
        atomic_write_text(out_path, "\n".join(lines) + "\n")


@cli.command("synth", context_settings=_SETTINGS)
@click.option("--seed", default=7, show_default=True, help="Generator seed.")
@click.option("--docs", "n_docs", default=160, show_default=True,
              help="Minimum number of documents.")
@click.option("--stories", "n_stories", default=8, show_default=True,
              help="Number of storylines.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False, path_type=Path),
              help="Output directory for the synthetic event.")
def cmd_synth(seed, n_docs, n_stories, out_dir):
    """Generate a seeded synthetic event with planted ground truth."""
    try:
        event = generate_synthetic_event(seed, n_docs, n_stories, out_dir)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    click.echo(
        f"generated {len(event.corpus)} documents, {len(event.storylines)} stories -> {event.out_dir}"
    )


@cli.command("bench", context_settings=_SETTINGS)
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Benchmark manifest file.")
def cmd_bench(manifest_path: Path):
    """Run the full benchmark described by a manifest."""
    try:
        manifest = load_manifest(manifest_path)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    reports = run_benchmark(manifest)
    for report in reports:
        mean = "n/a" if report.mean_quality is None else f"{report.mean_quality:.4f}"
        click.echo(
            f"{report.method_name}\tmean={mean}\tstories={len(report.per_story_quality)}"
            f"\texcluded={len(report.excluded_story_ids)}"
        )
    click.echo(f"reports written to {manifest.output_dir}")


@cli.command("serve", context_settings=_SETTINGS)
@click.option("--store", "store_dir", required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path),
              help="Annotation store directory (payloads, annotators, log).")
@click.option("--media-dir", "media_dir", type=click.Path(exists=True, file_okay=False, path_type=Path),
              help="Directory of media files to serve under /media.")
@click.option("--port", default=8765, show_default=True, help="Listen port.")
def cmd_serve(store_dir, media_dir, port):
    """Start the annotation service."""
    from .annotation_service import serve

    click.echo(f"serving annotation store {store_dir} on port {port}")
    serve(store_dir, media_dir, port)


def main(argv=None) -> int:
    level = os.environ.get("STORYWEAVE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cli.main(args=argv, standalone_mode=False, prog_name="storyweave")
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except (KeyboardInterrupt, click.Abort):
        click.echo("aborted", err=True)
        return 1
    except Exception as exc:  # runtime failure
        logger.error("%s", exc, exc_info=level == "DEBUG")
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
