"""Seeded synthetic event corpora with planted ground truth.

The generator builds a fictional multi-day festival event: every storyline
segment gets a controlled vocabulary, planted relevant documents whose
media share the story's color palette / concept labels / embedding
cluster, timestamp peaks per topic, and a re-encoded near-duplicate image.
The planted truth lets every downstream claim (retrieval order, duplicate
clustering, metric-vs-rating correlation) be checked without human
annotators.
"""

import json
import logging
import random
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from PIL import Image

from .fileio import atomic_write_text, dumps_record
from .quality_metric import JudgmentSet, MetricParams, story_quality
from .story_model import (
    Corpus,
    CrawlSpec,
    IllustratedStoryline,
    MediaKind,
    MediaRef,
    SocialDocument,
    Source,
    StorySegment,
    Storyline,
    save_corpus,
    save_storylines,
)

logger = logging.getLogger(__name__)

EVENT_NAME = "riverfest"
SPAN_START = date(2021, 6, 1)
SPAN_DAYS = 14

IMAGE_SIZE = 32
EMBEDDING_DIM = 16
JPEG_TWIN_QUALITY = 60

_TOPIC_NOUNS = [
    "lantern", "regatta", "fireworks", "parade", "jugglers", "drummers",
    "acrobats", "puppets", "choir", "mural", "kites", "bonfire",
    "carousel", "stilts", "banners", "buskers", "gondola", "falconry",
    "quartet", "tapestry", "weaving", "glassblow", "torchlit", "masquerade",
]

_FILLER_WORDS = [
    "tonight", "amazing", "incredible", "wonderful", "unmissable",
    "stunning", "festival", "evening", "afternoon", "celebration",
]

_DISTRACTOR_WORDS = [
    "coffee", "queue", "parking", "umbrella", "sandwich", "pigeons",
    "tickets", "luggage", "raincoat", "sunhat", "notebook", "charger",
    "backpack", "scooter", "tramline", "benches", "puddle", "postcard",
    "vending", "lamppost", "escalator", "turnstile", "kiosk", "awning",
]

_DISTRACTOR_CONCEPTS = [
    "umbrella", "streetlamp", "pavement", "bicycle", "window", "doorway",
    "pigeon", "cloud", "puddle", "signpost", "fence", "rooftop",
    "traffic", "staircase", "handrail", "shopfront", "awning", "bollard",
    "crosswalk", "gutter", "mailbox", "hydrant", "scaffold", "billboard",
]


@dataclass(frozen=True)
class GroundTruth:
    """Planted relevance and visual-group labels for one synthetic event."""

    event_name: str
    # story_id -> segment_id -> media_id -> relevance in {1, 2}
    relevance: dict
    # media_id -> palette label (planted media share their story's palette)
    palettes: dict
    duplicate_pairs: tuple[tuple[str, str], ...]

    def segment_relevance(self, story_id: str, segment_id: str, media_id: Optional[str]) -> int:
        if media_id is None:
            return 0
        return self.relevance.get(story_id, {}).get(segment_id, {}).get(media_id, 0)

    def transition_coherence(
        self,
        story_id: str,
        segment_a: str,
        segment_b: str,
        media_a: Optional[str],
        media_b: Optional[str],
    ) -> int:
        """2 = relevant pair sharing a palette, 1 = one of those, 0 = neither."""
        if media_a is None or media_b is None:
            return 0
        both_relevant = (
            self.segment_relevance(story_id, segment_a, media_a) >= 1
            and self.segment_relevance(story_id, segment_b, media_b) >= 1
        )
        palette_a = self.palettes.get(media_a)
        palette_b = self.palettes.get(media_b)
        same_palette = palette_a is not None and palette_a == palette_b
        return min(2, int(both_relevant) + int(same_palette))

    def true_judgment(
        self, storyline: Storyline, illustrated: IllustratedStoryline
    ) -> tuple[tuple[int, ...], tuple[int, ...]]:
        segments = storyline.segments
        s = tuple(
            self.segment_relevance(storyline.story_id, seg.segment_id, choice)
            for seg, choice in zip(segments, illustrated.choices)
        )
        t = tuple(
            self.transition_coherence(
                storyline.story_id,
                segments[i].segment_id,
                segments[i + 1].segment_id,
                illustrated.choices[i],
                illustrated.choices[i + 1],
            )
            for i in range(len(segments) - 1)
        )
        return s, t


def ground_truth_record(truth: GroundTruth) -> dict:
    return {
        "event_name": truth.event_name,
        "relevance": truth.relevance,
        "palettes": truth.palettes,
        "duplicate_pairs": [list(pair) for pair in truth.duplicate_pairs],
    }


def load_ground_truth(path: Path) -> GroundTruth:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return GroundTruth(
        event_name=str(raw["event_name"]),
        relevance=raw["relevance"],
        palettes=raw["palettes"],
        duplicate_pairs=tuple((a, b) for a, b in raw.get("duplicate_pairs", [])),
    )


@dataclass(frozen=True)
class SyntheticEvent:
    corpus: Corpus
    storylines: tuple[Storyline, ...]
    truth: GroundTruth
    crawl_spec: CrawlSpec
    out_dir: Path
    corpus_path: Path
    storylines_path: Path
    concepts_path: Path
    embeddings_path: Path
    ground_truth_path: Path
    crawl_spec_path: Path
    media_dir: Path
    manifest_path: Path


def _topic_terms(index: int) -> tuple[str, str]:
    noun = _TOPIC_NOUNS[index % len(_TOPIC_NOUNS)]
    return f"{noun}{index}", f"{noun}show{index}"


def _timestamp(day: date, rng: np.random.Generator) -> datetime:
    return datetime(
        day.year, day.month, day.day,
        int(rng.integers(8, 23)), int(rng.integers(0, 60)), int(rng.integers(0, 60)),
        tzinfo=timezone.utc,
    )


def _planted_image(rng: np.random.Generator, base: np.ndarray, tint: np.ndarray) -> np.ndarray:
    # dominant horizontal luma gradient keeps the difference hash stable
    # under JPEG re-encoding; the vertical tint only adds texture
    sign = 1.0 if rng.random() < 0.5 else -1.0
    column_tint = sign * rng.uniform(18.0, 36.0, size=3)
    cols = np.linspace(-1.0, 1.0, IMAGE_SIZE)[None, :, None]
    rows = np.linspace(-1.0, 1.0, IMAGE_SIZE)[:, None, None]
    noise = rng.normal(0.0, 4.0, size=(IMAGE_SIZE, IMAGE_SIZE, 3))
    pixels = base[None, None, :] + cols * column_tint[None, None, :] + rows * tint[None, None, :]
    return np.clip(pixels + noise, 0, 255).astype(np.uint8)


def _distractor_image(rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 256, size=(IMAGE_SIZE, IMAGE_SIZE, 3)).astype(np.uint8)


def generate_synthetic_event(
    seed: int,
    n_docs: int,
    n_stories: int,
    out_dir: Path,
) -> SyntheticEvent:
    """Generate a seeded synthetic event under ``out_dir``.

    ``n_docs`` is a floor: planted documents (a few per segment) always
    exist, and distractors fill the corpus up to at least ``n_docs``.
    Identical seeds produce byte-identical output files.
    """
    if n_docs < 50:
        raise ValueError("n_docs must be >= 50")
    if n_stories < 1:
        raise ValueError("n_stories must be >= 1")
    out_dir = Path(out_dir)
    media_dir = out_dir / "media"
    media_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    span_end = SPAN_START + timedelta(days=SPAN_DAYS - 1)
    documents: list[SocialDocument] = []
    storylines: list[Storyline] = []
    relevance: dict = {}
    palettes: dict = {}
    duplicate_pairs: list[tuple[str, str]] = []
    concept_rows: list[dict] = []
    embedding_rows: list[dict] = []

    doc_counter = 0
    media_counter = 0

    def next_doc_id() -> str:
        nonlocal doc_counter
        doc_counter += 1
        return f"d{doc_counter:05d}"

    def new_media(pixels: np.ndarray, as_video: bool = False) -> MediaRef:
        nonlocal media_counter
        media_counter += 1
        media_id = f"m{media_counter:05d}"
        image_path = media_dir / f"{media_id}.png"
        Image.fromarray(pixels).save(image_path)
        relative = f"media/{media_id}.png"
        if as_video:
            return MediaRef(
                media_id=media_id,
                kind=MediaKind.VIDEO,
                uri=f"media/{media_id}.mp4",
                thumbnail_uri=relative,
            )
        return MediaRef(media_id=media_id, kind=MediaKind.IMAGE, uri=relative)

    def reencoded_twin(ref: MediaRef) -> MediaRef:
        nonlocal media_counter
        media_counter += 1
        media_id = f"m{media_counter:05d}"
        source = media_dir / f"{Path(ref.thumbnail_uri or ref.uri).stem}.png"
        twin_path = media_dir / f"{media_id}.jpg"
        with Image.open(source) as img:
            img.convert("RGB").save(twin_path, format="JPEG", quality=JPEG_TWIN_QUALITY)
        return MediaRef(media_id=media_id, kind=MediaKind.IMAGE, uri=f"media/{media_id}.jpg")

    def add_concepts(media_id: str, labels: Sequence[str], rng: np.random.Generator) -> None:
        concepts = [
            {"label": label, "confidence": round(float(rng.uniform(0.6, 0.99)), 4)}
            for label in labels
        ]
        concept_rows.append({"media_id": media_id, "concepts": concepts})

    def add_embedding(media_id: str, vector: np.ndarray) -> None:
        embedding_rows.append(
            {"media_id": media_id, "vector": [round(float(v), 6) for v in vector]}
        )

    topic_index = 0
    for story_number in range(1, n_stories + 1):
        story_id = f"story{story_number:03d}"
        n_segments = int(rng.integers(3, 5))
        palette_label = f"palette{story_number:03d}"
        base_color = rng.uniform(50.0, 205.0, size=3)
        story_center = rng.normal(0.0, 1.0, size=EMBEDDING_DIM)

        segments: list[StorySegment] = []
        relevance[story_id] = {}
        for order in range(1, n_segments + 1):
            term_a, term_b = _topic_terms(topic_index)
            topic_index += 1
            segment_id = f"{story_id}-s{order}"
            description = f"crowds at {EVENT_NAME} watch the {term_a} {term_b} by the river"
            segments.append(
                StorySegment(segment_id=segment_id, description=description, order=order)
            )
            relevance[story_id][segment_id] = {}

            peak_day = SPAN_START + timedelta(days=int(rng.integers(0, SPAN_DAYS)))
            tint = rng.uniform(-25.0, 25.0, size=3)
            topic_center = rng.normal(0.0, 1.0, size=EMBEDDING_DIM)

            planted_refs: list[MediaRef] = []
            for planted_index in range(2):
                filler = _FILLER_WORDS[int(rng.integers(0, len(_FILLER_WORDS)))]
                text = f"{filler} {term_a} {term_b} at {EVENT_NAME} this week"
                as_video = planted_index == 1 and order == 1 and story_number % 5 == 0
                ref = new_media(_planted_image(rng, base_color, tint), as_video=as_video)
                planted_refs.append(ref)
                documents.append(
                    SocialDocument(
                        doc_id=next_doc_id(),
                        source=Source.TWITTER,
                        text=text,
                        timestamp=_timestamp(peak_day, rng),
                        hashtags=(f"#{EVENT_NAME}", f"#{term_a}"),
                        media=(ref,),
                        retweets=int(rng.integers(10, 100)),
                        favorites=int(rng.integers(0, 50)),
                    )
                )
                relevance[story_id][segment_id][ref.media_id] = 2
                palettes[ref.media_id] = palette_label
                add_concepts(ref.media_id, [term_a, "festivalcrowd"], rng)
                vector = 0.8 * story_center + 0.3 * topic_center + rng.normal(0, 0.05, EMBEDDING_DIM)
                add_embedding(ref.media_id, vector)

            # Near-duplicate: re-encode the segment's first planted image.
            twin = reencoded_twin(planted_refs[0])
            duplicate_pairs.append((planted_refs[0].media_id, twin.media_id))
            documents.append(
                SocialDocument(
                    doc_id=next_doc_id(),
                    source=Source.TWITTER,
                    text=f"sharing again {term_a} {term_b} at {EVENT_NAME}",
                    timestamp=_timestamp(peak_day, rng),
                    hashtags=(f"#{EVENT_NAME}",),
                    media=(twin,),
                    retweets=int(rng.integers(10, 100)),
                    favorites=int(rng.integers(0, 50)),
                )
            )
            relevance[story_id][segment_id][twin.media_id] = 2
            palettes[twin.media_id] = palette_label
            add_concepts(twin.media_id, [term_a, "festivalcrowd"], rng)
            add_embedding(
                twin.media_id,
                0.8 * story_center + 0.3 * topic_center + rng.normal(0, 0.05, EMBEDDING_DIM),
            )

            # Partially relevant: mentions only the first topic term.
            partial_ref = new_media(_planted_image(rng, base_color, tint))
            documents.append(
                SocialDocument(
                    doc_id=next_doc_id(),
                    source=Source.FLICKR,
                    text=f"glimpse of the {term_a} near {EVENT_NAME} gates",
                    timestamp=_timestamp(peak_day, rng),
                    hashtags=(f"#{EVENT_NAME}",),
                    media=(partial_ref,),
                    retweets=int(rng.integers(0, 20)),
                    favorites=int(rng.integers(0, 20)),
                )
            )
            relevance[story_id][segment_id][partial_ref.media_id] = 1
            palettes[partial_ref.media_id] = palette_label
            add_concepts(partial_ref.media_id, [term_a], rng)
            add_embedding(
                partial_ref.media_id,
                0.8 * story_center + 0.3 * topic_center + rng.normal(0, 0.08, EMBEDDING_DIM),
            )

        storylines.append(
            Storyline(
                story_id=story_id,
                title=f"Riverfest story {story_number}",
                event_name=EVENT_NAME,
                segments=tuple(segments),
            )
        )

    # Distractors: match only the event term; half carry noise images.
    n_distractors = max(n_docs - len(documents), 10)
    for distractor_index in range(n_distractors):
        words = [
            _DISTRACTOR_WORDS[int(i)]
            for i in rng.integers(0, len(_DISTRACTOR_WORDS), size=3)
        ]
        day = SPAN_START + timedelta(days=int(rng.integers(0, SPAN_DAYS)))
        media: tuple[MediaRef, ...] = ()
        if distractor_index % 2 == 0:
            ref = new_media(_distractor_image(rng))
            media = (ref,)
            palettes[ref.media_id] = f"noise-{ref.media_id}"
            labels = sorted(
                {_DISTRACTOR_CONCEPTS[int(i)] for i in rng.integers(0, len(_DISTRACTOR_CONCEPTS), 2)}
            )
            add_concepts(ref.media_id, labels, rng)
            add_embedding(ref.media_id, rng.normal(0.0, 1.0, EMBEDDING_DIM))
        documents.append(
            SocialDocument(
                doc_id=next_doc_id(),
                source=Source.TWITTER,
                text=f"{words[0]} {words[1]} {words[2]} around {EVENT_NAME}",
                timestamp=_timestamp(day, rng),
                hashtags=(f"#{EVENT_NAME}",),
                media=media,
                retweets=int(rng.integers(0, 15)),
                favorites=int(rng.integers(0, 15)),
            )
        )

    # A few decoys outside the crawl span; dropped by filtering.
    for _ in range(3):
        documents.append(
            SocialDocument(
                doc_id=next_doc_id(),
                source=Source.TWITTER,
                text=f"planning for {EVENT_NAME} next month",
                timestamp=_timestamp(SPAN_START - timedelta(days=10), rng),
                hashtags=(f"#{EVENT_NAME}",),
                media=(),
                retweets=0,
                favorites=0,
            )
        )

    corpus = Corpus(documents)
    truth = GroundTruth(
        event_name=EVENT_NAME,
        relevance=relevance,
        palettes=palettes,
        duplicate_pairs=tuple(duplicate_pairs),
    )
    crawl_spec = CrawlSpec(
        event_name=EVENT_NAME,
        terms=(EVENT_NAME,),
        hashtags=(f"#{EVENT_NAME}",),
        span_start=SPAN_START,
        span_end=span_end,
    )

    corpus_path = out_dir / "corpus.jsonl"
    storylines_path = out_dir / "stories.jsonl"
    concepts_path = out_dir / "concepts.jsonl"
    embeddings_path = out_dir / "embeddings.jsonl"
    ground_truth_path = out_dir / "ground_truth.json"
    crawl_spec_path = out_dir / "crawl_spec.json"
    manifest_path = out_dir / "manifest.json"

    save_corpus(corpus, corpus_path)
    save_storylines(storylines, storylines_path)
    atomic_write_text(concepts_path, "".join(dumps_record(r) + "\n" for r in concept_rows))
    atomic_write_text(embeddings_path, "".join(dumps_record(r) + "\n" for r in embedding_rows))
    atomic_write_text(
        ground_truth_path, json.dumps(ground_truth_record(truth), indent=2, sort_keys=True) + "\n"
    )
    atomic_write_text(
        crawl_spec_path,
        json.dumps(
            {
                "event_name": EVENT_NAME,
                "terms": [EVENT_NAME],
                "hashtags": [f"#{EVENT_NAME}"],
                "span_start": SPAN_START.isoformat(),
                "span_end": span_end.isoformat(),
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
    )
    atomic_write_text(
        manifest_path,
        json.dumps(
            {
                "event_name": EVENT_NAME,
                "corpus": "corpus.jsonl",
                "storylines": ["stories.jsonl"],
                "concepts": "concepts.jsonl",
                "embeddings": "embeddings.jsonl",
                "media_dir": ".",
                "methods": ["bm25", "retweets", "temporal", "random"],
                "ground_truth": "ground_truth.json",
                "annotators": 3,
                "noise_rate": 0.0,
                "output_dir": "out",
                "random_seed": seed,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
    )

    logger.info(
        "synthetic event: %d documents, %d media, %d stories -> %s",
        len(corpus), media_counter, len(storylines), out_dir,
    )
    return SyntheticEvent(
        corpus=corpus,
        storylines=tuple(storylines),
        truth=truth,
        crawl_spec=crawl_spec,
        out_dir=out_dir,
        corpus_path=corpus_path,
        storylines_path=storylines_path,
        concepts_path=concepts_path,
        embeddings_path=embeddings_path,
        ground_truth_path=ground_truth_path,
        crawl_spec_path=crawl_spec_path,
        media_dir=media_dir,
        manifest_path=manifest_path,
    )


def quantize_rating(quality: float, params: MetricParams) -> int:
    """Map a quality value onto the 1-5 ordinal scale."""
    share = min(max(quality / params.max_quality(), 0.0), 1.0)
    return 1 + round(share * 4)


def simulate_annotator(
    illustrated: Sequence[IllustratedStoryline],
    storylines_by_id: dict[str, Storyline],
    truth: GroundTruth,
    noise_rate: float,
    seed: int,
    annotator_id: str,
    params: MetricParams = MetricParams(),
) -> list[JudgmentSet]:
    """Judgments drawn from planted truth with uniform noise at noise_rate.

    The overall rating quantizes the quality of the annotator's own (noisy)
    segment/transition scores, with a +/-1 perturbation at noise_rate.
    """
    if not 0.0 <= noise_rate <= 1.0:
        raise ValueError("noise_rate must be in [0, 1]")
    rng = random.Random(f"{seed}:{annotator_id}")
    judgments = []
    for item in illustrated:
        storyline = storylines_by_id[item.story_id]
        s_true, t_true = truth.true_judgment(storyline, item)
        s = tuple(v if rng.random() >= noise_rate else rng.randint(0, 2) for v in s_true)
        t = tuple(v if rng.random() >= noise_rate else rng.randint(0, 2) for v in t_true)
        rating = quantize_rating(story_quality(s, t, params), params)
        if noise_rate > 0 and rng.random() < noise_rate:
            rating = min(5, max(1, rating + rng.choice((-1, 1))))
        judgments.append(
            JudgmentSet(
                story_id=item.story_id,
                annotator_id=annotator_id,
                segment_scores=s,
                transition_scores=t,
                overall_rating=rating,
                method_name=item.method_name,
            )
        )
    return judgments


def graded_illustrations(
    storylines: Sequence[Storyline], corpus: Corpus, truth: GroundTruth
) -> list[IllustratedStoryline]:
    """Deterministic illustrations spanning the full quality range.

    Story k is illustrated at level k mod 5: from all planted highly
    relevant media (level 4) down to all distractors (level 0). Used for
    the metric-vs-rating correlation study.
    """
    distractor_media = sorted(
        media_id
        for media_id, (_, ref) in corpus.media_index.items()
        if truth.palettes.get(media_id, "").startswith("noise-")
    )
    if not distractor_media:
        raise ValueError("corpus has no distractor media to grade against")

    results = []
    for story_index, storyline in enumerate(sorted(storylines, key=lambda s: s.story_id)):
        level = story_index % 5
        choices: list[Optional[str]] = []
        for segment_index, segment in enumerate(storyline.segments):
            planted = truth.relevance.get(storyline.story_id, {}).get(segment.segment_id, {})
            high = sorted(m for m, v in planted.items() if v == 2)
            partial = sorted(m for m, v in planted.items() if v == 1)
            distractor = distractor_media[(story_index + segment_index) % len(distractor_media)]
            if level == 4:
                choices.append(high[0] if high else distractor)
            elif level == 3:
                pick = partial if segment_index == len(storyline.segments) - 1 else high
                choices.append(pick[0] if pick else distractor)
            elif level == 2:
                choices.append(partial[0] if partial else distractor)
            elif level == 1:
                choices.append(high[0] if high and segment_index == 0 else distractor)
            else:
                choices.append(distractor)
        results.append(
            IllustratedStoryline(
                story_id=storyline.story_id, method_name="graded", choices=tuple(choices)
            )
        )
    return results
