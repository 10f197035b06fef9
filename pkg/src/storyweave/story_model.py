"""Domain model: events, social documents, storylines, and corpus ingestion.

A corpus is a line-delimited file of social documents (one JSON object per
line). Crawl specs restrict a corpus to one event's time span and keyword
seeds; storylines describe the narrative segments to be illustrated.
"""

import json
import logging
import re
from dataclasses import dataclass
from datetime import date, datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional

from .fileio import atomic_write_text, dumps_record

logger = logging.getLogger(__name__)

# Benchmark stories carry 3 to 4 segments; the loader warns outside this range.
MIN_BENCHMARK_SEGMENTS = 3
MAX_BENCHMARK_SEGMENTS = 4


class Source(str, Enum):
    TWITTER = "twitter"
    FLICKR = "flickr"
    YOUTUBE = "youtube"


class MediaKind(str, Enum):
    IMAGE = "image"
    VIDEO = "video"


@dataclass(frozen=True)
class MediaRef:
    """A media item attached to a document.

    Videos need ``thumbnail_uri`` to participate in visual-feature
    operations; without one they are limited to text/social methods.
    """

    media_id: str
    kind: MediaKind
    uri: str
    thumbnail_uri: Optional[str] = None

    def visual_uri(self) -> Optional[str]:
        """Path/URL used for pixel features, or None if the item has none."""
        if self.kind is MediaKind.IMAGE:
            return self.uri
        return self.thumbnail_uri


@dataclass(frozen=True)
class SocialDocument:
    doc_id: str
    source: Source
    text: str
    timestamp: datetime
    hashtags: tuple[str, ...] = ()
    media: tuple[MediaRef, ...] = ()
    retweets: int = 0
    favorites: int = 0

    def __post_init__(self):
        if self.retweets < 0 or self.favorites < 0:
            raise ValueError(f"doc {self.doc_id}: social counts must be >= 0")
        if self.timestamp.tzinfo is None:
            raise ValueError(f"doc {self.doc_id}: timestamp must carry a UTC offset")


@dataclass(frozen=True)
class CrawlSpec:
    """Keyword terms, hashtags, and time span defining an event's corpus."""

    event_name: str
    terms: tuple[str, ...]
    hashtags: tuple[str, ...]
    span_start: date
    span_end: date

    def __post_init__(self):
        if self.span_start >= self.span_end:
            raise ValueError("crawl span must satisfy span_start < span_end")
        if not self.terms and not self.hashtags:
            raise ValueError("crawl spec needs at least one term or hashtag")
        for tag in self.hashtags:
            if not tag.startswith("#"):
                raise ValueError(f"hashtag {tag!r} must begin with '#'")


@dataclass(frozen=True)
class StorySegment:
    segment_id: str
    description: str
    order: int

    def __post_init__(self):
        if not self.description.strip():
            raise ValueError(f"segment {self.segment_id}: description must be non-empty")


@dataclass(frozen=True)
class Storyline:
    story_id: str
    title: str
    event_name: str
    segments: tuple[StorySegment, ...]

    def __post_init__(self):
        orders = [s.order for s in self.segments]
        if orders != list(range(1, len(orders) + 1)):
            raise ValueError(f"story {self.story_id}: segment order must be contiguous from 1")

    def __len__(self) -> int:
        return len(self.segments)


# Marker for a segment whose candidate pool was empty; the quality metric
# scores it as relevance 0.
NO_ILLUSTRATION = None


@dataclass(frozen=True)
class IllustratedStoryline:
    """One chosen media item per segment (None = NO_ILLUSTRATION)."""

    story_id: str
    method_name: str
    choices: tuple[Optional[str], ...]

    def no_illustration_count(self) -> int:
        return sum(1 for c in self.choices if c is NO_ILLUSTRATION)


class Corpus:
    """Immutable collection of social documents with id lookups.

    ``skipped_records`` reports how many malformed lines the loader dropped.
    """

    def __init__(self, documents: list[SocialDocument], skipped_records: int = 0):
        self.documents: tuple[SocialDocument, ...] = tuple(documents)
        self.skipped_records = skipped_records
        self.by_id: dict[str, SocialDocument] = {}
        self.media_index: dict[str, tuple[SocialDocument, MediaRef]] = {}
        for doc in self.documents:
            if doc.doc_id in self.by_id:
                raise ValueError(f"duplicate doc_id in corpus: {doc.doc_id}")
            self.by_id[doc.doc_id] = doc
            for ref in doc.media:
                if ref.media_id in self.media_index:
                    raise ValueError(f"duplicate media_id in corpus: {ref.media_id}")
                self.media_index[ref.media_id] = (doc, ref)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[SocialDocument]:
        return iter(self.documents)


def parse_rfc3339(value: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime."""
    if not isinstance(value, str):
        raise ValueError(f"timestamp must be a string, got {type(value).__name__}")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError:
        raise ValueError(f"invalid RFC 3339 timestamp: {value!r}") from None
    if parsed.tzinfo is None:
        raise ValueError(f"timestamp {value!r} lacks a UTC offset")
    return parsed.astimezone(timezone.utc)


def _parse_media(raw: object) -> tuple[MediaRef, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise ValueError("media must be an array")
    refs = []
    for item in raw:
        if not isinstance(item, dict):
            raise ValueError("media entry must be an object")
        try:
            kind = MediaKind(item["kind"])
        except (KeyError, ValueError):
            raise ValueError(f"media entry has unknown kind: {item.get('kind')!r}") from None
        refs.append(
            MediaRef(
                media_id=str(item["media_id"]),
                kind=kind,
                uri=str(item["uri"]),
                thumbnail_uri=item.get("thumbnail_uri"),
            )
        )
    return tuple(refs)


def parse_document(raw: dict) -> SocialDocument:
    """Validate one corpus record; raises ValueError on any schema violation."""
    try:
        source = Source(raw["source"])
    except (KeyError, ValueError):
        raise ValueError(f"unknown source: {raw.get('source')!r}") from None
    for key in ("doc_id", "text", "timestamp"):
        if key not in raw:
            raise ValueError(f"missing field {key!r}")
    hashtags = raw.get("hashtags", [])
    if not isinstance(hashtags, list) or not all(isinstance(h, str) for h in hashtags):
        raise ValueError("hashtags must be an array of strings")
    retweets = raw.get("retweets", 0)
    favorites = raw.get("favorites", 0)
    if not isinstance(retweets, int) or isinstance(retweets, bool):
        raise ValueError("retweets must be an integer")
    if not isinstance(favorites, int) or isinstance(favorites, bool):
        raise ValueError("favorites must be an integer")
    return SocialDocument(
        doc_id=str(raw["doc_id"]),
        source=source,
        text=str(raw["text"]),
        timestamp=parse_rfc3339(raw["timestamp"]),
        hashtags=tuple(hashtags),
        media=_parse_media(raw.get("media")),
        retweets=retweets,
        favorites=favorites,
    )


def document_record(doc: SocialDocument) -> dict:
    """Inverse of :func:`parse_document`, for writing corpus files."""
    record = {
        "doc_id": doc.doc_id,
        "source": doc.source.value,
        "text": doc.text,
        "timestamp": doc.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "hashtags": list(doc.hashtags),
        "media": [
            {
                "media_id": m.media_id,
                "kind": m.kind.value,
                "uri": m.uri,
                **({"thumbnail_uri": m.thumbnail_uri} if m.thumbnail_uri else {}),
            }
            for m in doc.media
        ],
        "retweets": doc.retweets,
        "favorites": doc.favorites,
    }
    return record


def load_corpus(path: Path, corpus_format: str = "jsonl") -> Corpus:
    """Load a corpus file, skipping malformed records with a warning per line.

    Duplicate doc_ids or media_ids make the later record malformed.
    An unreadable file raises OSError.
    """
    if corpus_format != "jsonl":
        raise ValueError(f"unknown corpus format: {corpus_format!r}")
    path = Path(path)
    documents: list[SocialDocument] = []
    seen_docs: set[str] = set()
    seen_media: set[str] = set()
    skipped = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                if not isinstance(raw, dict):
                    raise ValueError("record is not a JSON object")
                doc = parse_document(raw)
                if doc.doc_id in seen_docs:
                    raise ValueError(f"duplicate doc_id {doc.doc_id!r}")
                media_ids = [m.media_id for m in doc.media]
                if len(set(media_ids)) != len(media_ids) or any(m in seen_media for m in media_ids):
                    raise ValueError("duplicate media_id")
            except (json.JSONDecodeError, ValueError) as exc:
                skipped += 1
                logger.warning("%s:%d: skipping malformed record: %s", path, lineno, exc)
                continue
            seen_docs.add(doc.doc_id)
            seen_media.update(m.media_id for m in doc.media)
            documents.append(doc)
    if skipped:
        logger.info("loaded %d documents from %s (%d skipped)", len(documents), path, skipped)
    return Corpus(documents, skipped_records=skipped)


def save_corpus(corpus: Corpus, path: Path) -> None:
    atomic_write_text(
        Path(path), "".join(dumps_record(document_record(d)) + "\n" for d in corpus)
    )


def load_crawl_spec(path: Path) -> CrawlSpec:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    try:
        return CrawlSpec(
            event_name=str(raw["event_name"]),
            terms=tuple(raw.get("terms", [])),
            hashtags=tuple(raw.get("hashtags", [])),
            span_start=date.fromisoformat(raw["span_start"]),
            span_end=date.fromisoformat(raw["span_end"]),
        )
    except KeyError as exc:
        raise ValueError(f"crawl spec missing field {exc}") from None


def _normalize_hashtag(tag: str) -> str:
    return tag.lstrip("#").lower()


def _term_pattern(term: str) -> re.Pattern:
    return re.compile(r"\b" + re.escape(term.strip()) + r"\b", re.IGNORECASE)


def matches_crawl_spec(doc: SocialDocument, spec: CrawlSpec) -> bool:
    """True iff the document falls in the event span and matches any seed.

    Hashtags match by case-insensitive token equality; terms match as
    case-insensitive substrings on word boundaries. Span boundaries are
    inclusive on both ends, by UTC date.
    """
    day = doc.timestamp.astimezone(timezone.utc).date()
    if day < spec.span_start or day > spec.span_end:
        return False
    doc_tags = {_normalize_hashtag(t) for t in doc.hashtags}
    if any(_normalize_hashtag(t) in doc_tags for t in spec.hashtags):
        return True
    return any(_term_pattern(term).search(doc.text) for term in spec.terms)


def filter_corpus(corpus: Corpus, spec: CrawlSpec) -> Corpus:
    """Order-preserving restriction of the corpus to matching documents."""
    kept = [doc for doc in corpus if matches_crawl_spec(doc, spec)]
    return Corpus(kept)


def parse_storyline(raw: dict) -> Storyline:
    for key in ("story_id", "title", "event_name", "segments"):
        if key not in raw:
            raise ValueError(f"storyline missing field {key!r}")
    segments_raw = raw["segments"]
    if not isinstance(segments_raw, list) or not segments_raw:
        raise ValueError("segments must be a non-empty array")
    segments = tuple(
        StorySegment(
            segment_id=str(item["segment_id"]),
            description=str(item["description"]),
            order=position,
        )
        for position, item in enumerate(segments_raw, start=1)
    )
    story = Storyline(
        story_id=str(raw["story_id"]),
        title=str(raw["title"]),
        event_name=str(raw["event_name"]),
        segments=segments,
    )
    n = len(story)
    if not MIN_BENCHMARK_SEGMENTS <= n <= MAX_BENCHMARK_SEGMENTS:
        logger.warning(
            "story %s has %d segments; benchmark stories carry %d-%d",
            story.story_id, n, MIN_BENCHMARK_SEGMENTS, MAX_BENCHMARK_SEGMENTS,
        )
    return story


def load_storylines(path: Path) -> list[Storyline]:
    """Load a line-delimited storyline file; malformed stories are skipped."""
    stories: list[Storyline] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                if not isinstance(raw, dict):
                    raise ValueError("record is not a JSON object")
                story = parse_storyline(raw)
                if story.story_id in seen:
                    raise ValueError(f"duplicate story_id {story.story_id!r}")
            except (json.JSONDecodeError, ValueError) as exc:
                logger.warning("%s:%d: skipping malformed storyline: %s", path, lineno, exc)
                continue
            seen.add(story.story_id)
            stories.append(story)
    return stories


def storyline_record(story: Storyline) -> dict:
    return {
        "story_id": story.story_id,
        "title": story.title,
        "event_name": story.event_name,
        "segments": [
            {"segment_id": s.segment_id, "description": s.description} for s in story.segments
        ],
    }


def save_storylines(stories: list[Storyline], path: Path) -> None:
    atomic_write_text(
        Path(path), "".join(dumps_record(storyline_record(s)) + "\n" for s in stories)
    )


def illustrated_record(ill: IllustratedStoryline) -> dict:
    return {
        "story_id": ill.story_id,
        "method": ill.method_name,
        "choices": list(ill.choices),
    }


def parse_illustrated(raw: dict) -> IllustratedStoryline:
    for key in ("story_id", "method", "choices"):
        if key not in raw:
            raise ValueError(f"illustrated record missing field {key!r}")
    choices = raw["choices"]
    if not isinstance(choices, list):
        raise ValueError("choices must be an array")
    return IllustratedStoryline(
        story_id=str(raw["story_id"]),
        method_name=str(raw["method"]),
        choices=tuple(None if c is None else str(c) for c in choices),
    )


def load_illustrated(path: Path) -> list[IllustratedStoryline]:
    results = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                results.append(parse_illustrated(raw))
            except (json.JSONDecodeError, ValueError) as exc:
                logger.warning("%s:%d: skipping malformed illustrated record: %s", path, lineno, exc)
    return results


def save_illustrated(items: list[IllustratedStoryline], path: Path) -> None:
    atomic_write_text(
        Path(path), "".join(dumps_record(illustrated_record(i)) + "\n" for i in items)
    )
