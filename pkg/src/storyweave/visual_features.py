"""Pixel-level media features and precomputed sidecar loading.

Covers the color, entropy, and luminance features used by the transition
strategies, the difference hash used for duplicate detection, and loaders
for the concept/embedding sidecar files that stand in for CNN inference.

All grayscale conversions share one definition: Rec. 601 luma
(0.299 R + 0.587 G + 0.114 B).
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image, UnidentifiedImageError

from .story_model import Corpus

logger = logging.getLogger(__name__)

REC601_WEIGHTS = np.array([0.299, 0.587, 0.114])

DEFAULT_HISTOGRAM_BINS = 8


class ImageDecodeError(Exception):
    """Raised for unsupported or corrupt raster files."""


@dataclass(frozen=True)
class ImagePixels:
    """Row-major 8-bit RGB pixels, shape (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise ValueError("pixels must have shape (height, width, 3)")
        if self.pixels.dtype != np.uint8:
            raise ValueError("pixels must be 8-bit channels")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class ColorHistogram:
    """Joint RGB histogram, L1-normalized, bins_per_channel**3 entries."""

    bins_per_channel: int
    values: np.ndarray


@dataclass(frozen=True)
class ColorMoments:
    """Mean, standard deviation, and skewness per RGB channel."""

    means: tuple[float, float, float]
    stddevs: tuple[float, float, float]
    skews: tuple[float, float, float]

    def as_vector(self) -> np.ndarray:
        return np.array(self.means + self.stddevs + self.skews)


@dataclass(frozen=True)
class ConceptAnnotation:
    media_id: str
    concepts: tuple[tuple[str, float], ...]

    def labels(self) -> set[str]:
        return {label for label, _ in self.concepts}

    def top_label(self) -> Optional[str]:
        """Highest-confidence label; ties broken by lexicographic order."""
        if not self.concepts:
            return None
        return min(self.concepts, key=lambda item: (-item[1], item[0]))[0]


@dataclass(frozen=True)
class Embedding:
    media_id: str
    vector: np.ndarray


def decode_image(uri: str | Path) -> ImagePixels:
    """Decode a raster file to RGB; alpha is composited on white.

    Grayscale sources replicate the single channel across R, G, B.
    Raises ImageDecodeError for unreadable or corrupt files.
    """
    try:
        with Image.open(uri) as img:
            if img.mode in ("RGBA", "LA", "PA") or (img.mode == "P" and "transparency" in img.info):
                rgba = img.convert("RGBA")
                background = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
                img = Image.alpha_composite(background, rgba)
            rgb = img.convert("RGB")
            pixels = np.asarray(rgb, dtype=np.uint8)
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise ImageDecodeError(f"cannot decode {uri}: {exc}") from exc
    return ImagePixels(pixels)


def _luma(img: ImagePixels) -> np.ndarray:
    return img.pixels.astype(np.float64) @ REC601_WEIGHTS


def color_histogram(img: ImagePixels, bins_per_channel: int = DEFAULT_HISTOGRAM_BINS) -> ColorHistogram:
    """Uniform quantization floor(c * bins / 256) per channel, joint 3-D counts."""
    if bins_per_channel < 2:
        raise ValueError("bins_per_channel must be >= 2")
    bins = bins_per_channel
    quantized = (img.pixels.astype(np.int64) * bins) // 256
    flat = (quantized[..., 0] * bins + quantized[..., 1]) * bins + quantized[..., 2]
    counts = np.bincount(flat.ravel(), minlength=bins**3).astype(np.float64)
    return ColorHistogram(bins_per_channel=bins, values=counts / counts.sum())


def histogram_distance(h1: ColorHistogram, h2: ColorHistogram) -> float:
    """L1 distance between two normalized histograms, range [0, 2]."""
    if h1.bins_per_channel != h2.bins_per_channel:
        raise ValueError(
            f"histogram bin mismatch: {h1.bins_per_channel} vs {h2.bins_per_channel}"
        )
    return float(np.abs(h1.values - h2.values).sum())


def color_moments(img: ImagePixels) -> ColorMoments:
    """Per-channel mean, population stddev, and cube-root skewness."""
    channels = img.pixels.reshape(-1, 3).astype(np.float64)
    means = channels.mean(axis=0)
    centered = channels - means
    variances = (centered**2).mean(axis=0)
    stddevs = np.sqrt(variances)
    third = (centered**3).mean(axis=0)
    skews = np.where(stddevs == 0.0, 0.0, np.cbrt(third))
    return ColorMoments(
        means=tuple(float(v) for v in means),
        stddevs=tuple(float(v) for v in stddevs),
        skews=tuple(float(v) for v in skews),
    )


def moments_distance(m1: ColorMoments, m2: ColorMoments) -> float:
    """L1 distance over the 9 moments."""
    return float(np.abs(m1.as_vector() - m2.as_vector()).sum())


def visual_entropy(img: ImagePixels) -> float:
    """Shannon entropy (base 2) of the 256-bin grayscale intensity histogram."""
    intensities = np.clip(np.rint(_luma(img)), 0, 255).astype(np.int64)
    counts = np.bincount(intensities.ravel(), minlength=256)
    probs = counts[counts > 0] / counts.sum()
    return float(-(probs * np.log2(probs)).sum())


def mean_luminance(img: ImagePixels) -> float:
    """Mean Rec. 601 luma over all pixels, range [0, 255]."""
    return float(_luma(img).mean())


def perceptual_hash(img: ImagePixels) -> int:
    """64-bit difference hash: 9x8 block-average downscale, left>right bits.

    Bit r*8+c is set when the averaged cell (r, c) is brighter than its
    right neighbour. Constant images hash to 0.
    """
    gray = Image.fromarray(img.pixels).convert("L")
    grid = np.asarray(gray.resize((9, 8), Image.Resampling.BOX), dtype=np.int64)
    bits = grid[:, :-1] > grid[:, 1:]
    value = 0
    for index, bit in enumerate(bits.ravel()):
        if bit:
            value |= 1 << index
    return value


def hamming_distance(hash_a: int, hash_b: int) -> int:
    """Number of differing bits between two 64-bit hashes."""
    return (hash_a ^ hash_b).bit_count()


def load_concepts(path: Path) -> dict[str, ConceptAnnotation]:
    """Load a concept sidecar; later duplicate media_id rows win with a warning."""
    annotations: dict[str, ConceptAnnotation] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                media_id = str(raw["media_id"])
                concepts = []
                seen_labels: set[str] = set()
                for item in raw.get("concepts", []):
                    label = str(item["label"])
                    confidence = float(item["confidence"])
                    if not 0.0 <= confidence <= 1.0:
                        raise ValueError(f"confidence {confidence} out of [0, 1]")
                    if label in seen_labels:
                        raise ValueError(f"duplicate label {label!r}")
                    seen_labels.add(label)
                    concepts.append((label, confidence))
            except (json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
                logger.warning("%s:%d: skipping malformed concept row: %s", path, lineno, exc)
                continue
            if media_id in annotations:
                logger.warning("%s:%d: duplicate media_id %s, last row wins", path, lineno, media_id)
            annotations[media_id] = ConceptAnnotation(media_id=media_id, concepts=tuple(concepts))
    return annotations


def load_embeddings(path: Path) -> dict[str, Embedding]:
    """Load an embedding sidecar; all vectors must share one dimension."""
    embeddings: dict[str, Embedding] = {}
    dimension: Optional[int] = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                media_id = str(raw["media_id"])
                vector = np.asarray(raw["vector"], dtype=np.float64)
                if vector.ndim != 1 or vector.size == 0:
                    raise ValueError("vector must be a non-empty flat array")
                if not np.isfinite(vector).all():
                    raise ValueError("vector entries must be finite")
                if dimension is None:
                    dimension = vector.size
                elif vector.size != dimension:
                    raise ValueError(f"dimension {vector.size} != {dimension}")
            except (json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
                logger.warning("%s:%d: skipping malformed embedding row: %s", path, lineno, exc)
                continue
            if media_id in embeddings:
                logger.warning("%s:%d: duplicate media_id %s, last row wins", path, lineno, media_id)
            embeddings[media_id] = Embedding(media_id=media_id, vector=vector)
    return embeddings


class MediaFeatureStore:
    """Lazily computed per-media features over a corpus.

    Media items resolve to a pixel source via MediaRef.visual_uri();
    videos without a thumbnail and undecodable files are feature-less and
    return None from every pixel-feature accessor.
    """

    def __init__(
        self,
        media_paths: dict[str, Optional[Path]],
        concepts: Optional[dict[str, ConceptAnnotation]] = None,
        embeddings: Optional[dict[str, Embedding]] = None,
        histogram_bins: int = DEFAULT_HISTOGRAM_BINS,
    ):
        self.media_paths = media_paths
        self.concept_map = concepts or {}
        self.embedding_map = embeddings or {}
        self.histogram_bins = histogram_bins
        self._pixels: dict[str, Optional[ImagePixels]] = {}
        self._histograms: dict[str, Optional[ColorHistogram]] = {}
        self._moments: dict[str, Optional[ColorMoments]] = {}
        self._entropy: dict[str, Optional[float]] = {}
        self._luminance: dict[str, Optional[float]] = {}
        self._hashes: dict[str, Optional[int]] = {}

    @classmethod
    def from_corpus(
        cls,
        corpus: Corpus,
        base_dir: Optional[Path] = None,
        concepts: Optional[dict[str, ConceptAnnotation]] = None,
        embeddings: Optional[dict[str, Embedding]] = None,
        histogram_bins: int = DEFAULT_HISTOGRAM_BINS,
    ) -> "MediaFeatureStore":
        paths: dict[str, Optional[Path]] = {}
        for media_id, (_, ref) in corpus.media_index.items():
            uri = ref.visual_uri()
            if uri is None:
                paths[media_id] = None
            else:
                path = Path(uri)
                if base_dir is not None and not path.is_absolute():
                    path = Path(base_dir) / path
                paths[media_id] = path
        return cls(paths, concepts=concepts, embeddings=embeddings, histogram_bins=histogram_bins)

    def pixels(self, media_id: str) -> Optional[ImagePixels]:
        if media_id not in self._pixels:
            path = self.media_paths.get(media_id)
            if path is None:
                self._pixels[media_id] = None
            else:
                try:
                    self._pixels[media_id] = decode_image(path)
                except ImageDecodeError as exc:
                    logger.warning("media %s flagged feature-less: %s", media_id, exc)
                    self._pixels[media_id] = None
        return self._pixels[media_id]

    def _pixel_feature(self, media_id: str, cache: dict, compute):
        if media_id not in cache:
            img = self.pixels(media_id)
            cache[media_id] = None if img is None else compute(img)
        return cache[media_id]

    def histogram(self, media_id: str) -> Optional[ColorHistogram]:
        return self._pixel_feature(
            media_id, self._histograms, lambda img: color_histogram(img, self.histogram_bins)
        )

    def moments(self, media_id: str) -> Optional[ColorMoments]:
        return self._pixel_feature(media_id, self._moments, color_moments)

    def entropy(self, media_id: str) -> Optional[float]:
        return self._pixel_feature(media_id, self._entropy, visual_entropy)

    def luminance(self, media_id: str) -> Optional[float]:
        return self._pixel_feature(media_id, self._luminance, mean_luminance)

    def dhash(self, media_id: str) -> Optional[int]:
        return self._pixel_feature(media_id, self._hashes, perceptual_hash)

    def concepts(self, media_id: str) -> Optional[ConceptAnnotation]:
        return self.concept_map.get(media_id)

    def top_concept(self, media_id: str) -> Optional[str]:
        annotation = self.concept_map.get(media_id)
        return annotation.top_label() if annotation else None

    def embedding(self, media_id: str) -> Optional[np.ndarray]:
        entry = self.embedding_map.get(media_id)
        return entry.vector if entry else None
