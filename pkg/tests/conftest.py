import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from storyweave.story_model import (
    Corpus,
    MediaKind,
    MediaRef,
    SocialDocument,
    Source,
    parse_rfc3339,
)
from storyweave.visual_features import ImagePixels


def make_doc(doc_id, text, ts="2021-06-03T12:00:00+00:00", hashtags=(), media=(),
             retweets=0, favorites=0, source=Source.TWITTER):
    return SocialDocument(
        doc_id=doc_id,
        source=source,
        text=text,
        timestamp=parse_rfc3339(ts),
        hashtags=tuple(hashtags),
        media=tuple(media),
        retweets=retweets,
        favorites=favorites,
    )


def make_image_ref(media_id, uri):
    return MediaRef(media_id=media_id, kind=MediaKind.IMAGE, uri=str(uri))


def solid_image(r, g, b, width=16, height=16) -> ImagePixels:
    pixels = np.zeros((height, width, 3), dtype=np.uint8)
    pixels[..., 0] = r
    pixels[..., 1] = g
    pixels[..., 2] = b
    return ImagePixels(pixels)


def write_png(path: Path, pixels: np.ndarray) -> Path:
    Image.fromarray(pixels).save(path)
    return path


def write_jsonl(path: Path, records) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    return path


@pytest.fixture
def tiny_corpus():
    return Corpus(
        [
            make_doc("d1", "fireworks over castle"),
            make_doc("d2", "cycling race"),
        ]
    )


@pytest.fixture
def gradient_photo() -> ImagePixels:
    """A deterministic smooth 'photo' with texture in all channels."""
    rng = np.random.default_rng(42)
    y, x = np.mgrid[0:48, 0:64]
    base = np.stack(
        [
            40 + 2.5 * x + 0.5 * y,
            30 + 1.2 * x + 1.8 * y,
            90 + 0.4 * x + 1.1 * y,
        ],
        axis=-1,
    )
    noisy = base + rng.normal(0, 4.0, base.shape)
    return ImagePixels(np.clip(noisy, 0, 255).astype(np.uint8))
