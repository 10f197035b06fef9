"""Tokenization, inverted index, and BM25 ranking over a corpus.

The BM25 variant keeps the +1 inside the IDF log so scores stay
non-negative; documents scoring 0 never appear in rankings.
"""

import math
import re
from collections import Counter
from dataclasses import dataclass

from .story_model import Corpus

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase alphanumeric runs; '#' and other punctuation split tokens."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if self.k1 < 0:
            raise ValueError("k1 must be >= 0")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must be in [0, 1]")


class InvertedIndex:
    """Postings of term -> [(doc_id, term_frequency)] plus document lengths."""

    def __init__(self, corpus: Corpus):
        self.postings: dict[str, list[tuple[str, int]]] = {}
        self.doc_lengths: dict[str, int] = {}
        for doc in corpus:
            tokens = tokenize(doc.text)
            self.doc_lengths[doc.doc_id] = len(tokens)
            for term, tf in Counter(tokens).items():
                self.postings.setdefault(term, []).append((doc.doc_id, tf))
        self.doc_count = len(self.doc_lengths)
        total = sum(self.doc_lengths.values())
        self.avg_doc_length = total / self.doc_count if self.doc_count else 0.0

    def term_frequency(self, term: str, doc_id: str) -> int:
        for posting_doc, tf in self.postings.get(term, ()):
            if posting_doc == doc_id:
                return tf
        return 0

    def document_frequency(self, term: str) -> int:
        return len(self.postings.get(term, ()))


def build_index(corpus: Corpus) -> InvertedIndex:
    return InvertedIndex(corpus)


def _idf(index: InvertedIndex, term: str) -> float:
    df = index.document_frequency(term)
    return math.log((index.doc_count - df + 0.5) / (df + 0.5) + 1.0)


def _length_norm(index: InvertedIndex, params: Bm25Params, doc_id: str) -> float:
    if index.avg_doc_length == 0:
        return params.k1
    ratio = index.doc_lengths[doc_id] / index.avg_doc_length
    return params.k1 * (1.0 - params.b + params.b * ratio)


def bm25_score(
    index: InvertedIndex, params: Bm25Params, query_tokens: list[str], doc_id: str
) -> float:
    """Sum of per-term BM25 contributions; 0 when no query term occurs."""
    if doc_id not in index.doc_lengths:
        raise ValueError(f"unknown doc_id: {doc_id!r}")
    norm = _length_norm(index, params, doc_id)
    score = 0.0
    for term in query_tokens:
        tf = index.term_frequency(term, doc_id)
        if tf == 0:
            continue
        score += _idf(index, term) * tf * (params.k1 + 1.0) / (tf + norm)
    return score


def rank_documents(
    index: InvertedIndex, params: Bm25Params, query: str, k: int
) -> list[tuple[str, float]]:
    """Top-k documents by BM25, descending score, ties by ascending doc_id.

    Documents containing no query term are non-candidates and never appear.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    query_tokens = tokenize(query)
    scores: dict[str, float] = {}
    for term in query_tokens:
        postings = index.postings.get(term)
        if not postings:
            continue
        idf = _idf(index, term)
        for doc_id, tf in postings:
            norm = _length_norm(index, params, doc_id)
            scores[doc_id] = scores.get(doc_id, 0.0) + idf * tf * (params.k1 + 1.0) / (tf + norm)
    ranked = sorted(
        ((doc_id, score) for doc_id, score in scores.items() if score > 0.0),
        key=lambda item: (-item[1], item[0]),
    )
    return ranked[:k]
