"""Exact BM25 scoring over an inverted index.

Implements the Robertson-Zaragoza formulation with the non-negative idf
variant:

    score(q, d) = sum over unique t in q of
        idf(t) * f(t, d) * (k1 + 1) / (f(t, d) + k1 * (1 - b + b * |d| / avgdl))
    idf(t) = ln((N - df(t) + 0.5) / (df(t) + 0.5) + 1)

Queries have term-set semantics: repeating a query term does not change the
score. Scores are always non-negative.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Mapping, Sequence

__all__ = ["BM25Params", "InvertedIndex", "build_index", "bm25_score", "bm25_rank"]


@dataclass(frozen=True)
class BM25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self) -> None:
        if self.k1 < 0:
            raise ValueError(f"k1 must be non-negative, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")


@dataclass(frozen=True)
class InvertedIndex:
    """Postings keyed by term; each list is (doc_id, term frequency) sorted by doc_id."""

    postings: dict[str, tuple[tuple[str, int], ...]]
    doc_lengths: dict[str, int]
    avgdl: float
    doc_count: int


def build_index(documents: Mapping[str, Sequence[str]]) -> InvertedIndex:
    """Build an inverted index from tokenized documents.

    An empty document set is an error, as is a corpus whose documents are
    all empty (avgdl of zero makes the length normalization degenerate).
    Individual empty documents are fine; they simply match nothing.
    """
    if not documents:
        raise ValueError("cannot index an empty document set")
    doc_lengths = {doc_id: len(tokens) for doc_id, tokens in documents.items()}
    avgdl = sum(doc_lengths.values()) / len(doc_lengths)
    if avgdl == 0:
        raise ValueError("all documents are empty; index would be degenerate")

    postings: dict[str, dict[str, int]] = {}
    for doc_id, tokens in documents.items():
        for token in tokens:
            postings.setdefault(token, {}).setdefault(doc_id, 0)
            postings[token][doc_id] += 1
    frozen = {
        term: tuple(sorted(by_doc.items()))
        for term, by_doc in sorted(postings.items())
    }
    return InvertedIndex(
        postings=frozen,
        doc_lengths=doc_lengths,
        avgdl=avgdl,
        doc_count=len(doc_lengths),
    )


def _idf(index: InvertedIndex, term: str) -> float:
    df = len(index.postings.get(term, ()))
    return math.log((index.doc_count - df + 0.5) / (df + 0.5) + 1.0)


def _term_frequency(index: InvertedIndex, term: str, doc_id: str) -> int:
    plist = index.postings.get(term)
    if not plist:
        return 0
    pos = bisect_left(plist, (doc_id,))
    if pos < len(plist) and plist[pos][0] == doc_id:
        return plist[pos][1]
    return 0


def bm25_score(
    query_tokens: Sequence[str],
    doc_id: str,
    index: InvertedIndex,
    params: BM25Params = BM25Params(),
) -> float:
    """Score one document for a query; terms absent from the doc add zero."""
    if doc_id not in index.doc_lengths:
        raise ValueError(f"unknown document id {doc_id!r}")
    length_norm = params.k1 * (
        1.0 - params.b + params.b * index.doc_lengths[doc_id] / index.avgdl
    )
    score = 0.0
    for term in sorted(set(query_tokens)):
        tf = _term_frequency(index, term, doc_id)
        if tf == 0:
            continue
        score += _idf(index, term) * tf * (params.k1 + 1.0) / (tf + length_norm)
    return score


def bm25_rank(
    query_tokens: Sequence[str],
    index: InvertedIndex,
    params: BM25Params = BM25Params(),
    k: int = 10,
) -> list[tuple[str, float]]:
    """Rank all documents for a query and return the top ``min(k, N)``.

    Ordering is by descending score with ties broken by ascending doc_id;
    an all-unknown (or empty) query yields all-zero scores in ascending
    doc_id order.
    """
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    scores = dict.fromkeys(index.doc_lengths, 0.0)
    for term in sorted(set(query_tokens)):
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = _idf(index, term)
        for doc_id, tf in plist:
            length_norm = params.k1 * (
                1.0 - params.b + params.b * index.doc_lengths[doc_id] / index.avgdl
            )
            scores[doc_id] += idf * tf * (params.k1 + 1.0) / (tf + length_norm)
    ordered = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return ordered[: min(k, index.doc_count)]
