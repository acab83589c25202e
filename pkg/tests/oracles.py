"""Independent reference implementations used to cross-check the package.

These are written as direct transcriptions of the formulas, with none of
the indexing or vectorization machinery the package uses, so agreement is
meaningful.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Sequence


def reference_accuracy(ranked_ids: Sequence[str], relevant: Iterable[str], k: int) -> int:
    wanted = set(relevant)
    return 1 if any(candidate in wanted for candidate in list(ranked_ids)[:k]) else 0


def reference_mrr(ranked_ids: Sequence[str], relevant: Iterable[str], k: int) -> float:
    wanted = set(relevant)
    for position, candidate in enumerate(list(ranked_ids)[:k], start=1):
        if candidate in wanted:
            return 1.0 / position
    return 0.0


def reference_ndcg(ranked_ids: Sequence[str], relevant: Iterable[str], k: int) -> float:
    wanted = set(relevant)
    dcg = 0.0
    for position, candidate in enumerate(list(ranked_ids)[:k], start=1):
        if candidate in wanted:
            dcg += 1.0 / math.log2(position + 1)
    ideal = min(len(wanted), k)
    idcg = sum(1.0 / math.log2(position + 1) for position in range(1, ideal + 1))
    return dcg / idcg


def reference_bm25(
    query_tokens: Sequence[str],
    doc_id: str,
    documents: Mapping[str, Sequence[str]],
    k1: float = 1.2,
    b: float = 0.75,
) -> float:
    n = len(documents)
    avgdl = sum(len(tokens) for tokens in documents.values()) / n
    doc = list(documents[doc_id])
    score = 0.0
    for term in set(query_tokens):
        frequency = doc.count(term)
        if frequency == 0:
            continue
        df = sum(1 for tokens in documents.values() if term in tokens)
        idf = math.log((n - df + 0.5) / (df + 0.5) + 1.0)
        numerator = frequency * (k1 + 1.0)
        denominator = frequency + k1 * (1.0 - b + b * len(doc) / avgdl)
        score += idf * numerator / denominator
    return score
