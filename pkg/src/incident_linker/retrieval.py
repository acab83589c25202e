"""Incident ranking pipeline: index incident texts, rank them for a report.

Both backends score every indexed incident (no approximate search):

* ``bm25`` ranks token overlap through the inverted index.
* ``dense`` embeds texts with a provider and ranks by cosine similarity;
  zero-norm vectors score -1 so they sort behind every real match.

An index remembers a fingerprint of the settings that built it; ranking
with a different configuration is refused rather than silently mixed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from typing import Mapping, Protocol

import numpy as np

from .corpus import Corpus, Incident
from .embedding import EmbeddingProvider, cosine
from .lexical import BM25Params, InvertedIndex, bm25_rank, build_index
from .textprep import DEFAULT_CONFIG, InputMode, PreprocessConfig, prepare

__all__ = [
    "StaleIndexError",
    "PipelineConfig",
    "IncidentIndex",
    "RankedCandidates",
    "index_incidents",
    "rank",
    "upsert_incident",
]

BACKENDS = ("bm25", "dense")


class StaleIndexError(ValueError):
    """An index built under one configuration was used with another."""


class TextRecord(Protocol):
    """Minimal shape ranked queries need: an id plus title/description."""

    id: str
    title: str
    description: str


@dataclass(frozen=True)
class PipelineConfig:
    backend: str = "bm25"
    input_mode: InputMode = InputMode.TITLE_AND_DESCRIPTION
    preprocess: PreprocessConfig = DEFAULT_CONFIG
    k: int = 10
    bm25: BM25Params = field(default_factory=BM25Params)
    provider: EmbeddingProvider | None = None

    def __post_init__(self) -> None:
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if self.backend == "dense" and self.provider is None:
            raise ValueError("dense backend requires an embedding provider")

    def fingerprint(self) -> str:
        parts: dict[str, object] = {
            "backend": self.backend,
            "input_mode": self.input_mode.value,
            "preprocess": self.preprocess.digest(),
        }
        if self.backend == "bm25":
            parts["bm25"] = [self.bm25.k1, self.bm25.b]
        else:
            assert self.provider is not None
            parts["provider"] = self.provider.fingerprint
        blob = json.dumps(parts, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class IncidentIndex:
    """Searchable projection of the incident catalog for one configuration."""

    backend: str
    fingerprint: str
    documents: dict[str, tuple[str, ...]]
    occurred_at: dict[str, date | None]
    inverted: InvertedIndex | None = None
    vectors: dict[str, np.ndarray] | None = None

    @property
    def size(self) -> int:
        return len(self.documents)


@dataclass(frozen=True)
class RankedCandidates:
    """Top incidents for one report, highest score first."""

    report_id: str
    entries: tuple[tuple[str, float], ...]
    backend: str
    produced_at: datetime

    @property
    def incident_ids(self) -> tuple[str, ...]:
        return tuple(incident_id for incident_id, _ in self.entries)


def _incident_tokens_and_text(
    incident: Incident,
    config: PipelineConfig,
    extra_texts: Mapping[str, str] | None,
) -> tuple[tuple[str, ...], str]:
    unified = prepare(
        incident.title,
        incident.description,
        config.input_mode,
        config.preprocess,
        extra_text=(extra_texts or {}).get(incident.id, ""),
    )
    return unified.tokens, unified.text


def index_incidents(
    corpus: Corpus,
    config: PipelineConfig,
    *,
    extra_texts: Mapping[str, str] | None = None,
) -> IncidentIndex:
    """Index every incident in the corpus under ``config``.

    ``extra_texts`` appends auxiliary evidence (e.g. linked report titles)
    to specific incidents' indexed text without altering the records.
    Building twice from the same inputs yields the same fingerprint and
    structurally identical contents.
    """
    if not corpus.incidents:
        raise ValueError("cannot index a corpus with no incidents")
    documents: dict[str, tuple[str, ...]] = {}
    texts: dict[str, str] = {}
    occurred: dict[str, date | None] = {}
    for incident_id in sorted(corpus.incidents):
        incident = corpus.incidents[incident_id]
        tokens, text = _incident_tokens_and_text(incident, config, extra_texts)
        documents[incident_id] = tokens
        texts[incident_id] = text
        occurred[incident_id] = incident.occurred_at

    if config.backend == "bm25":
        inverted = build_index(documents)
        return IncidentIndex(
            backend="bm25",
            fingerprint=config.fingerprint(),
            documents=documents,
            occurred_at=occurred,
            inverted=inverted,
        )
    assert config.provider is not None
    ordered_ids = list(documents)
    matrix = config.provider.embed([texts[i] for i in ordered_ids])
    vectors = {incident_id: matrix[row] for row, incident_id in enumerate(ordered_ids)}
    return IncidentIndex(
        backend="dense",
        fingerprint=config.fingerprint(),
        documents=documents,
        occurred_at=occurred,
        vectors=vectors,
    )


def _check_compatible(index: IncidentIndex, config: PipelineConfig) -> None:
    if index.fingerprint != config.fingerprint():
        raise StaleIndexError(
            "index fingerprint does not match the active configuration; rebuild the index"
        )


def _admissible_ids(index: IncidentIndex, as_of: date | None) -> list[str]:
    if as_of is None:
        return list(index.documents)
    return [
        incident_id
        for incident_id in index.documents
        if index.occurred_at.get(incident_id) is None
        or index.occurred_at[incident_id] <= as_of
    ]


def rank(
    report: TextRecord,
    index: IncidentIndex,
    config: PipelineConfig,
    *,
    k: int | None = None,
    as_of: date | None = None,
) -> RankedCandidates:
    """Rank indexed incidents for a report, best first.

    Ties break by ascending incident id. A report whose cleaned text is
    empty gets all-zero scores under bm25 and all -1 under dense, both in
    ascending id order. ``as_of`` restricts candidates to incidents that
    occurred on or before that date (unknown dates are kept).
    """
    _check_compatible(index, config)
    if index.size == 0:
        raise ValueError("index contains no incidents")
    top_k = config.k if k is None else k
    if top_k < 1:
        raise ValueError(f"k must be at least 1, got {top_k}")

    unified = prepare(report.title, report.description, config.input_mode, config.preprocess)
    admissible = set(_admissible_ids(index, as_of))

    if config.backend == "bm25":
        assert index.inverted is not None
        full = bm25_rank(
            list(unified.tokens), index.inverted, config.bm25, k=index.size
        )
        scored = [(i, s) for i, s in full if i in admissible]
    else:
        assert config.provider is not None and index.vectors is not None
        query = config.provider.embed([unified.text])[0]
        query_norm = float(np.dot(query, query))
        scored = []
        for incident_id in sorted(admissible):
            vector = index.vectors[incident_id]
            if query_norm == 0.0 or not np.any(vector):
                scored.append((incident_id, -1.0))
            else:
                scored.append((incident_id, cosine(query, vector)))
        scored.sort(key=lambda item: (-item[1], item[0]))

    return RankedCandidates(
        report_id=report.id,
        entries=tuple(scored[:top_k]),
        backend=config.backend,
        produced_at=datetime.now(timezone.utc),
    )


def upsert_incident(
    index: IncidentIndex,
    incident: Incident,
    config: PipelineConfig,
    *,
    extra_text: str = "",
) -> IncidentIndex:
    """Return a new index with one incident added or replaced.

    The original index is untouched, so callers can swap the reference
    atomically. Upserting identical content is a no-op in effect: the
    fingerprint never changes and the size only grows on genuinely new ids.
    """
    _check_compatible(index, config)
    tokens, text = _incident_tokens_and_text(
        incident, config, {incident.id: extra_text} if extra_text else None
    )
    documents = dict(index.documents)
    documents[incident.id] = tokens
    occurred = dict(index.occurred_at)
    occurred[incident.id] = incident.occurred_at

    if config.backend == "bm25":
        return IncidentIndex(
            backend="bm25",
            fingerprint=index.fingerprint,
            documents=documents,
            occurred_at=occurred,
            inverted=build_index(documents),
        )
    assert config.provider is not None and index.vectors is not None
    vectors = dict(index.vectors)
    vectors[incident.id] = config.provider.embed([text])[0]
    return IncidentIndex(
        backend="dense",
        fingerprint=index.fingerprint,
        documents=documents,
        occurred_at=occurred,
        vectors=vectors,
    )
