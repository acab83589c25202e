"""Dense embedding providers and vector similarity.

The bundled provider is a hashed tf-idf bag of words: tokens map to buckets
via a seeded FNV-1a hash (never the interpreter's randomized ``hash``), are
weighted by ``tf * (ln((N + 1) / (df + 1)) + 1)``, and the result is
L2-normalized. It is deterministic across runs and platforms, needs no
model weights, and slots behind the same interface as a remote embedding
service.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Protocol, Sequence, runtime_checkable

import numpy as np

from .textprep import DEFAULT_CONFIG, PreprocessConfig, clean, tokenize_and_filter

__all__ = [
    "ZeroVectorWarning",
    "CorpusStats",
    "HashingEmbedderConfig",
    "EmbeddingProvider",
    "HashingProvider",
    "fit_stats",
    "token_bucket",
    "hashing_embed",
    "cosine",
]

_FNV64_OFFSET = 0xCBF29CE484222325
_FNV64_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


class ZeroVectorWarning(UserWarning):
    """Emitted when an input embeds to the all-zero vector."""


@dataclass(frozen=True)
class CorpusStats:
    """Document counts backing idf weights.

    ``doc_frequency`` maps a token to the number of fitted documents that
    contain it; values are always in ``[1, doc_count]``. Unseen tokens are
    treated as having frequency zero at embed time.
    """

    doc_count: int
    doc_frequency: Mapping[str, int]

    def digest(self) -> str:
        h = hashlib.sha256(str(self.doc_count).encode())
        for token in sorted(self.doc_frequency):
            h.update(token.encode("utf-8"))
            h.update(str(self.doc_frequency[token]).encode())
        return h.hexdigest()[:16]


def fit_stats(documents: Iterable[Sequence[str]]) -> CorpusStats:
    """Count document frequencies over tokenized documents.

    Documents with no tokens still count toward ``doc_count``.
    """
    doc_count = 0
    frequency: Counter[str] = Counter()
    for tokens in documents:
        doc_count += 1
        frequency.update(set(tokens))
    if doc_count == 0:
        raise ValueError("cannot fit statistics on an empty document list")
    return CorpusStats(doc_count=doc_count, doc_frequency=dict(frequency))


def _fnv1a_64(data: bytes, seed: int) -> int:
    h = _FNV64_OFFSET ^ (seed & _MASK64)
    for byte in data:
        h ^= byte
        h = (h * _FNV64_PRIME) & _MASK64
    return h


def token_bucket(token: str, seed: int, dim: int) -> int:
    """Map a token to a bucket index in ``[0, dim)``; stable across platforms."""
    return _fnv1a_64(token.encode("utf-8"), seed) % dim


@dataclass(frozen=True)
class HashingEmbedderConfig:
    dim: int = 4096
    hash_seed: int = 0

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ValueError(f"dim must be at least 2, got {self.dim}")


def hashing_embed(
    tokens: Sequence[str],
    stats: CorpusStats,
    config: HashingEmbedderConfig = HashingEmbedderConfig(),
) -> np.ndarray:
    """Embed a token bag as an L2-normalized hashed tf-idf vector.

    Accumulation runs in sorted unique-token order, so the output is
    bitwise identical for any permutation of the same token multiset. An
    input that produces no mass embeds to the zero vector and raises
    :class:`ZeroVectorWarning`; callers that rank must handle it.
    """
    vector = np.zeros(config.dim, dtype=np.float64)
    counts = Counter(tokens)
    for token in sorted(counts):
        df = stats.doc_frequency.get(token, 0)
        idf = math.log((stats.doc_count + 1) / (df + 1)) + 1.0
        vector[token_bucket(token, config.hash_seed, config.dim)] += counts[token] * idf
    norm = math.sqrt(float(np.dot(vector, vector)))
    if norm == 0.0:
        warnings.warn(
            "input embedded to the zero vector (no usable tokens)",
            ZeroVectorWarning,
            stacklevel=2,
        )
        return vector
    return vector / norm


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity of two equal-dimension vectors.

    Symmetric by construction; raises on dimension mismatch or a zero-norm
    operand, for which similarity is undefined.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or v.ndim != 1:
        raise ValueError("cosine expects 1-D vectors")
    if u.shape[0] != v.shape[0]:
        raise ValueError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    norm_u = math.sqrt(float(np.dot(u, u)))
    norm_v = math.sqrt(float(np.dot(v, v)))
    if norm_u == 0.0 or norm_v == 0.0:
        raise ValueError("cosine is undefined for zero-norm vectors")
    return float(np.dot(u, v) / (norm_u * norm_v))


@runtime_checkable
class EmbeddingProvider(Protocol):
    """Anything that can embed cleaned texts into fixed-dimension vectors."""

    name: str

    @property
    def dim(self) -> int | None: ...

    @property
    def fingerprint(self) -> str: ...

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


class HashingProvider:
    """Offline provider wrapping :func:`hashing_embed`.

    ``embed`` accepts raw or cleaned text; cleaning is idempotent, so
    callers that already normalized their input lose nothing.
    """

    name = "hashing"

    def __init__(
        self,
        stats: CorpusStats,
        config: HashingEmbedderConfig = HashingEmbedderConfig(),
        preprocess: PreprocessConfig = DEFAULT_CONFIG,
    ) -> None:
        self.stats = stats
        self.config = config
        self.preprocess = preprocess

    @classmethod
    def fit(
        cls,
        documents: Iterable[Sequence[str]],
        config: HashingEmbedderConfig = HashingEmbedderConfig(),
        preprocess: PreprocessConfig = DEFAULT_CONFIG,
    ) -> "HashingProvider":
        """Fit statistics over already-tokenized documents."""
        return cls(fit_stats(documents), config, preprocess)

    @classmethod
    def fit_texts(
        cls,
        texts: Iterable[str],
        config: HashingEmbedderConfig = HashingEmbedderConfig(),
        preprocess: PreprocessConfig = DEFAULT_CONFIG,
    ) -> "HashingProvider":
        """Fit statistics over raw texts, cleaning and tokenizing each."""
        documents = [
            tokenize_and_filter(clean(text, preprocess), preprocess) for text in texts
        ]
        return cls(fit_stats(documents), config, preprocess)

    @property
    def dim(self) -> int:
        return self.config.dim

    @property
    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(
            f"{self.name};{self.config.dim};{self.config.hash_seed};".encode()
        )
        h.update(self.stats.digest().encode())
        h.update(self.preprocess.digest().encode())
        return h.hexdigest()[:16]

    def embed_tokens(self, tokens: Sequence[str]) -> np.ndarray:
        return hashing_embed(tokens, self.stats, self.config)

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        rows = [
            self.embed_tokens(
                tokenize_and_filter(clean(text, self.preprocess), self.preprocess)
            )
            for text in texts
        ]
        if not rows:
            return np.zeros((0, self.config.dim), dtype=np.float64)
        return np.stack(rows)
