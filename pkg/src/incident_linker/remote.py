"""HTTP client for an external embedding service.

Wire protocol: ``POST {endpoint}/embed`` with body ``{"texts": [...]}``
returning ``{"vectors": [[...], ...], "dim": D}``. Requests are batched,
order is preserved, and transient transport failures are retried with
exponential backoff. The provider is safe to share across threads.
"""

from __future__ import annotations

import hashlib
import threading
import time
from typing import Sequence

import httpx
import numpy as np

__all__ = ["EmbeddingServiceError", "RemoteEmbeddingProvider", "remote_embed"]


class EmbeddingServiceError(RuntimeError):
    """The embedding service failed or returned an unusable response."""


class RemoteEmbeddingProvider:
    name = "remote"

    def __init__(
        self,
        endpoint: str,
        *,
        batch_size: int = 32,
        max_retries: int = 3,
        backoff_base: float = 0.25,
        timeout: float = 30.0,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        if batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if max_retries < 0:
            raise ValueError("max_retries must be non-negative")
        self.endpoint = endpoint.rstrip("/")
        self.batch_size = batch_size
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self._client = httpx.Client(timeout=timeout, transport=transport)
        self._lock = threading.Lock()
        self._dim: int | None = None

    @property
    def dim(self) -> int | None:
        """Vector dimension, known after the first successful call."""
        return self._dim

    @property
    def fingerprint(self) -> str:
        key = f"{self.name};{self.endpoint};{self._dim}"
        return hashlib.sha256(key.encode()).hexdigest()[:16]

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "RemoteEmbeddingProvider":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    def _post_batch(self, batch: Sequence[str]) -> list[list[float]]:
        url = f"{self.endpoint}/embed"
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt and self.backoff_base > 0:
                time.sleep(self.backoff_base * 2 ** (attempt - 1))
            try:
                response = self._client.post(url, json={"texts": list(batch)})
            except httpx.TransportError as exc:
                last_error = exc
                continue
            if response.status_code >= 500:
                last_error = EmbeddingServiceError(
                    f"server error {response.status_code} from {url}"
                )
                continue
            if response.status_code != 200:
                raise EmbeddingServiceError(
                    f"unexpected status {response.status_code} from {url}"
                )
            return self._parse_payload(response, expected=len(batch))
        raise EmbeddingServiceError(
            f"embedding request failed after {self.max_retries + 1} attempts: {last_error}"
        ) from last_error

    def _parse_payload(self, response: httpx.Response, expected: int) -> list[list[float]]:
        try:
            payload = response.json()
            vectors = payload["vectors"]
            dim = int(payload["dim"])
        except (ValueError, KeyError, TypeError) as exc:
            raise EmbeddingServiceError(f"malformed embedding response: {exc}") from exc
        if not isinstance(vectors, list) or len(vectors) != expected:
            raise EmbeddingServiceError(
                f"expected {expected} vectors, got {len(vectors) if isinstance(vectors, list) else 'non-list'}"
            )
        for row in vectors:
            if not isinstance(row, list) or len(row) != dim:
                raise EmbeddingServiceError("vector length disagrees with reported dim")
        if self._dim is None:
            self._dim = dim
        elif dim != self._dim:
            raise EmbeddingServiceError(
                f"dimension changed across calls: {self._dim} then {dim}"
            )
        return vectors

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        """Embed texts in input order; empty input yields an empty array."""
        with self._lock:
            rows: list[list[float]] = []
            for start in range(0, len(texts), self.batch_size):
                rows.extend(self._post_batch(texts[start : start + self.batch_size]))
            if not rows:
                return np.zeros((0, self._dim or 0), dtype=np.float64)
            matrix = np.asarray(rows, dtype=np.float64)
            if not np.isfinite(matrix).all():
                raise EmbeddingServiceError("embedding response contains non-finite values")
            return matrix


def remote_embed(
    endpoint: str,
    texts: Sequence[str],
    *,
    batch_size: int = 32,
    max_retries: int = 3,
    backoff_base: float = 0.25,
    transport: httpx.BaseTransport | None = None,
) -> np.ndarray:
    """One-shot convenience wrapper around :class:`RemoteEmbeddingProvider`."""
    with RemoteEmbeddingProvider(
        endpoint,
        batch_size=batch_size,
        max_retries=max_retries,
        backoff_base=backoff_base,
        transport=transport,
    ) as provider:
        return provider.embed(texts)
