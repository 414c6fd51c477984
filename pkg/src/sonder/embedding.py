"""Text embeddings and cosine similarity.

The default provider is a deterministic hashed bag-of-tokens embedder: it
lowercases, splits on non-alphanumeric runs, hashes each token into one of
``dim`` buckets (stable across platforms via blake2b), counts occurrences,
and L2-normalizes. It is dependency-free and reproducible, which is what the
metric and experiment layers need; a real sentence encoder can be plugged in
through the external-service provider without touching any metric code.
"""

from __future__ import annotations

import hashlib
import os
import re
import threading
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateVector,
    DimensionMismatch,
    InvalidConfig,
    InvalidInput,
    ProviderUnavailable,
)

_TOKEN_RE = re.compile(r"[^0-9a-z]+")

PROVIDER_REFERENCE = "reference-hash"
PROVIDER_EXTERNAL = "external-service"


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-dimension real vector for a text span."""

    values: tuple[float, ...]
    normalized: bool = False

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise InvalidInput("embedding must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(arr)):
            raise InvalidInput("embedding components must be finite")
        object.__setattr__(self, "values", tuple(float(x) for x in arr))
        if self.normalized:
            norm = float(np.linalg.norm(arr))
            if abs(norm - 1.0) > 1e-9:
                raise InvalidInput(
                    f"vector flagged normalized has norm {norm!r}"
                )

    @property
    def dim(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def is_zero(self) -> bool:
        return not any(v != 0.0 for v in self.values)


@dataclass(frozen=True)
class EmbedderConfig:
    dim: int = 256
    provider: str = PROVIDER_REFERENCE
    normalize: bool = True
    endpoint: Optional[str] = None
    max_in_flight: int = 8

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidConfig("dim must be >= 2")
        if self.provider not in (PROVIDER_REFERENCE, PROVIDER_EXTERNAL):
            raise InvalidConfig(f"unknown provider {self.provider!r}")
        if (self.endpoint is not None) != (self.provider == PROVIDER_EXTERNAL):
            raise InvalidConfig(
                "endpoint must be present iff provider is external-service"
            )

    @classmethod
    def from_env(cls, env=os.environ) -> "EmbedderConfig":
        provider = env.get("EMBED_PROVIDER", PROVIDER_REFERENCE)
        dim = int(env.get("EMBED_DIM", "256"))
        endpoint = env.get("EMBED_ENDPOINT")
        return cls(dim=dim, provider=provider, endpoint=endpoint)


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_RE.split(text.lower()) if t]


def _bucket(token: str, dim: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dim


def reference_hash_counts(text: str, dim: int) -> np.ndarray:
    """Hashed bag-of-tokens counts, before any normalization."""
    counts = np.zeros(dim, dtype=float)
    for token in tokenize(text):
        counts[_bucket(token, dim)] += 1.0
    if not counts.any():
        # tokens existed but vanished under the token filter (e.g. "!!!")
        raise InvalidInput("text has no embeddable tokens")
    return counts


class _ExternalClient:
    """JSON-over-HTTP embedding client with a cap on in-flight requests."""

    def __init__(self, endpoint: str, max_in_flight: int):
        self.endpoint = endpoint
        self._sem = threading.Semaphore(max_in_flight)

    def embed(self, texts: Sequence[str], dim: int) -> list[np.ndarray]:
        import httpx

        with self._sem:
            try:
                resp = httpx.post(
                    self.endpoint, json={"texts": list(texts)}, timeout=30.0
                )
                resp.raise_for_status()
            except Exception as exc:  # noqa: BLE001 - network failures collapse
                raise ProviderUnavailable(str(exc)) from exc
        payload = resp.json()
        vectors = payload.get("vectors")
        if vectors is None or len(vectors) != len(texts):
            raise ProviderUnavailable("malformed provider response")
        out = []
        for vec in vectors:
            arr = np.asarray(vec, dtype=float)
            if arr.shape != (dim,):
                raise ProviderUnavailable(
                    f"provider returned dim {arr.shape}, expected {dim}"
                )
            out.append(arr)
        return out


_external_clients: dict[tuple[str, int], _ExternalClient] = {}
_external_lock = threading.Lock()


def _client_for(config: EmbedderConfig) -> _ExternalClient:
    key = (config.endpoint, config.max_in_flight)
    with _external_lock:
        if key not in _external_clients:
            _external_clients[key] = _ExternalClient(*key)
        return _external_clients[key]


def _finalize(arr: np.ndarray, config: EmbedderConfig) -> EmbeddingVector:
    if config.normalize:
        norm = np.linalg.norm(arr)
        if norm > 0:
            arr = arr / norm
    return EmbeddingVector(tuple(float(x) for x in arr),
                           normalized=config.normalize)


def embed_text(text: str, config: EmbedderConfig = EmbedderConfig()) -> EmbeddingVector:
    if not text or not text.strip():
        raise InvalidInput("cannot embed empty text")
    if config.provider == PROVIDER_REFERENCE:
        arr = reference_hash_counts(text, config.dim)
    else:
        arr = _client_for(config).embed([text], config.dim)[0]
    return _finalize(arr, config)


def embed_batch(texts: Sequence[str],
                config: EmbedderConfig = EmbedderConfig()) -> list[EmbeddingVector]:
    for i, text in enumerate(texts):
        if not text or not text.strip():
            raise InvalidInput(f"empty text at index {i}")
    if not texts:
        return []
    if config.provider == PROVIDER_EXTERNAL:
        arrays = _client_for(config).embed(list(texts), config.dim)
        return [_finalize(arr, config) for arr in arrays]
    return [embed_text(t, config) for t in texts]


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if a.dim != b.dim:
        raise DimensionMismatch(f"dims {a.dim} != {b.dim}")
    return cosine_arrays(a.as_array(), b.as_array())


def cosine_arrays(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine over raw arrays; clamped to [-1, 1]."""
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DegenerateVector("cosine undefined for zero vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))
