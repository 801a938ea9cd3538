"""Sentence-embedding providers and vector similarity.

The hashed bag-of-tokens embedder is the deterministic offline default: every
retrieval and reranking test runs against it. A remote provider speaking the
common embeddings-over-HTTP shape can be swapped in behind the same interface.
"""

from __future__ import annotations

import hashlib
import os
import threading

import numpy as np

from .errors import DimMismatch, ProviderUnavailable
from .lexical import tokenize

DEFAULT_DIM = 512


def dot(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise DimMismatch(a.shape[0], b.shape[0])
    return float(np.dot(a, b))


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; 0 when either operand has zero norm."""
    if a.shape != b.shape:
        raise DimMismatch(a.shape[0], b.shape[0])
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def _bucket(token: str, dim: int) -> int:
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % dim


class HashEmbedder:
    """Deterministic test embedder: hash tokens into buckets, L2-normalize.

    Embeddings are a pure function of the token bag, so permuting words in a
    sentence leaves the vector unchanged and the empty string maps to zeros.
    """

    def __init__(self, dim: int = DEFAULT_DIM):
        self.name = f"hash-{dim}"
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in tokenize(text):
            vec[_bucket(token, self.dim)] += 1.0
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec /= norm
        return vec


class RemoteEmbedder:
    """Client for an embeddings-over-HTTP endpoint.

    POST {endpoint} with JSON {"model": ..., "input": [text]}; the response
    carries {"data": [{"embedding": [...]}]}. Auth token read from the
    RAGPLAN_EMBED_KEY environment variable unless given explicitly.
    """

    def __init__(self, endpoint: str, model: str, dim: int, api_key: str | None = None, timeout: float = 30.0):
        self.name = f"remote-{model}"
        self.endpoint = endpoint
        self.model = model
        self.dim = dim
        self.api_key = api_key if api_key is not None else os.environ.get("RAGPLAN_EMBED_KEY", "")
        self.timeout = timeout

    def embed(self, text: str) -> np.ndarray:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = requests.post(
                self.endpoint,
                json={"model": self.model, "input": [text]},
                headers=headers,
                timeout=self.timeout,
            )
        except Exception as exc:
            raise ProviderUnavailable(f"embedding endpoint unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderUnavailable(f"embedding endpoint returned {resp.status_code}")
        try:
            values = resp.json()["data"][0]["embedding"]
        except (KeyError, IndexError, ValueError) as exc:
            raise ProviderUnavailable(f"malformed embedding response: {exc}") from exc
        vec = np.asarray(values, dtype=np.float64)
        if vec.shape != (self.dim,):
            raise ProviderUnavailable(f"expected dim {self.dim}, got {vec.shape}")
        return vec


class CachingProvider:
    """Wraps a provider with a synchronized (provider, text-hash) cache."""

    def __init__(self, inner):
        self.inner = inner
        self.name = inner.name
        self.dim = inner.dim
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def embed(self, text: str) -> np.ndarray:
        key = hashlib.sha256(f"{self.name}\x00{text}".encode("utf-8")).hexdigest()
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        vec = self.inner.embed(text)
        with self._lock:
            self._cache[key] = vec
        return vec
