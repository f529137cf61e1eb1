"""Pluggable text embedding providers and cosine similarity.

Three providers share one contract: a pure ``embed(text) -> unit vector``
(zero vector only for token-free text) plus a ``fingerprint`` string that
downstream artifacts (index, adapter) record and verify on load.

* ``HashEmbedder`` — deterministic FNV-1a feature hashing; the test-time
  stand-in for a real encoder.
* ``PrecomputedProvider`` — exact-key lookup over vectors computed offline.
* ``RemoteProvider`` — JSON client for an external encoder service.
"""

from __future__ import annotations

import json
import re

import numpy as np
import requests

from .errors import (DimMismatch, InconsistentDim, InvalidDim, ParseError,
                     ProtocolError, TransportError, UnknownText)

_TOKEN_RE = re.compile(r"[^0-9a-z]+")

FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character."""
    return [t for t in _TOKEN_RE.split(text.lower()) if t]


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & _MASK64
    return h


def embed_hash(text: str, dim: int) -> np.ndarray:
    """Signed feature-hashing embedding, L2-normalized (zero if no tokens)."""
    if dim < 2:
        raise InvalidDim(f"dim must be >= 2, got {dim}")
    vec = np.zeros(dim, dtype=np.float64)
    for token in tokenize(text):
        h = fnv1a_64(token.encode("utf-8"))
        sign = 1.0 if h < (1 << 63) else -1.0
        vec[h % dim] += sign
    norm = np.linalg.norm(vec)
    if norm > 0.0:
        vec /= norm
    return vec


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; 0.0 if either vector is zero."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimMismatch(f"{a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


class EmbeddingProvider:
    """Abstract provider: pure embed() of constant dimension."""

    dim: int
    fingerprint: str

    def embed(self, text: str) -> np.ndarray:
        raise NotImplementedError

    def embed_many(self, texts: list[str]) -> list[np.ndarray]:
        return [self.embed(t) for t in texts]


class HashEmbedder(EmbeddingProvider):
    def __init__(self, dim: int = 256):
        if dim < 2:
            raise InvalidDim(f"dim must be >= 2, got {dim}")
        self.dim = dim
        self.fingerprint = f"fnv1a-hash/dim={dim}"

    def embed(self, text: str) -> np.ndarray:
        return embed_hash(text, self.dim)


class PrecomputedProvider(EmbeddingProvider):
    """Exact-key vector store loaded from a JSONL file."""

    def __init__(self, vectors: dict[str, np.ndarray], dim: int, fingerprint: str):
        self._vectors = vectors
        self.dim = dim
        self.fingerprint = fingerprint

    def embed(self, text: str) -> np.ndarray:
        vec = self._vectors.get(text)
        if vec is None:
            raise UnknownText(f"no precomputed vector for text: {text[:80]!r}")
        return vec


def load_precomputed(path) -> PrecomputedProvider:
    """Load a {"text","vector"} JSONL store; vectors are unit-normalized."""
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(rec, dict) or "text" not in rec or "vector" not in rec:
                raise ParseError(f"{path}:{lineno}: expected {{'text','vector'}} record")
            vec = np.asarray(rec["vector"], dtype=np.float64)
            if vec.ndim != 1 or vec.size == 0 or not np.isfinite(vec).all():
                raise ParseError(f"{path}:{lineno}: vector must be a finite 1-D array")
            if dim is None:
                dim = int(vec.size)
            elif vec.size != dim:
                raise InconsistentDim(f"{path}:{lineno}: dim {vec.size} != {dim}")
            norm = np.linalg.norm(vec)
            if norm > 0.0:
                vec = vec / norm
            vectors[rec["text"]] = vec
    if dim is None:
        raise ParseError(f"{path}: empty precomputed store")
    return PrecomputedProvider(vectors, dim, f"precomputed/dim={dim}/n={len(vectors)}")


class RemoteProvider(EmbeddingProvider):
    """Client for a POST {"texts": [...]} -> {"vectors": [[...], ...]} service."""

    def __init__(self, endpoint: str, dim: int, timeout: float = 30.0, session=None):
        self.endpoint = endpoint
        self.dim = dim
        self.timeout = timeout
        self.fingerprint = f"remote/{endpoint}/dim={dim}"
        self._session = session or requests.Session()

    def embed(self, text: str) -> np.ndarray:
        return self.embed_many([text])[0]

    def embed_many(self, texts: list[str]) -> list[np.ndarray]:
        try:
            resp = self._session.post(self.endpoint, json={"texts": texts},
                                      timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"embedding endpoint unreachable: {exc}") from exc
        if not 200 <= resp.status_code < 300:
            raise TransportError(f"embedding endpoint returned {resp.status_code}")
        try:
            payload = resp.json()
            raw = payload["vectors"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ProtocolError(f"bad embedding payload: {exc}") from exc
        if not isinstance(raw, list) or len(raw) != len(texts):
            raise ProtocolError(
                f"expected {len(texts)} vectors, got {len(raw) if isinstance(raw, list) else 'non-list'}")
        out = []
        for row in raw:
            vec = np.asarray(row, dtype=np.float64)
            if vec.ndim != 1 or vec.size != self.dim or not np.isfinite(vec).all():
                raise ProtocolError(f"vector with shape {vec.shape} does not match dim {self.dim}")
            norm = np.linalg.norm(vec)
            if norm > 0.0:
                vec = vec / norm
            out.append(vec)
        return out
