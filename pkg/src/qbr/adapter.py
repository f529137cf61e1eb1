"""Trainable affine embedding adjustment applied on top of a frozen provider.

The adjusted embedding is ``normalize(A x + b)`` over the provider's unit
vector x. A starts as the identity and b as zero, so an untrained adapter
leaves every ranking unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import FingerprintMismatch, ParseError


@dataclass(frozen=True)
class Adapter:
    matrix: np.ndarray  # (dim, dim)
    bias: np.ndarray    # (dim,)
    provider_fingerprint: str

    @property
    def dim(self) -> int:
        return int(self.bias.size)

    def transform(self, vec: np.ndarray) -> np.ndarray:
        y = self.matrix @ vec + self.bias
        norm = np.linalg.norm(y)
        return y / norm if norm > 0.0 else y


def identity_adapter(dim: int, provider_fingerprint: str) -> Adapter:
    return Adapter(matrix=np.eye(dim), bias=np.zeros(dim),
                   provider_fingerprint=provider_fingerprint)


def save_adapter(adapter: Adapter, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"dim": adapter.dim,
                   "provider_fingerprint": adapter.provider_fingerprint,
                   "matrix": adapter.matrix.tolist(),
                   "bias": adapter.bias.tolist()}, fh)
        fh.write("\n")


def load_adapter(path, provider_fingerprint: str) -> Adapter:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        dim = int(payload["dim"])
        fingerprint = payload["provider_fingerprint"]
        matrix = np.asarray(payload["matrix"], dtype=np.float64)
        bias = np.asarray(payload["bias"], dtype=np.float64)
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"{path}: bad adapter file: {exc}") from exc
    if fingerprint != provider_fingerprint:
        raise FingerprintMismatch(
            f"adapter trained with {fingerprint!r}, provider is {provider_fingerprint!r}")
    if matrix.shape != (dim, dim) or bias.shape != (dim,):
        raise ParseError(f"{path}: matrix/bias shapes {matrix.shape}/{bias.shape} "
                         f"inconsistent with dim {dim}")
    if not (np.isfinite(matrix).all() and np.isfinite(bias).all()):
        raise ParseError(f"{path}: non-finite adapter entries")
    return Adapter(matrix=matrix, bias=bias, provider_fingerprint=fingerprint)
