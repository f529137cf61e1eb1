"""Exact top-k cosine index over embedded question-scope pair texts.

One row per QB entry, stored in ascending entry-id order; search is a full
matrix scan, which is plenty fast at tens of thousands of rows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, scope_text
from .embedding import EmbeddingProvider
from .errors import DimMismatch, EmbedError, FingerprintMismatch, ParseError, QBRError


@dataclass(frozen=True)
class ScoredHit:
    entry_id: str
    score: float


@dataclass(frozen=True)
class PairIndex:
    entry_ids: tuple[str, ...]  # ascending
    vectors: np.ndarray         # (n, dim), unit or zero rows
    provider_fingerprint: str
    dim: int

    def __len__(self) -> int:
        return len(self.entry_ids)


def pair_text(question: str, scope_body: str) -> str:
    """Question and scope text joined by a single newline."""
    return question + "\n" + scope_body


def build_index(corpus: Corpus, provider: EmbeddingProvider) -> PairIndex:
    """Embed every QB entry's question-scope pair text, rows in entry-id order."""
    entry_ids = corpus.entry_ids()
    rows = np.zeros((len(entry_ids), provider.dim), dtype=np.float64)
    for i, entry_id in enumerate(entry_ids):
        entry = corpus.qb[entry_id]
        text = pair_text(entry.question, scope_text(corpus, entry.scope_id))
        try:
            vec = provider.embed(text)
        except QBRError as exc:
            raise EmbedError(f"{entry_id}: {exc}") from exc
        norm = np.linalg.norm(vec)
        rows[i] = vec / norm if norm > 0.0 else vec
    return PairIndex(entry_ids=tuple(entry_ids), vectors=rows,
                     provider_fingerprint=provider.fingerprint, dim=provider.dim)


def top_k(index: PairIndex, query_vec: np.ndarray, k: int) -> list[ScoredHit]:
    """Exact k highest-cosine entries, score descending, ties by ascending id."""
    query_vec = np.asarray(query_vec, dtype=np.float64)
    if query_vec.shape != (index.dim,):
        raise DimMismatch(f"query dim {query_vec.shape} vs index dim {index.dim}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    n = len(index.entry_ids)
    if n == 0:
        return []
    qnorm = np.linalg.norm(query_vec)
    if qnorm == 0.0:
        scores = np.zeros(n)
    else:
        # einsum reduces each row with a position-independent order, so
        # duplicate rows score bit-identically and the id tie-break is exact
        scores = np.einsum("ij,j->i", index.vectors, query_vec / qnorm)
    # rows are already id-ascending, so a stable sort on -score yields the
    # (score desc, id asc) contract exactly
    order = np.argsort(-scores, kind="stable")[:k]
    return [ScoredHit(entry_id=index.entry_ids[i], score=float(scores[i])) for i in order]


def save_index(index: PairIndex, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dim": index.dim,
                             "provider_fingerprint": index.provider_fingerprint,
                             "n": len(index.entry_ids)}) + "\n")
        for entry_id, row in zip(index.entry_ids, index.vectors):
            fh.write(json.dumps({"entry_id": entry_id, "vector": row.tolist()}) + "\n")


def load_index(path, provider_fingerprint: str) -> PairIndex:
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise ParseError(f"{path}: missing header record")
        try:
            header = json.loads(header_line)
            dim = int(header["dim"])
            fingerprint = header["provider_fingerprint"]
            n = int(header["n"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ParseError(f"{path}: bad header: {exc}") from exc
        if fingerprint != provider_fingerprint:
            raise FingerprintMismatch(
                f"index built with {fingerprint!r}, provider is {provider_fingerprint!r}")
        entry_ids: list[str] = []
        rows = np.zeros((n, dim), dtype=np.float64)
        for i in range(n):
            line = fh.readline()
            if not line.strip():
                raise ParseError(f"{path}: truncated after {i} of {n} rows")
            try:
                rec = json.loads(line)
                entry_id = rec["entry_id"]
                vec = np.asarray(rec["vector"], dtype=np.float64)
            except (ValueError, KeyError, TypeError) as exc:
                raise ParseError(f"{path}: bad row {i}: {exc}") from exc
            if vec.shape != (dim,):
                raise ParseError(f"{path}: row {i} has dim {vec.size}, expected {dim}")
            entry_ids.append(entry_id)
            rows[i] = vec
    if entry_ids != sorted(entry_ids):
        raise ParseError(f"{path}: entry ids are not in ascending order")
    if len(set(entry_ids)) != len(entry_ids):
        raise ParseError(f"{path}: duplicate entry ids")
    return PairIndex(entry_ids=tuple(entry_ids), vectors=rows,
                     provider_fingerprint=fingerprint, dim=dim)
