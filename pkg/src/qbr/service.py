"""HTTP JSON API over the retrieval pipeline.

The engine state is an immutable snapshot (corpus, index, provider,
adapter); reloading swaps a fresh snapshot atomically so in-flight
requests finish on the one they started with.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .adapter import Adapter, identity_adapter, load_adapter
from .corpus import Corpus, load_corpus
from .embedding import EmbeddingProvider, HashEmbedder
from .retrieval import search
from .vindex import PairIndex, load_index

log = logging.getLogger("qbr.service")


@dataclass
class ServiceConfig:
    doc_path: str
    scope_path: str
    qb_path: str
    index_path: str
    adapter_path: str | None = None
    listen_host: str = "127.0.0.1"
    listen_port: int = 8080
    default_k: int = 5
    dim: int = 256
    cors_allowed_origins: list[str] = field(default_factory=list)

    def validate(self) -> None:
        if self.default_k < 1:
            raise ValueError(f"default_k must be >= 1, got {self.default_k}")


@dataclass(frozen=True)
class EngineSnapshot:
    corpus: Corpus
    index: PairIndex
    provider: EmbeddingProvider
    adapter: Adapter
    loaded_at: float


def load_snapshot(config: ServiceConfig,
                  provider: EmbeddingProvider | None = None) -> EngineSnapshot:
    provider = provider or HashEmbedder(config.dim)
    corpus = load_corpus(config.doc_path, config.scope_path, config.qb_path)
    index = load_index(config.index_path, provider.fingerprint)
    if config.adapter_path:
        adapter = load_adapter(config.adapter_path, provider.fingerprint)
    else:
        adapter = identity_adapter(provider.dim, provider.fingerprint)
    return EngineSnapshot(corpus=corpus, index=index, provider=provider,
                          adapter=adapter, loaded_at=time.time())


def create_app(snapshot: EngineSnapshot | None = None, default_k: int = 5,
               cors_allowed_origins: list[str] | None = None) -> FastAPI:
    app = FastAPI(title="qbr")
    # single mutable cell; assignment is atomic, readers grab one reference
    app.state.snapshot = snapshot
    app.state.default_k = default_k

    if cors_allowed_origins:
        app.add_middleware(CORSMiddleware, allow_origins=cors_allowed_origins,
                           allow_methods=["*"], allow_headers=["*"])

    @app.middleware("http")
    async def request_log(request: Request, call_next):
        t0 = time.perf_counter()
        response = await call_next(request)
        query_hash = ""
        if request.url.query:
            query_hash = hashlib.sha256(request.url.query.encode()).hexdigest()[:12]
        log.info(json.dumps({"ts": time.time(), "path": request.url.path,
                             "status": response.status_code,
                             "latency_ms": (time.perf_counter() - t0) * 1000.0,
                             "query_hash": query_hash}))
        return response

    def engine() -> EngineSnapshot | None:
        return app.state.snapshot

    @app.post("/api/search")
    async def api_search(payload: dict):
        snap = engine()
        if snap is None:
            return JSONResponse({"error": "engine not loaded"}, status_code=503)
        query = payload.get("query")
        if not isinstance(query, str) or not query.strip():
            return JSONResponse({"error": "query must be a non-empty string"},
                                status_code=400)
        k = payload.get("k", app.state.default_k)
        if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= 50:
            return JSONResponse({"error": "k must be an integer in [1, 50]"},
                                status_code=400)
        warnings: list[str] = []
        t0 = time.perf_counter()
        results = search(snap.corpus, snap.index, snap.provider, snap.adapter,
                         query, k, warnings)
        return {"results": [r.to_dict() for r in results],
                "warnings": warnings,
                "latency_ms": (time.perf_counter() - t0) * 1000.0}

    @app.get("/api/documents/{doc_id}")
    async def api_document(doc_id: str):
        snap = engine()
        if snap is None:
            return JSONResponse({"error": "engine not loaded"}, status_code=503)
        doc = snap.corpus.documents.get(doc_id)
        if doc is None:
            return JSONResponse({"error": f"unknown document {doc_id!r}"}, status_code=404)
        scopes = [{"id": s.id, "start_para": s.start_para, "end_para": s.end_para}
                  for s in sorted(snap.corpus.scopes.values(), key=lambda s: s.id)
                  if s.doc_id == doc_id]
        return {"id": doc.id, "title": doc.title, "url": doc.url,
                "paragraphs": list(doc.paragraphs), "scopes": scopes}

    @app.get("/api/qb/{entry_id}")
    async def api_qb(entry_id: str):
        snap = engine()
        if snap is None:
            return JSONResponse({"error": "engine not loaded"}, status_code=503)
        entry = snap.corpus.qb.get(entry_id)
        if entry is None:
            return JSONResponse({"error": f"unknown entry {entry_id!r}"}, status_code=404)
        return {"id": entry.id, "question": entry.question, "doc_id": entry.doc_id,
                "scope_id": entry.scope_id, "source": entry.source}

    @app.get("/healthz")
    async def healthz():
        snap = engine()
        if snap is None:
            return {"status": "loading", "corpus_counts": None,
                    "index_rows": None, "adapter_loaded": False}
        return {"status": "ok",
                "corpus_counts": {"documents": len(snap.corpus.documents),
                                  "scopes": len(snap.corpus.scopes),
                                  "qb": len(snap.corpus.qb)},
                "index_rows": len(snap.index),
                "adapter_loaded": snap.adapter is not None}

    return app


def set_snapshot(app: FastAPI, snapshot: EngineSnapshot) -> None:
    """Atomically swap the serving snapshot."""
    app.state.snapshot = snapshot
