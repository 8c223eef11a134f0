"""HTTP/JSON service: query the index, browse models, add models incrementally.

Readers work against an immutable (corpus, index) snapshot; additions are
serialized by a writer lock and swap in a new snapshot atomically, so a query
sees either the old corpus or the new one, never a half-built index. Adding
an entry never re-embeds existing entries.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass

from fastapi import FastAPI, Header, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .corpus import Corpus, ExpertiseLevel, ModelEntry, SourceFile, add_entry, save_corpus
from .descriptions import DescriptionGenerator, StubTextProvider, TextGenerationProvider
from .embedding import EmbeddingProvider, IndexConfig, build_embedding_input, embed, l2_normalize
from .errors import (
    ConflictError,
    GenerationError,
    NotFoundError,
    ProviderContractError,
    ProviderError,
    ValidationError,
)
from .index import DEFAULT_K, RetrievalIndex, build_index, query_top_k

access_log = logging.getLogger("cpsearch.service.access")


class QueryRequest(BaseModel):
    text: str
    k: int | None = Field(default=None, ge=1)


class SourceFilePayload(BaseModel):
    filename: str
    content: str


class AddModelRequest(BaseModel):
    id: str
    name: str | None = None
    provenance: str = "unknown"
    source_files: list[SourceFilePayload]
    descriptions: dict[str, str] = Field(default_factory=dict)


@dataclass
class _Snapshot:
    corpus: Corpus
    index: RetrievalIndex


class ServiceState:
    """Shared state: an atomically swappable snapshot plus provider handles."""

    def __init__(
        self,
        corpus: Corpus,
        index: RetrievalIndex,
        embedding_provider: EmbeddingProvider,
        text_provider: TextGenerationProvider | None = None,
        k_default: int = DEFAULT_K,
        corpus_path: str | None = None,
        admin_token: str | None = None,
    ):
        self._snapshot = _Snapshot(corpus=corpus, index=index)
        self.embedding_provider = embedding_provider
        self.text_provider = text_provider or StubTextProvider()
        self.k_default = k_default
        self.corpus_path = corpus_path
        self.admin_token = admin_token
        self.writer_lock = threading.Lock()

    @property
    def snapshot(self) -> _Snapshot:
        return self._snapshot

    def swap(self, corpus: Corpus, index: RetrievalIndex) -> None:
        self._snapshot = _Snapshot(corpus=corpus, index=index)

    @classmethod
    def build(
        cls,
        corpus: Corpus,
        config: IndexConfig,
        embedding_provider: EmbeddingProvider,
        **kwargs,
    ) -> "ServiceState":
        index = build_index(corpus, config, embedding_provider)
        return cls(corpus=corpus, index=index, embedding_provider=embedding_provider, **kwargs)


def _entry_payload(entry: ModelEntry) -> dict:
    return {
        "entry_id": entry.id,
        "name": entry.name,
        "provenance": entry.provenance,
        "source_files": [{"filename": sf.filename, "content": sf.content} for sf in entry.source_files],
        "descriptions": {level.code: text for level, text in sorted(entry.descriptions.items())},
    }


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="cpsearch", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.service = state

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        access_log.info(
            json.dumps(
                {
                    "method": request.method,
                    "path": request.url.path,
                    "status": response.status_code,
                    "duration_ms": round((time.perf_counter() - started) * 1000, 2),
                }
            )
        )
        return response

    @app.get("/api/health")
    def health() -> dict:
        snap = state.snapshot
        return {
            "n": len(snap.index),
            "config": snap.index.config.name,
            "provider": state.embedding_provider.id,
            "dimension": snap.index.dimension,
            "corpus_version": snap.corpus.version,
            "k_default": state.k_default,
        }

    @app.post("/api/query")
    def query(request: QueryRequest) -> dict:
        if not request.text.strip():
            raise HTTPException(status_code=400, detail="query text must not be empty")
        snap = state.snapshot
        k = request.k if request.k is not None else state.k_default
        try:
            query_vector = embed(request.text, state.embedding_provider)
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except ProviderError as exc:
            raise HTTPException(status_code=503, detail=f"embedding provider unreachable: {exc}") from exc
        try:
            results = query_top_k(snap.index, query_vector, k)
        except ValidationError as exc:
            # dimension mismatch between configured provider and loaded index
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return {
            "results": [
                {
                    "entry_id": r.entry_id,
                    "name": snap.corpus.get(r.entry_id).name,
                    "score": r.score,
                    "rank": r.rank,
                }
                for r in results
            ],
            "config": snap.index.config.name,
            "provider": state.embedding_provider.id,
            "k": k,
        }

    @app.get("/api/models/{entry_id}")
    def get_model(entry_id: str) -> dict:
        snap = state.snapshot
        try:
            entry = snap.corpus.get(entry_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return _entry_payload(entry)

    @app.post("/api/models", status_code=201)
    def add_model(request: AddModelRequest, x_admin_token: str | None = Header(default=None)) -> dict:
        if state.admin_token is not None and x_admin_token != state.admin_token:
            raise HTTPException(status_code=401, detail="missing or invalid admin token")

        descriptions = {}
        for code, text in request.descriptions.items():
            try:
                descriptions[ExpertiseLevel.from_code(code)] = text
            except ValidationError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        entry = ModelEntry(
            id=request.id,
            name=request.name or request.id,
            provenance=request.provenance,
            source_files=tuple(
                SourceFile(filename=f.filename, content=f.content) for f in request.source_files
            ),
            descriptions=descriptions,
        )
        try:
            entry.validate()
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

        with state.writer_lock:
            snap = state.snapshot
            config = snap.index.config
            if entry.id in snap.corpus:
                raise HTTPException(status_code=409, detail=f"entry id {entry.id!r} already exists")

            # All-or-nothing: generation and embedding must both succeed
            # before anything is committed.
            try:
                missing = [lvl for lvl in sorted(config.levels) if entry.description(lvl) is None]
                if missing:
                    generator = DescriptionGenerator(state.text_provider, backoff_start=0.1)
                    generated = {lvl: generator.generate(entry, lvl).text for lvl in missing}
                    entry = entry.with_descriptions(generated)
                vector = embed(build_embedding_input(entry, config), state.embedding_provider)
            except (ProviderError, GenerationError) as exc:
                raise HTTPException(status_code=503, detail=f"provider failure, entry not added: {exc}") from exc
            except ProviderContractError as exc:
                raise HTTPException(status_code=500, detail=str(exc)) from exc

            new_corpus = add_entry(snap.corpus, entry)
            new_index = RetrievalIndex(
                config=config,
                dimension=snap.index.dimension,
                items=snap.index.items() + [(entry.id, l2_normalize(vector))],
                provider_id=snap.index.provider_id,
            )
            state.swap(new_corpus, new_index)
            if state.corpus_path:
                save_corpus(new_corpus, state.corpus_path)

        return {
            "entry_id": entry.id,
            "n": len(state.snapshot.index),
            "corpus_version": state.snapshot.corpus.version,
            "config": config.name,
        }

    return app
