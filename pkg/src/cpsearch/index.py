"""Exact top-k cosine retrieval over precomputed, normalized embeddings.

The corpus is small (tens to hundreds of entries), so the index is a plain
matrix scanned exhaustively; results are exact and bit-reproducible. Ties are
broken by ascending entry id so rankings are stable.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .embedding import EmbeddingBatch, EmbeddingProvider, IndexConfig, embed_corpus
from .errors import NotFoundError, PartialFailureError, SchemaError, ValidationError

logger = logging.getLogger(__name__)

INDEX_SCHEMA_VERSION = 1
DEFAULT_K = 5

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class RankedResult:
    entry_id: str
    score: float
    rank: int


class RetrievalIndex:
    """Immutable set of (entry id, unit vector) pairs for one configuration."""

    def __init__(
        self,
        config: IndexConfig,
        dimension: int,
        items: list[tuple[str, np.ndarray]],
        provider_id: str,
    ):
        ids = [entry_id for entry_id, _ in items]
        if len(ids) != len(set(ids)):
            raise ValidationError("index items must have pairwise distinct entry ids")
        ordered = sorted(items, key=lambda pair: pair[0])
        self.config = config
        self.dimension = dimension
        self.provider_id = provider_id
        self.entry_ids = [entry_id for entry_id, _ in ordered]
        self._matrix = (
            np.stack([np.asarray(vec, dtype=np.float64) for _, vec in ordered])
            if ordered
            else np.zeros((0, dimension), dtype=np.float64)
        )
        if self._matrix.shape[1] != dimension:
            raise ValidationError(
                f"index vectors have dimension {self._matrix.shape[1]}, expected {dimension}"
            )
        norms = np.linalg.norm(self._matrix, axis=1)
        bad = [self.entry_ids[i] for i in np.flatnonzero(np.abs(norms - 1.0) > _NORM_TOL)]
        if bad:
            raise ValidationError(f"index vectors not unit-norm for entries: {bad}")

    def __len__(self) -> int:
        return len(self.entry_ids)

    def vector_for(self, entry_id: str) -> np.ndarray:
        try:
            pos = self.entry_ids.index(entry_id)
        except ValueError:
            raise NotFoundError(f"entry {entry_id!r} not in index") from None
        return self._matrix[pos].copy()

    def items(self) -> list[tuple[str, np.ndarray]]:
        return [(entry_id, self._matrix[i].copy()) for i, entry_id in enumerate(self.entry_ids)]

    def scores(self, query_vector: np.ndarray) -> np.ndarray:
        """Cosine similarity of the query against every item, clamped to [-1, 1]."""
        q = np.asarray(query_vector, dtype=np.float64)
        if q.shape != (self.dimension,):
            raise ValidationError(f"query vector has shape {q.shape}, index dimension is {self.dimension}")
        norm = float(np.linalg.norm(q))
        if norm == 0.0:
            raise ValidationError("query vector has zero norm")
        return np.clip(self._matrix @ (q / norm), -1.0, 1.0)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """(a.b) / (|a||b|), clamped to [-1, 1] against floating-point overshoot."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape or va.ndim != 1:
        raise ValidationError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    norm_a = float(np.linalg.norm(va))
    norm_b = float(np.linalg.norm(vb))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValidationError("cosine similarity undefined for zero-norm vectors")
    value = float(np.dot(va, vb)) / (norm_a * norm_b)
    return min(1.0, max(-1.0, value))


def query_top_k(index: RetrievalIndex, query_vector: np.ndarray, k: int = DEFAULT_K) -> list[RankedResult]:
    """The min(k, N) highest-scoring entries; exact ties broken by ascending id.

    Exhaustive scan over all items (exact, never approximate). An empty index
    yields an empty result list.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if len(index) == 0:
        return []
    scores = index.scores(query_vector)
    # Stable sort on descending score: items are stored in ascending-id order,
    # so equal scores keep the lexicographically smaller id first.
    order = np.argsort(-scores, kind="stable")[: min(k, len(index))]
    return [
        RankedResult(entry_id=index.entry_ids[i], score=float(scores[i]), rank=rank)
        for rank, i in enumerate(order, start=1)
    ]


def rank_of(index: RetrievalIndex, query_vector: np.ndarray, target_entry_id: str) -> int | None:
    """1-based rank of the target under the full ordering; None if absent."""
    if target_entry_id not in index.entry_ids:
        return None
    full = query_top_k(index, query_vector, k=max(1, len(index)))
    for result in full:
        if result.entry_id == target_entry_id:
            return result.rank
    return None


def build_index(
    corpus: Corpus,
    config: IndexConfig,
    provider: EmbeddingProvider,
    strict: bool = True,
) -> RetrievalIndex:
    """Embed the corpus under a configuration and assemble the index.

    With ``strict`` (default) any per-entry embedding failure aborts with a
    :class:`PartialFailureError`; otherwise failing entries are skipped.
    """
    batch: EmbeddingBatch = embed_corpus(corpus, config, provider)
    if strict and batch.failures:
        raise PartialFailureError(
            f"embedding failed for {len(batch.failures)} of {len(corpus)} entries under {config.name}",
            failures=batch.failures,
        )
    return RetrievalIndex(
        config=config, dimension=provider.dimension, items=batch.items, provider_id=provider.id
    )


def save_index(index: RetrievalIndex, path: str | Path) -> None:
    """Write the index as canonical JSON; float64 values round-trip exactly."""
    doc = {
        "schema_version": INDEX_SCHEMA_VERSION,
        "config_name": index.config.name,
        "provider_id": index.provider_id,
        "dimension": index.dimension,
        "items": [
            {"entry_id": entry_id, "vector": [float(x) for x in vec]}
            for entry_id, vec in index.items()
        ],
    }
    payload = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    Path(path).write_text(payload, encoding="utf-8")


def load_index(path: str | Path) -> RetrievalIndex:
    p = Path(path)
    if not p.exists():
        raise NotFoundError(f"index file {p} does not exist")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise SchemaError(f"index file {p} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema_version") != INDEX_SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported index schema_version {doc.get('schema_version')!r} in {p} "
            f"(expected {INDEX_SCHEMA_VERSION})"
        )
    dimension = int(doc["dimension"])
    items = []
    for raw in doc.get("items", []):
        vec = np.asarray(raw["vector"], dtype=np.float64)
        if vec.shape != (dimension,):
            raise SchemaError(
                f"index entry {raw['entry_id']!r} has vector length {vec.shape[0]}, expected {dimension}"
            )
        items.append((raw["entry_id"], vec))
    return RetrievalIndex(
        config=IndexConfig.parse(doc["config_name"]),
        dimension=dimension,
        items=items,
        provider_id=doc["provider_id"],
    )


def check_provider_match(index: RetrievalIndex, provider: EmbeddingProvider) -> bool:
    """Warn loudly when an index is queried with a different provider than built it."""
    if index.provider_id != provider.id:
        logger.warning(
            "index was built by provider %r but session uses %r; "
            "query embeddings will not be comparable",
            index.provider_id, provider.id,
        )
        return False
    return True
