"""Text-to-vector mapping and per-configuration embedding inputs.

Two providers are shipped: a remote JSON-over-HTTP client for a real
embedding model, and a fully deterministic local fallback (hashed
bag-of-tokens) that makes every offline test reproducible bit-for-bit.
Semantic quality of the fallback is explicitly not a goal.

An index configuration names which texts form a document's embedding input:
the source code alone (``SC``) or source code plus generated description
levels (``SC+D2``, ``SC+D1&2&3``...).
"""

from __future__ import annotations

import itertools
import logging
import os
import re
import threading
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import httpx
import numpy as np

from .corpus import Corpus, ExpertiseLevel, ModelEntry
from .descriptions import source_code_blob
from .errors import ConfigurationError, ProviderContractError, ProviderError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_DIMENSION = 768
DEFAULT_MAX_CHARS = 32_000

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_UINT64_MASK = (1 << 64) - 1

_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")


def l2_normalize(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Return the vector scaled to unit L2 norm (float64)."""
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1:
        raise ValidationError(f"expected a 1-d vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise ValidationError("vector has non-finite components")
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ValidationError("cannot normalize a zero vector")
    return vec / norm


@dataclass(frozen=True)
class IndexConfig:
    """Which texts feed the embedding: source code plus a set of description levels."""

    levels: frozenset[ExpertiseLevel] = field(default_factory=frozenset)
    include_source: bool = True

    @property
    def name(self) -> str:
        """Canonical short name: SC, SC+D1, SC+D2&3, SC+D1&2&3."""
        if not self.levels:
            return "SC"
        codes = "&".join(str(level.value) for level in sorted(self.levels))
        return f"SC+D{codes}"

    @classmethod
    def parse(cls, name: str) -> "IndexConfig":
        text = name.strip()
        if text == "SC":
            return cls()
        match = re.fullmatch(r"SC\+D([123](?:&[123])*)", text)
        if not match:
            raise ValidationError(f"unknown index configuration name {name!r}")
        values = [int(v) for v in match.group(1).split("&")]
        if len(values) != len(set(values)) or values != sorted(values):
            raise ValidationError(f"malformed index configuration name {name!r}")
        return cls(levels=frozenset(ExpertiseLevel(v) for v in values))


def all_configs() -> list[IndexConfig]:
    """The eight configurations, in canonical column order (SC first, then by level combos)."""
    configs = [IndexConfig()]
    for size in (1, 2, 3):
        for combo in itertools.combinations(sorted(ExpertiseLevel), size):
            configs.append(IndexConfig(levels=frozenset(combo)))
    return configs


def build_embedding_input(entry: ModelEntry, config: IndexConfig) -> str:
    """Concatenate source files and configured description blocks into one string.

    Source files come first (canonical order, `% file:` headers), then one
    block per configured level in ascending level order, blocks separated by
    a single blank line.
    """
    blocks = [source_code_blob(entry)]
    for level in sorted(config.levels):
        text = entry.description(level)
        if text is None:
            raise ConfigurationError(
                f"entry {entry.id!r} has no {level.label} ({level.code}) description, "
                f"required by configuration {config.name}"
            )
        blocks.append(f"--- DESCRIPTION ({level.label}) ---\n{text}")
    return "\n\n".join(blocks)


def fnv1a_64(data: bytes) -> int:
    """FNV-1a 64-bit hash."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _UINT64_MASK
    return h


def fallback_embed(text: str, d: int = DEFAULT_DIMENSION) -> np.ndarray:
    """Deterministic local embedding: hashed bag of tokens, L2-normalized.

    Lowercase the text, split on every character outside [a-z0-9], hash each
    token with FNV-1a 64 over its UTF-8 bytes, increment bucket ``hash % d``,
    then normalize the count vector. Pure function of (text, d).
    """
    if d < 2:
        raise ValidationError(f"embedding dimension must be >= 2, got {d}")
    if not text.strip():
        raise ValidationError("cannot embed empty text")
    tokens = [t for t in _TOKEN_SPLIT.split(text.lower()) if t]
    if not tokens:
        raise ValidationError("text contains no alphanumeric tokens")
    counts = np.zeros(d, dtype=np.float64)
    for token in tokens:
        counts[fnv1a_64(token.encode("utf-8")) % d] += 1.0
    return l2_normalize(counts)


class EmbeddingProvider(Protocol):
    id: str
    dimension: int

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]: ...


class FallbackEmbeddingProvider:
    """Wraps :func:`fallback_embed`; safe for unrestricted concurrent use."""

    def __init__(self, dimension: int = DEFAULT_DIMENSION):
        self.dimension = dimension
        self.id = f"fallback-{dimension}"

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        return [fallback_embed(text, self.dimension) for text in texts]


class RemoteEmbeddingProvider:
    """JSON-over-HTTP embedding client: ``{model, input: [...]}`` in,
    ``{data: [{embedding: [...]}]}`` out."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        dimension: int = DEFAULT_DIMENSION,
        auth_env_var: str | None = None,
        timeout: float = 60.0,
        max_in_flight: int = 4,
        id: str | None = None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.dimension = dimension
        self.auth_env_var = auth_env_var
        self.timeout = timeout
        self.id = id or f"remote:{model}"
        self._semaphore = threading.Semaphore(max_in_flight)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.auth_env_var:
            token = os.environ.get(self.auth_env_var, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        with self._semaphore:
            try:
                response = httpx.post(
                    self.endpoint,
                    json={"model": self.model, "input": texts},
                    headers=self._headers(),
                    timeout=self.timeout,
                )
                response.raise_for_status()
                data = response.json()
            except httpx.HTTPError as exc:
                raise ProviderError(f"embedding provider request failed: {exc}") from exc
        try:
            rows = [item["embedding"] for item in data["data"]]
        except (KeyError, TypeError) as exc:
            raise ProviderError(f"embedding provider returned malformed response: {exc}") from exc
        if len(rows) != len(texts):
            raise ProviderContractError(
                f"embedding provider returned {len(rows)} vectors for {len(texts)} inputs"
            )
        vectors = []
        for row in rows:
            vec = np.asarray(row, dtype=np.float64)
            if vec.shape != (self.dimension,):
                raise ProviderContractError(
                    f"embedding provider returned dimension {vec.shape}, expected ({self.dimension},)"
                )
            vectors.append(vec)
        return vectors


def embed(text: str, provider: EmbeddingProvider, max_chars: int = DEFAULT_MAX_CHARS) -> np.ndarray:
    """Embed one text; long inputs are truncated at the character budget."""
    if not text.strip():
        raise ValidationError("cannot embed empty text")
    if len(text) > max_chars:
        logger.warning("embedding input truncated from %d to %d characters", len(text), max_chars)
        text = text[:max_chars]
    vectors = provider.embed_batch([text])
    if len(vectors) != 1 or vectors[0].shape != (provider.dimension,):
        raise ProviderContractError(
            f"provider {provider.id!r} violated its contract for a single-text batch"
        )
    return vectors[0]


@dataclass
class EmbeddingBatch:
    """Outcome of embedding a corpus: per-entry vectors plus named failures."""

    items: list[tuple[str, np.ndarray]]
    failures: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def embed_corpus(
    corpus: Corpus,
    config: IndexConfig,
    provider: EmbeddingProvider,
    max_chars: int = DEFAULT_MAX_CHARS,
    batch_size: int = 16,
) -> EmbeddingBatch:
    """One normalized vector per entry, ordered by entry id.

    Entries whose embedding input cannot be built (missing description) are
    reported in ``failures`` and do not abort the rest of the batch.
    """
    inputs: list[tuple[str, str]] = []
    failures: dict[str, str] = {}
    for entry in corpus.entries:
        try:
            text = build_embedding_input(entry, config)
        except ConfigurationError as exc:
            failures[entry.id] = str(exc)
            continue
        if len(text) > max_chars:
            logger.warning(
                "embedding input for %s truncated from %d to %d characters",
                entry.id, len(text), max_chars,
            )
            text = text[:max_chars]
        inputs.append((entry.id, text))

    items: list[tuple[str, np.ndarray]] = []
    for start in range(0, len(inputs), batch_size):
        chunk = inputs[start : start + batch_size]
        vectors = provider.embed_batch([text for _, text in chunk])
        for (entry_id, _), vec in zip(chunk, vectors):
            items.append((entry_id, l2_normalize(vec)))

    items.sort(key=lambda pair: pair[0])
    return EmbeddingBatch(items=items, failures=failures)
