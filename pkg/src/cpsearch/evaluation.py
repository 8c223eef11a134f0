"""Leave-one-out retrieval evaluation with mean reciprocal rank.

Query sets come in two kinds: generated description levels (D1/D2/D3, where
the truth is the entry the description was generated from) and external
human-written sets loaded from JSON. A generated level must not be queried
against an index configuration that embeds that same level; those cells are
inadmissible and rendered as dashes.

MRR convention: reciprocal rank is 0 when the true entry ranks outside the
top-k (k is configurable, so full-ranking MRR is obtained with k = N).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus, ExpertiseLevel
from .embedding import EmbeddingProvider, IndexConfig, all_configs, embed
from .errors import (
    ConfigurationError,
    LooViolationError,
    NotFoundError,
    PartialFailureError,
    ProviderError,
    SchemaError,
    ValidationError,
)
from .index import build_index, query_top_k, rank_of

RR_CONVENTION = "reciprocal rank is 0 when the true entry ranks outside the top-k"

# Dash cells of the published results table, keyed by generated-level row.
# Custom/external rows have no dashes. Kept as data so any divergence between
# the admissibility rule and the published layout is flagged, never hidden.
PUBLISHED_DASHES: dict[str, frozenset[str]] = {
    "D1": frozenset({"SC+D1", "SC+D1&2", "SC+D1&3", "SC+D1&2&3"}),
    "D2": frozenset({"SC+D2", "SC+D1&2", "SC+D2&3", "SC+D1&2&3"}),
    "D3": frozenset({"SC+D3", "SC+D1&3", "SC+D2&3", "SC+D1&2&3"}),
}


@dataclass(frozen=True)
class Query:
    text: str
    truth_id: str | None = None


@dataclass(frozen=True)
class QuerySet:
    """Named list of queries; ``level`` is set for generated-description sets."""

    name: str
    queries: tuple[Query, ...]
    level: ExpertiseLevel | None = None


def make_level_query_set(corpus: Corpus, level: ExpertiseLevel) -> QuerySet:
    """Queries are the corpus's descriptions at ``level``; truth is the owning entry."""
    queries = tuple(
        Query(text=entry.description(level), truth_id=entry.id)
        for entry in corpus.entries
        if entry.description(level) is not None
    )
    if not queries:
        raise ConfigurationError(f"no entry in the corpus has a {level.label} ({level.code}) description")
    return QuerySet(name=level.code, queries=queries, level=level)


def load_query_set(path: str | Path) -> QuerySet:
    """Load an external query set: {"name": ..., "queries": [{"text", "truth_id"}]}."""
    p = Path(path)
    if not p.exists():
        raise NotFoundError(f"query set file {p} does not exist")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise SchemaError(f"query set file {p} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "queries" not in data:
        raise SchemaError(f"query set file {p} must be an object with a 'queries' list")
    queries = tuple(
        Query(text=q["text"], truth_id=q.get("truth_id")) for q in data["queries"]
    )
    return QuerySet(name=data.get("name", p.stem), queries=queries, level=None)


def reciprocal_rank(rank: int | None, k: int = 5) -> float:
    """1/rank when the truth landed in the top-k, else 0."""
    if rank is None or rank > k:
        return 0.0
    if rank < 1:
        raise ValidationError(f"rank must be >= 1, got {rank}")
    return 1.0 / rank


def mean_reciprocal_rank(ranks: list[int | None], k: int = 5) -> float:
    if not ranks:
        raise ValidationError("cannot compute MRR of an empty rank list")
    return sum(reciprocal_rank(r, k) for r in ranks) / len(ranks)


def loo_admissible(query_set: QuerySet, config: IndexConfig) -> bool:
    """False iff the query set is a generated level contained in the configuration."""
    if query_set.level is None:
        return True
    return query_set.level not in config.levels


@dataclass
class EvaluationCell:
    query_set: str
    config: str
    status: str  # "ok" | "partial" | "inadmissible" | "unavailable"
    mrr: float | None = None
    n_queries: int = 0
    ranks: list[int | None] = field(default_factory=list)
    unresolved: list[dict] = field(default_factory=list)
    failures: dict[str, str] = field(default_factory=dict)
    reason: str | None = None

    def to_dict(self) -> dict:
        doc: dict = {
            "query_set": self.query_set,
            "config": self.config,
            "status": self.status,
            "mrr": self.mrr,
            "n_queries": self.n_queries,
            "ranks": self.ranks,
            "unresolved": self.unresolved,
        }
        if self.failures:
            doc["failures"] = self.failures
        if self.reason is not None:
            doc["reason"] = self.reason
        return doc


def run_cell(
    corpus: Corpus,
    query_set: QuerySet,
    config: IndexConfig,
    provider: EmbeddingProvider,
    k: int = 5,
) -> EvaluationCell:
    """Evaluate one (query set, configuration) pair.

    Truth-bearing queries whose truth is present in the index contribute to
    MRR; queries without a resolvable truth are excluded from MRR but their
    full top-k lists are recorded. Per-query provider failures mark the cell
    partial instead of aborting it.
    """
    if not loo_admissible(query_set, config):
        raise LooViolationError(
            f"query set {query_set.name} must not be evaluated against configuration "
            f"{config.name}: the configuration embeds that description level"
        )
    index = build_index(corpus, config, provider, strict=True)

    ranks: list[int | None] = []
    unresolved: list[dict] = []
    failures: dict[str, str] = {}
    for position, query in enumerate(query_set.queries):
        try:
            query_vector = embed(query.text, provider)
        except (ProviderError, ValidationError) as exc:
            failures[f"query[{position}]"] = str(exc)
            continue
        if query.truth_id is not None and query.truth_id in index.entry_ids:
            ranks.append(rank_of(index, query_vector, query.truth_id))
        else:
            top = query_top_k(index, query_vector, k)
            unresolved.append(
                {
                    "query_index": position,
                    "truth_id": query.truth_id,
                    "top_k": [
                        {"entry_id": r.entry_id, "score": r.score, "rank": r.rank} for r in top
                    ],
                }
            )

    mrr = mean_reciprocal_rank(ranks, k) if ranks else None
    return EvaluationCell(
        query_set=query_set.name,
        config=config.name,
        status="partial" if failures else "ok",
        mrr=mrr,
        n_queries=len(ranks),
        ranks=ranks,
        unresolved=unresolved,
        failures=failures,
    )


@dataclass
class EvaluationReport:
    rows: list[str]
    configs: list[str]
    cells: list[EvaluationCell]
    provider_id: str
    k: int
    timestamp: float
    rr_convention: str = RR_CONVENTION
    dash_divergences: list[dict] = field(default_factory=list)

    def cell(self, query_set: str, config: str) -> EvaluationCell:
        for c in self.cells:
            if c.query_set == query_set and c.config == config:
                return c
        raise NotFoundError(f"no cell for ({query_set}, {config})")

    def to_dict(self) -> dict:
        return {
            "metadata": {
                "provider_id": self.provider_id,
                "k": self.k,
                "timestamp": self.timestamp,
                "rr_convention": self.rr_convention,
                "rows": self.rows,
                "configs": self.configs,
                "dash_divergences": self.dash_divergences,
            },
            "cells": [c.to_dict() for c in self.cells],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def dash_divergences(rows: list[QuerySet], configs: list[IndexConfig]) -> list[dict]:
    """Cells where the admissibility rule disagrees with the published dash layout."""
    divergences = []
    for query_set in rows:
        published = PUBLISHED_DASHES.get(query_set.name, frozenset())
        for config in configs:
            rule_dash = not loo_admissible(query_set, config)
            published_dash = config.name in published
            if rule_dash != published_dash:
                divergences.append(
                    {
                        "query_set": query_set.name,
                        "config": config.name,
                        "rule": "dash" if rule_dash else "value",
                        "published": "dash" if published_dash else "value",
                    }
                )
    return divergences


def run_table(
    corpus: Corpus,
    provider: EmbeddingProvider,
    k: int = 5,
    levels: list[ExpertiseLevel] | None = None,
    external: QuerySet | None = None,
) -> EvaluationReport:
    """Evaluate every admissible (query set, configuration) cell.

    Rows default to the three generated levels plus the external set when
    given. Inadmissible cells are marked as such (dashes in the rendered
    table); cells whose index or query set cannot be built are marked
    unavailable with the reason.
    """
    configs = all_configs()
    row_sets: list[QuerySet] = []
    row_errors: dict[str, str] = {}
    for level in levels if levels is not None else list(ExpertiseLevel):
        try:
            row_sets.append(make_level_query_set(corpus, level))
        except ConfigurationError as exc:
            row_sets.append(QuerySet(name=level.code, queries=(), level=level))
            row_errors[level.code] = str(exc)
    if external is not None:
        row_sets.append(external)

    cells: list[EvaluationCell] = []
    for query_set in row_sets:
        for config in configs:
            if not loo_admissible(query_set, config):
                cells.append(
                    EvaluationCell(query_set=query_set.name, config=config.name, status="inadmissible")
                )
                continue
            if query_set.name in row_errors:
                cells.append(
                    EvaluationCell(
                        query_set=query_set.name,
                        config=config.name,
                        status="unavailable",
                        reason=row_errors[query_set.name],
                    )
                )
                continue
            try:
                cells.append(run_cell(corpus, query_set, config, provider, k))
            except (ConfigurationError, PartialFailureError) as exc:
                cells.append(
                    EvaluationCell(
                        query_set=query_set.name,
                        config=config.name,
                        status="unavailable",
                        reason=str(exc),
                    )
                )

    return EvaluationReport(
        rows=[qs.name for qs in row_sets],
        configs=[c.name for c in configs],
        cells=cells,
        provider_id=provider.id,
        k=k,
        timestamp=time.time(),
        dash_divergences=dash_divergences(row_sets, configs),
    )


def render_text_table(report: EvaluationReport) -> str:
    """Aligned text table, one row per query set; inadmissible cells are dashes."""
    headers = ["Query"] + report.configs
    table_rows = []
    for row_name in report.rows:
        rendered = [row_name]
        for config_name in report.configs:
            cell = report.cell(row_name, config_name)
            if cell.status == "inadmissible":
                rendered.append("-")
            elif cell.status == "unavailable":
                rendered.append("n/a")
            elif cell.mrr is None:
                rendered.append("(no truth)")
            else:
                value = f"{cell.mrr:.4f}"
                rendered.append(value + "*" if cell.status == "partial" else value)
        table_rows.append(rendered)

    widths = [max(len(r[i]) for r in [headers] + table_rows) for i in range(len(headers))]
    lines = []
    for row in [headers] + table_rows:
        lines.append("  ".join(col.ljust(widths[i]) for i, col in enumerate(row)).rstrip())
    if any(c.status == "partial" for c in report.cells):
        lines.append("* cell evaluated with per-query failures; see JSON report")
    return "\n".join(lines) + "\n"
