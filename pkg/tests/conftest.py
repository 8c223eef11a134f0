"""Shared fixtures: the frozen 10-problem corpus and small synthetic corpora."""

from __future__ import annotations

from pathlib import Path

import pytest

from cpsearch.corpus import Corpus, ExpertiseLevel, ModelEntry, SourceFile, load_corpus
from cpsearch.embedding import FallbackEmbeddingProvider
from cpsearch.evaluation import QuerySet, load_query_set

DATA_DIR = Path(__file__).parent / "data"

FIXTURE_CORPUS_PATH = DATA_DIR / "fixture_corpus.json"
FIXTURE_QUERIES_PATH = DATA_DIR / "fixture_queries.json"
GOLDEN_PROMPTS_DIR = DATA_DIR / "golden_prompts"


@pytest.fixture(scope="session")
def fixture_corpus() -> Corpus:
    return load_corpus(FIXTURE_CORPUS_PATH)


@pytest.fixture(scope="session")
def paraphrase_queries() -> QuerySet:
    return load_query_set(FIXTURE_QUERIES_PATH)


@pytest.fixture(scope="session")
def fallback_768() -> FallbackEmbeddingProvider:
    return FallbackEmbeddingProvider(dimension=768)


def make_entry(
    entry_id: str = "knapsack",
    files: dict[str, str] | None = None,
    descriptions: dict[ExpertiseLevel, str] | None = None,
) -> ModelEntry:
    if files is None:
        files = {f"{entry_id}.mzn": f"% model for {entry_id}\nsolve satisfy;\n"}
    return ModelEntry(
        id=entry_id,
        name=entry_id.replace("_", " ").title(),
        source_files=tuple(SourceFile(filename=fn, content=c) for fn, c in sorted(files.items())),
        descriptions=descriptions or {},
    )


@pytest.fixture
def two_entry_corpus() -> Corpus:
    full = {
        ExpertiseLevel.NOVICE: "a very simple story about packing",
        ExpertiseLevel.INTERMEDIATE: "a binary selection under a capacity bound",
        ExpertiseLevel.EXPERT: "maximize sum p_i x_i subject to sum w_i x_i <= c",
    }
    entries = (
        make_entry("knapsack", descriptions=dict(full)),
        make_entry(
            "queens",
            files={"queens.mzn": "% queens on a board\nconstraint alldifferent(q);\nsolve satisfy;\n"},
            descriptions={
                ExpertiseLevel.NOVICE: "place pieces so none attack",
                ExpertiseLevel.INTERMEDIATE: "alldifferent over columns and diagonals",
                ExpertiseLevel.EXPERT: "forall i<j: q_i != q_j and |q_i - q_j| != j - i",
            },
        ),
    )
    return Corpus(entries=entries, version=1)


def write_corpus_tree(root: Path, problems: dict[str, dict[str, str]]) -> Path:
    """Materialize an ingestible directory tree: {problem_id: {filename: content}}."""
    for problem_id, files in problems.items():
        directory = root / problem_id
        directory.mkdir(parents=True)
        for filename, content in files.items():
            (directory / filename).write_text(content, encoding="utf-8")
    return root
