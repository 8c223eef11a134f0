"""Corpus of constraint-programming problems: ingestion, validation, persistence.

A corpus is an immutable snapshot of problem entries. Each entry bundles the
model source files for one problem together with optional generated
descriptions at three expertise levels. On disk the corpus is a single
versioned JSON document; the directory layout accepted by
:func:`ingest_directory` is one subdirectory per problem:

    <root>/<problem_id>/*.mzn          model files (at least one)
    <root>/<problem_id>/meta.json      optional {"name": ..., "provenance": ...}
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConflictError, IngestionError, NotFoundError, SchemaError, ValidationError

SCHEMA_VERSION = 1

_ID_RE = re.compile(r"^[a-z0-9_-]+$")


class ExpertiseLevel(enum.IntEnum):
    """Description expertise levels, ordered Novice < Intermediate < Expert."""

    NOVICE = 1
    INTERMEDIATE = 2
    EXPERT = 3

    @property
    def code(self) -> str:
        """Short code used in file formats and config names: D1, D2, D3."""
        return f"D{self.value}"

    @property
    def label(self) -> str:
        return self.name.capitalize()

    @classmethod
    def from_code(cls, code: str) -> "ExpertiseLevel":
        normalized = code.strip().upper()
        for level in cls:
            if normalized in (level.code, level.name):
                return level
        raise ValidationError(f"unknown expertise level {code!r} (expected D1, D2 or D3)")


@dataclass(frozen=True)
class SourceFile:
    filename: str
    content: str


@dataclass(frozen=True)
class ModelEntry:
    """One combinatorial problem: id, source files, optional descriptions."""

    id: str
    name: str
    source_files: tuple[SourceFile, ...]
    descriptions: dict[ExpertiseLevel, str] = field(default_factory=dict)
    provenance: str = "unknown"

    def validate(self) -> None:
        if not self.id or not _ID_RE.match(self.id):
            raise ValidationError(f"invalid entry id {self.id!r}: must match [a-z0-9_-]+")
        if not self.source_files:
            raise ValidationError(f"entry {self.id!r} has no source files")
        for sf in self.source_files:
            if not sf.filename:
                raise ValidationError(f"entry {self.id!r} has a source file without a filename")
            if not sf.content.strip():
                raise ValidationError(f"entry {self.id!r}: source file {sf.filename!r} is empty")
        for level, text in self.descriptions.items():
            if not text.strip():
                raise ValidationError(f"entry {self.id!r}: description {level.code} is empty")

    def description(self, level: ExpertiseLevel) -> str | None:
        return self.descriptions.get(level)

    def with_descriptions(self, updates: dict[ExpertiseLevel, str]) -> "ModelEntry":
        merged = dict(self.descriptions)
        merged.update(updates)
        return replace(self, descriptions=merged)


@dataclass(frozen=True)
class Corpus:
    """Immutable snapshot of entries plus a version bumped on every mutation."""

    entries: tuple[ModelEntry, ...]
    version: int = 1

    def __post_init__(self) -> None:
        ids = [e.id for e in self.entries]
        if len(ids) != len(set(ids)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValidationError(f"duplicate entry ids in corpus: {dupes}")

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> list[str]:
        return [e.id for e in self.entries]

    def get(self, entry_id: str) -> ModelEntry:
        for entry in self.entries:
            if entry.id == entry_id:
                return entry
        raise NotFoundError(f"no entry with id {entry_id!r}")

    def __contains__(self, entry_id: str) -> bool:
        return any(e.id == entry_id for e in self.entries)


def add_entry(corpus: Corpus, entry: ModelEntry) -> Corpus:
    """Return a new corpus containing ``entry``; existing entries untouched."""
    entry.validate()
    if entry.id in corpus:
        raise ConflictError(f"entry id {entry.id!r} already exists in corpus")
    entries = tuple(sorted(corpus.entries + (entry,), key=lambda e: e.id))
    return Corpus(entries=entries, version=corpus.version + 1)


def ingest_directory(root_path: str | Path) -> Corpus:
    """Build a corpus from a directory tree, one subdirectory per problem.

    Deterministic: source files sorted by filename, entries by id. Missing
    meta.json falls back to name = id, provenance = "unknown".
    """
    root = Path(root_path)
    if not root.exists():
        raise IngestionError(f"corpus root {root} does not exist")
    if not root.is_dir():
        raise IngestionError(f"corpus root {root} is not a directory")

    entries: list[ModelEntry] = []
    try:
        subdirs = sorted(p for p in root.iterdir() if p.is_dir() and not p.name.startswith("."))
    except OSError as exc:
        raise IngestionError(f"cannot read corpus root {root}: {exc}") from exc

    for subdir in subdirs:
        entry_id = subdir.name
        model_files = sorted(subdir.glob("*.mzn"), key=lambda p: p.name)
        if not model_files:
            raise ValidationError(f"problem directory {subdir} contains no .mzn model files")
        sources = []
        for path in model_files:
            try:
                content = path.read_text(encoding="utf-8")
            except UnicodeDecodeError as exc:
                raise ValidationError(f"model file {path} is not valid UTF-8: {exc}") from exc
            except OSError as exc:
                raise IngestionError(f"cannot read model file {path}: {exc}") from exc
            sources.append(SourceFile(filename=path.name, content=content))

        name, provenance = entry_id, "unknown"
        meta_path = subdir / "meta.json"
        if meta_path.exists():
            try:
                meta = json.loads(meta_path.read_text(encoding="utf-8"))
            except (OSError, ValueError) as exc:
                raise ValidationError(f"cannot parse {meta_path}: {exc}") from exc
            name = meta.get("name", entry_id)
            provenance = meta.get("provenance", "unknown")

        entry = ModelEntry(id=entry_id, name=name, source_files=tuple(sources), provenance=provenance)
        entry.validate()
        entries.append(entry)

    return Corpus(entries=tuple(sorted(entries, key=lambda e: e.id)), version=1)


def corpus_to_dict(corpus: Corpus) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "version": corpus.version,
        "entries": [
            {
                "id": e.id,
                "name": e.name,
                "provenance": e.provenance,
                "source_files": [{"filename": sf.filename, "content": sf.content} for sf in e.source_files],
                "descriptions": {level.code: text for level, text in sorted(e.descriptions.items())},
            }
            for e in corpus.entries
        ],
    }


def corpus_from_dict(data: dict) -> Corpus:
    if not isinstance(data, dict):
        raise SchemaError("corpus document must be a JSON object")
    schema = data.get("schema_version")
    if schema != SCHEMA_VERSION:
        raise SchemaError(f"unsupported corpus schema_version {schema!r} (expected {SCHEMA_VERSION})")
    entries = []
    for raw in data.get("entries", []):
        entry = ModelEntry(
            id=raw["id"],
            name=raw.get("name", raw["id"]),
            provenance=raw.get("provenance", "unknown"),
            source_files=tuple(
                SourceFile(filename=f["filename"], content=f["content"]) for f in raw["source_files"]
            ),
            descriptions={
                ExpertiseLevel.from_code(code): text for code, text in raw.get("descriptions", {}).items()
            },
        )
        entry.validate()
        entries.append(entry)
    return Corpus(entries=tuple(entries), version=int(data.get("version", 1)))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write the corpus as canonical JSON (stable key order, UTF-8)."""
    payload = json.dumps(corpus_to_dict(corpus), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    Path(path).write_text(payload, encoding="utf-8")


def load_corpus(path: str | Path) -> Corpus:
    p = Path(path)
    if not p.exists():
        raise NotFoundError(f"corpus file {p} does not exist")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise SchemaError(f"corpus file {p} is not valid JSON: {exc}") from exc
    return corpus_from_dict(data)
