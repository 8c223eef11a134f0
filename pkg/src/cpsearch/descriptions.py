"""Generate Novice/Intermediate/Expert descriptions of model source code.

The three built-in prompt templates live under ``cpsearch/prompts/`` and are
treated as immutable: tests compare them byte-for-byte against golden copies.
Generation goes through a pluggable provider so the actual LLM (or a
deterministic stub) is configuration, not code. Results are cached by the
digest of the rendered prompt, so editing a template or a source file
invalidates exactly the affected generations.
"""

from __future__ import annotations

import hashlib
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Protocol

import httpx

from .corpus import Corpus, ExpertiseLevel, ModelEntry
from .errors import GenerationError, ProviderError, ValidationError

PLACEHOLDER = "{source_code}"

_TEMPLATE_FILES = {
    ExpertiseLevel.NOVICE: "novice.txt",
    ExpertiseLevel.INTERMEDIATE: "intermediate.txt",
    ExpertiseLevel.EXPERT: "expert.txt",
}


def source_code_blob(entry: ModelEntry) -> str:
    """All source files in canonical order, each preceded by a `% file:` line."""
    blocks = [f"% file: {sf.filename}\n{sf.content.rstrip()}" for sf in entry.source_files]
    return "\n".join(blocks)


@dataclass(frozen=True)
class PromptTemplate:
    level: ExpertiseLevel
    template_text: str

    def validate(self) -> None:
        count = self.template_text.count(PLACEHOLDER)
        if count != 1:
            raise ValidationError(
                f"{self.level.label} template must contain {PLACEHOLDER} exactly once, found {count}"
            )

    def render(self, source_code: str) -> str:
        self.validate()
        return self.template_text.replace(PLACEHOLDER, source_code)


def builtin_template(level: ExpertiseLevel) -> PromptTemplate:
    """Load the shipped template for a level from package data."""
    text = (resources.files("cpsearch") / "prompts" / _TEMPLATE_FILES[level]).read_text(encoding="utf-8")
    return PromptTemplate(level=level, template_text=text)


def render_prompt(entry: ModelEntry, level: ExpertiseLevel, template: PromptTemplate | None = None) -> str:
    """Render the level's prompt with the entry's source code inlined."""
    tpl = template if template is not None else builtin_template(level)
    return tpl.render(source_code_blob(entry))


@dataclass(frozen=True)
class GenerationRequest:
    entry_id: str
    level: ExpertiseLevel
    prompt: str
    provider_id: str


@dataclass(frozen=True)
class GenerationResult:
    text: str
    provider_id: str
    timestamp: float
    prompt_digest: str


class TextGenerationProvider(Protocol):
    id: str

    def generate(self, request: GenerationRequest) -> str: ...


class StubTextProvider:
    """Deterministic in-memory provider for tests and offline pipelines.

    Returns ``canned[(entry_id, level)]`` when present, otherwise a short
    deterministic text derived from the prompt digest. Counts calls so tests
    can assert cache behaviour.
    """

    def __init__(self, canned: dict[tuple[str, ExpertiseLevel], str] | None = None, id: str = "stub"):
        self.id = id
        self.canned = canned or {}
        self.calls = 0
        self._lock = threading.Lock()

    def generate(self, request: GenerationRequest) -> str:
        with self._lock:
            self.calls += 1
        key = (request.entry_id, request.level)
        if key in self.canned:
            return self.canned[key]
        digest = hashlib.sha256(request.prompt.encode("utf-8")).hexdigest()[:12]
        return f"{request.level.label} description of {request.entry_id} ({digest})"


class RemoteChatProvider:
    """JSON-over-HTTP chat-completion client.

    Sends ``{model, messages: [{role: "user", content: prompt}], temperature}``
    and reads ``choices[0].message.content``. The auth token comes from the
    environment variable named in the constructor; a single attempt is made
    here, retries live in :class:`DescriptionGenerator`.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        auth_env_var: str | None = None,
        temperature: float = 0.0,
        timeout: float = 60.0,
        id: str | None = None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.auth_env_var = auth_env_var
        self.temperature = temperature
        self.timeout = timeout
        self.id = id or f"chat:{model}"

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.auth_env_var:
            token = os.environ.get(self.auth_env_var, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def generate(self, request: GenerationRequest) -> str:
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": self.temperature,
        }
        try:
            response = httpx.post(self.endpoint, json=body, headers=self._headers(), timeout=self.timeout)
            response.raise_for_status()
            data = response.json()
        except httpx.HTTPError as exc:
            raise ProviderError(f"chat provider request failed: {exc}") from exc
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"chat provider returned malformed response: {exc}") from exc


@dataclass
class GenerateAllReport:
    corpus: Corpus
    generated: int
    skipped: int
    failures: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


class DescriptionGenerator:
    """Caching, retrying front-end to a text-generation provider."""

    def __init__(
        self,
        provider: TextGenerationProvider,
        max_attempts: int = 3,
        backoff_start: float = 1.0,
        parallelism: int = 4,
    ):
        self.provider = provider
        self.max_attempts = max_attempts
        self.backoff_start = backoff_start
        self.parallelism = parallelism
        self._cache: dict[tuple[str, str, str], GenerationResult] = {}
        self._cache_lock = threading.Lock()
        self._inflight: dict[tuple[str, str, str], threading.Lock] = {}

    def generate(
        self, entry: ModelEntry, level: ExpertiseLevel, template: PromptTemplate | None = None
    ) -> GenerationResult:
        """Generate (or fetch from cache) one description."""
        prompt = render_prompt(entry, level, template)
        digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
        key = (entry.id, level.code, digest)

        with self._cache_lock:
            cached = self._cache.get(key)
            if cached is not None:
                return cached
            flight = self._inflight.setdefault(key, threading.Lock())

        with flight:
            with self._cache_lock:
                cached = self._cache.get(key)
                if cached is not None:
                    return cached
            result = self._call_provider(GenerationRequest(entry.id, level, prompt, self.provider.id), digest)
            with self._cache_lock:
                self._cache[key] = result
                self._inflight.pop(key, None)
            return result

    def _call_provider(self, request: GenerationRequest, digest: str) -> GenerationResult:
        last_error: ProviderError | None = None
        for attempt in range(1, self.max_attempts + 1):
            try:
                raw = self.provider.generate(request)
            except ProviderError as exc:
                last_error = exc
                if attempt < self.max_attempts:
                    time.sleep(self.backoff_start * 2 ** (attempt - 1))
                continue
            text = raw.strip()
            if not text:
                raise GenerationError(
                    f"provider {self.provider.id!r} returned empty output for "
                    f"{request.entry_id}/{request.level.code}"
                )
            return GenerationResult(
                text=text, provider_id=self.provider.id, timestamp=time.time(), prompt_digest=digest
            )
        raise ProviderError(
            f"provider {self.provider.id!r} failed after {self.max_attempts} attempts: {last_error}",
            attempts=self.max_attempts,
        )

    def generate_all(
        self, corpus: Corpus, levels: list[ExpertiseLevel], force: bool = False
    ) -> GenerateAllReport:
        """Fill in missing descriptions for every entry; keep existing unless forced.

        Per-entry failures are collected, not raised: successfully generated
        descriptions still land in the returned corpus.
        """
        tasks = []
        skipped = 0
        for entry in corpus.entries:
            for level in sorted(levels):
                if not force and entry.description(level) is not None:
                    skipped += 1
                    continue
                tasks.append((entry, level))

        results: dict[tuple[str, ExpertiseLevel], str] = {}
        failures: dict[str, str] = {}
        if tasks:
            with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
                futures = {pool.submit(self.generate, entry, level): (entry, level) for entry, level in tasks}
                for future, (entry, level) in futures.items():
                    try:
                        results[(entry.id, level)] = future.result().text
                    except Exception as exc:
                        failures[f"{entry.id}/{level.code}"] = str(exc)

        if not results:
            return GenerateAllReport(corpus=corpus, generated=0, skipped=skipped, failures=failures)

        new_entries = []
        for entry in corpus.entries:
            updates = {
                level: text for (entry_id, level), text in results.items() if entry_id == entry.id
            }
            new_entries.append(entry.with_descriptions(updates) if updates else entry)
        new_corpus = Corpus(entries=tuple(new_entries), version=corpus.version + 1)
        return GenerateAllReport(corpus=new_corpus, generated=len(results), skipped=skipped, failures=failures)
