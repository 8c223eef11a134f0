"""Prompt templates, rendering, and description generation."""

from __future__ import annotations

import pytest

from cpsearch.corpus import ExpertiseLevel
from cpsearch.descriptions import (
    PLACEHOLDER,
    DescriptionGenerator,
    GenerationRequest,
    PromptTemplate,
    StubTextProvider,
    builtin_template,
    render_prompt,
    source_code_blob,
)
from cpsearch.errors import GenerationError, ProviderError, ValidationError

from conftest import GOLDEN_PROMPTS_DIR, make_entry

GOLDEN_FILES = {
    ExpertiseLevel.NOVICE: "novice.txt",
    ExpertiseLevel.INTERMEDIATE: "intermediate.txt",
    ExpertiseLevel.EXPERT: "expert.txt",
}


class FlakyProvider:
    """Fails with a transport error the first ``failures`` calls, then succeeds."""

    id = "flaky"

    def __init__(self, failures: int, text: str = "recovered"):
        self.remaining_failures = failures
        self.text = text
        self.calls = 0

    def generate(self, request: GenerationRequest) -> str:
        self.calls += 1
        if self.remaining_failures > 0:
            self.remaining_failures -= 1
            raise ProviderError("connection reset")
        return self.text


class TestTemplateFidelity:
    @pytest.mark.parametrize("level", list(ExpertiseLevel))
    def test_builtin_matches_golden_bytes(self, level):
        golden = (GOLDEN_PROMPTS_DIR / GOLDEN_FILES[level]).read_bytes()
        assert builtin_template(level).template_text.encode("utf-8") == golden

    @pytest.mark.parametrize("level", list(ExpertiseLevel))
    def test_single_placeholder(self, level):
        assert builtin_template(level).template_text.count(PLACEHOLDER) == 1

    @pytest.mark.parametrize("level", list(ExpertiseLevel))
    def test_render_differs_only_at_placeholder(self, level):
        golden = (GOLDEN_PROMPTS_DIR / GOLDEN_FILES[level]).read_text(encoding="utf-8")
        rendered = builtin_template(level).render("X")
        assert rendered == golden.replace(PLACEHOLDER, "X")

    def test_template_without_placeholder_rejected(self):
        broken = PromptTemplate(level=ExpertiseLevel.NOVICE, template_text="no slot here")
        with pytest.raises(ValidationError):
            broken.render("code")

    def test_template_with_two_placeholders_rejected(self):
        broken = PromptTemplate(
            level=ExpertiseLevel.NOVICE, template_text=f"{PLACEHOLDER} and {PLACEHOLDER}"
        )
        with pytest.raises(ValidationError):
            broken.render("code")


class TestRenderPrompt:
    def test_source_inlined(self):
        entry = make_entry("knapsack", files={"knapsack.mzn": "solve maximize profit;"})
        rendered = render_prompt(entry, ExpertiseLevel.NOVICE)
        assert "% file: knapsack.mzn\nsolve maximize profit;" in rendered
        assert PLACEHOLDER not in rendered

    def test_multi_file_order_and_headers(self):
        entry = make_entry("steel_mill", files={"b.mzn": "second", "a.mzn": "first"})
        blob = source_code_blob(entry)
        assert blob == "% file: a.mzn\nfirst\n% file: b.mzn\nsecond"
        rendered = render_prompt(entry, ExpertiseLevel.EXPERT)
        assert rendered.index("a.mzn") < rendered.index("b.mzn")


class TestGenerate:
    def test_stub_canned_text_returned_trimmed(self):
        entry = make_entry("knapsack")
        provider = StubTextProvider(canned={("knapsack", ExpertiseLevel.EXPERT): "  fixed text \n"})
        result = DescriptionGenerator(provider).generate(entry, ExpertiseLevel.EXPERT)
        assert result.text == "fixed text"
        assert result.provider_id == "stub"
        assert len(result.prompt_digest) == 64

    def test_cache_prevents_second_call(self):
        entry = make_entry("knapsack")
        provider = StubTextProvider()
        generator = DescriptionGenerator(provider)
        first = generator.generate(entry, ExpertiseLevel.NOVICE)
        second = generator.generate(entry, ExpertiseLevel.NOVICE)
        assert provider.calls == 1
        assert first.text == second.text

    def test_changed_source_misses_cache(self):
        provider = StubTextProvider()
        generator = DescriptionGenerator(provider)
        generator.generate(make_entry("knapsack", files={"k.mzn": "v1"}), ExpertiseLevel.NOVICE)
        generator.generate(make_entry("knapsack", files={"k.mzn": "v2"}), ExpertiseLevel.NOVICE)
        assert provider.calls == 2

    def test_empty_output_is_generation_error(self):
        provider = StubTextProvider(canned={("knapsack", ExpertiseLevel.NOVICE): "   "})
        generator = DescriptionGenerator(provider)
        with pytest.raises(GenerationError):
            generator.generate(make_entry("knapsack"), ExpertiseLevel.NOVICE)

    def test_transport_failure_retried_then_succeeds(self):
        provider = FlakyProvider(failures=2)
        generator = DescriptionGenerator(provider, backoff_start=0.0)
        result = generator.generate(make_entry("knapsack"), ExpertiseLevel.NOVICE)
        assert result.text == "recovered"
        assert provider.calls == 3

    def test_transport_failure_exhausts_attempts(self):
        provider = FlakyProvider(failures=99)
        generator = DescriptionGenerator(provider, max_attempts=3, backoff_start=0.0)
        with pytest.raises(ProviderError) as excinfo:
            generator.generate(make_entry("knapsack"), ExpertiseLevel.NOVICE)
        assert excinfo.value.attempts == 3
        assert provider.calls == 3


class TestGenerateAll:
    def test_counts_and_population(self, two_entry_corpus):
        bare = two_entry_corpus
        stripped = type(bare)(
            entries=tuple(type(e)(id=e.id, name=e.name, source_files=e.source_files) for e in bare.entries),
            version=1,
        )
        provider = StubTextProvider()
        report = DescriptionGenerator(provider).generate_all(
            stripped, [ExpertiseLevel.NOVICE, ExpertiseLevel.INTERMEDIATE]
        )
        assert provider.calls == 4
        assert report.generated == 4
        for entry in report.corpus.entries:
            assert entry.description(ExpertiseLevel.NOVICE) is not None
            assert entry.description(ExpertiseLevel.INTERMEDIATE) is not None
        assert report.corpus.version == stripped.version + 1

    def test_rerun_without_force_makes_no_calls(self, two_entry_corpus):
        provider = StubTextProvider()
        generator = DescriptionGenerator(provider)
        report = generator.generate_all(two_entry_corpus, list(ExpertiseLevel))
        assert provider.calls == 0
        assert report.generated == 0
        assert report.skipped == 6
        assert report.corpus == two_entry_corpus

    def test_force_regenerates(self, two_entry_corpus):
        provider = StubTextProvider()
        report = DescriptionGenerator(provider).generate_all(
            two_entry_corpus, [ExpertiseLevel.NOVICE], force=True
        )
        assert provider.calls == 2
        assert report.generated == 2

    def test_partial_failure_keeps_other_entries(self, two_entry_corpus):
        stripped = type(two_entry_corpus)(
            entries=tuple(
                type(e)(id=e.id, name=e.name, source_files=e.source_files)
                for e in two_entry_corpus.entries
            ),
            version=1,
        )

        class OneBadApple:
            id = "selective"

            def generate(self, request: GenerationRequest) -> str:
                if request.entry_id == "queens":
                    raise ProviderError("boom")
                return "ok text"

        generator = DescriptionGenerator(OneBadApple(), max_attempts=1, backoff_start=0.0)
        report = generator.generate_all(stripped, [ExpertiseLevel.NOVICE])
        assert list(report.failures) == ["queens/D1"]
        assert report.corpus.get("knapsack").description(ExpertiseLevel.NOVICE) == "ok text"
        assert report.corpus.get("queens").description(ExpertiseLevel.NOVICE) is None

    def test_idempotent_with_deterministic_provider(self, two_entry_corpus):
        stripped = type(two_entry_corpus)(
            entries=tuple(
                type(e)(id=e.id, name=e.name, source_files=e.source_files)
                for e in two_entry_corpus.entries
            ),
            version=1,
        )
        first = DescriptionGenerator(StubTextProvider()).generate_all(stripped, list(ExpertiseLevel))
        second = DescriptionGenerator(StubTextProvider()).generate_all(stripped, list(ExpertiseLevel))
        assert first.corpus == second.corpus
        rerun = DescriptionGenerator(StubTextProvider()).generate_all(first.corpus, list(ExpertiseLevel))
        assert rerun.corpus == first.corpus
