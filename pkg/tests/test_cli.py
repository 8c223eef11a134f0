"""CLI subcommands, output formats, and exit codes."""

from __future__ import annotations

import json

import pytest

from cpsearch.cli import main

from conftest import FIXTURE_CORPUS_PATH, FIXTURE_QUERIES_PATH, write_corpus_tree

TWO_PROBLEMS = {
    "knapsack": {"knapsack.mzn": "% pack items under a weight capacity\nsolve maximize profit;\n"},
    "queens": {"queens.mzn": "% place queens on a chessboard\nsolve satisfy;\n"},
}


@pytest.fixture
def tree(tmp_path):
    return write_corpus_tree(tmp_path / "models", TWO_PROBLEMS)


@pytest.fixture
def corpus_file(tree, tmp_path):
    out = tmp_path / "corpus.json"
    assert main(["ingest", str(tree), "--out", str(out)]) == 0
    return out


@pytest.fixture
def described_corpus(corpus_file):
    assert main(["describe", "--corpus", str(corpus_file), "--levels", "D1,D2,D3"]) == 0
    return corpus_file


class TestIngest:
    def test_reports_entry_count(self, tree, tmp_path, capsys):
        out = tmp_path / "corpus.json"
        assert main(["ingest", str(tree), "--out", str(out)]) == 0
        assert "ingested 2 entries" in capsys.readouterr().out
        assert out.exists()

    def test_json_output(self, tree, tmp_path, capsys):
        out = tmp_path / "corpus.json"
        assert main(["ingest", str(tree), "--out", str(out), "--json"]) == 0
        body = json.loads(capsys.readouterr().out)
        assert body["entries"] == 2
        assert body["ids"] == ["knapsack", "queens"]

    def test_missing_root_exits_1(self, tmp_path, capsys):
        assert main(["ingest", str(tmp_path / "nope"), "--out", str(tmp_path / "c.json")]) == 1
        assert "error" in capsys.readouterr().err


class TestDescribe:
    def test_populates_levels(self, corpus_file, capsys):
        assert main(["describe", "--corpus", str(corpus_file), "--levels", "D1,D2"]) == 0
        assert "generated 4 descriptions" in capsys.readouterr().out
        doc = json.loads(corpus_file.read_text())
        for entry in doc["entries"]:
            assert set(entry["descriptions"]) == {"D1", "D2"}

    def test_rerun_is_idempotent(self, corpus_file, capsys):
        assert main(["describe", "--corpus", str(corpus_file), "--levels", "D1"]) == 0
        first = corpus_file.read_bytes()
        assert main(["describe", "--corpus", str(corpus_file), "--levels", "D1"]) == 0
        assert "generated 0 descriptions" in capsys.readouterr().out
        assert corpus_file.read_bytes() == first


class TestEmbedAndQuery:
    def test_embed_writes_index(self, described_corpus, tmp_path, capsys):
        index_path = tmp_path / "index.json"
        code = main([
            "embed", "--corpus", str(described_corpus), "--config", "SC+D2",
            "--out", str(index_path),
        ])
        assert code == 0
        assert "embedded 2 entries under SC+D2" in capsys.readouterr().out
        doc = json.loads(index_path.read_text())
        assert doc["config_name"] == "SC+D2"
        assert len(doc["items"]) == 2

    def test_query_prints_ranked_lines(self, described_corpus, tmp_path, capsys):
        index_path = tmp_path / "index.json"
        main(["embed", "--corpus", str(described_corpus), "--out", str(index_path)])
        capsys.readouterr()
        code = main([
            "query", "pack items into a weight-limited bag",
            "--index", str(index_path), "--provider", "fallback", "-k", "2",
        ])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("1. knapsack (")
        assert lines[1].startswith("2. queens (")

    def test_query_json_round_trips(self, described_corpus, tmp_path, capsys):
        index_path = tmp_path / "index.json"
        main(["embed", "--corpus", str(described_corpus), "--out", str(index_path)])
        capsys.readouterr()
        assert main([
            "query", "queens on a chessboard", "--index", str(index_path), "--json",
        ]) == 0
        body = json.loads(capsys.readouterr().out)
        assert body["results"][0]["entry_id"] == "queens"

    def test_missing_index_exits_1(self, tmp_path):
        assert main(["query", "anything", "--index", str(tmp_path / "none.json")]) == 1


class TestEval:
    def test_table_with_dashes(self, capsys):
        code = main([
            "eval", "--corpus", str(FIXTURE_CORPUS_PATH), "--provider", "fallback",
            "--rows", "D1,D2,D3", "--k", "5",
        ])
        assert code == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        assert lines[0].split()[0] == "Query"
        for row_code in ("D1", "D2", "D3"):
            row = next(line for line in lines if line.startswith(row_code))
            assert row.split().count("-") == 4
            assert row.split().count("1.0000") == 4

    def test_json_report_with_external(self, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        code = main([
            "eval", "--corpus", str(FIXTURE_CORPUS_PATH),
            "--external", str(FIXTURE_QUERIES_PATH),
            "--out", str(report_path), "--json",
        ])
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert body["metadata"]["rows"] == ["D1", "D2", "D3", "Paraphrase"]
        assert report_path.exists()

    def test_single_row_selection(self, capsys):
        assert main(["eval", "--corpus", str(FIXTURE_CORPUS_PATH), "--rows", "D2"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len([line for line in lines if line.startswith("D")]) == 1


class TestExitCodes:
    def test_unknown_flag_is_validation_error(self, capsys):
        assert main(["ingest", "somewhere", "--bogus"]) == 1

    def test_unknown_subcommand(self):
        assert main(["frobnicate"]) == 1

    def test_remote_without_config_is_validation_error(self, described_corpus, tmp_path):
        code = main([
            "embed", "--corpus", str(described_corpus), "--provider", "remote",
            "--out", str(tmp_path / "i.json"),
        ])
        assert code == 1

    def test_provider_transport_failure_exits_2(self, described_corpus, tmp_path, capsys):
        provider_config = tmp_path / "providers.json"
        provider_config.write_text(json.dumps({
            "embedding": {
                "endpoint": "http://127.0.0.1:9/unreachable",
                "model": "m",
                "dimension": 8,
            }
        }))
        code = main([
            "embed", "--corpus", str(described_corpus), "--provider", "remote",
            "--provider-config", str(provider_config), "--out", str(tmp_path / "i.json"),
        ])
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_partial_describe_failure_exits_3(self, corpus_file, monkeypatch, capsys):
        from cpsearch import cli as cli_module
        from cpsearch.descriptions import GenerationRequest
        from cpsearch.errors import ProviderError

        class HalfBroken:
            id = "half"

            def generate(self, request: GenerationRequest) -> str:
                if request.entry_id == "queens":
                    raise ProviderError("no luck")
                return "a generated description"

        monkeypatch.setattr(cli_module, "_text_provider", lambda kind, cfg: HalfBroken())
        code = main(["describe", "--corpus", str(corpus_file), "--levels", "D1"])
        assert code == 3
        # partial progress persisted: knapsack has its description
        doc = json.loads(corpus_file.read_text())
        by_id = {e["id"]: e for e in doc["entries"]}
        assert "D1" in by_id["knapsack"]["descriptions"]
        assert "D1" not in by_id["queens"]["descriptions"]
