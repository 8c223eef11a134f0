"""Command-line entry point: ingest, describe, embed, query, eval, serve.

Pipelines are explicit separate subcommands mirroring the
precompute-then-query split: corpus ingestion and embedding happen offline,
queries and evaluation run against the precomputed index.

Exit codes: 0 success, 1 validation error, 2 provider/transport error,
3 partial batch failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .corpus import ExpertiseLevel, ingest_directory, load_corpus, save_corpus
from .descriptions import DescriptionGenerator, RemoteChatProvider, StubTextProvider
from .embedding import FallbackEmbeddingProvider, IndexConfig, RemoteEmbeddingProvider, embed as embed_text
from .errors import (
    CpSearchError,
    PartialFailureError,
    ProviderContractError,
    ProviderError,
    ValidationError,
)
from .evaluation import load_query_set, render_text_table, run_table
from .index import build_index, check_provider_match, load_index, query_top_k, save_index
from .service import ServiceState, create_app


def _load_provider_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"provider config file {p} does not exist")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise ValidationError(f"provider config file {p} is not valid JSON: {exc}") from exc


def _embedding_provider(kind: str, config_path: str | None, dimension: int):
    if kind == "fallback":
        return FallbackEmbeddingProvider(dimension=dimension)
    settings = _load_provider_config(config_path).get("embedding")
    if not settings:
        raise ValidationError(
            "remote embedding provider requires --provider-config with an 'embedding' section"
        )
    return RemoteEmbeddingProvider(
        endpoint=settings["endpoint"],
        model=settings["model"],
        dimension=int(settings.get("dimension", dimension)),
        auth_env_var=settings.get("auth_env_var"),
    )


def _text_provider(kind: str, config_path: str | None):
    if kind == "stub":
        return StubTextProvider()
    settings = _load_provider_config(config_path).get("generation")
    if not settings:
        raise ValidationError(
            "remote text provider requires --provider-config with a 'generation' section"
        )
    return RemoteChatProvider(
        endpoint=settings["endpoint"],
        model=settings["model"],
        auth_env_var=settings.get("auth_env_var"),
        temperature=float(settings.get("temperature", 0.0)),
    )


def _parse_levels(codes: str) -> list[ExpertiseLevel]:
    return [ExpertiseLevel.from_code(code) for code in codes.split(",") if code.strip()]


@click.group()
def cli() -> None:
    """Retrieve constraint-programming models from problem descriptions."""


@cli.command()
@click.argument("root", type=click.Path())
@click.option("--out", required=True, type=click.Path(), help="Corpus JSON output path.")
@click.option("--json", "as_json", is_flag=True, help="Emit machine-readable output.")
def ingest(root: str, out: str, as_json: bool) -> None:
    """Build a corpus from a directory tree (one subdirectory per problem)."""
    corpus = ingest_directory(root)
    save_corpus(corpus, out)
    if as_json:
        click.echo(json.dumps({"entries": len(corpus), "ids": corpus.ids(), "out": out}))
    else:
        click.echo(f"ingested {len(corpus)} entries -> {out}")


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--levels", default="D1,D2,D3", show_default=True, help="Comma-separated level codes.")
@click.option("--force", is_flag=True, help="Regenerate descriptions that already exist.")
@click.option("--provider", default="stub", type=click.Choice(["stub", "remote"]), show_default=True)
@click.option("--provider-config", type=click.Path(), default=None)
@click.option("--out", type=click.Path(), default=None, help="Output corpus path (default: in place).")
@click.option("--json", "as_json", is_flag=True)
def describe(
    corpus_path: str,
    levels: str,
    force: bool,
    provider: str,
    provider_config: str | None,
    out: str | None,
    as_json: bool,
) -> None:
    """Generate problem descriptions for every entry at the requested levels."""
    corpus = load_corpus(corpus_path)
    generator = DescriptionGenerator(_text_provider(provider, provider_config))
    report = generator.generate_all(corpus, _parse_levels(levels), force=force)
    # Partial progress is persisted even when some generations failed.
    save_corpus(report.corpus, out or corpus_path)
    summary = {
        "generated": report.generated,
        "skipped": report.skipped,
        "failures": report.failures,
        "out": out or corpus_path,
    }
    if as_json:
        click.echo(json.dumps(summary, sort_keys=True))
    else:
        click.echo(f"generated {report.generated} descriptions ({report.skipped} already present)")
        for key, reason in sorted(report.failures.items()):
            click.echo(f"failed {key}: {reason}", err=True)
    if report.failures:
        raise PartialFailureError(
            f"{len(report.failures)} generations failed", failures=report.failures
        )


@cli.command(name="embed")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--config", "config_name", default="SC", show_default=True, help="Index configuration name.")
@click.option("--provider", default="fallback", type=click.Choice(["fallback", "remote"]), show_default=True)
@click.option("--provider-config", type=click.Path(), default=None)
@click.option("--dimension", default=768, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path(), help="Index JSON output path.")
@click.option("--json", "as_json", is_flag=True)
def embed_cmd(
    corpus_path: str,
    config_name: str,
    provider: str,
    provider_config: str | None,
    dimension: int,
    out: str,
    as_json: bool,
) -> None:
    """Embed every corpus entry under a configuration and write the index."""
    corpus = load_corpus(corpus_path)
    config = IndexConfig.parse(config_name)
    embedding_provider = _embedding_provider(provider, provider_config, dimension)
    index = build_index(corpus, config, embedding_provider)
    save_index(index, out)
    if as_json:
        click.echo(
            json.dumps(
                {"entries": len(index), "config": config.name, "provider": embedding_provider.id, "out": out}
            )
        )
    else:
        click.echo(f"embedded {len(index)} entries under {config.name} -> {out}")


@cli.command()
@click.argument("text")
@click.option("--index", "index_path", required=True, type=click.Path())
@click.option("--provider", default="fallback", type=click.Choice(["fallback", "remote"]), show_default=True)
@click.option("--provider-config", type=click.Path(), default=None)
@click.option("-k", default=5, show_default=True, type=int)
@click.option("--json", "as_json", is_flag=True)
def query(text: str, index_path: str, provider: str, provider_config: str | None, k: int, as_json: bool) -> None:
    """Rank index entries against a natural-language problem description."""
    index = load_index(index_path)
    embedding_provider = _embedding_provider(provider, provider_config, index.dimension)
    check_provider_match(index, embedding_provider)
    results = query_top_k(index, embed_text(text, embedding_provider), k)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "results": [
                        {"entry_id": r.entry_id, "score": r.score, "rank": r.rank} for r in results
                    ],
                    "config": index.config.name,
                    "k": k,
                },
                sort_keys=True,
            )
        )
    else:
        for r in results:
            click.echo(f"{r.rank}. {r.entry_id} ({r.score:.4f})")


@cli.command(name="eval")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--provider", default="fallback", type=click.Choice(["fallback", "remote"]), show_default=True)
@click.option("--provider-config", type=click.Path(), default=None)
@click.option("--dimension", default=768, show_default=True, type=int)
@click.option("--rows", default="D1,D2,D3", show_default=True, help="Generated-level rows to evaluate.")
@click.option("--external", "external_path", type=click.Path(), default=None, help="External query set JSON.")
@click.option("--k", default=5, show_default=True, type=int)
@click.option("--out", type=click.Path(), default=None, help="Write the JSON report here.")
@click.option("--json", "as_json", is_flag=True, help="Print the JSON report instead of the table.")
def eval_cmd(
    corpus_path: str,
    provider: str,
    provider_config: str | None,
    dimension: int,
    rows: str,
    external_path: str | None,
    k: int,
    out: str | None,
    as_json: bool,
) -> None:
    """Run the leave-one-out MRR table over query sets and configurations."""
    corpus = load_corpus(corpus_path)
    embedding_provider = _embedding_provider(provider, provider_config, dimension)
    external = load_query_set(external_path) if external_path else None
    report = run_table(corpus, embedding_provider, k=k, levels=_parse_levels(rows), external=external)
    if out:
        Path(out).write_text(report.to_json(), encoding="utf-8")
    click.echo(report.to_json() if as_json else render_text_table(report), nl=False)


@cli.command()
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--index", "index_path", type=click.Path(), default=None, help="Prebuilt index (else built at startup).")
@click.option("--config", "config_name", default="SC+D2", show_default=True)
@click.option("--provider", default="fallback", type=click.Choice(["fallback", "remote"]), show_default=True)
@click.option("--provider-config", type=click.Path(), default=None)
@click.option("--dimension", default=768, show_default=True, type=int)
@click.option("--k-default", default=5, show_default=True, type=int)
@click.option("--admin-token-env", default=None, help="Env var holding the admin token for POST /api/models.")
@click.option("--static-dir", type=click.Path(), default=None, help="Serve a built web UI from this directory.")
def serve(
    port: int,
    host: str,
    corpus_path: str,
    index_path: str | None,
    config_name: str,
    provider: str,
    provider_config: str | None,
    dimension: int,
    k_default: int,
    admin_token_env: str | None,
    static_dir: str | None,
) -> None:
    """Serve the query/browse/add API (default configuration SC+D2)."""
    import logging
    import os

    import uvicorn

    # structured request logs (one JSON object per line) on stdout
    access_log = logging.getLogger("cpsearch.service.access")
    access_log.setLevel(logging.INFO)
    access_log.addHandler(logging.StreamHandler(sys.stdout))

    corpus = load_corpus(corpus_path)
    embedding_provider = _embedding_provider(provider, provider_config, dimension)
    if index_path:
        index = load_index(index_path)
        check_provider_match(index, embedding_provider)
    else:
        index = build_index(corpus, IndexConfig.parse(config_name), embedding_provider)
    text_provider = _text_provider("stub" if provider == "fallback" else "remote", provider_config)
    state = ServiceState(
        corpus=corpus,
        index=index,
        embedding_provider=embedding_provider,
        text_provider=text_provider,
        k_default=k_default,
        corpus_path=corpus_path,
        admin_token=os.environ.get(admin_token_env) if admin_token_env else None,
    )
    app = create_app(state)
    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    click.echo(f"serving {len(index)} models ({index.config.name}, {embedding_provider.id}) on {host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


def main(argv: list[str] | None = None) -> int:
    """Run the CLI and map exceptions onto documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.Abort:
        return 130
    except PartialFailureError as exc:
        click.echo(f"error: {exc}", err=True)
        return 3
    except (ProviderError, ProviderContractError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except CpSearchError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
