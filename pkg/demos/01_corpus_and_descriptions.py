"""Build a corpus from a directory tree and generate leveled descriptions.

Walks through the offline half of the pipeline: lay out model files on disk,
ingest them into a versioned corpus, then attach Novice/Intermediate/Expert
descriptions through a text-generation provider (the deterministic stub here,
so the demo runs offline; swap in RemoteChatProvider for a real LLM).

Run:  python demos/01_corpus_and_descriptions.py
"""

import tempfile
from pathlib import Path

from cpsearch import DescriptionGenerator, ExpertiseLevel, StubTextProvider, ingest_directory, save_corpus

MODELS = {
    "knapsack": {
        "knapsack.mzn": (
            "% 0/1 knapsack: pack items under a weight capacity, maximize profit\n"
            "array[1..n] of var 0..1: pack;\n"
            "constraint sum(i in 1..n)(weight[i] * pack[i]) <= capacity;\n"
            "solve maximize sum(i in 1..n)(profit[i] * pack[i]);\n"
        ),
        "meta.json": '{"name": "Knapsack", "provenance": "demo collection"}',
    },
    "queens": {
        "queens.mzn": (
            "% place n queens so no two attack each other\n"
            "include \"alldifferent.mzn\";\n"
            "array[1..n] of var 1..n: queen;\n"
            "constraint alldifferent(queen);\n"
            "solve satisfy;\n"
        ),
    },
}


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp) / "models"
        for problem_id, files in MODELS.items():
            (root / problem_id).mkdir(parents=True)
            for filename, content in files.items():
                (root / problem_id / filename).write_text(content)

        print(f"ingesting {root} ...")
        corpus = ingest_directory(root)
        print(f"  -> {len(corpus)} entries: {corpus.ids()}, corpus version {corpus.version}")
        for entry in corpus.entries:
            print(f"  {entry.id}: name={entry.name!r}, provenance={entry.provenance!r}, "
                  f"{len(entry.source_files)} file(s)")

        print("\ngenerating descriptions for every entry and level (stub provider) ...")
        generator = DescriptionGenerator(StubTextProvider())
        report = generator.generate_all(corpus, list(ExpertiseLevel))
        print(f"  -> generated {report.generated}, skipped {report.skipped}, "
              f"failures {len(report.failures)}; corpus version {report.corpus.version}")

        entry = report.corpus.get("knapsack")
        for level in ExpertiseLevel:
            print(f"  knapsack {level.code} ({level.label}): {entry.description(level)!r}")

        print("\nre-running generate_all: already-present descriptions are kept ...")
        rerun = generator.generate_all(report.corpus, list(ExpertiseLevel))
        print(f"  -> generated {rerun.generated} (cache + presence make this idempotent)")

        out = Path(tmp) / "corpus.json"
        save_corpus(report.corpus, out)
        print(f"\npersisted corpus to {out} ({out.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
