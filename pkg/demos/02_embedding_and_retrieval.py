"""Embed a corpus under different configurations and run top-k queries.

Shows how the embedding input changes with the configuration (source code
alone vs. source plus description levels), then builds an exact cosine index
and ranks a few natural-language queries against it.

Run:  python demos/02_embedding_and_retrieval.py
"""

from pathlib import Path

from cpsearch import (
    FallbackEmbeddingProvider,
    IndexConfig,
    all_configs,
    build_embedding_input,
    build_index,
    embed,
    load_corpus,
    query_top_k,
)

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "data" / "fixture_corpus.json"

QUERIES = [
    "pack items into a weight-limited bag for maximum value",
    "put classes in a timetable so nothing overlaps",
    "color a map so neighboring regions differ",
    "visit every customer location once and minimize driving",
]


def main() -> None:
    corpus = load_corpus(FIXTURE)
    provider = FallbackEmbeddingProvider(dimension=768)
    print(f"corpus: {len(corpus)} entries, provider: {provider.id}")

    print("\nthe eight index configurations:")
    print("  " + ", ".join(config.name for config in all_configs()))

    entry = corpus.get("knapsack")
    sc_input = build_embedding_input(entry, IndexConfig.parse("SC"))
    full_input = build_embedding_input(entry, IndexConfig.parse("SC+D1&2&3"))
    print(f"\nembedding input sizes for 'knapsack': SC={len(sc_input)} chars, "
          f"SC+D1&2&3={len(full_input)} chars")

    config = IndexConfig.parse("SC+D2")
    index = build_index(corpus, config, provider)
    print(f"\nbuilt index: {len(index)} items, config {index.config.name}, d={index.dimension}")

    for query in QUERIES:
        print(f"\nQuery: {query!r}")
        results = query_top_k(index, embed(query, provider), k=3)
        for r in results:
            name = corpus.get(r.entry_id).name
            print(f"  {r.rank}. {name} [{r.entry_id}] (similarity: {r.score:.4f})")


if __name__ == "__main__":
    main()
