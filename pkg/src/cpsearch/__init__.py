"""Semantic retrieval of constraint-programming models.

Given a natural-language description of a combinatorial problem, find the
most similar expert-written models in a curated corpus by cosine similarity
of text embeddings, and reproduce the leave-one-out MRR evaluation protocol.
"""

from .corpus import (
    Corpus,
    ExpertiseLevel,
    ModelEntry,
    SourceFile,
    add_entry,
    ingest_directory,
    load_corpus,
    save_corpus,
)
from .descriptions import (
    DescriptionGenerator,
    GenerationResult,
    PromptTemplate,
    RemoteChatProvider,
    StubTextProvider,
    builtin_template,
    render_prompt,
    source_code_blob,
)
from .embedding import (
    EmbeddingBatch,
    FallbackEmbeddingProvider,
    IndexConfig,
    RemoteEmbeddingProvider,
    all_configs,
    build_embedding_input,
    embed,
    embed_corpus,
    fallback_embed,
    l2_normalize,
)
from .evaluation import (
    EvaluationCell,
    EvaluationReport,
    Query,
    QuerySet,
    load_query_set,
    loo_admissible,
    make_level_query_set,
    mean_reciprocal_rank,
    reciprocal_rank,
    render_text_table,
    run_cell,
    run_table,
)
from .index import (
    RankedResult,
    RetrievalIndex,
    build_index,
    check_provider_match,
    cosine_similarity,
    load_index,
    query_top_k,
    rank_of,
    save_index,
)

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "DescriptionGenerator",
    "EmbeddingBatch",
    "EvaluationCell",
    "EvaluationReport",
    "ExpertiseLevel",
    "FallbackEmbeddingProvider",
    "GenerationResult",
    "IndexConfig",
    "ModelEntry",
    "PromptTemplate",
    "Query",
    "QuerySet",
    "RankedResult",
    "RemoteChatProvider",
    "RemoteEmbeddingProvider",
    "RetrievalIndex",
    "SourceFile",
    "StubTextProvider",
    "add_entry",
    "all_configs",
    "build_embedding_input",
    "build_index",
    "builtin_template",
    "check_provider_match",
    "cosine_similarity",
    "embed",
    "embed_corpus",
    "fallback_embed",
    "ingest_directory",
    "l2_normalize",
    "load_corpus",
    "load_index",
    "load_query_set",
    "loo_admissible",
    "make_level_query_set",
    "mean_reciprocal_rank",
    "query_top_k",
    "rank_of",
    "reciprocal_rank",
    "render_prompt",
    "render_text_table",
    "run_cell",
    "run_table",
    "save_corpus",
    "save_index",
    "source_code_blob",
]
