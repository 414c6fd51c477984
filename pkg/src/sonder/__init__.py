"""Completeness-aware search: metrics, ranking, and experiment tooling."""

from .embedding import EmbedderConfig, EmbeddingVector, cosine_similarity, embed_batch, embed_text
from .completeness import (
    CompletenessCurve,
    CorpusVector,
    Lambda,
    ScoredResult,
    blended_score,
    build_corpus_vector,
    completeness_curve,
    cumulative_completeness,
    relevance,
    rerank,
    result_completeness,
)

__all__ = [
    "EmbedderConfig",
    "EmbeddingVector",
    "cosine_similarity",
    "embed_text",
    "embed_batch",
    "CorpusVector",
    "ScoredResult",
    "CompletenessCurve",
    "Lambda",
    "build_corpus_vector",
    "result_completeness",
    "cumulative_completeness",
    "completeness_curve",
    "relevance",
    "blended_score",
    "rerank",
]

__version__ = "0.1.0"
