"""Relevance, information completeness, curves, and lambda-blended re-ranking.

Per-result completeness is the cosine between a result vector and the
weighted corpus vector (the weighted sum of every result vector for the
query). The cumulative form replaces the single result with the unweighted
partial sum of the first n results, which with uniform weights starts at 0
by convention and ends at exactly 1 when everything has been viewed. The
curve's AUC is the plain mean of the per-step cumulative values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .embedding import EmbeddingVector, cosine_arrays, cosine_similarity
from .errors import (
    DegenerateWeights,
    DimensionMismatch,
    EmptyCorpus,
    InvalidInput,
    InvalidLambda,
)


@dataclass(frozen=True)
class CorpusVector:
    """Weighted sum of all result vectors for one query."""

    vector: EmbeddingVector
    weights: tuple[float, ...]
    n_results: int


@dataclass(frozen=True)
class ScoredResult:
    record_id: str
    rank: int
    relevance: float
    completeness: float
    blended: float


@dataclass(frozen=True)
class CompletenessCurve:
    """(fraction viewed, cumulative completeness) points; N+1 of them."""

    points: tuple[tuple[float, float], ...]
    auc: float

    @property
    def n_results(self) -> int:
        return len(self.points) - 1

    @property
    def final_value(self) -> float:
        return self.points[-1][1]


@dataclass(frozen=True)
class Lambda:
    value: float

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise InvalidLambda(f"lambda {self.value!r} outside [0, 1]")


def _stack(result_vectors: Sequence[EmbeddingVector]) -> np.ndarray:
    if not result_vectors:
        raise EmptyCorpus("no result vectors")
    dim = result_vectors[0].dim
    for v in result_vectors[1:]:
        if v.dim != dim:
            raise DimensionMismatch(f"mixed dims {dim} and {v.dim}")
    return np.stack([v.as_array() for v in result_vectors])


def build_corpus_vector(
    result_vectors: Sequence[EmbeddingVector],
    weights: Optional[Sequence[float]] = None,
) -> CorpusVector:
    matrix = _stack(result_vectors)
    n = matrix.shape[0]
    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(list(weights), dtype=float)
        if w.shape != (n,):
            raise DimensionMismatch(
                f"{len(w)} weights for {n} result vectors"
            )
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DegenerateWeights("weights must be finite and nonnegative")
        if not np.any(w > 0):
            raise DegenerateWeights("at least one weight must be positive")
    summed = (matrix * w[:, None]).sum(axis=0)
    return CorpusVector(
        vector=EmbeddingVector(tuple(float(x) for x in summed)),
        weights=tuple(float(x) for x in w),
        n_results=n,
    )


def relevance(query_vec: EmbeddingVector, result_vec: EmbeddingVector) -> float:
    return cosine_similarity(query_vec, result_vec)


def result_completeness(result_vec: EmbeddingVector, corpus: CorpusVector) -> float:
    return cosine_similarity(corpus.vector, result_vec)


def cumulative_completeness(
    result_vectors: Sequence[EmbeddingVector], corpus: CorpusVector
) -> float:
    """Cosine between the corpus vector and the unweighted partial sum."""
    if not result_vectors:
        raise InvalidInput("n = 0 is a curve convention, not a cosine")
    partial = _stack(result_vectors).sum(axis=0)
    return cosine_arrays(corpus.vector.as_array(), partial)


def completeness_curve(
    result_vectors: Sequence[EmbeddingVector], corpus: CorpusVector
) -> CompletenessCurve:
    matrix = _stack(result_vectors)
    n = matrix.shape[0]
    corpus_arr = corpus.vector.as_array()
    if matrix.shape[1] != corpus_arr.shape[0]:
        raise DimensionMismatch("corpus dim differs from result dim")
    partials = np.cumsum(matrix, axis=0)
    corpus_norm = np.linalg.norm(corpus_arr)
    partial_norms = np.linalg.norm(partials, axis=1)
    values = np.clip(
        partials @ corpus_arr / (corpus_norm * partial_norms), -1.0, 1.0
    )
    points = [(0.0, 0.0)]
    points += [((k + 1) / n, float(values[k])) for k in range(n)]
    auc = float(np.mean(values))
    return CompletenessCurve(points=tuple(points), auc=auc)


def blended_score(relevance: float, completeness: float, lam: Lambda) -> float:
    if not isinstance(lam, Lambda):
        lam = Lambda(float(lam))
    return lam.value * completeness + (1.0 - lam.value) * relevance


def rerank(scored: Sequence[ScoredResult], lam: Lambda) -> list[ScoredResult]:
    """Recompute the blend at `lam` and sort descending, stable by rank."""
    if not isinstance(lam, Lambda):
        lam = Lambda(float(lam))
    rescored = [
        ScoredResult(
            record_id=s.record_id,
            rank=s.rank,
            relevance=s.relevance,
            completeness=s.completeness,
            blended=blended_score(s.relevance, s.completeness, lam),
        )
        for s in scored
    ]
    return sorted(rescored, key=lambda s: (-s.blended, s.rank))


def report_scale(value: float) -> float:
    """User-facing 0-100 completeness: negatives floored, one decimal."""
    return round(max(0.0, value) * 100.0, 1)
