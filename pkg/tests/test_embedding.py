import math
import re

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sonder.embedding import (
    EmbedderConfig,
    EmbeddingVector,
    cosine_similarity,
    embed_batch,
    embed_text,
    reference_hash_counts,
    tokenize,
)
from sonder.errors import (
    DegenerateVector,
    DimensionMismatch,
    InvalidConfig,
    InvalidInput,
)

CFG = EmbedderConfig(dim=256)


def test_embed_deterministic_and_normalized():
    a = embed_text("abc", CFG)
    b = embed_text("abc", CFG)
    assert a.values == b.values
    assert a.dim == 256
    assert math.isclose(np.linalg.norm(a.as_array()), 1.0, abs_tol=1e-9)


def test_empty_text_rejected():
    with pytest.raises(InvalidInput):
        embed_text("", CFG)
    with pytest.raises(InvalidInput):
        embed_text("   ", CFG)


def test_repeated_text_normalizes_to_same_vector():
    # doubling every token count is removed by L2 normalization
    single = embed_text("floods in Pakistan", CFG)
    double = embed_text("floods in Pakistan floods in Pakistan", CFG)
    assert single.values == pytest.approx(double.values, abs=1e-12)
    # oracle: hand-built hashed bag-of-token counts scale exactly by 2
    c1 = reference_hash_counts("floods in Pakistan", 256)
    c2 = reference_hash_counts("floods in Pakistan floods in Pakistan", 256)
    assert np.array_equal(c2, 2 * c1)


def test_cosine_worked_example():
    a = EmbeddingVector((1.0, 2.0, 3.0))
    b = EmbeddingVector((4.0, 5.0, 6.0))
    expected = 32 / (math.sqrt(14) * math.sqrt(77))
    assert cosine_similarity(a, b) == pytest.approx(expected, abs=1e-6)
    assert cosine_similarity(a, b) == pytest.approx(0.974631846, abs=1e-6)


def test_cosine_self_and_orthogonal():
    v = EmbeddingVector((0.3, -0.4, 1.1))
    assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-12)
    assert cosine_similarity(
        EmbeddingVector((1.0, 0.0)), EmbeddingVector((0.0, 1.0))
    ) == 0.0


def test_cosine_errors():
    with pytest.raises(DimensionMismatch):
        cosine_similarity(EmbeddingVector((1.0, 2.0)), EmbeddingVector((1.0,) * 3))
    with pytest.raises(DegenerateVector):
        cosine_similarity(EmbeddingVector((0.0, 0.0)), EmbeddingVector((1.0, 0.0)))


def test_batch_matches_sequential():
    texts = [f"doc number {i} about {w}" for i, w in
             enumerate(["storms", "rivers", "markets", "votes"])]
    batch = embed_batch(texts, CFG)
    for text, vec in zip(texts, batch):
        assert vec.values == embed_text(text, CFG).values


def test_batch_empty_and_bad_index():
    assert embed_batch([], CFG) == []
    with pytest.raises(InvalidInput, match="index 1"):
        embed_batch(["ok", "", "also ok"], CFG)


def test_config_validation():
    with pytest.raises(InvalidConfig):
        EmbedderConfig(dim=1)
    with pytest.raises(InvalidConfig):
        EmbedderConfig(provider="external-service")  # endpoint missing
    with pytest.raises(InvalidConfig):
        EmbedderConfig(endpoint="http://x")  # endpoint without provider


def test_normalized_flag_enforced():
    with pytest.raises(InvalidInput):
        EmbeddingVector((3.0, 4.0), normalized=True)
    EmbeddingVector((0.6, 0.8), normalized=True)


def test_nan_rejected():
    with pytest.raises(InvalidInput):
        EmbeddingVector((1.0, float("nan")))


@given(st.text(min_size=1).filter(lambda t: tokenize(t)))
@settings(max_examples=200, deadline=None)
def test_reference_embedder_pure(text):
    a = embed_text(text, CFG)
    b = embed_text(text, CFG)
    assert a.values == b.values
    assert math.isclose(np.linalg.norm(a.as_array()), 1.0, abs_tol=1e-9)


@given(
    st.lists(
        st.floats(-50, 50).map(lambda x: 0.0 if abs(x) < 1e-6 else x),
        min_size=2, max_size=16,
    ),
    st.floats(1e-3, 1e3),
)
@settings(max_examples=300, deadline=None)
def test_cosine_symmetry_and_scale_invariance(values, c):
    rng = np.random.default_rng(7)
    a = np.asarray(values)
    if not a.any():
        a[0] = 1.0
    b = rng.normal(size=a.size)
    va, vb = EmbeddingVector(tuple(a)), EmbeddingVector(tuple(b))
    assert cosine_similarity(va, vb) == cosine_similarity(vb, va)
    scaled = EmbeddingVector(tuple(c * a))
    assert cosine_similarity(scaled, vb) == pytest.approx(
        cosine_similarity(va, vb), abs=1e-9
    )
    assert -1.0 <= cosine_similarity(va, vb) <= 1.0


def test_reference_embedder_pairwise_cosines_nonnegative():
    texts = ["storm in the valley", "valley storm warning",
             "unrelated cooking recipe", "tax policy summit"]
    vecs = embed_batch(texts, CFG)
    for i in range(len(vecs)):
        for j in range(len(vecs)):
            assert cosine_similarity(vecs[i], vecs[j]) >= 0.0
