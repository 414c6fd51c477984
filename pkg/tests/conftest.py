import random

import numpy as np
import pytest

from sonder.embedding import EmbedderConfig, EmbeddingVector, embed_batch

WORDS = (
    "flood pakistan election energy climate vaccine economy protest border "
    "storm market river policy health school football drought wildfire tax "
    "housing inflation summit treaty strike harvest satellite museum festival"
).split()


def random_texts(rng: random.Random, n: int, min_words=3, max_words=8):
    return [
        " ".join(rng.choices(WORDS, k=rng.randint(min_words, max_words)))
        for _ in range(n)
    ]


def random_corpus_vectors(seed: int, n: int, dim: int = 64):
    rng = random.Random(seed)
    config = EmbedderConfig(dim=dim)
    return embed_batch(random_texts(rng, n), config)


@pytest.fixture
def rng():
    return random.Random(1234)


def unit_vec(*values):
    return EmbeddingVector(tuple(float(v) for v in values))
