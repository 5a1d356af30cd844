import numpy as np
import pytest

from finhyp.embeddings import EmbeddingStore


@pytest.fixture
def toy_store() -> EmbeddingStore:
    tokens = ["bond", "option", "swap", "corporate", "index"]
    rng = np.random.default_rng(0)
    return EmbeddingStore(tokens, rng.normal(size=(len(tokens), 4)))


def make_store(tokens, dim=3, seed=0) -> EmbeddingStore:
    rng = np.random.default_rng(seed)
    return EmbeddingStore(list(tokens), rng.normal(size=(len(tokens), dim)))
