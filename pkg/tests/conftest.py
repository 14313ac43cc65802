import numpy as np
import pytest

from nmf_forge.text import VectorizerParams

# no pruning and no stopwords: every distinct token becomes a row
OPEN_VOCAB = VectorizerParams(min_df=0.0, max_df=1.0, stopwords=frozenset())


@pytest.fixture
def write_corpus(tmp_path):
    def _write(docs: dict, subdir="docs"):
        root = tmp_path / subdir
        root.mkdir(parents=True, exist_ok=True)
        for name, text in docs.items():
            (root / name).write_text(text, encoding="utf-8")
        return root
    return _write


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def block_matrix():
    """4x4 matrix with two 2x2 all-ones diagonal blocks."""
    return np.kron(np.eye(2), np.ones((2, 2)))
