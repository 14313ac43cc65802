"""Word-context co-occurrence counts and the shifted positive PMI matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus
from .text import Vocabulary, tokenize


@dataclass(frozen=True)
class ContextMatrix:
    counts: np.ndarray
    window: int


@dataclass(frozen=True)
class SppmiMatrix:
    values: np.ndarray
    shift: float

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def count_cooccurrences(corpus: Corpus, vocab: Vocabulary, window: int = 5) -> ContextMatrix:
    """Count vocabulary term pairs that fall within ``window`` tokens of each other.

    Each document's tokens are first filtered to vocabulary terms, then every
    ordered pair of positions ``(i, j)`` with ``0 < |i - j| <= window`` adds
    one to ``counts[term_i, term_j]``.  Windows stop at document boundaries.
    """
    if int(window) != window or window < 1:
        raise ValueError(f"window must be a positive integer, got {window}")
    window = int(window)
    index = vocab.index
    d = len(vocab)
    counts = np.zeros((d, d), dtype=np.int64)
    for text in corpus.texts:
        ids = np.array([index[t] for t in tokenize(text) if t in index], dtype=np.intp)
        for offset in range(1, min(window, len(ids) - 1) + 1):
            left, right = ids[:-offset], ids[offset:]
            np.add.at(counts, (left, right), 1)
            np.add.at(counts, (right, left), 1)
    return ContextMatrix(counts, window)


def sppmi(C: ContextMatrix | np.ndarray, shift: float = 5.0) -> SppmiMatrix:
    """Shifted positive pointwise mutual information.

    ``m_ij = max(log(c_ij * c_total / (c_i. * c_.j)) - log(shift), 0)``, with
    ``m_ij = 0`` wherever ``c_ij = 0``.
    """
    counts = C.counts if isinstance(C, ContextMatrix) else np.asarray(C)
    counts = counts.astype(np.float64)
    if not shift > 0:
        raise ValueError(f"shift must be positive, got {shift}")
    if np.any(counts < 0):
        raise ValueError("co-occurrence counts must be non-negative")
    total = counts.sum()
    if total == 0:
        raise ValueError("empty co-occurrence")
    row = counts.sum(axis=1)
    col = counts.sum(axis=0)
    M = np.zeros_like(counts)
    i, j = np.nonzero(counts)
    pmi = np.log(counts[i, j] * total / (row[i] * col[j]))
    M[i, j] = np.maximum(pmi - np.log(shift), 0.0)
    return SppmiMatrix(M, float(shift))
