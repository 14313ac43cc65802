"""Text to term-document matrix: tokenization, vocabulary pruning, tf-idf, keyword highlighting.

The matrices produced here follow the topic-modeling orientation: rows are
vocabulary terms and columns are documents.  :class:`TfidfTermVectorizer`
wraps the same pipeline in the scikit-learn orientation (documents as rows).
"""

from __future__ import annotations

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import Corpus

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"[a-z0-9_]+")


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it on every run of characters outside ``[a-z0-9_]``."""
    return _TOKEN.findall(text.lower())


@lru_cache(maxsize=None)
def english_stopwords() -> frozenset[str]:
    """The bundled English stopword list (the NLTK list, one word per line)."""
    text = resources.files("nmf_forge").joinpath("data/stopwords_en.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def read_stopword_file(path) -> frozenset[str]:
    text = Path(path).read_text(encoding="utf-8")
    return frozenset(line.strip().lower() for line in text.splitlines() if line.strip())


def read_keyword_file(path=None) -> list[str]:
    """Read comma- or newline-separated keyword phrases.

    With no path, the bundled CIP keyword list is returned.
    """
    if path is None:
        text = resources.files("nmf_forge").joinpath("keywords/cip.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    phrases = (p.strip() for p in re.split(r"[,\n]", text))
    return [p for p in phrases if p]


@dataclass(frozen=True)
class VectorizerParams:
    max_df: float = 0.8
    min_df: float = 0.015
    max_features: int | None = None
    stopwords: frozenset[str] = field(default_factory=english_stopwords)
    extra_stopwords: frozenset[str] = frozenset()

    def __post_init__(self):
        if not 0 < self.max_df <= 1:
            raise ValueError(f"max_df must lie in (0, 1], got {self.max_df}")
        if not 0 <= self.min_df < 1:
            raise ValueError(f"min_df must lie in [0, 1), got {self.min_df}")
        if not self.min_df < self.max_df:
            raise ValueError("min_df must be smaller than max_df")
        if self.max_features is not None and self.max_features < 1:
            raise ValueError("max_features must be a positive integer")
        object.__setattr__(self, "stopwords", frozenset(self.stopwords))
        object.__setattr__(self, "extra_stopwords", frozenset(self.extra_stopwords))


@dataclass(frozen=True)
class Vocabulary:
    """Sorted vocabulary terms with their document and corpus frequencies.

    ``n_docs`` is the size of the corpus the statistics were counted on; it
    fixes the idf weights used when transforming other documents.
    """

    terms: tuple[str, ...]
    doc_freq: tuple[int, ...]
    corpus_freq: tuple[int, ...]
    n_docs: int

    def __post_init__(self):
        if not (len(self.terms) == len(self.doc_freq) == len(self.corpus_freq)):
            raise ValueError("vocabulary fields must have equal length")
        if list(self.terms) != sorted(set(self.terms)):
            raise ValueError("vocabulary terms must be unique and sorted")

    @property
    def index(self) -> dict[str, int]:
        return {term: i for i, term in enumerate(self.terms)}

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term) -> bool:
        return term in self.index


@dataclass(frozen=True)
class TermDocumentMatrix:
    """Dense ``d x n`` tf-idf matrix with its vocabulary and column document ids."""

    values: np.ndarray
    vocab: Vocabulary
    doc_ids: tuple[str, ...]
    highlighted: tuple[str, ...] = ()
    unmatched_keywords: tuple[str, ...] = ()

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def _count_terms(corpus: Corpus) -> list[Counter]:
    return [Counter(tokenize(text)) for text in corpus.texts]


def build_vocabulary(corpus: Corpus, params: VectorizerParams | None = None) -> Vocabulary:
    """Select the terms kept as rows of the term-document matrix.

    A term survives when it is not a stopword and its document frequency,
    as a fraction of the corpus size, lies in ``[min_df, max_df]``.  When
    ``max_features`` is set, the most frequent survivors (by total count,
    ties broken alphabetically) are kept.
    """
    params = params or VectorizerParams()
    n = len(corpus)
    if n == 0:
        raise ValueError("no documents")
    counts = _count_terms(corpus)
    doc_freq: Counter = Counter()
    corpus_freq: Counter = Counter()
    for c in counts:
        doc_freq.update(c.keys())
        corpus_freq.update(c)
    blocked = params.stopwords | params.extra_stopwords
    kept = [t for t in doc_freq
            if t not in blocked and params.min_df <= doc_freq[t] / n <= params.max_df]
    if params.max_features is not None and len(kept) > params.max_features:
        kept.sort(key=lambda t: (-corpus_freq[t], t))
        kept = kept[: params.max_features]
    if not kept:
        raise ValueError("empty vocabulary")
    kept.sort()
    return Vocabulary(
        terms=tuple(kept),
        doc_freq=tuple(doc_freq[t] for t in kept),
        corpus_freq=tuple(corpus_freq[t] for t in kept),
        n_docs=n,
    )


def idf_weights(vocab: Vocabulary) -> np.ndarray:
    """Smoothed inverse document frequency ``ln((1 + n) / (1 + df)) + 1``."""
    df = np.asarray(vocab.doc_freq, dtype=np.float64)
    return np.log((1.0 + vocab.n_docs) / (1.0 + df)) + 1.0


def term_counts(corpus: Corpus, vocab: Vocabulary) -> np.ndarray:
    """Raw occurrence counts, ``d x n``."""
    index = vocab.index
    tf = np.zeros((len(vocab), len(corpus)), dtype=np.float64)
    for j, c in enumerate(_count_terms(corpus)):
        for term, count in c.items():
            i = index.get(term)
            if i is not None:
                tf[i, j] = count
    return tf


def tfidf_matrix(corpus: Corpus, vocab: Vocabulary) -> TermDocumentMatrix:
    """tf-idf weights with every nonzero document column scaled to unit L2 norm."""
    X = term_counts(corpus, vocab) * idf_weights(vocab)[:, None]
    norms = np.linalg.norm(X, axis=0)
    nonzero = norms > 0
    X[:, nonzero] /= norms[nonzero]
    return TermDocumentMatrix(X, vocab, tuple(corpus.doc_ids))


def keyword_terms(keywords: Iterable[str]) -> list[str]:
    """Split keyword phrases into their tokens, keeping first-seen order."""
    seen: dict[str, None] = {}
    for phrase in keywords:
        for token in tokenize(phrase):
            seen.setdefault(token)
    return list(seen)


def highlight_keywords(X: TermDocumentMatrix, keywords: Iterable[str],
                       factor: float = 1.5) -> TermDocumentMatrix:
    """Multiply the rows of ``X`` belonging to ``keywords`` by ``factor``.

    Multi-word phrases contribute each of their tokens.  Keywords that are
    not in the vocabulary are skipped and listed in ``unmatched_keywords``.
    """
    if not factor > 0:
        raise ValueError(f"highlight factor must be positive, got {factor}")
    index = X.vocab.index
    terms = keyword_terms(keywords)
    hits = [t for t in terms if t in index]
    missing = tuple(t for t in terms if t not in index)
    if missing:
        logger.info("%d keyword tokens not in vocabulary: %s", len(missing), ", ".join(missing))
    values = X.values.copy()
    if hits:
        values[[index[t] for t in hits], :] *= factor
    return TermDocumentMatrix(values, X.vocab, X.doc_ids,
                              highlighted=tuple(sorted(set(X.highlighted) | set(hits))),
                              unmatched_keywords=missing)


class TfidfTermVectorizer(TransformerMixin, BaseEstimator):
    """scikit-learn style wrapper around :func:`build_vocabulary` and :func:`tfidf_matrix`.

    ``fit`` takes an iterable of raw strings (or a :class:`Corpus`);
    ``transform`` returns an ``(n_documents, n_terms)`` array, the transpose
    of the term-document matrix.

    Parameters
    ----------
    min_df, max_df : float
        Document-frequency bounds, as fractions of the corpus size.
    max_features : int, optional
        Keep only this many of the most frequent surviving terms.
    stop_words : {"english"}, iterable of str or None
        Base stopword list.
    extra_stop_words : iterable of str, optional
        Additional words to drop, e.g. personal names.
    keywords : iterable of str, optional
        Phrases whose terms are highlighted after normalization.
    highlight_factor : float
        Multiplier applied to highlighted term columns.
    """

    def __init__(self, min_df=0.015, max_df=0.8, max_features=None, stop_words="english",
                 extra_stop_words=None, keywords=None, highlight_factor=1.5):
        self.min_df = min_df
        self.max_df = max_df
        self.max_features = max_features
        self.stop_words = stop_words
        self.extra_stop_words = extra_stop_words
        self.keywords = keywords
        self.highlight_factor = highlight_factor

    def _params(self) -> VectorizerParams:
        if self.stop_words == "english":
            stop = english_stopwords()
        else:
            stop = frozenset(self.stop_words or ())
        return VectorizerParams(max_df=self.max_df, min_df=self.min_df,
                                max_features=self.max_features, stopwords=stop,
                                extra_stopwords=frozenset(self.extra_stop_words or ()))

    @staticmethod
    def _as_corpus(raw_documents) -> Corpus:
        if isinstance(raw_documents, Corpus):
            return raw_documents
        if isinstance(raw_documents, str):
            raise ValueError("expected an iterable of documents, got a single string")
        return Corpus.from_texts(raw_documents)

    def fit(self, raw_documents, y=None):
        self.vocabulary_ = build_vocabulary(self._as_corpus(raw_documents), self._params())
        self.idf_ = idf_weights(self.vocabulary_)
        return self

    def term_document_matrix(self, raw_documents) -> TermDocumentMatrix:
        check_is_fitted(self, "vocabulary_")
        X = tfidf_matrix(self._as_corpus(raw_documents), self.vocabulary_)
        if self.keywords:
            X = highlight_keywords(X, self.keywords, self.highlight_factor)
        return X

    def transform(self, raw_documents):
        return self.term_document_matrix(raw_documents).values.T.copy()

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "vocabulary_")
        return np.asarray(self.vocabulary_.terms, dtype=object)
