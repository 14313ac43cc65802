"""Classical NMF by multiplicative updates, plus topic inspection helpers.

Matrices follow the topic-modeling layout: ``X`` is ``d x n`` (terms by
documents), ``W`` is the ``d x r`` dictionary and ``H`` the ``r x n`` coding.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_nonnegative_matrix, check_rank


@dataclass(frozen=True)
class SolverOptions:
    """Settings shared by every multiplicative-update solver.

    ``tol`` is the relative objective decrease below which iteration stops;
    ``epsilon`` guards the update denominators.
    """

    rank: int = 7
    max_iters: int = 500
    tol: float = 1e-5
    seed: int = 0
    epsilon: float = 1e-10

    def __post_init__(self):
        check_rank(self.rank)
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be non-negative")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    def with_(self, **changes) -> "SolverOptions":
        return replace(self, **changes)


@dataclass(frozen=True)
class Factorization:
    """Result of a two-factor solve.

    ``objective_trace[0]`` is the objective at the initial point and
    ``objective_trace[k]`` the value after ``k`` iterations.
    """

    W: np.ndarray
    H: np.ndarray
    objective_trace: tuple[float, ...] = ()
    iterations_run: int = 0
    seed: int | None = None

    @property
    def rank(self) -> int:
        return self.W.shape[1]

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]

    def to_dict(self, vocab_terms: Sequence[str] | None = None,
                doc_ids: Sequence[str] | None = None) -> dict:
        return {
            "rank": self.rank,
            "vocab_terms": list(vocab_terms) if vocab_terms is not None else None,
            "doc_ids": list(doc_ids) if doc_ids is not None else None,
            "W": self.W.tolist(),
            "H": self.H.tolist(),
            "objective_trace": list(self.objective_trace),
        }


def frobenius_sq(A: np.ndarray) -> float:
    return float(np.einsum("ij,ij->", A, A))


def residual(X, F: Factorization) -> float:
    """Squared Frobenius norm of ``X - W H``."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape != (F.W.shape[0], F.H.shape[1]) or F.W.shape[1] != F.H.shape[0]:
        raise ValueError(
            f"shape mismatch: X {X.shape}, W {F.W.shape}, H {F.H.shape}"
        )
    return frobenius_sq(X - F.W @ F.H)


def converged(previous: float, current: float, tol: float) -> bool:
    if previous <= 0:
        return True
    return (previous - current) / previous < tol


def random_init(shape, rng: np.random.Generator) -> np.ndarray:
    # (0, 1) rather than [0, 1): an exact zero never leaves a multiplicative update
    return 1.0 - rng.random(shape)


def update_H(X, W, H, eps):
    return H * (W.T @ X) / (W.T @ W @ H + eps)


def update_W(X, W, H, eps):
    return W * (X @ H.T) / (W @ (H @ H.T) + eps)


def nmf(X, opts: SolverOptions | None = None, *, W0=None, H0=None,
        fit_W: bool = True) -> Factorization:
    """Minimize ``||X - W H||_F^2`` over non-negative ``W`` and ``H``.

    Uses Lee-Seung multiplicative updates (``H`` first, then ``W``) from a
    uniform random start drawn with ``opts.seed``.  ``W0``/``H0`` override the
    random start; ``fit_W=False`` holds ``W`` fixed and only solves for ``H``.

    Iteration stops when the relative decrease falls below ``opts.tol``, after
    ``opts.max_iters`` steps, or when a step would raise the objective; that
    last step is discarded, so ``objective_trace`` never increases.
    """
    opts = opts or SolverOptions()
    X = check_nonnegative_matrix(np.asarray(X), "X")
    d, n = X.shape
    r = opts.rank
    rng = np.random.default_rng(opts.seed)
    W = random_init((d, r), rng) if W0 is None else np.array(W0, dtype=np.float64)
    H = random_init((r, n), rng) if H0 is None else np.array(H0, dtype=np.float64)
    if W.shape != (d, r) or H.shape != (r, n):
        raise ValueError(f"initial factors must be {(d, r)} and {(r, n)}")
    if np.any(W < 0) or np.any(H < 0):
        raise ValueError("initial factors must be non-negative")

    eps = opts.epsilon
    trace = [frobenius_sq(X - W @ H)]
    for _ in range(opts.max_iters):
        H_new = update_H(X, W, H, eps)
        W_new = update_W(X, W, H_new, eps) if fit_W else W
        value = frobenius_sq(X - W_new @ H_new)
        if value > trace[-1]:
            # only reachable at the round-off floor, where the epsilon guard dominates
            break
        W, H = W_new, H_new
        trace.append(value)
        if converged(trace[-2], trace[-1], opts.tol):
            break
    return Factorization(W, H, tuple(trace), len(trace) - 1, opts.seed)


def topic_keywords(W, vocab, k: int = 10) -> list[list[str]]:
    """Top ``k`` terms of every column of ``W``, heaviest first, ties alphabetical."""
    W = np.asarray(W)
    terms = list(getattr(vocab, "terms", vocab))
    if len(terms) != W.shape[0]:
        raise ValueError(f"W has {W.shape[0]} rows but vocabulary has {len(terms)} terms")
    if not 1 <= k <= len(terms):
        raise ValueError(f"k must lie in [1, {len(terms)}], got {k}")
    alpha = np.argsort(np.argsort(np.asarray(terms, dtype=object)))
    result = []
    for col in W.T:
        order = np.lexsort((alpha, -col))
        result.append([terms[i] for i in order[:k]])
    return result


def assign_documents(H, return_unassigned: bool = False):
    """Index of the heaviest topic for every document (lowest index on ties).

    With ``return_unassigned=True`` also return a boolean mask of all-zero
    columns, which are mapped to topic 0 but carry no real assignment.
    """
    H = np.asarray(H)
    labels = np.argmax(H, axis=0)
    if return_unassigned:
        return labels, ~np.any(H > 0, axis=0)
    return labels


class MultiplicativeNMF(TransformerMixin, BaseEstimator):
    """Classical NMF as a scikit-learn transformer.

    Input follows the scikit-learn orientation, ``(n_documents, n_terms)``.
    After fitting, ``components_`` holds the ``r x n_terms`` topics (the
    transposed dictionary) and ``transform`` returns document codings.
    """

    def __init__(self, n_components=7, max_iter=500, tol=1e-5, random_state=0, epsilon=1e-10):
        self.n_components = n_components
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state
        self.epsilon = epsilon

    def _options(self) -> SolverOptions:
        seed = self.random_state
        if seed is None:
            seed = int(np.random.SeedSequence().generate_state(1)[0])
        return SolverOptions(rank=self.n_components, max_iters=self.max_iter, tol=self.tol,
                             seed=int(seed), epsilon=self.epsilon)

    def fit_transform(self, X, y=None):
        X = check_nonnegative_matrix(X)
        F = nmf(X.T, self._options())
        self.factorization_ = F
        self.components_ = F.W.T.copy()
        self.n_features_in_ = X.shape[1]
        self.n_iter_ = F.iterations_run
        self.objective_ = F.objective
        return F.H.T.copy()

    def fit(self, X, y=None):
        self.fit_transform(X)
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_nonnegative_matrix(X, allow_all_zero=True)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        if not np.any(X):
            return np.zeros((X.shape[0], self.n_components))
        F = nmf(X.T, self._options(), W0=self.components_.T, fit_W=False)
        return F.H.T.copy()

    def inverse_transform(self, Xt):
        check_is_fitted(self, "components_")
        return np.asarray(Xt) @ self.components_
