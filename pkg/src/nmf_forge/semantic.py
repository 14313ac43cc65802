"""Semantic NMF: document reconstruction coupled with SPPMI word-embedding reconstruction.

Minimizes ``0.5 ||X - W H||_F^2 + 0.5 ||M - W S W^T||_F^2`` with ``W``, ``H``
and the symmetric ``S`` all non-negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_nonnegative_matrix
from .nmf import (Factorization, SolverOptions, converged, frobenius_sq, nmf, random_init,
                  update_H)


@dataclass(frozen=True)
class TriFactorization(Factorization):
    S: np.ndarray | None = None
    # largest step exponent accepted for each W update (1.0 = plain multiplicative step)
    w_step_trace: tuple[float, ...] = ()

    def to_dict(self, vocab_terms=None, doc_ids=None) -> dict:
        out = super().to_dict(vocab_terms, doc_ids)
        out["S"] = self.S.tolist()
        return out


def semantic_objective(X, M, W, S, H) -> float:
    return 0.5 * frobenius_sq(X - W @ H) + 0.5 * frobenius_sq(M - W @ S @ W.T)


def _initial_S(M, r, rng):
    S = np.eye(r) * M.mean() + 0.01 * random_init((r, r), rng) * max(M.mean(), 1e-3)
    return (S + S.T) / 2


def semantic_nmf(X, M, opts: SolverOptions | None = None, *, W0=None, H0=None, S0=None,
                 max_backtracks: int = 8) -> TriFactorization:
    """Fit ``X ~ W H`` and ``M ~ W S W^T`` jointly.

    ``H`` and ``S`` take their standard multiplicative steps, and ``S`` is
    re-symmetrized after each one.  ``W`` uses the combined ratio
    ``(X H^T + 2 M W S) / (W H H^T + 2 W S W^T W S)``.  The quartic coupling
    means a full ``W`` step can overshoot; when it would raise the objective,
    the ratio's exponent is halved (up to ``max_backtracks`` times) and, failing
    that, ``W`` is left unchanged for the iteration.  Every iterate therefore
    stays non-negative and the objective never increases.
    """
    opts = opts or SolverOptions()
    X = check_nonnegative_matrix(np.asarray(X), "X")
    M = check_nonnegative_matrix(np.asarray(M), "M", allow_all_zero=True)
    d, n = X.shape
    if M.shape != (d, d):
        raise ValueError(f"M must be {d}x{d} to match the rows of X, got {M.shape}")
    r = opts.rank
    rng = np.random.default_rng(opts.seed)
    W = random_init((d, r), rng) if W0 is None else np.array(W0, dtype=np.float64)
    H = random_init((r, n), rng) if H0 is None else np.array(H0, dtype=np.float64)
    S = _initial_S(M, r, rng) if S0 is None else np.array(S0, dtype=np.float64)
    if W.shape != (d, r) or H.shape != (r, n) or S.shape != (r, r):
        raise ValueError("initial factors have the wrong shape")
    if min(W.min(), H.min(), S.min()) < 0:
        raise ValueError("initial factors must be non-negative")
    S = (S + S.T) / 2

    eps = opts.epsilon
    trace = [semantic_objective(X, M, W, S, H)]
    steps = []
    for _ in range(opts.max_iters):
        H_new = update_H(X, W, H, eps)
        WtW = W.T @ W
        S_new = S * (W.T @ M @ W) / (WtW @ S @ WtW + eps)
        S_new = (S_new + S_new.T) / 2
        base = semantic_objective(X, M, W, S_new, H_new)
        if base > trace[-1]:
            break
        numer = X @ H_new.T + 2.0 * M @ W @ S_new
        denom = W @ (H_new @ H_new.T) + 2.0 * W @ S_new @ WtW @ S_new + eps
        ratio = numer / denom
        step, value, power = 0.0, base, 1.0
        for _ in range(max_backtracks + 1):
            candidate = W * ratio if power == 1.0 else W * ratio ** power
            cand_value = semantic_objective(X, M, candidate, S_new, H_new)
            if cand_value <= base:
                W, step, value = candidate, power, cand_value
                break
            power /= 2
        H, S = H_new, S_new
        steps.append(step)
        trace.append(value)
        if converged(trace[-2], trace[-1], opts.tol):
            break
    return TriFactorization(W, H, tuple(trace), len(trace) - 1, opts.seed, S=S, w_step_trace=tuple(steps))


def reconstruct_embedding(F: TriFactorization) -> np.ndarray:
    return F.W @ F.S @ F.W.T


class SemanticNMF(TransformerMixin, BaseEstimator):
    """Semantic NMF in the scikit-learn orientation (documents as rows).

    ``fit`` needs the ``n_terms x n_terms`` SPPMI matrix passed as ``sppmi``.
    ``transform`` codes new documents against the learned topics.
    """

    def __init__(self, n_components=7, max_iter=500, tol=1e-5, random_state=0, epsilon=1e-10):
        self.n_components = n_components
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state
        self.epsilon = epsilon

    def _options(self) -> SolverOptions:
        return SolverOptions(rank=self.n_components, max_iters=self.max_iter, tol=self.tol,
                             seed=0 if self.random_state is None else int(self.random_state),
                             epsilon=self.epsilon)

    def fit_transform(self, X, y=None, *, sppmi=None):
        if sppmi is None:
            raise ValueError("SemanticNMF.fit requires the SPPMI matrix via sppmi=")
        X = check_nonnegative_matrix(X)
        F = semantic_nmf(X.T, np.asarray(sppmi, dtype=np.float64), self._options())
        self.factorization_ = F
        self.components_ = F.W.T.copy()
        self.embedding_core_ = F.S.copy()
        self.n_features_in_ = X.shape[1]
        self.n_iter_ = F.iterations_run
        self.objective_ = F.objective
        return F.H.T.copy()

    def fit(self, X, y=None, *, sppmi=None):
        self.fit_transform(X, sppmi=sppmi)
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_nonnegative_matrix(X, allow_all_zero=True)
        if not np.any(X):
            return np.zeros((X.shape[0], self.n_components))
        F = nmf(X.T, self._options(), W0=self.components_.T, fit_W=False)
        return F.H.T.copy()
