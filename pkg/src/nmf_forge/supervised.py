"""Supervised (SNMF) and semi-supervised (SSNMF) NMF with label reconstruction and scoring.

Both fit ``||X - W H||_F^2 + lam * ||L * (Y - B H)||_F^2``; supervised NMF is
the case where every column of the mask ``L`` is known and ``X`` holds only
training documents.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_nonnegative_matrix, check_positive, check_rank, check_same_columns
from .corpus import LabelSet
from .nmf import SolverOptions, converged, frobenius_sq, random_init, update_W


class NearSingularWarning(RuntimeWarning):
    """``W^T W`` was too ill-conditioned to invert directly and was regularized."""


class DegenerateColumnWarning(RuntimeWarning):
    """A score column was all zero, so its prediction defaulted to class 0."""


@dataclass(frozen=True)
class LabelMatrix:
    """Binary ``p x n`` class indicator matrix."""

    Y: np.ndarray
    classes: tuple[str, ...]
    single_label: bool = False

    def __post_init__(self):
        Y = np.asarray(self.Y, dtype=np.float64)
        if Y.ndim != 2 or Y.shape[0] != len(self.classes):
            raise ValueError("Y must have one row per class")
        if not np.all((Y == 0) | (Y == 1)):
            raise ValueError("Y must be binary")
        if self.single_label and not np.all(Y.sum(axis=0) == 1):
            raise ValueError("single-label mode needs exactly one class per document")
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "classes", tuple(self.classes))

    @classmethod
    def from_labelset(cls, labels: LabelSet, doc_ids, single_label: bool = False) -> "LabelMatrix":
        Y = np.zeros((len(labels.classes), len(doc_ids)))
        for j, doc_id in enumerate(doc_ids):
            for k in labels.labels_of(doc_id):
                Y[k, j] = 1.0
        return cls(Y, labels.classes, single_label)

    def to_labelset(self, doc_ids) -> LabelSet:
        assignments = {doc_id: frozenset(np.flatnonzero(self.Y[:, j]).tolist())
                       for j, doc_id in enumerate(doc_ids) if self.Y[:, j].any()}
        return LabelSet(self.classes, assignments)


@dataclass(frozen=True)
class MaskMatrix:
    """``p x n`` mask whose columns are all ones (label known) or all zeros."""

    L: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.L, dtype=np.float64)
        if L.ndim != 2:
            raise ValueError("mask must be 2-D")
        col_min, col_max = L.min(axis=0), L.max(axis=0)
        if not np.all((col_min == col_max) & ((col_max == 0) | (col_max == 1))):
            raise ValueError("every mask column must be all ones or all zeros")
        object.__setattr__(self, "L", L)

    @classmethod
    def from_known(cls, known, p: int) -> "MaskMatrix":
        known = np.asarray(known, dtype=bool)
        return cls(np.repeat(known[None, :].astype(np.float64), p, axis=0))

    @property
    def known(self) -> np.ndarray:
        return self.L[0].astype(bool) if self.L.shape[0] else np.zeros(self.L.shape[1], bool)


@dataclass(frozen=True)
class SupervisedModel:
    W: np.ndarray
    H: np.ndarray
    B: np.ndarray
    lam: float
    objective_trace: tuple[float, ...] = ()
    iterations_run: int = 0
    seed: int | None = None

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]


def supervised_objective(X, Y, L, W, H, B, lam) -> float:
    return frobenius_sq(X - W @ H) + lam * frobenius_sq(L * (Y - B @ H))


def _fit(X, Y, L, rank, lam, opts, W0=None, H0=None, B0=None) -> SupervisedModel:
    d, n = X.shape
    p = Y.shape[0]
    rng = np.random.default_rng(opts.seed)
    W = random_init((d, rank), rng) if W0 is None else np.array(W0, dtype=np.float64)
    H = random_init((rank, n), rng) if H0 is None else np.array(H0, dtype=np.float64)
    B = random_init((p, rank), rng) if B0 is None else np.array(B0, dtype=np.float64)
    if W.shape != (d, rank) or H.shape != (rank, n) or B.shape != (p, rank):
        raise ValueError("initial factors have the wrong shape")
    eps = opts.epsilon
    LY = L * Y
    trace = [supervised_objective(X, Y, L, W, H, B, lam)]
    for _ in range(opts.max_iters):
        H_new = H * (W.T @ X + lam * B.T @ LY) / (W.T @ W @ H + lam * B.T @ (L * (B @ H)) + eps)
        B_new = B * (LY @ H_new.T) / ((L * (B @ H_new)) @ H_new.T + eps)
        W_new = update_W(X, W, H_new, eps)
        value = supervised_objective(X, Y, L, W_new, H_new, B_new, lam)
        if value > trace[-1]:
            break
        W, H, B = W_new, H_new, B_new
        trace.append(value)
        if converged(trace[-2], trace[-1], opts.tol):
            break
    return SupervisedModel(W, H, B, float(lam), tuple(trace), len(trace) - 1, opts.seed)


def _check_inputs(X, Y):
    X = check_nonnegative_matrix(np.asarray(X), "X")
    Y = np.asarray(getattr(Y, "Y", Y), dtype=np.float64)
    if Y.ndim != 2:
        raise ValueError("Y must be a p x n matrix")
    if np.any(Y < 0):
        raise ValueError("Y must be non-negative")
    check_same_columns(X, Y, ("X", "Y"))
    return X, Y


def snmf_train(X_train, Y_train, rank: int, lam: float = 1.0,
               opts: SolverOptions | None = None, **init) -> SupervisedModel:
    """Fit ``||X - W H||^2 + lam ||Y - B H||^2`` on training documents."""
    opts = opts or SolverOptions()
    X, Y = _check_inputs(X_train, Y_train)
    lam = check_positive(lam, "lambda")
    return _fit(X, Y, np.ones_like(Y), check_rank(rank), lam, opts, **init)


def snmf_predict(model: SupervisedModel, X_test) -> np.ndarray:
    """Label scores ``B (W^T W)^{-1} W^T X_test`` for held-out documents.

    Scores are not clipped.  If ``W^T W`` is numerically singular, a ridge of
    ``1e-10 * trace(W^T W) / r`` is added and :class:`NearSingularWarning` raised.
    """
    X_test = np.asarray(X_test, dtype=np.float64)
    W = model.W
    if X_test.ndim != 2 or X_test.shape[0] != W.shape[0]:
        raise ValueError(f"X_test must have {W.shape[0]} rows")
    gram = W.T @ W
    r = gram.shape[0]
    if np.linalg.cond(gram) > 1e12:
        gram = gram + 1e-10 * np.trace(gram) / r * np.eye(r)
        warnings.warn("W^T W is near singular; solving a regularized system",
                      NearSingularWarning, stacklevel=2)
    return model.B @ np.linalg.solve(gram, W.T @ X_test)


def ssnmf(X, Y, L, rank: int, lam: float = 1.0, opts: SolverOptions | None = None, **init):
    """Semi-supervised NMF over all documents, with unknown labels masked out.

    Returns the model and the reconstructed labels ``(1 - L) * (B H)``, which
    are zero on every known column.
    """
    opts = opts or SolverOptions()
    X, Y = _check_inputs(X, Y)
    L = L if isinstance(L, MaskMatrix) else MaskMatrix(L)
    if L.L.shape != Y.shape:
        raise ValueError(f"mask shape {L.L.shape} does not match Y {Y.shape}")
    if not np.any(L.L):
        raise ValueError("no supervision: the mask has no known columns")
    lam = check_positive(lam, "lambda")
    model = _fit(X, Y, L.L, check_rank(rank), lam, opts, **init)
    Y_prime = (1.0 - L.L) * (model.B @ model.H)
    return model, Y_prime


def binarize_prediction(scores, return_flags: bool = False):
    """Put a single 1 at each column's largest entry (lowest row on ties)."""
    scores = np.asarray(scores, dtype=np.float64)
    out = np.zeros_like(scores)
    if scores.size:
        out[np.argmax(scores, axis=0), np.arange(scores.shape[1])] = 1.0
    flags = ~np.any(scores != 0, axis=0)
    if flags.any():
        warnings.warn(f"{int(flags.sum())} all-zero score columns defaulted to class 0",
                      DegenerateColumnWarning, stacklevel=2)
    return (out, flags) if return_flags else out


def las(predicted_binary, Y_true) -> float:
    """Labeling accuracy: share of columns whose predicted class is one of the true labels."""
    P = np.asarray(predicted_binary)
    T = np.asarray(Y_true)
    if P.shape != T.shape:
        raise ValueError(f"shape mismatch: {P.shape} vs {T.shape}")
    k = P.shape[1]
    if k == 0:
        raise ValueError("no documents to score")
    if not np.all(P.sum(axis=0) == 1):
        raise ValueError("predicted matrix must have exactly one 1 per column")
    hits = T[np.argmax(P, axis=0), np.arange(k)] > 0
    return float(hits.sum() / k)


def confusion_counts(predicted_binary, Y_true) -> np.ndarray:
    """``p x p`` counts, rows = true class, columns = predicted class.

    A multi-label document adds one count for each of its true classes.
    """
    P = np.asarray(predicted_binary)
    T = np.asarray(Y_true)
    pred = np.argmax(P, axis=0)
    C = np.zeros((T.shape[0], T.shape[0]), dtype=np.int64)
    for j, k in enumerate(pred):
        for t in np.flatnonzero(T[:, j]):
            C[t, k] += 1
    return C


def split_indices(n: int, fraction: float, seed: int):
    """Random train/test column indices; the train side has ``round(fraction * n)`` columns."""
    if not 0 < fraction < 1:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    n_train = int(np.floor(fraction * n + 0.5))
    if n_train == 0 or n_train == n:
        raise ValueError(f"a {fraction} split of {n} documents leaves one side empty")
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split_train_test(X, Y, fraction: float = 0.75, seed: int = 0, mask: bool = False):
    """Split columns for SNMF, or (``mask=True``) build the SSNMF mask over intact data."""
    X = np.asarray(X)
    Y = np.asarray(getattr(Y, "Y", Y))
    check_same_columns(X, Y, ("X", "Y"))
    train, test = split_indices(X.shape[1], fraction, seed)
    if mask:
        known = np.zeros(X.shape[1], dtype=bool)
        known[train] = True
        return MaskMatrix.from_known(known, Y.shape[0])
    return X[:, train], Y[:, train], X[:, test], Y[:, test]


def run_trials(X, Y, method: str, rank: int, lam: float = 1.0, fraction: float = 0.75,
               trials: int = 10, seed: int = 0, opts: SolverOptions | None = None,
               classes=None) -> dict:
    """Repeat a random split ``trials`` times and score each with LAS.

    Trial ``i`` uses seed ``seed + i`` for both the split and the solver.
    ``method`` is ``"snmf"`` or ``"ssnmf"``.
    """
    if method not in ("snmf", "ssnmf"):
        raise ValueError(f"unknown method {method!r}")
    opts = opts or SolverOptions()
    X, Y = _check_inputs(X, Y)
    results = []
    for i in range(trials):
        trial_seed = seed + i
        trial_opts = opts.with_(rank=rank, seed=trial_seed)
        train, test = split_indices(X.shape[1], fraction, trial_seed)
        if method == "snmf":
            model = snmf_train(X[:, train], Y[:, train], rank, lam, trial_opts)
            scores = snmf_predict(model, X[:, test])
        else:
            known = np.zeros(X.shape[1], dtype=bool)
            known[train] = True
            _, Y_prime = ssnmf(X, Y, MaskMatrix.from_known(known, Y.shape[0]), rank, lam,
                               trial_opts)
            scores = Y_prime[:, test]
        predicted = binarize_prediction(scores)
        results.append({
            "seed": trial_seed,
            "las": las(predicted, Y[:, test]),
            "confusion": confusion_counts(predicted, Y[:, test]).tolist(),
        })
    scores = np.array([t["las"] for t in results])
    return {
        "method": method,
        "classes": list(classes) if classes is not None else list(range(Y.shape[0])),
        "trials": results,
        "mean_las": float(scores.mean()),
        "std_las": float(scores.std()),
    }


def _indicator(y):
    """Return ``(Y (n x p), classes, multilabel)`` from 1-D labels or a 2-D indicator."""
    y = np.asarray(y)
    if y.ndim == 2:
        return y.astype(np.float64), np.arange(y.shape[1]), True
    classes = np.unique(y)
    return (y[:, None] == classes[None, :]).astype(np.float64), classes, False


class SupervisedNMFClassifier(ClassifierMixin, BaseEstimator):
    """Supervised NMF classifier, documents as rows.

    ``y`` may be a 1-D label vector or an ``(n_documents, n_classes)``
    indicator matrix for multi-label data.
    """

    def __init__(self, n_components=3, lam=1.0, max_iter=500, tol=1e-5, random_state=0,
                 epsilon=1e-10):
        self.n_components = n_components
        self.lam = lam
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state
        self.epsilon = epsilon

    def fit(self, X, y):
        X = check_nonnegative_matrix(X)
        Y, self.classes_, self.multilabel_ = _indicator(y)
        opts = SolverOptions(rank=self.n_components, max_iters=self.max_iter, tol=self.tol,
                             seed=int(self.random_state or 0), epsilon=self.epsilon)
        self.model_ = snmf_train(X.T, Y.T, self.n_components, self.lam, opts)
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        X = check_nonnegative_matrix(X, allow_all_zero=True)
        return snmf_predict(self.model_, X.T).T

    def predict(self, X):
        winners = np.argmax(self.decision_function(X), axis=1)
        if self.multilabel_:
            out = np.zeros((len(winners), len(self.classes_)), dtype=int)
            out[np.arange(len(winners)), winners] = 1
            return out
        return self.classes_[winners]

    def score(self, X, y, sample_weight=None):
        """Labeling accuracy score, which equals plain accuracy for single-label ``y``."""
        y = np.asarray(y)
        Y = y if y.ndim == 2 else y[:, None] == self.classes_[None, :]
        P = binarize_prediction(self.decision_function(X).T)
        return las(P, np.asarray(Y, dtype=np.float64).T)


class SemiSupervisedNMF(BaseEstimator):
    """Transductive semi-supervised NMF.

    Follows the scikit-learn semi-supervised convention: in a 1-D ``y``,
    unlabeled documents are marked ``-1``.  With a 2-D indicator ``y``,
    pass ``known`` to mark labeled rows.  After ``fit``, ``label_scores_``
    holds the reconstructed scores for the unlabeled documents (zero on
    labeled ones) and ``transduction_`` the label of every document.
    """

    def __init__(self, n_components=3, lam=1.0, max_iter=500, tol=1e-5, random_state=0,
                 epsilon=1e-10):
        self.n_components = n_components
        self.lam = lam
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state
        self.epsilon = epsilon

    def fit(self, X, y, known=None):
        X = check_nonnegative_matrix(X)
        y = np.asarray(y)
        if y.ndim == 1:
            if known is None:
                known = y != -1
            known = np.asarray(known, dtype=bool)
            self.classes_ = np.unique(y[known])
            Y = (y[:, None] == self.classes_[None, :]).astype(np.float64)
        else:
            if known is None:
                raise ValueError("a 2-D label matrix needs an explicit known mask")
            known = np.asarray(known, dtype=bool)
            self.classes_ = np.arange(y.shape[1])
            Y = y.astype(np.float64)
        Y[~known] = 0.0
        opts = SolverOptions(rank=self.n_components, max_iters=self.max_iter, tol=self.tol,
                             seed=int(self.random_state or 0), epsilon=self.epsilon)
        L = MaskMatrix.from_known(known, Y.shape[1])
        self.model_, Y_prime = ssnmf(X.T, Y.T, L, self.n_components, self.lam, opts)
        self.label_scores_ = Y_prime.T
        winners = np.argmax(Y_prime, axis=0)
        observed = np.argmax(Y.T, axis=0)
        self.transduction_ = self.classes_[np.where(known, observed, winners)]
        self.n_features_in_ = X.shape[1]
        return self
