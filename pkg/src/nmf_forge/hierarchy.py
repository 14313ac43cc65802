"""Hierarchical NMF: top-down recursive splitting and bottom-up layer chains."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_nonnegative_matrix, check_rank
from .nmf import Factorization, SolverOptions, assign_documents, frobenius_sq, nmf, topic_keywords


def child_seed(parent_seed: int, child_index: int) -> int:
    """Seed for a sub-problem, independent of the order siblings are solved in."""
    return int(np.random.SeedSequence([parent_seed, child_index]).generate_state(1)[0])


@dataclass
class TopicNode:
    doc_indices: tuple[int, ...]
    level: int = 0
    path: tuple[int, ...] = ()
    factorization: Factorization | None = None
    children: list["TopicNode"] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    def leaves(self) -> list["TopicNode"]:
        return [node for node in self.walk() if node.is_leaf]

    def to_dict(self, vocab_terms=None, doc_ids=None, top_k: int | None = None) -> dict:
        out = {
            "path": list(self.path),
            "level": self.level,
            "doc_indices": list(self.doc_indices),
        }
        if doc_ids is not None:
            out["doc_ids"] = [doc_ids[i] for i in self.doc_indices]
        if self.factorization is not None:
            F = self.factorization
            out["rank"] = F.rank
            out["objective"] = F.objective
            if vocab_terms is not None and top_k:
                out["keywords"] = topic_keywords(F.W, vocab_terms, min(top_k, len(vocab_terms)))
            out["W"] = F.W.tolist()
            out["H"] = F.H.tolist()
        out["children"] = [c.to_dict(vocab_terms, doc_ids, top_k) for c in self.children]
        return out


@dataclass
class TopicTree:
    root: TopicNode
    layer_ranks: tuple[int, ...]

    def nodes(self):
        return list(self.root.walk())

    def leaves(self):
        return self.root.leaves()

    def to_dict(self, vocab_terms=None, doc_ids=None, top_k: int | None = None) -> dict:
        return {"layer_ranks": list(self.layer_ranks),
                "root": self.root.to_dict(vocab_terms, doc_ids, top_k)}


def _split(X, node: TopicNode, layer_ranks, opts: SolverOptions, seed: int) -> None:
    if node.level >= len(layer_ranks) or len(node.doc_indices) < 2:
        return
    idx = np.asarray(node.doc_indices)
    sub = X[:, idx]
    if not np.any(sub):
        return
    rank = min(layer_ranks[node.level], len(idx))
    F = nmf(sub, opts.with_(rank=rank, seed=seed))
    node.factorization = F
    topics = assign_documents(F.H)
    for k in range(rank):
        child = TopicNode(tuple(int(i) for i in idx[topics == k]), node.level + 1, node.path + (k,))
        node.children.append(child)
        _split(X, child, layer_ranks, opts, child_seed(seed, k))


def topdown_hnmf(X, layer_ranks, opts: SolverOptions | None = None) -> TopicTree:
    """Recursively factorize and split the document set.

    Level ``i`` nodes are factorized at rank ``layer_ranks[i]`` (clamped to the
    node's document count), and documents are routed to one child per topic
    by their heaviest topic.  Nodes holding fewer than two documents, or
    sitting at depth ``len(layer_ranks)``, are leaves.  A typical run uses
    ``[root_rank, branching]``, e.g. ``[7, 3]``.
    """
    opts = opts or SolverOptions()
    X = check_nonnegative_matrix(np.asarray(X), "X")
    layer_ranks = tuple(check_rank(r) for r in layer_ranks)
    if not layer_ranks:
        raise ValueError("layer_ranks must not be empty")
    if layer_ranks[0] < 2 or any(r < 2 for r in layer_ranks[1:]):
        raise ValueError("every level must split into at least 2 topics")
    root = TopicNode(tuple(range(X.shape[1])))
    _split(X, root, layer_ranks, opts, opts.seed)
    return TopicTree(root, layer_ranks)


@dataclass(frozen=True)
class LayerChain:
    """``X ~ W(0) W(1) ... W(L) H(L)`` with the residual after each layer."""

    layers: tuple[np.ndarray, ...]
    H: np.ndarray
    residuals: tuple[float, ...]
    ranks: tuple[int, ...]
    factorizations: tuple[Factorization, ...] = ()

    def __len__(self) -> int:
        return len(self.layers)

    def to_dict(self, vocab_terms=None, doc_ids=None, top_k: int | None = None) -> dict:
        out = {"ranks": list(self.ranks), "residuals": list(self.residuals), "layers": []}
        for i, Wi in enumerate(self.layers):
            layer = {"rank": self.ranks[i], "W": Wi.tolist()}
            if vocab_terms is not None and top_k:
                layer["keywords"] = topic_keywords(layer_dictionary(self, i), vocab_terms,
                                                   min(top_k, len(vocab_terms)))
            out["layers"].append(layer)
        out["H"] = self.H.tolist()
        if doc_ids is not None:
            out["doc_ids"] = list(doc_ids)
        return out


def layer_dictionary(chain: LayerChain, layer: int) -> np.ndarray:
    """Effective ``d x k_layer`` dictionary ``W(0) W(1) ... W(layer)``."""
    if not 0 <= layer < len(chain.layers):
        raise IndexError(f"layer {layer} out of range for {len(chain.layers)} layers")
    return reduce(np.matmul, chain.layers[: layer + 1])


def bottomup_hnmf(X, rank_sequence, opts: SolverOptions | None = None) -> LayerChain:
    """Greedy layer-wise factorization.

    Layer 0 factorizes ``X`` at the first rank; each later layer factorizes
    the previous coding matrix ``H`` at the next, smaller rank.  Layer 0 uses
    ``opts.seed`` so a one-layer chain matches :func:`nmf` exactly.
    """
    opts = opts or SolverOptions()
    X = check_nonnegative_matrix(np.asarray(X), "X")
    ranks = tuple(check_rank(r) for r in rank_sequence)
    if not ranks:
        raise ValueError("rank_sequence must not be empty")
    if any(a <= b for a, b in zip(ranks, ranks[1:])):
        raise ValueError(f"rank sequence must be strictly decreasing, got {list(ranks)}")
    if len(ranks) > 1 and ranks[0] < 2:
        raise ValueError("first rank must be >= 2")

    layers, factorizations, residuals = [], [], []
    target = X
    product = np.eye(X.shape[0])
    for i, rank in enumerate(ranks):
        seed = opts.seed if i == 0 else child_seed(opts.seed, i)
        F = nmf(target, opts.with_(rank=rank, seed=seed))
        layers.append(F.W)
        factorizations.append(F)
        product = product @ F.W
        residuals.append(frobenius_sq(X - product @ F.H))
        target = F.H
        if not np.any(target):
            raise ValueError(f"layer {i} produced an all-zero coding matrix")
    return LayerChain(tuple(layers), factorizations[-1].H, tuple(residuals), ranks,
                      tuple(factorizations))


def merge_map(chain: LayerChain, layer: int) -> np.ndarray:
    """For every layer-0 topic, the index of the layer-``layer`` topic it merges into."""
    if layer == 0:
        return np.arange(chain.ranks[0])
    return np.argmax(reduce(np.matmul, chain.layers[1: layer + 1]), axis=1)


class TopDownHNMF(BaseEstimator):
    """Top-down hierarchical NMF over documents given as rows.

    ``fit`` builds ``tree_``; ``labels_`` gives each document's leaf path.
    """

    def __init__(self, layer_ranks=(7, 3), max_iter=500, tol=1e-5, random_state=0,
                 epsilon=1e-10):
        self.layer_ranks = layer_ranks
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state
        self.epsilon = epsilon

    def fit(self, X, y=None):
        X = check_nonnegative_matrix(X)
        opts = SolverOptions(rank=self.layer_ranks[0], max_iters=self.max_iter, tol=self.tol,
                             seed=int(self.random_state or 0), epsilon=self.epsilon)
        self.tree_ = topdown_hnmf(X.T, self.layer_ranks, opts)
        labels = [None] * X.shape[0]
        for leaf in self.tree_.leaves():
            for i in leaf.doc_indices:
                labels[i] = leaf.path
        self.labels_ = labels
        self.n_features_in_ = X.shape[1]
        return self


class BottomUpHNMF(TransformerMixin, BaseEstimator):
    """Bottom-up hierarchical NMF; ``transform`` output is the top-layer coding."""

    def __init__(self, rank_sequence=(7, 5, 3), max_iter=500, tol=1e-5, random_state=0,
                 epsilon=1e-10):
        self.rank_sequence = rank_sequence
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state
        self.epsilon = epsilon

    def fit_transform(self, X, y=None):
        X = check_nonnegative_matrix(X)
        opts = SolverOptions(rank=self.rank_sequence[0], max_iters=self.max_iter, tol=self.tol,
                             seed=int(self.random_state or 0), epsilon=self.epsilon)
        self.chain_ = bottomup_hnmf(X.T, self.rank_sequence, opts)
        self.components_ = layer_dictionary(self.chain_, len(self.chain_) - 1).T
        self.n_features_in_ = X.shape[1]
        return self.chain_.H.T.copy()

    def fit(self, X, y=None):
        self.fit_transform(X)
        return self

    def transform(self, X):
        check_is_fitted(self, "chain_")
        X = check_nonnegative_matrix(X, allow_all_zero=True)
        if not np.any(X):
            return np.zeros((X.shape[0], self.chain_.ranks[-1]))
        opts = SolverOptions(rank=self.chain_.ranks[-1], max_iters=self.max_iter, tol=self.tol,
                             seed=int(self.random_state or 0), epsilon=self.epsilon)
        return nmf(X.T, opts, W0=self.components_.T, fit_W=False).H.T.copy()
