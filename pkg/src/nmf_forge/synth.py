"""Seeded synthetic corpora with planted topics, optional super-topics and class labels."""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .corpus import Corpus, LabelSet, write_labels


@dataclass(frozen=True)
class PlantedSpec:
    """Recipe for a planted-topic corpus.

    Every topic owns a disjoint block of ``vocab_per_topic`` words.  When
    ``hierarchy`` maps topics to super-topics, each super-topic also owns a
    block, and each token is drawn from the document's super-topic block with
    probability ``shared_rate``.  Each token is then swapped for a random word
    from another topic's block with probability ``noise_rate``.
    """

    n_topics: int = 4
    docs_per_topic: int = 15
    words_per_doc: int = 60
    vocab_per_topic: int = 20
    noise_rate: float = 0.1
    hierarchy: Mapping[int, int] | None = None
    labels: Mapping[int, str] | None = None
    seed: int = 0
    shared_rate: float = 0.4

    def __post_init__(self):
        for name in ("n_topics", "docs_per_topic", "words_per_doc", "vocab_per_topic"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0 <= self.noise_rate < 0.5:
            raise ValueError("noise_rate must lie in [0, 0.5)")
        if not 0 <= self.shared_rate < 1:
            raise ValueError("shared_rate must lie in [0, 1)")
        if self.noise_rate > 0 and self.n_topics < 2:
            raise ValueError("noise needs at least two topics")
        for mapping in (self.hierarchy, self.labels):
            if mapping is not None and set(mapping) != set(range(self.n_topics)):
                raise ValueError("hierarchy/labels must map every topic")


def topic_word(topic: int, k: int) -> str:
    return f"t{topic}w{k:02d}"


def super_word(group: int, k: int) -> str:
    return f"s{group}w{k:02d}"


@dataclass(frozen=True)
class SyntheticCorpus:
    corpus: Corpus
    labels: LabelSet
    ground_truth: dict[str, int] = field(default_factory=dict)

    def __iter__(self):
        return iter((self.corpus, self.labels, self.ground_truth))

    def truth_vector(self) -> np.ndarray:
        return np.array([self.ground_truth[doc_id] for doc_id in self.corpus.doc_ids])


def generate(spec: PlantedSpec) -> SyntheticCorpus:
    """Sample the corpus; unpacks as ``(corpus, labels, ground_truth)``."""
    rng = np.random.default_rng(spec.seed)
    T, V = spec.n_topics, spec.vocab_per_topic
    blocks = [[topic_word(t, k) for k in range(V)] for t in range(T)]
    supers = {}
    if spec.hierarchy is not None:
        supers = {g: [super_word(g, k) for k in range(V)] for g in sorted(set(spec.hierarchy.values()))}
    width = len(str(T * spec.docs_per_topic - 1))

    docs, truth = [], {}
    for t in range(T):
        others = [w for u in range(T) if u != t for w in blocks[u]]
        shared = supers.get(spec.hierarchy[t]) if spec.hierarchy is not None else None
        for i in range(spec.docs_per_topic):
            doc_id = f"doc{t * spec.docs_per_topic + i:0{width}d}"
            tokens = []
            for _ in range(spec.words_per_doc):
                if shared is not None and rng.random() < spec.shared_rate:
                    word = shared[rng.integers(V)]
                else:
                    word = blocks[t][rng.integers(V)]
                if spec.noise_rate > 0 and rng.random() < spec.noise_rate:
                    word = others[rng.integers(len(others))]
                tokens.append(word)
            docs.append((doc_id, " ".join(tokens)))
            truth[doc_id] = t

    names = spec.labels or {t: f"topic{t}" for t in range(T)}
    classes = sorted(set(names.values()))
    index = {c: k for k, c in enumerate(classes)}
    assignments = {doc_id: frozenset({index[names[t]]}) for doc_id, t in truth.items()}
    return SyntheticCorpus(Corpus(tuple(docs), "<synthetic>"), LabelSet(tuple(classes), assignments),
                           truth)


def write_synthetic(out_dir, data: SyntheticCorpus) -> Path:
    """Write ``docs/*.txt``, ``labels.csv`` and ``truth.csv`` under ``out_dir``."""
    out = Path(out_dir)
    docs_dir = out / "docs"
    docs_dir.mkdir(parents=True, exist_ok=True)
    for doc_id, text in data.corpus:
        (docs_dir / f"{doc_id}.txt").write_text(text + "\n", encoding="utf-8")
    write_labels(out / "labels.csv", data.labels, data.corpus.doc_ids)
    with (out / "truth.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["doc_id", "topic"])
        for doc_id in data.corpus.doc_ids:
            writer.writerow([doc_id, data.ground_truth[doc_id]])
    return out


def permutation_accuracy(predicted, truth) -> float:
    """Best clustering accuracy over all one-to-one relabelings of ``predicted``.

    Brute force over permutations, so meant for a handful of clusters.
    """
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError("predicted and truth must have the same length")
    pred_ids = np.unique(predicted)
    true_ids = np.unique(truth)
    k = max(len(pred_ids), len(true_ids))
    if k > 8:
        raise ValueError("brute-force matching supports at most 8 clusters")
    targets = list(true_ids) + [None] * (k - len(true_ids))
    best = 0
    for perm in itertools.permutations(targets, len(pred_ids)):
        mapping = dict(zip(pred_ids, perm))
        hits = sum(mapping[p] == t for p, t in zip(predicted, truth))
        best = max(best, hits)
    return best / len(truth)
