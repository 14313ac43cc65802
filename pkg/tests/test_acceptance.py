"""Acceptance gate: one PASS/FAIL line per criterion (run with ``pytest -s`` to see them)."""

import json
import time

import numpy as np
import pytest

from nmf_forge.cli import main
from nmf_forge.cooccurrence import count_cooccurrences, sppmi
from nmf_forge.corpus import Corpus
from nmf_forge.hierarchy import bottomup_hnmf, merge_map, topdown_hnmf
from nmf_forge.nmf import SolverOptions, assign_documents, nmf
from nmf_forge.pipeline import COMMANDS
from nmf_forge.semantic import semantic_nmf
from nmf_forge.supervised import (MaskMatrix, LabelMatrix, SupervisedModel, run_trials,
                                  snmf_predict, snmf_train, ssnmf)
from nmf_forge.synth import PlantedSpec, generate, permutation_accuracy, write_synthetic
from nmf_forge.text import VectorizerParams, build_vocabulary, highlight_keywords, tfidf_matrix, tokenize

from conftest import OPEN_VOCAB, block_matrix
from oracles import cooccurrence_oracle, sppmi_oracle

HIERARCHY = {0: 0, 1: 0, 2: 1, 3: 1}


def verdict(number, title, ok, detail):
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})")
    assert ok, detail


def non_increasing(trace, slack=1e-8):
    return all(b <= a + slack * abs(a) for a, b in zip(trace, trace[1:]))


def planted_matrix(spec):
    data = generate(spec)
    X = tfidf_matrix(data.corpus, build_vocabulary(data.corpus, OPEN_VOCAB))
    return data, X


def test_1_monotone_descent():
    start = time.perf_counter()
    failures = []
    for seed in range(20):
        g = np.random.default_rng(seed)
        d, n, r = int(g.integers(2, 51)), int(g.integers(4, 51)), int(g.integers(1, 6))
        p = int(g.integers(2, 5))
        X = g.random((d, n))
        A = g.random((d, d))
        Y = np.eye(p)[:, g.integers(0, p, n)]
        known = np.arange(n) % 4 != 0
        opts = SolverOptions(rank=r, seed=seed)
        traces = {
            "nmf": nmf(X, opts).objective_trace,
            "semantic": semantic_nmf(X, A + A.T, opts).objective_trace,
            "snmf": snmf_train(X, Y, r, 1.0, opts).objective_trace,
            "ssnmf": ssnmf(X, Y, MaskMatrix.from_known(known, p), r, 1.0, opts)[0].objective_trace,
        }
        failures += [(seed, name) for name, t in traces.items() if not non_increasing(t)]
    elapsed = time.perf_counter() - start
    verdict(1, "monotone descent", not failures and elapsed < 10,
            f"{80 - len(failures)}/80 traces non-increasing, {elapsed:.2f}s < 10s")


def test_2_exact_recovery():
    start = time.perf_counter()
    rank_one = nmf(np.outer([1.0, 2.0], [1.0, 1.0, 1.0]), SolverOptions(rank=1, max_iters=500))
    blocks = nmf(block_matrix(), SolverOptions(rank=2, max_iters=500))
    elapsed = time.perf_counter() - start
    worst = max(rank_one.objective, blocks.objective)
    ok = worst < 1e-6 and rank_one.iterations_run <= 500 and blocks.iterations_run <= 500
    verdict(2, "exact recovery", ok and elapsed < 1,
            f"objectives {rank_one.objective:.2e}, {blocks.objective:.2e} < 1e-6, {elapsed:.3f}s < 1s")


def test_3_sppmi_oracle():
    start = time.perf_counter()
    g = np.random.default_rng(2024)
    alphabet = ["ab", "cd", "ef", "gh", "ij", "kl"]
    worst, symmetric, non_negative = 0.0, True, True
    for _ in range(5):
        n_docs = int(g.integers(1, 4))
        lengths = g.multinomial(int(g.integers(n_docs * 2, 31)), np.ones(n_docs) / n_docs)
        texts = [" ".join(g.choice(alphabet, size=max(int(k), 1))) for k in lengths]
        texts = [" ".join(t.split()[:30 // n_docs]) for t in texts]
        corpus = Corpus.from_texts(texts)
        vocab = build_vocabulary(corpus, OPEN_VOCAB)
        for window in (1, 2, 5):
            C = count_cooccurrences(corpus, vocab, window)
            expected = cooccurrence_oracle([tokenize(t) for t in corpus.texts], vocab.terms, window)
            worst = max(worst, float(np.max(np.abs(C.counts - np.array(expected)))))
            if not C.counts.any():
                continue
            for shift in (1.0, 5.0):
                M = sppmi(C, shift).values
                worst = max(worst, float(np.max(np.abs(M - np.array(sppmi_oracle(expected, shift))))))
                symmetric &= bool(np.array_equal(M, M.T))
                non_negative &= bool(np.all(M >= 0))
    elapsed = time.perf_counter() - start
    verdict(3, "SPPMI oracle", worst <= 1e-12 and symmetric and non_negative and elapsed < 1,
            f"max |diff| {worst:.1e} <= 1e-12, symmetric={symmetric}, "
            f"non-negative={non_negative}, {elapsed:.3f}s < 1s")


def test_4_planted_topic_recovery():
    start = time.perf_counter()
    scores = []
    for seed in range(10):
        data = generate(PlantedSpec(n_topics=4, docs_per_topic=15, words_per_doc=60,
                                    noise_rate=0.1, seed=seed))
        X = tfidf_matrix(data.corpus, build_vocabulary(data.corpus))
        F = nmf(X.values, SolverOptions(rank=4, seed=seed))
        scores.append(permutation_accuracy(assign_documents(F.H), data.truth_vector()))
    elapsed = time.perf_counter() - start
    good = sum(s >= 0.9 for s in scores)
    verdict(4, "planted topic recovery", good >= 9 and elapsed < 30,
            f"{good}/10 seeds with accuracy >= 0.9 (need 9), min {min(scores):.3f}, {elapsed:.2f}s < 30s")


def _topic_of_layer0(chain, truth, n_topics):
    """Map each layer-0 topic to the planted topic most of its documents come from."""
    assigned = assign_documents(chain.factorizations[0].H)
    mapping = {}
    for k in range(chain.ranks[0]):
        members = truth[assigned == k]
        if not len(members):
            return None
        mapping[k] = int(np.bincount(members, minlength=n_topics).argmax())
    return mapping if sorted(mapping.values()) == list(range(n_topics)) else None


def test_5_hierarchy_recovery():
    start = time.perf_counter()
    bottom_ok = top_ok = 0
    for seed in range(10):
        data, X = planted_matrix(PlantedSpec(n_topics=4, hierarchy=HIERARCHY, seed=seed))
        truth = data.truth_vector()
        groups = np.array([HIERARCHY[t] for t in truth])

        chain = bottomup_hnmf(X.values, [4, 2], SolverOptions(seed=seed))
        mapping = _topic_of_layer0(chain, truth, 4)
        if mapping is not None:
            merged = merge_map(chain, 1)
            pairs = {(HIERARCHY[mapping[k]], int(merged[k])) for k in range(4)}
            bottom_ok += len(pairs) == 2 and len({b for _, b in pairs}) == 2

        tree = topdown_hnmf(X.values, [2, 2], SolverOptions(seed=seed))
        parts = [set(groups[list(c.doc_indices)]) for c in tree.root.children]
        top_ok += len(parts) == 2 and all(len(p) == 1 for p in parts) and parts[0] != parts[1]
    elapsed = time.perf_counter() - start
    verdict(5, "hierarchy recovery", bottom_ok >= 8 and top_ok >= 8 and elapsed < 60,
            f"bottom-up merge map {bottom_ok}/10, top-down level-0 split {top_ok}/10 "
            f"(need 8 each), {elapsed:.2f}s < 60s")


def test_6_supervised_separability():
    start = time.perf_counter()
    data = generate(PlantedSpec(n_topics=3, docs_per_topic=15, noise_rate=0.0, seed=0))
    X = tfidf_matrix(data.corpus, build_vocabulary(data.corpus, OPEN_VOCAB))
    Y = LabelMatrix.from_labelset(data.labels, data.corpus.doc_ids).Y
    results = {m: run_trials(X.values, Y, m, rank=3, lam=1.0, fraction=0.75, trials=10, seed=0)
               for m in ("snmf", "ssnmf")}
    elapsed = time.perf_counter() - start
    means = {m: r["mean_las"] for m, r in results.items()}
    verdict(6, "supervised separability", all(v == 1.0 for v in means.values()) and elapsed < 60,
            f"mean LAS snmf={means['snmf']:.3f} ssnmf={means['ssnmf']:.3f} (need 1.0), "
            f"{elapsed:.2f}s < 60s")


def test_7_mask_algebra():
    violations = 0
    for seed in range(10):
        g = np.random.default_rng(seed)
        X = g.random((12, 16))
        Y = np.eye(3)[:, g.integers(0, 3, 16)]
        known = g.random(16) < 0.6
        known[0] = True
        L = MaskMatrix.from_known(known, 3)
        _, Y_prime = ssnmf(X, Y, L, 3, 1.0, SolverOptions(seed=seed, max_iters=100))
        violations += int(np.count_nonzero(Y_prime * L.L))
    _, Y_all = ssnmf(X, Y, np.ones_like(Y), 3, 1.0, SolverOptions(max_iters=100))
    verdict(7, "mask algebra", violations == 0 and not Y_all.any(),
            f"{violations} nonzero entries of Y' * L over 10 runs, all-ones mask max |Y'| "
            f"= {np.abs(Y_all).max():.1e}")


def _saliva_corpus():
    g = np.random.default_rng(7)
    texts = []
    for name in ("court", "crime", "evidence"):
        for _ in range(6):
            words = [f"{name}{k}" for k in range(10) for _ in range(int(g.integers(3, 6)))]
            words += ["saliva"] * 2
            g.shuffle(words)
            texts.append(" ".join(words))
    return Corpus.from_texts(texts)


def _best_rank(W, vocab, term):
    i = vocab.index[term]
    # 1-based rank of the term inside each topic column, ties broken alphabetically
    ranks = []
    for k in range(W.shape[1]):
        order = np.lexsort((np.array(vocab.terms), -W[:, k]))
        ranks.append(int(np.flatnonzero(order == i)[0]) + 1)
    return ranks


def test_8_keyword_highlighting():
    corpus = _saliva_corpus()
    X = tfidf_matrix(corpus, build_vocabulary(corpus, VectorizerParams(min_df=0.0, max_df=1.0)))
    opts = SolverOptions(rank=3, seed=0)
    before = _best_rank(nmf(X.values, opts).W, X.vocab, "saliva")
    Xh = highlight_keywords(X, ["saliva"], factor=5)
    after = _best_rank(nmf(Xh.values, opts).W, Xh.vocab, "saliva")
    verdict(8, "keyword highlighting", before == [11, 11, 11] and min(after) < min(before),
            f"saliva rank per topic {before} -> {after}; best {min(before)} -> {min(after)}")


def test_9_cli_determinism(tmp_path):
    src = write_synthetic(tmp_path / "synth", generate(PlantedSpec(n_topics=3, docs_per_topic=8,
                                                                   seed=4)))
    identical = []
    for command in COMMANDS:
        cfg = tmp_path / f"{command}.json"
        cfg.write_text(json.dumps({"corpus": str(src / "docs"), "labels": str(src / "labels.csv"),
                                   "min_df": 0.0, "max_df": 1.0, "rank": 3, "ranks": [3, 2],
                                   "trials": 3, "max_iters": 200, "seed": 11}))
        outputs = []
        for run in ("a", "b"):
            out = tmp_path / command / run
            assert main([command, "--config", str(cfg), "--out", str(out)]) == 0
            outputs.append((out / "report.json").read_bytes())
        identical.append(outputs[0] == outputs[1])
    verdict(9, "CLI determinism", all(identical),
            f"{sum(identical)}/{len(COMMANDS)} commands byte-identical across reruns")


def test_10_prediction_scale_invariance():
    worst = 0.0
    for seed in range(10):
        g = np.random.default_rng(seed)
        X = g.random((15, 20))
        Y = np.eye(3)[:, g.integers(0, 3, 20)]
        model = snmf_train(X[:, :15], Y[:, :15], 4, 1.0, SolverOptions(seed=seed))
        D = np.diag(g.uniform(0.2, 5.0, 4))
        # rescaling W by D must be compensated by B D: B (W^T W)^-1 W^T maps through D^-1
        scaled = SupervisedModel(model.W @ D, np.linalg.solve(D, model.H), model.B @ D, model.lam)
        diff = np.abs(snmf_predict(model, X[:, 15:]) - snmf_predict(scaled, X[:, 15:]))
        worst = max(worst, float(diff.max()))
    verdict(10, "prediction scale invariance", worst < 1e-8,
            f"max |delta| {worst:.1e} < 1e-8 under W->WD, B->BD")
