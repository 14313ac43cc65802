import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nmf_forge.nmf import SolverOptions, frobenius_sq, nmf
from nmf_forge.semantic import SemanticNMF, reconstruct_embedding, semantic_nmf, semantic_objective

from test_nmf import is_non_increasing


def test_zero_embedding_matches_classical_nmf():
    X = np.random.default_rng(0).random((8, 10))
    M = np.zeros((8, 8))
    opts = SolverOptions(rank=3, seed=4)
    F = semantic_nmf(X, M, opts, S0=np.zeros((3, 3)))
    G = nmf(X, opts)
    # with S = 0 and M = 0 the W ratio collapses to the classical one
    np.testing.assert_allclose(F.W, G.W, rtol=1e-9)
    np.testing.assert_allclose(F.H, G.H, rtol=1e-9)
    assert np.all(F.S == 0)


def test_zero_embedding_residual_close_to_nmf():
    X = np.random.default_rng(1).random((8, 10))
    opts = SolverOptions(rank=3, seed=2)
    F = semantic_nmf(X, np.zeros((8, 8)), opts)
    G = nmf(X, opts)
    rx = frobenius_sq(X - F.W @ F.H)
    assert abs(rx - G.objective) <= 0.05 * G.objective


def test_rank_one_consistent_pair():
    w = np.array([1.0, 2.0, 1.0])
    X = np.outer(w, [1.0, 1.0, 2.0, 1.0])
    M = np.outer(w, w)
    F = semantic_nmf(X, M, SolverOptions(rank=1, max_iters=500))
    assert F.objective < 1e-6


@settings(max_examples=15, deadline=None)
@given(d=st.integers(2, 12), n=st.integers(2, 12), r=st.integers(1, 4), seed=st.integers(0, 99))
def test_trace_non_increasing_and_factors_non_negative(d, n, r, seed):
    g = np.random.default_rng(seed)
    X = g.random((d, n))
    A = g.random((d, d))
    M = A + A.T
    F = semantic_nmf(X, M, SolverOptions(rank=r, seed=seed, max_iters=200))
    assert is_non_increasing(F.objective_trace)
    assert min(F.W.min(), F.H.min(), F.S.min()) >= 0
    assert len(F.w_step_trace) == F.iterations_run


def test_S_symmetric_and_embedding_symmetric():
    g = np.random.default_rng(5)
    X = g.random((6, 9))
    A = g.random((6, 6))
    F = semantic_nmf(X, A @ A.T, SolverOptions(rank=3, seed=1))
    np.testing.assert_array_equal(F.S, F.S.T)
    E = reconstruct_embedding(F)
    np.testing.assert_allclose(E, E.T, atol=1e-12)


def test_objective_definition():
    g = np.random.default_rng(0)
    X, M = g.random((4, 5)), g.random((4, 4))
    W, H, S = g.random((4, 2)), g.random((2, 5)), np.eye(2)
    expected = 0.5 * np.sum((X - W @ H) ** 2) + 0.5 * np.sum((M - W @ S @ W.T) ** 2)
    assert semantic_objective(X, M, W, S, H) == pytest.approx(expected)


def test_dimension_mismatch():
    with pytest.raises(ValueError, match="M must be"):
        semantic_nmf(np.ones((4, 3)), np.ones((3, 3)))


def test_negative_embedding_rejected():
    with pytest.raises(ValueError):
        semantic_nmf(np.ones((2, 3)), -np.ones((2, 2)))


def test_to_dict_carries_S():
    F = semantic_nmf(np.ones((3, 3)), np.ones((3, 3)), SolverOptions(rank=1, max_iters=5))
    d = F.to_dict(["a", "b", "c"], ["x", "y", "z"])
    assert d["S"] == F.S.tolist()


class TestSemanticNMF:
    def test_fit_transform_shapes(self):
        g = np.random.default_rng(0)
        docs = g.random((10, 6))
        est = SemanticNMF(n_components=2, random_state=0)
        Z = est.fit_transform(docs, sppmi=np.eye(6))
        assert Z.shape == (10, 2)
        assert est.components_.shape == (2, 6)
        assert est.embedding_core_.shape == (2, 2)
        assert est.transform(docs[:3]).shape == (3, 2)

    def test_requires_sppmi(self):
        with pytest.raises(ValueError, match="sppmi"):
            SemanticNMF().fit(np.ones((3, 3)))

    def test_zero_rows_transform(self):
        est = SemanticNMF(n_components=1).fit(np.ones((3, 2)), sppmi=np.ones((2, 2)))
        np.testing.assert_array_equal(est.transform(np.zeros((2, 2))), np.zeros((2, 1)))
