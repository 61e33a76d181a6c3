import numpy as np
import pytest

from simkernel.graph import (
    Graph,
    SmoothingOperator,
    check_spectral_conditions,
    generate,
    laplacian,
    make_smoothing,
    rate_normalizing_d,
)
from simkernel.kernels import sobolev_norm_sq
from simkernel.symmat import sym_eig


def test_generator_edge_counts():
    assert len(generate("cycle", 4).edges) == 4
    assert len(generate("path", 3).edges) == 2
    assert len(generate("complete", 5).edges) == 10
    assert len(generate("grid", a=3, b=4).edges) == 3 * 3 + 2 * 4
    with pytest.raises(ValueError):
        generate("path", 1)
    with pytest.raises(ValueError):
        generate("erdos_renyi", 10, prob=1.0)


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 0)])
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 3)])
    g = Graph.from_edges(3, [(1, 0), (0, 1)])
    assert g.sorted_edges() == [(0, 1)]


def test_erdos_renyi_deterministic():
    a = generate("erdos_renyi", 30, prob=0.2, seed=11)
    b = generate("erdos_renyi", 30, prob=0.2, seed=11)
    c = generate("erdos_renyi", 30, prob=0.2, seed=12)
    assert a == b and a != c


def test_laplacian_examples():
    assert np.array_equal(laplacian(generate("path", 3)),
                          [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])
    L3 = laplacian(generate("complete", 3))
    assert np.array_equal(L3, 3 * np.eye(3) - np.ones((3, 3)))
    # (0, 3, 3) and (0, 2, 2, 4) from symbolic characteristic polynomials
    assert np.allclose(sym_eig(L3).eigenvalues, [0, 3, 3], atol=1e-12)
    L4 = laplacian(generate("cycle", 4))
    assert np.allclose(sym_eig(L4).eigenvalues, [0, 2, 2, 4], atol=1e-12)
    k = np.arange(4)
    assert np.allclose(np.sort(2 - 2 * np.cos(2 * np.pi * k / 4)), [0, 2, 2, 4])


def test_laplacian_structure(rng):
    for seed in range(20):
        g = generate("erdos_renyi", 15, prob=0.3, seed=seed)
        L = laplacian(g)
        assert np.max(np.abs(L.sum(axis=1))) <= 1e-12
        assert np.linalg.norm(L @ np.ones(15)) <= 1e-10
        A = g.adjacency()
        off = ~np.eye(15, dtype=bool)
        assert np.array_equal(L[off] == -1, A[off] == 1)
        assert np.array_equal(np.diag(L), A.sum(axis=1))
        assert sym_eig(L).eigenvalues[0] >= -1e-10


def test_zero_eigenvalues_count_components():
    for seed in range(200):
        g = generate("erdos_renyi", 12, prob=0.15, seed=seed)
        W = make_smoothing(laplacian(g))
        assert W.k0 - 1 == g.n_components()


def test_connected_k0_is_two():
    for kind in ("path", "cycle", "complete"):
        assert make_smoothing(laplacian(generate(kind, 9))).k0 == 2


def test_make_smoothing_examples():
    L = laplacian(generate("cycle", 4))
    W1 = make_smoothing(L, 1, 1)
    assert np.max(np.abs(W1.W - L)) <= 1e-10
    W2 = make_smoothing(L, 1, 2)
    assert np.allclose(W2.eigenvalues, [0, 4, 4, 16], atol=1e-10)
    assert np.allclose(W2.W, L @ L, atol=1e-10)
    Wd = make_smoothing(L, 2, 1)
    assert np.allclose(Wd.eigenvalues, 2 * W1.eigenvalues)
    with pytest.raises(ValueError):
        make_smoothing(-L)
    with pytest.raises(ValueError):
        make_smoothing(L, 0, 1)


def test_fractional_power_keeps_null_space():
    W = make_smoothing(laplacian(generate("cycle", 10)), 1, 0.5)
    assert np.linalg.norm(W.W @ np.ones(10)) <= 1e-10
    assert np.allclose(W.W @ W.W, laplacian(generate("cycle", 10)), atol=1e-10)


def test_eigenvalue_indexing():
    W = make_smoothing(laplacian(generate("cycle", 4)))
    assert W.eigenvalue(1) == pytest.approx(0, abs=1e-12)
    assert W.eigenvalue(4) == pytest.approx(4)
    assert W.eigenvalue(5) == np.inf
    with pytest.raises(IndexError):
        W.eigenvalue(0)


def test_spectral_conditions_quadratic():
    lam = np.arange(1, 101, dtype=float) ** 2
    rep = check_spectral_conditions(SmoothingOperator.from_spectrum(lam))
    # direct summation oracle
    oracle = max(lam[s - 1] / s * np.sum(1 / lam[s - 1:]) for s in range(1, 101))
    assert rep.min_c_sum == pytest.approx(oracle, rel=1e-12)
    assert rep.min_c_sum <= 2
    assert rep.monotone_ok
    assert rep.min_c_ratio == pytest.approx(4.0)


def test_spectral_conditions_plateau():
    m = 30
    rep = check_spectral_conditions(SmoothingOperator.from_spectrum(np.ones(m)))
    assert not rep.monotone_ok
    assert rep.min_c_sum == pytest.approx(m - rep.k0 + 1)
    lam = np.concatenate([[0.0, 0.0], np.ones(m - 2)])
    rep = check_spectral_conditions(SmoothingOperator.from_spectrum(lam))
    assert rep.k0 == 3
    # (lambda_s / s) * (m - s + 1) peaks at s = k0
    assert rep.min_c_sum == pytest.approx((m - 3 + 1) / 3)


def test_spectral_conditions_cycle100():
    W = make_smoothing(laplacian(generate("cycle", 100)))
    rep = check_spectral_conditions(W, zeta=2)
    assert rep.zeta_ok
    assert W.eigenvalue(W.k0) == pytest.approx(2 - 2 * np.cos(2 * np.pi / 100), rel=1e-9)
    assert rep.min_c_sum >= 1 - 1e-12


def test_min_c_sum_at_least_one(rng):
    for _ in range(50):
        lam = np.sort(rng.uniform(0.01, 10, 20))
        assert check_spectral_conditions(SmoothingOperator.from_spectrum(lam)).min_c_sum >= 1 - 1e-12


def test_rate_normalizing_scale():
    m, p = 100, 1
    W = make_smoothing(laplacian(generate("cycle", m)), rate_normalizing_d(m, p), p)
    # low modes come in pairs k = 1, 1, 2, 2, ...; lambda ~ k^2
    assert W.eigenvalue(2) == pytest.approx(1.0, rel=1e-3)
    assert W.eigenvalue(4) == pytest.approx(4.0, rel=1e-2)


def test_sobolev_edge_identity(rng):
    g = generate("erdos_renyi", 12, prob=0.4, seed=3)
    L = laplacian(g)
    W = make_smoothing(L)
    a = rng.standard_normal((12, 12))
    Q = sym_eig(a + a.T).eigenvectors
    mu = rng.standard_normal(12)
    S = (Q * mu) @ Q.T
    edge_sum = sum(
        mu[k] ** 2 * sum((Q[u, k] - Q[v, k]) ** 2 for u, v in g.edges) for k in range(12)
    )
    assert sobolev_norm_sq(S, W) == pytest.approx(edge_sum, rel=1e-8)
