import math

import numpy as np
import pytest

from simkernel.graph import generate, laplacian, make_smoothing
from simkernel.kernels import make_target
from simkernel.rng import derive_seed
from simkernel.sampling import (
    Dataset,
    bernstein_hilbert_rhs,
    bernstein_operator_rhs,
    design_stat,
    mean_design,
    mean_design_enumerated,
    noise_matrix,
    sample_dataset,
    verify_xi_concentration,
    violation_allowance,
    xi_bound,
)


def ds_of(m, triples):
    arr = np.array(triples, dtype=np.int64).reshape(-1, 3)
    return Dataset(m, arr[:, 0], arr[:, 1], arr[:, 2])


def test_deterministic_labels_at_boundary():
    assert np.all(sample_dataset(np.ones((4, 4)), 500, 1).y == 1)
    assert np.all(sample_dataset(-np.ones((4, 4)), 500, 1).y == -1)


def test_zero_kernel_balanced():
    y = sample_dataset(np.zeros((5, 5)), 10000, 42).y
    assert abs(y.mean()) <= 0.04


def test_sampling_reproducible_and_rejects():
    S = np.full((3, 3), 0.3)
    a, b = sample_dataset(S, 100, 5), sample_dataset(S, 100, 5)
    assert a.digest() == b.digest()
    assert a.digest() != sample_dataset(S, 100, 6).digest()
    with pytest.raises(ValueError):
        sample_dataset(np.full((3, 3), 1.2), 10, 0)
    with pytest.raises(ValueError):
        sample_dataset(S, 0, 0)


def test_diagonal_pairs_occur():
    ds = sample_dataset(np.zeros((3, 3)), 3000, 9)
    assert np.mean(ds.u == ds.v) == pytest.approx(1 / 3, abs=0.04)


def test_label_frequencies():
    m = 5
    W = make_smoothing(laplacian(generate("cycle", m)))
    S = make_target(W.decomposition, [(2, 1.0), (3, -0.5)], 0.9).S
    ds = sample_dataset(S, 10**6, 2024)
    a, b = np.minimum(ds.u, ds.v), np.maximum(ds.u, ds.v)
    for u in range(m):
        for v in range(u, m):
            sel = (a == u) & (b == v)
            freq = np.mean(ds.y[sel] == 1)
            assert abs(freq - (1 + S[u, v]) / 2) <= 0.02


def test_design_stat_examples():
    B = design_stat(ds_of(3, [(1, 1, 1)]))
    assert B[1, 1] == 1 and np.count_nonzero(B) == 1
    B = design_stat(ds_of(3, [(0, 2, 1)]))
    assert B[0, 2] == B[2, 0] == 0.5 and np.count_nonzero(B) == 2
    assert np.all(design_stat(ds_of(3, [(0, 2, 1), (0, 2, -1)])) == 0)
    assert np.all(design_stat(ds_of(3, [(0, 2, 1), (2, 0, -1)])) == 0)


def test_elementary_matrix_norms():
    for u, v in [(0, 1), (2, 2)]:
        E = design_stat(ds_of(3, [(u, v, 1)]))
        assert np.sum(E**2) == (0.5 if u != v else 1.0)


def test_design_stat_linearity_and_bounds():
    S = np.full((6, 6), 0.2)
    d1, d2 = sample_dataset(S, 300, 1), sample_dataset(S, 500, 2)
    both = design_stat(d1.concat(d2))
    mix = (300 * design_stat(d1) + 500 * design_stat(d2)) / 800
    assert np.allclose(both, mix, atol=1e-15)
    assert np.max(np.abs(both)) <= 1


def test_mean_design_closed_form_vs_enumeration(rng):
    for m in (2, 3, 7, 10):
        a = rng.uniform(-1, 1, (m, m))
        S = (a + a.T) / 2
        assert np.allclose(mean_design(S), mean_design_enumerated(S), atol=1e-15)
    assert np.allclose(mean_design_enumerated(np.ones((4, 4))), np.full((4, 4), 1 / 16))


def test_noise_special_cases():
    ds = sample_dataset(np.zeros((4, 4)), 200, 3)
    assert np.array_equal(noise_matrix(ds, np.zeros((4, 4))), design_stat(ds))
    ds = sample_dataset(np.ones((4, 4)), 200, 3)
    assert np.allclose(noise_matrix(ds, np.ones((4, 4))), design_stat(ds) - 1 / 16)


def test_noise_zero_mean():
    m, n, T = 10, 2000, 500
    W = make_smoothing(laplacian(generate("cycle", m)))
    S = make_target(W.decomposition, [(2, 1.0)], 0.9).S
    acc = np.zeros((m, m))
    for i in range(T):
        acc += noise_matrix(sample_dataset(S, n, derive_seed(77, i)), S)
    mean = acc / T
    # per-entry second moments: 1/(2 m^2) off the diagonal, 1/m^2 on it
    var_sum = (m * (m - 1) / (2 * m**2) + m / m**2) / (n * T)
    assert np.linalg.norm(mean) <= 3 * math.sqrt(var_sum)


def test_bernstein_values():
    # 2 * sqrt(2 log 2 / 100) = 0.235482 (quoted elsewhere rounded as 0.23549)
    assert bernstein_operator_rhs(1, 1, 100, 1, math.log(2)) == pytest.approx(0.235482, abs=5e-7)
    assert bernstein_operator_rhs(1 / math.sqrt(50), 2, 5000, 50, 1.0) == pytest.approx(0.009470, abs=5e-7)
    assert xi_bound(5000, 50, 1.0) == bernstein_operator_rhs(1 / math.sqrt(50), 2, 5000, 50, 1.0)
    assert bernstein_hilbert_rhs(1, 1, 7, 7) == pytest.approx(2.0)
    assert bernstein_hilbert_rhs(0.1, 5, 10000, 4) == pytest.approx(0.004)
    vals = [bernstein_operator_rhs(1, 1, n, 5, 1.0) for n in (10, 100, 1000, 10**5)]
    assert all(a >= b for a, b in zip(vals, vals[1:])) and vals[-1] < 0.05
    vals = [bernstein_hilbert_rhs(1, 1, n, 1.0) for n in (1, 10, 100, 1000)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        bernstein_operator_rhs(0, 1, 10, 2, 1)


def test_verify_concentration_small():
    S = np.zeros((5, 5))
    rate, bound = verify_xi_concentration(S, 400, 2.0, 30, 1)
    assert rate <= violation_allowance(2.0, 30)
    assert bound == xi_bound(400, 5, 2.0)
    with pytest.raises(ValueError):
        verify_xi_concentration(S, 400, 2.0, 0, 1)
    with pytest.raises(ValueError):
        verify_xi_concentration(S, 10, 2.0, 5, 1)


def test_dataset_validation():
    with pytest.raises(ValueError):
        ds_of(3, [(0, 3, 1)])
    with pytest.raises(ValueError):
        ds_of(3, [(0, 1, 0)])
