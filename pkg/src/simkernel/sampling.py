"""Observation model, design statistic, noise matrix and Bernstein bounds."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from simkernel.kernels import SimilarityKernel
from simkernel.rng import SplitMix64, derive_seed
from simkernel.symmat import operator_norm, symmetrize


@dataclass(frozen=True)
class Dataset:
    """``n`` observations ``(u[j], v[j], y[j])`` on ``m`` vertices."""

    m: int
    u: np.ndarray
    v: np.ndarray
    y: np.ndarray
    seed: int = 0

    def __post_init__(self):
        if not (len(self.u) == len(self.v) == len(self.y)):
            raise ValueError("u, v, y must have equal length")
        if len(self.u) and (min(self.u.min(), self.v.min()) < 0
                            or max(self.u.max(), self.v.max()) >= self.m):
            raise ValueError("vertex index out of range")
        if not np.all(np.abs(self.y) == 1):
            raise ValueError("labels must be +1 or -1")

    @property
    def n(self) -> int:
        return len(self.y)

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in (self.u, self.v, self.y):
            h.update(np.ascontiguousarray(arr, dtype="<i8").tobytes())
        return h.hexdigest()

    def concat(self, other: "Dataset") -> "Dataset":
        if other.m != self.m:
            raise ValueError("datasets live on different vertex sets")
        return Dataset(self.m, np.concatenate([self.u, other.u]),
                       np.concatenate([self.v, other.v]),
                       np.concatenate([self.y, other.y]), 0)


def sample_dataset(kernel: SimilarityKernel | np.ndarray, n: int, seed: int) -> Dataset:
    """Draw ``n`` i.i.d. triples: ``u, v`` uniform on vertices, then
    ``y = +1`` with probability ``(1 + S(u, v)) / 2``.

    Draw order per call: ``n`` deviates for ``u``, then ``n`` for ``v``,
    then ``n`` for the labels, all from one SplitMix64 stream.
    """
    S = kernel.S if isinstance(kernel, SimilarityKernel) else np.asarray(kernel, float)
    if n < 1:
        raise ValueError("n must be positive")
    if np.max(np.abs(S)) > 1.0 + 1e-12:
        raise ValueError("kernel entries must lie in [-1, 1]")
    m = S.shape[0]
    rng = SplitMix64(seed)
    u = rng.integers(m, n)
    v = rng.integers(m, n)
    p_plus = 0.5 * (1.0 + S[u, v])
    y = np.where(rng.uniform(n) < p_plus, 1, -1).astype(np.int64)
    return Dataset(m, u, v, y, int(seed))


def design_stat(ds: Dataset, m: int | None = None) -> np.ndarray:
    """``B = (1/n) sum_j y_j E_{u_j, v_j}`` with ``E_{u,v} = (e_u e_v^T + e_v e_u^T) / 2``."""
    m = ds.m if m is None else m
    if ds.n == 0:
        raise ValueError("empty dataset")
    acc = np.zeros((m, m))
    np.add.at(acc, (ds.u, ds.v), ds.y.astype(float))
    # acc holds raw sums over ordered pairs; symmetrizing splits off-diagonal
    # observations as y/2 on (u,v) and (v,u) and keeps y on the diagonal.
    return symmetrize(acc) / ds.n


def mean_design(S: np.ndarray) -> np.ndarray:
    """``E[Y E_{X,X'}] = S / m^2`` in closed form."""
    return np.asarray(S, float) / S.shape[0] ** 2


def mean_design_enumerated(S: np.ndarray) -> np.ndarray:
    """Enumerate all ``m^2`` equiprobable ordered pairs (small ``m`` only)."""
    m = S.shape[0]
    out = np.zeros((m, m))
    for u in range(m):
        for v in range(m):
            e = np.zeros((m, m))
            e[u, v] += 0.5
            e[v, u] += 0.5
            out += S[u, v] * e
    return out / m**2


def noise_matrix(ds: Dataset, kernel: SimilarityKernel | np.ndarray) -> np.ndarray:
    S = kernel.S if isinstance(kernel, SimilarityKernel) else np.asarray(kernel, float)
    return design_stat(ds, S.shape[0]) - mean_design(S)


def bernstein_operator_rhs(sigma: float, U: float, n: int, m: int, t: float) -> float:
    """``2 * max(sigma sqrt((t + log 2m) / n), U (t + log 2m) / n)``."""
    if sigma <= 0 or U <= 0 or t <= 0 or n < 1 or m < 1:
        raise ValueError("sigma, U, t must be positive and n, m >= 1")
    a = t + math.log(2 * m)
    return 2.0 * max(sigma * math.sqrt(a / n), U * a / n)


def bernstein_hilbert_rhs(sigma: float, U: float, n: int, t: float) -> float:
    """``2 * max(sigma sqrt(t / n), U t / n)``."""
    if sigma < 0 or U <= 0 or t <= 0 or n < 1:
        raise ValueError("U, t must be positive, sigma >= 0, n >= 1")
    return 2.0 * max(sigma * math.sqrt(t / n), U * t / n)


def xi_bound(n: int, m: int, t: float) -> float:
    """Operator-Bernstein bound on ``||Xi||`` with ``sigma^2 = 1/m``, ``U = 2``."""
    return bernstein_operator_rhs(1.0 / math.sqrt(m), 2.0, n, m, t)


def verify_xi_concentration(kernel: SimilarityKernel | np.ndarray, n: int, t: float,
                            trials: int, seed: int):
    """Monte Carlo frequency of ``||Xi|| > xi_bound(n, m, t)``.

    Trial ``i`` uses the dataset seed ``derive_seed(seed, i)``.

    Returns
    -------
    violation_rate : float
    bound : float
    """
    S = kernel.S if isinstance(kernel, SimilarityKernel) else np.asarray(kernel, float)
    m = S.shape[0]
    if trials < 1:
        raise ValueError("trials must be positive")
    if t <= 0:
        raise ValueError("t must be positive")
    if n < 2 * m * (t + math.log(2 * m)):
        raise ValueError("need n >= 2 m (t + log 2m)")
    bound = xi_bound(n, m, t)
    norms = np.array([
        operator_norm(noise_matrix(sample_dataset(S, n, derive_seed(seed, i)), S))
        for i in range(trials)
    ])
    return float(np.mean(norms > bound)), bound


def violation_allowance(t: float, trials: int) -> float:
    """``e^-t + 3 sqrt(e^-t (1 - e^-t) / trials)``."""
    p = math.exp(-t)
    return p + 3.0 * math.sqrt(p * (1.0 - p) / trials)
