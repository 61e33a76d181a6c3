"""Graphs, Laplacians and the smoothing operator ``W = d * Laplacian**p``.

Spectral indices in this module are 1-based, matching the usual
``lambda_1 <= ... <= lambda_m`` labelling: ``k0`` is the 1-based index of
the first strictly positive eigenvalue of ``W`` and ``eigenvalue(k)``
returns ``lambda_k`` (with ``lambda_{m+1} = +inf``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Iterable, Tuple

import numpy as np

from simkernel.rng import SplitMix64
from simkernel.symmat import SpectralDecomposition, as_symmetric, operator_norm, sym_eig

POS_TOL_REL = 1e-10


@dataclass(frozen=True)
class Graph:
    m: int
    edges: FrozenSet[Tuple[int, int]]

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("graph needs at least one vertex")
        for u, v in self.edges:
            if not (0 <= u < v < self.m):
                raise ValueError(f"invalid edge ({u}, {v}) for m={self.m}")

    @classmethod
    def from_edges(cls, m: int, edges: Iterable[Tuple[int, int]]) -> "Graph":
        normalized = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            normalized.add((min(u, v), max(u, v)))
        return cls(int(m), frozenset(normalized))

    def sorted_edges(self):
        return sorted(self.edges)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.m, self.m))
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1.0
        return a

    def n_components(self) -> int:
        parent = list(range(self.m))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.edges:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
        return len({find(x) for x in range(self.m)})


def generate(kind: str, m: int = 0, *, a: int = 0, b: int = 0, prob: float = 0.0,
             seed: int = 0) -> Graph:
    """Test-bed graphs: ``path``, ``cycle``, ``grid`` (a x b), ``complete``,
    ``erdos_renyi``.

    ``erdos_renyi`` visits pairs ``u < v`` in lexicographic order and keeps a
    pair when the next SplitMix64 uniform deviate is below ``prob``.
    """
    if kind == "grid":
        if a < 1 or b < 1 or a * b < 2:
            raise ValueError("grid needs a*b >= 2")
        edges = []
        for i in range(a):
            for j in range(b):
                x = i * b + j
                if j + 1 < b:
                    edges.append((x, x + 1))
                if i + 1 < a:
                    edges.append((x, x + b))
        return Graph.from_edges(a * b, edges)
    if m < 2:
        raise ValueError("graph generators need m >= 2")
    if kind == "path":
        return Graph.from_edges(m, [(i, i + 1) for i in range(m - 1)])
    if kind == "cycle":
        if m == 2:
            return Graph.from_edges(2, [(0, 1)])
        return Graph.from_edges(m, [(i, (i + 1) % m) for i in range(m)])
    if kind == "complete":
        return Graph.from_edges(m, [(i, j) for i in range(m) for j in range(i + 1, m)])
    if kind == "erdos_renyi":
        if not 0.0 < prob < 1.0:
            raise ValueError("erdos_renyi needs 0 < prob < 1")
        pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
        keep = SplitMix64(seed).uniform(len(pairs)) < prob
        return Graph.from_edges(m, [pq for pq, k in zip(pairs, keep) if k])
    raise ValueError(f"unknown graph kind {kind!r}")


def laplacian(g: Graph) -> np.ndarray:
    """Combinatorial Laplacian ``D - A``."""
    a = g.adjacency()
    return np.diag(a.sum(axis=1)) - a


@dataclass(frozen=True)
class SmoothingOperator:
    W: np.ndarray
    decomposition: SpectralDecomposition
    d: float
    p: float

    @property
    def m(self) -> int:
        return self.W.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.decomposition.eigenvalues

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.decomposition.eigenvectors

    @property
    def pos_tol(self) -> float:
        return POS_TOL_REL * max(float(self.eigenvalues[-1]), 1.0)

    @property
    def k0(self) -> int:
        """1-based index of the first eigenvalue above ``pos_tol``; ``m + 1`` if none."""
        pos = np.nonzero(self.eigenvalues > self.pos_tol)[0]
        return int(pos[0]) + 1 if len(pos) else self.m + 1

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    def eigenvalue(self, k: int) -> float:
        """``lambda_k`` for 1 <= k <= m + 1, with ``lambda_{m+1} = inf``."""
        if k == self.m + 1:
            return np.inf
        if not 1 <= k <= self.m:
            raise IndexError(f"eigen-index {k} outside 1..{self.m + 1}")
        return float(self.eigenvalues[k - 1])

    def sqrt(self) -> np.ndarray:
        return self.decomposition.apply(np.sqrt)

    @classmethod
    def from_matrix(cls, w, d: float = 1.0, p: float = 1.0) -> "SmoothingOperator":
        """Wrap an arbitrary PSD matrix (e.g. loaded from file) as ``W``."""
        w = as_symmetric(w, tol=1e-9)
        dec = sym_eig(w)
        lam = dec.eigenvalues
        if lam[0] < -1e-8 * max(float(np.max(np.abs(lam))), 1.0):
            raise ValueError("W must be positive semidefinite")
        lam = np.where(lam <= POS_TOL_REL * max(lam[-1], 1.0), 0.0, lam)
        dec = SpectralDecomposition(lam, dec.eigenvectors)
        return cls(dec.reconstruct(), dec, float(d), float(p))

    @classmethod
    def from_spectrum(cls, eigenvalues, eigenvectors=None) -> "SmoothingOperator":
        """Build ``W`` directly from a spectrum (identity basis by default)."""
        lam = np.asarray(eigenvalues, dtype=float)
        if np.any(np.diff(lam) < 0):
            raise ValueError("eigenvalues must be ascending")
        if lam[0] < 0:
            raise ValueError("eigenvalues must be nonnegative")
        vec = np.eye(len(lam)) if eigenvectors is None else np.asarray(eigenvectors, float)
        dec = SpectralDecomposition(lam, vec)
        return cls(dec.reconstruct(), dec, 1.0, 1.0)


def make_smoothing(lap, d: float = 1.0, p: float = 1.0) -> SmoothingOperator:
    """``W = d * lap**p`` by spectral calculus (any real ``p > 0``).

    Eigenvalues of ``lap`` within ``1e-10 * max(lambda_max, 1)`` of zero are
    set to exactly zero before powering, so the null space of the Laplacian
    is preserved for fractional ``p``.
    """
    if d <= 0 or p <= 0:
        raise ValueError("d and p must be positive")
    lap = as_symmetric(lap)
    dec = sym_eig(lap)
    lam = dec.eigenvalues
    if lam[0] < -1e-8 * max(operator_norm(lap), 1e-300):
        raise ValueError("Laplacian argument is not positive semidefinite")
    lam = np.where(lam <= POS_TOL_REL * max(lam[-1], 1.0), 0.0, lam)
    wdec = SpectralDecomposition(d * lam**p, dec.eigenvectors)
    return SmoothingOperator(wdec.reconstruct(), wdec, float(d), float(p))


def rate_normalizing_d(m: int, p: float) -> float:
    """``d = (m / (2 pi))**(2p)``: on cycle(m), low modes get ``lambda ~ k**(2p)``."""
    return (m / (2.0 * np.pi)) ** (2.0 * p)


@dataclass(frozen=True)
class SpectralConditionReport:
    zeta: float
    zeta_ok: bool
    min_c_sum: float
    min_c_ratio: float
    monotone_ok: bool
    k0: int


def check_spectral_conditions(W: SmoothingOperator, zeta: float = 1.0) -> SpectralConditionReport:
    """Smallest constants making the spectral assumptions on ``W`` hold.

    ``min_c_sum = max_{k0 <= s <= m} (lambda_s / s) * sum_{k >= s} 1 / lambda_k``
    and ``min_c_ratio = max_{k0 <= k < m} lambda_{k+1} / lambda_k``.
    """
    if zeta < 1:
        raise ValueError("zeta must be >= 1")
    m = W.m
    k0 = W.k0
    if k0 > m:
        return SpectralConditionReport(float(zeta), False, np.nan, np.nan, False, k0)
    lam = W.eigenvalues[k0 - 1:]
    s = np.arange(k0, m + 1, dtype=float)
    tail = np.cumsum((1.0 / lam)[::-1])[::-1]
    min_c_sum = float(np.max(lam / s * tail))
    min_c_ratio = float(np.max(lam[1:] / lam[:-1])) if len(lam) > 1 else 1.0
    ratio = s / lam
    monotone_ok = bool(np.all(np.diff(ratio) <= 1e-12 * ratio[:-1]))
    zeta_ok = bool(lam[-1] <= m**zeta and lam[0] >= m ** (-zeta))
    return SpectralConditionReport(float(zeta), zeta_ok, min_c_sum, min_c_ratio, monotone_ok, k0)
