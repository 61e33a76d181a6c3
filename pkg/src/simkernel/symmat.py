"""Dense symmetric matrices: eigendecomposition, Schatten norms, spectral prox.

Symmetric matrices are plain ``(m, m)`` float arrays.  Every function that
produces one returns an exactly symmetric array (it is re-symmetrized as
``(A + A.T) / 2`` on the way out), and every function that consumes one
validates symmetry through :func:`as_symmetric`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

SYMMETRY_TOL = 1e-12
JACOBI_MAX_SWEEPS = 30


class EigenConvergenceError(RuntimeError):
    """Raised when an eigensolver fails to converge."""

    def __init__(self, message: str, iterations: int):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def as_symmetric(a, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Validate ``a`` as a finite square symmetric matrix; return a float copy.

    The asymmetry check is relative: ``max|a - a.T| <= tol * max(1, max|a|)``.
    The returned array is exactly symmetric.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > tol * scale:
        raise ValueError("matrix is not symmetric")
    return symmetrize(a)


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """Hilbert-Schmidt inner product <A, B> = tr(A B) for symmetric A, B."""
    return float(np.sum(a * b))


@dataclass(frozen=True)
class SpectralDecomposition:
    """``M = V diag(w) V^T`` with ``w`` ascending and ``V`` orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        return self.apply(lambda w: w)

    def apply(self, func) -> np.ndarray:
        """Spectral calculus: ``V diag(func(w)) V^T``."""
        v = self.eigenvectors
        return symmetrize((v * func(self.eigenvalues)) @ v.T)


@dataclass(frozen=True)
class SupportInfo:
    rank: int
    projector: np.ndarray
    sign_matrix: np.ndarray


def _jacobi_eigh(a: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi with threshold sweeps (row-cyclic ordering).

    Rotations are applied to full rows/columns with numpy slicing, so a
    sweep costs O(m^3) flops but O(m^2) Python-level steps.  Practical up to
    m of a few hundred.
    """
    a = a.copy()
    m = a.shape[0]
    v = np.eye(m)
    if m == 1:
        return a.diagonal().copy(), v
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(m), v
    for sweep in range(1, max_sweeps + 1):
        off = np.sqrt(2.0) * np.linalg.norm(np.triu(a, 1))
        if off <= 1e-15 * scale:
            return a.diagonal().copy(), v
        # Larger threshold in the first sweeps skips negligible rotations.
        thresh = 0.2 * off / m**2 if sweep < 4 else 0.0
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if abs(apq) <= thresh or apq == 0.0:
                    continue
                g = 100.0 * abs(apq)
                app, aqq = abs(a[p, p]), abs(a[q, q])
                # Element below rounding of both diagonals: drop it.
                if sweep > 4 and app + g == app and aqq + g == aqq:
                    a[p, q] = a[q, p] = 0.0
                    continue
                h = a[q, q] - a[p, p]
                if abs(h) + g == abs(h):
                    t = apq / h
                else:
                    theta = 0.5 * h / apq
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    if not np.any(np.triu(a, 1)):
        return a.diagonal().copy(), v
    raise EigenConvergenceError("Jacobi eigensolver did not converge", max_sweeps)


def _canonicalize(w: np.ndarray, v: np.ndarray, tie_tol: float):
    """Ascending order; sign so the largest-|.| component is positive;
    ties (|w_i - w_j| <= tie_tol) ordered lexicographically by eigenvector."""
    idx = np.argsort(w, kind="stable")
    w, v = w[idx], v[:, idx].copy()
    pivot = np.argmax(np.abs(v) > np.max(np.abs(v), axis=0) - 1e-12, axis=0)
    signs = np.sign(v[pivot, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    v *= signs
    start = 0
    m = len(w)
    while start < m:
        stop = start + 1
        while stop < m and w[stop] - w[start] <= tie_tol:
            stop += 1
        if stop - start > 1:
            block = v[:, start:stop]
            order = sorted(range(stop - start), key=lambda j: tuple(-np.round(block[:, j], 12)))
            v[:, start:stop] = block[:, order]
        start = stop
    return w, v


def sym_eig(m, method: str = "lapack") -> SpectralDecomposition:
    """Eigendecomposition of a symmetric matrix.

    Parameters
    ----------
    m : array_like
        Symmetric matrix.
    method : {"lapack", "jacobi"}
        ``"lapack"`` calls ``numpy.linalg.eigh``; ``"jacobi"`` runs the
        in-house cyclic Jacobi solver (capped at 30 sweeps).

    Returns
    -------
    SpectralDecomposition
        Eigenvalues ascending, with deterministic eigenvector signs and
        tie ordering.
    """
    a = as_symmetric(m)
    if method == "lapack":
        try:
            w, v = np.linalg.eigh(a)
        except np.linalg.LinAlgError as exc:
            raise EigenConvergenceError(f"LAPACK eigh failed: {exc}", 0) from exc
    elif method == "jacobi":
        w, v = _jacobi_eigh(a)
    else:
        raise ValueError(f"unknown method {method!r}")
    tie_tol = 1e-12 * max(1.0, float(np.max(np.abs(w))))
    w, v = _canonicalize(w, v, tie_tol)
    return SpectralDecomposition(w, v)


OPERATOR = "operator"


def schatten_norm(m, p: Union[float, str] = 1) -> float:
    """Schatten p-norm; ``p="operator"`` (or ``inf``) gives the spectral norm."""
    if isinstance(p, str):
        if p != OPERATOR:
            raise ValueError(f"unknown norm {p!r}")
        p = np.inf
    if not p >= 1:
        raise ValueError("Schatten norm needs p >= 1")
    w = np.abs(np.linalg.eigvalsh(as_symmetric(m)))
    if np.isinf(p):
        return float(w.max())
    if p == 1:
        return float(w.sum())
    if p == 2:
        return float(np.sqrt(np.sum(w * w)))
    return float(np.sum(w**p) ** (1.0 / p))


def operator_norm(m) -> float:
    return schatten_norm(m, OPERATOR)


def soft_threshold(w: np.ndarray, tau: float) -> np.ndarray:
    return np.sign(w) * np.maximum(np.abs(w) - tau, 0.0)


def spectral_soft_threshold(m, tau: float) -> np.ndarray:
    """Proximal map of ``tau * ||.||_1`` on symmetric matrices."""
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    if tau == 0:
        return as_symmetric(m)
    dec = sym_eig(m)
    return dec.apply(lambda w: soft_threshold(w, tau))


def default_zero_tol(m) -> float:
    return 1e-8 * operator_norm(m)


def support_from_decomposition(dec: SpectralDecomposition, zero_tol: float) -> SupportInfo:
    w, v = dec.eigenvalues, dec.eigenvectors
    keep = np.abs(w) > zero_tol
    vk = v[:, keep]
    projector = symmetrize(vk @ vk.T)
    sign = symmetrize((vk * np.sign(w[keep])) @ vk.T)
    return SupportInfo(int(keep.sum()), projector, sign)


def sign_and_support(m, zero_tol: float | None = None) -> SupportInfo:
    """Rank, support projector ``P_L`` and ``sign(M)``.

    Eigenvalues with ``|w| <= zero_tol`` count as zero; the default
    tolerance is ``1e-8 * ||M||`` (operator norm).
    """
    a = as_symmetric(m)
    if zero_tol is None:
        zero_tol = default_zero_tol(a)
    if zero_tol < 0:
        raise ValueError("zero_tol must be nonnegative")
    return support_from_decomposition(sym_eig(a), zero_tol)
