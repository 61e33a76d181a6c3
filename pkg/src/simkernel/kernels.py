"""Target similarity kernels, coherence diagnostics and L2(Pi^2) geometry."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from simkernel.graph import SmoothingOperator
from simkernel.symmat import (
    SpectralDecomposition,
    SupportInfo,
    as_symmetric,
    default_zero_tol,
    support_from_decomposition,
    sym_eig,
    symmetrize,
)


@dataclass(frozen=True)
class SimilarityKernel:
    S: np.ndarray
    support: SupportInfo
    spectral: SpectralDecomposition

    @property
    def m(self) -> int:
        return self.S.shape[0]

    @property
    def rank(self) -> int:
        return self.support.rank

    @classmethod
    def from_matrix(cls, S, zero_tol: Optional[float] = None) -> "SimilarityKernel":
        S = as_symmetric(S)
        if np.max(np.abs(S)) > 1.0 + 1e-12:
            raise ValueError("similarity kernel entries must lie in [-1, 1]")
        S = np.clip(S, -1.0, 1.0)
        dec = sym_eig(S)
        if zero_tol is None:
            zero_tol = default_zero_tol(S)
        keep = np.abs(dec.eigenvalues) > zero_tol
        nonzero = SpectralDecomposition(dec.eigenvalues[keep], dec.eigenvectors[:, keep])
        return cls(S, support_from_decomposition(dec, zero_tol), nonzero)


def make_target(basis: SpectralDecomposition, terms: Sequence[Tuple[int, float]],
                scale_to: float = 0.9) -> SimilarityKernel:
    """``S = c * sum_k w_k phi_{i_k} (x) phi_{i_k}`` with ``max|S| = scale_to``.

    ``terms`` holds ``(eigen-index, weight)`` pairs, eigen-indices 1-based in
    the ascending ordering of ``basis``.
    """
    if not 0 < scale_to <= 1:
        raise ValueError("scale_to must lie in (0, 1]")
    idx = [int(i) for i, _ in terms]
    if len(set(idx)) != len(idx):
        raise ValueError("eigen-indices must be distinct")
    m = basis.dim
    for i in idx:
        if not 1 <= i <= m:
            raise ValueError(f"eigen-index {i} outside 1..{m}")
    weights = np.array([float(w) for _, w in terms])
    if len(weights) == 0 or np.all(weights == 0):
        raise ValueError("at least one nonzero weight is required")
    if np.any(weights == 0):
        raise ValueError("weights must be nonzero")
    phi = basis.eigenvectors[:, [i - 1 for i in idx]]
    raw = symmetrize((phi * weights) @ phi.T)
    S = raw * (scale_to / np.max(np.abs(raw)))
    # Exact-rank support: the kernel is built from len(terms) orthonormal modes.
    coef = weights * (scale_to / np.max(np.abs(raw)))
    order = np.argsort(coef, kind="stable")
    spectral = SpectralDecomposition(coef[order], phi[:, order])
    support = SupportInfo(
        rank=len(idx),
        projector=symmetrize(phi @ phi.T),
        sign_matrix=symmetrize((phi * np.sign(coef)) @ phi.T),
    )
    return SimilarityKernel(S, support, spectral)


@dataclass(frozen=True)
class CoherenceProfile:
    """Coherence of the kernel support ``L`` against the eigenbasis of ``W``.

    ``phi_bar[k]`` and ``F[k]`` are indexed by ``k = 0..m`` with
    ``F[k] = sum_{i <= k} ||P_L phi_i||^2``.
    """

    rank: int
    phi_bar: np.ndarray
    F: np.ndarray
    proj_norms: np.ndarray
    max_diag_coherence: float
    nu_weak: float
    nu_pointwise: float
    nu_sign: float

    @property
    def m(self) -> int:
        return len(self.F) - 1

    def phi(self, s: float) -> float:
        """Piecewise-linear extension of ``phi_bar`` to reals, constant past m."""
        if s < 0:
            raise ValueError("phi is defined on nonnegative arguments")
        if s >= self.m:
            return float(self.phi_bar[self.m])
        return float(np.interp(s, np.arange(self.m + 1), self.phi_bar))


def coherence_function_values(F: np.ndarray) -> np.ndarray:
    """``phi_bar(k) = max_{t <= k} t * max_{j >= t} F_j / j`` by literal double max.

    ``F`` is indexed 0..m with ``F[0] = 0``; returns ``phi_bar[0..m]``.
    """
    m = len(F) - 1
    j = np.arange(1, m + 1)
    ratio = F[1:] / j
    # inner[t-1] = max_{j >= t} F_j / j, evaluated as a masked O(m^2) maximum.
    mask = j[None, :] >= j[:, None]
    inner = np.where(mask, ratio[None, :], -np.inf).max(axis=1)
    outer = j * inner
    mask_t = j[None, :] <= j[:, None]
    phi = np.where(mask_t, outer[None, :], -np.inf).max(axis=1)
    return np.concatenate([[0.0], phi])


def in_psi(phi: np.ndarray, F: np.ndarray, tol: float = 1e-12) -> bool:
    """Membership in the admissible class: nondecreasing, phi(k)/k
    nonincreasing and ``phi >= F`` on ``k = 0..m``."""
    phi = np.asarray(phi, dtype=float)
    k = np.arange(1, len(phi))
    per = phi[1:] / k
    return bool(
        np.all(np.diff(phi) >= -tol)
        and np.all(np.diff(per) <= tol)
        and np.all(phi >= F - tol)
    )


def coherence_function(kernel: SimilarityKernel, W: SmoothingOperator) -> CoherenceProfile:
    """Coherence function and coherence coefficients of ``kernel`` w.r.t. ``W``.

    The nu fields are ``nan`` for a rank-zero kernel.
    """
    if kernel.m != W.m:
        raise ValueError("kernel and W dimensions differ")
    m = kernel.m
    r = kernel.rank
    P = kernel.support.projector
    phi_vecs = W.eigenvectors
    proj = np.sum((P @ phi_vecs) ** 2, axis=0)
    F = np.concatenate([[0.0], np.cumsum(proj)])
    phi_bar = coherence_function_values(F)
    max_diag = float(np.max(np.diag(P)))
    if r >= 1:
        k = np.arange(1, m + 1)
        nu_weak = float(np.max(m * F[1:] / (r * k)))
        nu_pointwise = float(m / r * np.max(proj))
        nu_sign = float(m * m / r * np.max(kernel.support.sign_matrix ** 2))
    else:
        nu_weak = nu_pointwise = nu_sign = float("nan")
    return CoherenceProfile(r, phi_bar, F, proj, max_diag, nu_weak, nu_pointwise, nu_sign)


def coherence_coefficients(kernel: SimilarityKernel, W: SmoothingOperator) -> CoherenceProfile:
    if kernel.rank < 1:
        raise ValueError("coherence coefficients need rank >= 1")
    return coherence_function(kernel, W)


def l2_pi2_norm_sq(S) -> float:
    S = np.asarray(S, dtype=float)
    return float(np.sum(S * S)) / S.shape[0] ** 2


def l2_pi2_inner(S1, S2) -> float:
    S1 = np.asarray(S1, dtype=float)
    S2 = np.asarray(S2, dtype=float)
    if S1.shape != S2.shape:
        raise ValueError(f"dimension mismatch {S1.shape} vs {S2.shape}")
    return float(np.sum(S1 * S2)) / S1.shape[0] ** 2


def sobolev_norm_sq(S, W: SmoothingOperator, normalized: bool = False) -> float:
    """``||W^{1/2} S||_2^2 = tr(S W S)``; divided by ``m^2`` when ``normalized``."""
    S = np.asarray(S, dtype=float)
    if S.shape != W.W.shape:
        raise ValueError("dimension mismatch between S and W")
    val = float(np.sum(W.W * (S @ S)))
    val = max(val, 0.0)
    return val / S.shape[0] ** 2 if normalized else val
