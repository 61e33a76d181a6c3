"""Evaluators for the error bounds and the auxiliary spectral-sum inequality.

The constants ``C`` and ``C1`` in the bounds are not specified by the
theory; they default to 1.  Values computed here are for comparing shapes
and rates, not certified numerical guarantees.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from simkernel.graph import SmoothingOperator
from simkernel.kernels import CoherenceProfile, SimilarityKernel


@dataclass(frozen=True)
class BoundInputs:
    n: int
    m: int
    t: float
    zeta: float
    r: int
    profile: CoherenceProfile
    epsbar: float
    sobolev_norm_sq: float
    max_diag_coherence: float
    nu: float = 1.0
    beta: float = 1.0
    C: float = 1.0
    C1: float = 1.0

    def __post_init__(self):
        if self.zeta < 1:
            raise ValueError("zeta must be >= 1")
        for name in ("t", "epsbar", "sobolev_norm_sq", "max_diag_coherence", "nu", "C", "C1"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.r >= 1 and not np.any(self.profile.phi_bar[1:] > 0):
            raise ValueError("coherence profile is identically zero for a nonzero rank")


def t_nm(n: int, m: int, t: float, zeta: float = 1.0) -> float:
    """``t + log(2m (log2(4 n^zeta m^(1.5 zeta)) + 2))``."""
    if n < 1 or m < 1 or t <= 0 or zeta < 1:
        raise ValueError("need n, m >= 1, t > 0, zeta >= 1")
    log2_arg = 2.0 + zeta * math.log2(n) + 1.5 * zeta * math.log2(m)
    return t + math.log(2 * m * (log2_arg + 2.0))


def sample_size_ok(n: int, m: int, t: float, zeta: float = 1.0) -> bool:
    """Whether ``m * t_nm <= n``."""
    return m * t_nm(n, m, t, zeta) <= n


def epsbar_interval(W: SmoothingOperator, s: int) -> Tuple[float, float]:
    """Closed interval ``[1/lambda_s, 1/lambda_{s-1}]`` (1-based ``s``)."""
    return 1.0 / W.eigenvalue(s), 1.0 / W.eigenvalue(s - 1)


def _validate_epsbar(inp: BoundInputs, W: SmoothingOperator, s: int):
    if not W.k0 + 1 <= s <= W.m + 1:
        raise ValueError(f"s={s} outside {W.k0 + 1}..{W.m + 1}")
    lo, hi = epsbar_interval(W, s)
    if not lo * (1 - 1e-12) <= inp.epsbar <= hi * (1 + 1e-12):
        warnings.warn(f"epsbar={inp.epsbar} outside [{lo}, {hi}] for s={s}", stacklevel=3)


def _coherence_term(inp: BoundInputs) -> float:
    return inp.C1 * inp.max_diag_coherence * (inp.m * t_nm(inp.n, inp.m, inp.t, inp.zeta) / inp.n) ** 2


def theorem_main_rhs(inp: BoundInputs, s: int, W: SmoothingOperator | None = None) -> float:
    """``C phi_bar(s) m t_nm / n + epsbar ||W^{1/2} S*||^2 + C1 max_v ||P_L e_v||^2 (m t_nm / n)^2``.

    ``phi_bar(s)`` past ``m`` is ``r``.  When ``W`` is supplied, ``epsbar``
    is checked against ``[1/lambda_s, 1/lambda_{s-1}]`` and a warning is
    issued if it falls outside.
    """
    if W is not None:
        _validate_epsbar(inp, W, s)
    tn = t_nm(inp.n, inp.m, inp.t, inp.zeta)
    first = inp.C * inp.profile.phi(s) * inp.m * tn / inp.n
    return first + inp.epsbar * inp.sobolev_norm_sq + _coherence_term(inp)


def worse_bound(inp: BoundInputs) -> float:
    """Nuclear-only rate ``C r m t_nm / n``."""
    return inp.C * inp.r * inp.m * t_nm(inp.n, inp.m, inp.t, inp.zeta) / inp.n


def corollary_rhs(inp: BoundInputs, s: int, W: SmoothingOperator | None = None) -> float:
    """``C nu r s t_nm / n + epsbar ||W^{1/2} S*||^2 + C1 max_v ||P_L e_v||^2 (m t_nm / n)^2``."""
    if W is not None:
        _validate_epsbar(inp, W, s)
    tn = t_nm(inp.n, inp.m, inp.t, inp.zeta)
    return (inp.C * inp.nu * inp.r * s * tn / inp.n
            + inp.epsbar * inp.sobolev_norm_sq + _coherence_term(inp))


def better_bound(inp: BoundInputs) -> float:
    """Optimized corollary rate ``C (nu r t_nm / n)^(2b/(2b+1)) ||W^{1/2} S*||^(2/(2b+1))``."""
    b = inp.beta
    tn = t_nm(inp.n, inp.m, inp.t, inp.zeta)
    rate = (inp.nu * inp.r * tn / inp.n) ** (2 * b / (2 * b + 1))
    return inp.C * rate * inp.sobolev_norm_sq ** (1.0 / (2 * b + 1))


def klt_rhs(epsilon: float, r: int, m: int) -> float:
    """``((1 + sqrt 2) / 2)^2 m^2 eps^2 r``."""
    if epsilon <= 0 or r < 1 or m < 1:
        raise ValueError("inputs must be positive")
    return ((1.0 + math.sqrt(2.0)) / 2.0) ** 2 * m * m * epsilon * epsilon * r


@dataclass(frozen=True)
class LemmaCheck:
    lhs: float
    rhs: float
    ok: bool


def lemma1_check(kernel: SimilarityKernel | CoherenceProfile, W: SmoothingOperator,
                 phi: np.ndarray | None, s: int, c: float) -> LemmaCheck:
    """``sum_{k=s+1}^m ||P_L phi_k||^2 / lambda_k <= (c + 2) phi(s+1) / lambda_{s+1}``.

    ``kernel`` may be a kernel (projections recomputed) or a coherence
    profile.  ``phi`` defaults to the coherence function and is extended by
    ``phi(k) = r`` for ``k >= m``; ``s`` ranges over ``k0 - 1 .. m``.
    """
    if isinstance(kernel, CoherenceProfile):
        proj = kernel.proj_norms
        r = kernel.rank
        phi_default = kernel.phi_bar
    else:
        P = kernel.support.projector
        proj = np.sum((P @ W.eigenvectors) ** 2, axis=0)
        r = kernel.rank
        from simkernel.kernels import coherence_function_values
        phi_default = coherence_function_values(np.concatenate([[0.0], np.cumsum(proj)]))
    phi = phi_default if phi is None else np.asarray(phi, dtype=float)
    m = W.m
    if not W.k0 - 1 <= s <= m:
        raise ValueError(f"s={s} outside {W.k0 - 1}..{m}")
    lam = W.eigenvalues
    if s == m:
        return LemmaCheck(0.0, 0.0, True)
    lam_next = W.eigenvalue(s + 1)
    if lam_next <= W.pos_tol:
        raise ValueError("lambda_{s+1} is zero")
    lhs = float(np.sum(proj[s:] / lam[s:]))
    phi_next = float(phi[s + 1]) if s + 1 <= m else float(r)
    rhs = (c + 2.0) * phi_next / lam_next
    return LemmaCheck(lhs, rhs, lhs <= rhs + 1e-12)


def rate_slope(points: Sequence[Tuple[float, float]]) -> float:
    """Least-squares slope of ``log(error)`` against ``log(n)``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) < 4:
        raise ValueError("need at least 4 (n, error) points")
    if np.any(pts <= 0):
        raise ValueError("n and error values must be positive")
    x = np.log(pts[:, 0])
    y = np.log(pts[:, 1])
    x = x - x.mean()
    return float(np.dot(x, y - y.mean()) / np.dot(x, x))
