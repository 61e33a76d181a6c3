"""Penalized least-squares estimator with nuclear and graph-Sobolev penalties.

The empirical risk for a symmetric ``S`` is::

    L_n(S) = ||S||_2^2 / m^2 - 2 <B, S> + eps ||S||_1 + eps1 tr(S W S)

with ``B`` the design statistic and ``eps1 = epsbar / m^2``.  The first,
second and fourth terms are smooth; the nuclear norm is handled by its
proximal map, the spectral soft-threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from simkernel.graph import SmoothingOperator
from simkernel.symmat import (
    as_symmetric,
    inner,
    operator_norm,
    soft_threshold,
    symmetrize,
)

WHOLE_SPACE = "whole_space"
FROBENIUS_BALL = "frobenius_ball"


@dataclass(frozen=True)
class EstimatorConfig:
    """Penalty levels, smoothing operator and solver settings.

    With ``feasible_set="frobenius_ball"`` the error guarantees assume the
    target lies in the ball, so pick ``radius >= ||S*||_2``; this is not
    checked.
    """

    epsilon: float
    epsbar: float
    W: SmoothingOperator
    feasible_set: str = WHOLE_SPACE
    radius: Optional[float] = None
    max_iters: int = 5000
    tol_kkt: Optional[float] = None
    tol_obj: float = 1e-10
    stall_window: int = 5
    check_every: int = 10

    def __post_init__(self):
        if self.epsilon < 0 or self.epsbar < 0:
            raise ValueError("penalty levels must be nonnegative")
        if self.feasible_set not in (WHOLE_SPACE, FROBENIUS_BALL):
            raise ValueError(f"unknown feasible set {self.feasible_set!r}")
        if self.feasible_set == FROBENIUS_BALL and not (self.radius and self.radius > 0):
            raise ValueError("frobenius_ball needs a positive radius")
        if self.tol_kkt is not None and self.tol_kkt <= 0:
            raise ValueError("tol_kkt must be positive")
        if self.tol_obj <= 0 or self.max_iters < 1:
            raise ValueError("tol_obj and max_iters must be positive")

    @property
    def m(self) -> int:
        return self.W.m

    @property
    def eps1(self) -> float:
        return self.epsbar / self.m**2

    def kkt_tolerance(self, B: np.ndarray) -> float:
        if self.tol_kkt is not None:
            return self.tol_kkt
        return 1e-6 * (1.0 + 2.0 * operator_norm(B))


@dataclass
class EstimatorResult:
    S_hat: np.ndarray
    iterations: int
    objective_trace: List[float] = field(default_factory=list)
    kkt_residual: float = math.inf
    converged: bool = False
    restarts: int = 0

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]


def _check_dims(S: np.ndarray, B: np.ndarray, cfg: EstimatorConfig):
    if S.shape != B.shape or S.shape != cfg.W.W.shape:
        raise ValueError(f"dimension mismatch: S {S.shape}, B {B.shape}, W {cfg.W.W.shape}")


def smooth_gradient(S: np.ndarray, B: np.ndarray, cfg: EstimatorConfig) -> np.ndarray:
    m = S.shape[0]
    W = cfg.W.W
    WS = W @ S
    return symmetrize(2.0 / m**2 * S - 2.0 * B + cfg.eps1 * (WS + WS.T))


def _smooth_value(S: np.ndarray, B: np.ndarray, cfg: EstimatorConfig) -> float:
    m = S.shape[0]
    return (inner(S, S) / m**2 - 2.0 * inner(B, S)
            + cfg.eps1 * float(np.sum(cfg.W.W * (S @ S))))


def objective(S, B, cfg: EstimatorConfig) -> float:
    """Penalized empirical risk ``L_n(S)``."""
    S = as_symmetric(S)
    B = np.asarray(B, dtype=float)
    _check_dims(S, B, cfg)
    nuc = float(np.sum(np.abs(np.linalg.eigvalsh(S)))) if cfg.epsilon else 0.0
    return _smooth_value(S, B, cfg) + cfg.epsilon * nuc


def lipschitz_constant(cfg: EstimatorConfig) -> float:
    """Lipschitz constant of the smooth gradient: ``2/m^2 + 2 eps1 lambda_max(W)``."""
    return 2.0 / cfg.m**2 + 2.0 * cfg.eps1 * max(cfg.W.lambda_max, 0.0)


def _prox(Z: np.ndarray, tau: float, cfg: EstimatorConfig):
    """Prox of ``tau ||.||_1`` plus the feasible-set indicator.

    For the Frobenius ball the soft-thresholded spectrum is rescaled radially;
    both pieces are spectral and the composition is the exact prox.
    Returns the matrix and its (eigenvalues, eigenvectors).
    """
    w, v = np.linalg.eigh(Z)
    w = soft_threshold(w, tau)
    if cfg.feasible_set == FROBENIUS_BALL:
        norm = float(np.sqrt(np.sum(w * w)))
        if norm > cfg.radius:
            w = w * (cfg.radius / norm)
    return symmetrize((v * w) @ v.T), w, v


def _kkt_from_eig(S, w, v, G, cfg: EstimatorConfig, zero_tol: Optional[float]) -> float:
    m = S.shape[0]
    if zero_tol is None:
        zero_tol = 1e-8 * max(float(np.max(np.abs(w))) if len(w) else 0.0, 1e-300)
    keep = np.abs(w) > zero_tol
    vl = v[:, keep]
    sign = (vl * np.sign(w[keep])) @ vl.T
    perp = np.eye(m) - vl @ vl.T
    A = G + cfg.epsilon * sign
    if cfg.feasible_set == FROBENIUS_BALL and keep.any():
        snorm2 = inner(S, S)
        if math.sqrt(snorm2) >= cfg.radius * (1.0 - 1e-9):
            alpha = max(0.0, -inner(A, S) / snorm2)
            A = A + alpha * S
    A_perp = perp @ A @ perp
    on_support = float(np.linalg.norm(A - A_perp))
    G_perp = symmetrize(perp @ G @ perp)
    off = float(np.max(np.abs(np.linalg.eigvalsh(G_perp)))) if m else 0.0
    return max(on_support, max(0.0, off - cfg.epsilon))


def kkt_residual(S, B, cfg: EstimatorConfig, zero_tol: Optional[float] = None) -> float:
    """Distance of ``S`` from first-order optimality.

    With ``G`` the smooth gradient and ``L`` the support of ``S``::

        max(||P_L(G + eps sign(S))||_2, max(0, ||P_L^perp G P_L^perp|| - eps))

    where ``P_L(A) = A - P_perp A P_perp``.  Zero exactly at the minimizer.
    On an active Frobenius-ball constraint the best normal-cone element
    ``alpha * S`` (``alpha >= 0``) is absorbed first.
    """
    S = as_symmetric(S)
    B = np.asarray(B, dtype=float)
    _check_dims(S, B, cfg)
    w, v = np.linalg.eigh(S)
    return _kkt_from_eig(S, w, v, smooth_gradient(S, B, cfg), cfg, zero_tol)


def fit(B, cfg: EstimatorConfig, init: Optional[np.ndarray] = None) -> EstimatorResult:
    """Minimize ``L_n`` by FISTA with function-value adaptive restart.

    Step ``1 / L_g`` with ``L_g = 2/m^2 + 2 eps1 lambda_max(W)``; the prox
    is the spectral soft-threshold at ``eps / L_g``.  An iterate whose
    objective exceeds the previous one is discarded and the momentum reset,
    so ``objective_trace`` is nonincreasing.  Stops when the KKT residual
    drops below tolerance, or after ``stall_window`` consecutive relative
    objective changes below ``tol_obj``; ``converged`` reports whether the
    final KKT residual meets tolerance.
    """
    B = as_symmetric(B, tol=1e-10)
    m = B.shape[0]
    if B.shape != cfg.W.W.shape:
        raise ValueError("B and W dimensions differ")
    tol_kkt = cfg.kkt_tolerance(B)
    L = lipschitz_constant(cfg)
    tau = cfg.epsilon / L

    X = np.zeros((m, m)) if init is None else as_symmetric(init)
    if cfg.feasible_set == FROBENIUS_BALL:
        X, wx, vx = _prox(X, 0.0, cfg)
    else:
        wx, vx = np.linalg.eigh(X)
    obj = _smooth_value(X, B, cfg) + cfg.epsilon * float(np.sum(np.abs(wx)))
    trace = [obj]
    Y = X
    t = 1.0
    stall = 0
    restarts = 0
    kkt = math.inf
    it = 0
    accepted = 0
    while it < cfg.max_iters:
        it += 1
        Z = Y - smooth_gradient(Y, B, cfg) / L
        Xn, wn, vn = _prox(Z, tau, cfg)
        obj_n = _smooth_value(Xn, B, cfg) + cfg.epsilon * float(np.sum(np.abs(wn)))
        if obj_n > obj and Y is not X:
            restarts += 1
            t = 1.0
            Y = X
            continue
        change = abs(obj - obj_n)
        t_n = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        Y = Xn + ((t - 1.0) / t_n) * (Xn - X)
        X, wx, vx, t = Xn, wn, vn, t_n
        accepted += 1
        obj = min(obj_n, obj)
        trace.append(obj)
        stall = stall + 1 if change <= cfg.tol_obj * max(abs(obj), 1e-300) else 0
        if accepted % cfg.check_every == 0 or stall >= cfg.stall_window:
            kkt = _kkt_from_eig(X, wx, vx, smooth_gradient(X, B, cfg), cfg, None)
            if kkt <= tol_kkt or stall >= cfg.stall_window:
                break
    kkt = _kkt_from_eig(X, wx, vx, smooth_gradient(X, B, cfg), cfg, None)
    return EstimatorResult(X, it, trace, kkt, kkt <= tol_kkt, restarts)


def choose_epsilon(n: int, m: int, t: float) -> float:
    """Nuclear penalty level ``4 sqrt((t + log 2m) / (n m))``."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    if t <= 0:
        raise ValueError("t must be positive")
    return 4.0 * math.sqrt((t + math.log(2 * m)) / (n * m))


def t_from_confidence(confidence: float) -> float:
    """``t = log(1 / (1 - confidence))``; 0.9 gives ``log 10``."""
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    return math.log(1.0 / (1.0 - confidence))


def choose_epsbar(W: SmoothingOperator, s: int) -> float:
    """Left end ``1 / lambda_s`` of the admissible Sobolev-penalty interval.

    ``s`` is 1-based with ``k0 + 1 <= s <= m + 1``; ``s = m + 1`` gives 0.
    """
    if not W.k0 + 1 <= s <= W.m + 1:
        raise ValueError(f"s={s} outside {W.k0 + 1}..{W.m + 1}")
    return 1.0 / W.eigenvalue(s)


def choose_s_rate(n: int, m: int, t_nm: float, nu: float, r: float, beta: float,
                  sobolev_norm_sq: float, k0: int = 1) -> int:
    """Bias-variance balancing index for eigenvalue decay ``lambda_k ~ k^(2 beta)``.

    ``s = (n / (nu r t_nm))^(1/(2b+1)) * ||W^{1/2} S*||^(2/(2b+1))``, rounded
    and clamped to ``k0 + 1 .. m + 1``.  ``sobolev_norm_sq`` is the squared
    Sobolev norm, so it enters with exponent ``1/(2b+1)``.
    """
    if min(n, t_nm, nu, r, beta) <= 0 or sobolev_norm_sq < 0:
        raise ValueError("inputs must be positive")
    s = s_rate_raw(n, t_nm, nu, r, beta, sobolev_norm_sq)
    if not math.isfinite(s):
        return m + 1
    return int(min(max(round(s), k0 + 1), m + 1))


def s_rate_raw(n, t_nm, nu, r, beta, sobolev_norm_sq) -> float:
    e = 1.0 / (2.0 * beta + 1.0)
    return (n / (nu * r * t_nm)) ** e * sobolev_norm_sq**e


def error_l2(S_hat, S_star) -> float:
    """``||S_hat - S*||^2_{L2(Pi^2)} = ||S_hat - S*||_2^2 / m^2``."""
    S_hat = np.asarray(S_hat, dtype=float)
    S_star = np.asarray(S_star, dtype=float)
    if S_hat.shape != S_star.shape:
        raise ValueError("dimension mismatch")
    D = S_hat - S_star
    return float(np.sum(D * D)) / D.shape[0] ** 2
