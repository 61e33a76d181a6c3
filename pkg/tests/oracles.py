"""Reference solvers that share no code with the package solver."""

import numpy as np


def dual_projected_gradient(B, lam, V, eps, eps1, max_iters=10**6, tol=1e-15):
    """Solve the penalized problem through its dual.

    The nuclear term is ``eps ||S||_1 = max_{||Z||_op <= eps} <Z, S>``.  For
    fixed ``Z`` the inner quadratic is minimized in closed form in the
    eigenbasis ``V`` of ``W`` (``lam`` its eigenvalues); the dual is smooth
    and strongly concave, so projected gradient ascent with the constant
    step ``min D`` converges linearly.  Projection onto the operator-norm
    ball clips eigenvalues.

    Returns ``S`` in the original basis and the iteration count.
    """
    m = B.shape[0]
    Bt = V.T @ B @ V
    D = 2.0 / m**2 + eps1 * (lam[:, None] + lam[None, :])
    step = float(D.min())
    Z = np.zeros((m, m))
    for it in range(1, max_iters + 1):
        S = (2.0 * Bt - Z) / D
        w, U = np.linalg.eigh(Z + step * S)
        Zn = (U * np.clip(w, -eps, eps)) @ U.T
        Zn = (Zn + Zn.T) / 2
        delta = np.max(np.abs(Zn - Z))
        Z = Zn
        if delta <= tol * max(eps, 1e-300):
            break
    S = (2.0 * Bt - Z) / D
    return V @ S @ V.T, it


def objective_direct(S, B, W, eps, eps1):
    # Written out term by term from the definition.
    m = S.shape[0]
    nuc = np.sum(np.abs(np.linalg.eigvalsh(S)))
    return (np.sum(S * S) / m**2 - 2 * np.sum(B * S) + eps * nuc
            + eps1 * np.trace(S @ W @ S))


def objective_batch(Ss, B, W, eps, eps1):
    """Objective at a stack of symmetric matrices ``Ss[k]``."""
    m = B.shape[-1]
    nuc = np.sum(np.abs(np.linalg.eigvalsh(Ss)), axis=-1)
    quad = np.sum(Ss * Ss, axis=(-2, -1)) / m**2
    lin = -2 * np.sum(B * Ss, axis=(-2, -1))
    sob = np.einsum("kij,jl,kli->k", Ss, W, Ss)
    return quad + lin + eps * nuc + eps1 * sob


def random_directions(rng, count, m):
    a = rng.standard_normal((count, m, m))
    a = (a + np.swapaxes(a, 1, 2)) / 2
    return a / np.linalg.norm(a, axis=(1, 2), keepdims=True)
