"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla


def project_soc(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{(t, x): ||x|| <= t}``."""
    t, x = v[0], v[1:]
    nx = np.linalg.norm(x)
    if nx <= t:
        return v.copy()
    if nx <= -t:
        return np.zeros_like(v)
    a = 0.5 * (t + nx)
    out = np.empty_like(v)
    out[0] = a
    out[1:] = a * x / nx
    return out


def _cone_groups(n_linear: int, soc_dims) -> dict:
    # dimension -> (cones, dim) row indices, so equal cones project together
    groups, i = {}, n_linear
    for d in soc_dims:
        groups.setdefault(d, []).append(np.arange(i, i + d))
        i += d
    return {d: np.array(rows) for d, rows in groups.items()}


def project_cone(v: np.ndarray, n_linear: int, soc_dims, groups=None) -> np.ndarray:
    """Projection onto the product of a nonnegative orthant and SOCs."""
    groups = groups if groups is not None else _cone_groups(n_linear, soc_dims)
    out = np.empty_like(v)
    out[:n_linear] = np.maximum(v[:n_linear], 0.0)
    for idx in groups.values():
        block = v[idx]
        t, x = block[:, 0], block[:, 1:]
        nx = np.linalg.norm(x, axis=1)
        a = 0.5 * (t + nx)
        scale = np.divide(a, nx, out=np.zeros_like(a), where=nx > 0)
        proj = np.column_stack([a, x * scale[:, None]])
        proj[nx <= t] = block[nx <= t]
        proj[nx <= -t] = 0.0
        out[idx] = proj
    return out


def admm_conic(c, G, h, n_linear, soc_dims, rho=1.0, sigma=1e-6, alpha=1.6,
               tol=1e-8, max_iter=200_000, adapt_every=50):
    """Solve ``min c'x  s.t.  h - Gx in K`` by over-relaxed ADMM.

    Splitting ``Gx + s = h`` with ``s`` in the cone; the penalty is
    rebalanced from the primal and dual residuals.  Returns
    ``(x, objective, iterations)``.
    """
    G = G.toarray() if hasattr(G, "toarray") else np.asarray(G, dtype=float)
    m, n = G.shape
    GtG = G.T @ G
    x = np.zeros(n)
    groups = _cone_groups(n_linear, soc_dims)
    s = project_cone(h.copy(), n_linear, soc_dims, groups)
    u = np.zeros(m)

    def factor(r):
        return sla.cho_factor(sigma * np.eye(n) + r * GtG)

    F = factor(rho)
    for it in range(1, max_iter + 1):
        rhs = sigma * x - c - rho * G.T @ (s - h + u)
        x = sla.cho_solve(F, rhs)
        Gx = G @ x
        Gx_hat = alpha * Gx - (1 - alpha) * (s - h)
        s_old = s
        s = project_cone(h - Gx_hat - u, n_linear, soc_dims, groups)
        u = u + Gx_hat + s - h
        r_prim = np.linalg.norm(Gx + s - h)
        r_dual = rho * np.linalg.norm(G.T @ (s - s_old))
        scale = 1.0 + max(np.linalg.norm(h), np.linalg.norm(Gx))
        if r_prim < tol * scale and r_dual < tol * (1.0 + np.linalg.norm(c)):
            break
        if it % adapt_every == 0:
            if r_prim > 10 * r_dual:
                rho *= 2.0
                u /= 2.0
                F = factor(rho)
            elif r_dual > 10 * r_prim:
                rho /= 2.0
                u *= 2.0
                F = factor(rho)
    return x, float(c @ x), it


def naive_dft(x: np.ndarray, n: int) -> np.ndarray:
    """Direct ``O(n^2)`` DFT along axis 0 with zero padding."""
    x = np.asarray(x, dtype=complex)
    pad = np.zeros((n,) + x.shape[1:], dtype=complex)
    pad[: x.shape[0]] = x
    k = np.arange(n)
    W = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return W @ pad
