"""Primal-dual interior-point solver for second-order cone programs.

Problems are held in the standard conic form::

    minimize    c'x
    subject to  G x + s = h,   s in K

where ``K`` is a product of a nonnegative orthant (the first ``n_linear``
rows) and second-order cones ``{(t, u) : ||u|| <= t}``.  Convex quadratic
constraints ``||F x + g||^2 <= q'x + d`` are rewritten as rotated cones by
:class:`ConicBuilder`, so the solver only ever sees these two cone types.

The method is the infeasible-start Mehrotra predictor-corrector with
Nesterov-Todd scaling, without the homogeneous embedding.  It assumes the
problem is primal and dual feasible, which holds for every slacked
subproblem produced by the synthesis code.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

__all__ = [
    "ConicProblem",
    "ConicSolution",
    "ConicBuilder",
    "SolverError",
    "solve",
    "kkt_residuals",
    "cone_violation",
]


class SolverError(RuntimeError):
    """Raised when the interior-point iteration breaks down."""

    def __init__(self, message, iterations=0, history=None):
        super().__init__(message)
        self.iterations = iterations
        self.history = history or []


@dataclass
class ConicProblem:
    """``minimize c'x  s.t.  h - G x in K``.

    ``variables`` maps names to index slices of ``x`` and ``constraints``
    lists ``(label, first_row, n_rows)`` in row order; both are bookkeeping
    only.
    """

    c: np.ndarray
    G: sp.csr_matrix
    h: np.ndarray
    n_linear: int
    soc_dims: list
    variables: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.h = np.asarray(self.h, dtype=float)
        self.G = sp.csr_matrix(self.G, dtype=float)
        self.soc_dims = [int(d) for d in self.soc_dims]
        m = self.n_linear + sum(self.soc_dims)
        if self.G.shape != (m, self.c.size) or self.h.size != m:
            raise ValueError(
                f"shape mismatch: G is {self.G.shape}, expected ({m}, {self.c.size})"
            )
        if any(d < 1 for d in self.soc_dims):
            raise ValueError("cone dimensions must be >= 1")
        if not np.all(np.isfinite(self.c)):
            raise ValueError("objective must be finite")
        covered = np.zeros(self.c.size, dtype=int)
        for sl in self.variables.values():
            covered[sl] += 1
        if self.variables and not np.all(covered == 1):
            raise ValueError("variable bookkeeping must cover every column exactly once")

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def m(self) -> int:
        return self.h.size

    def objective(self, x) -> float:
        return float(self.c @ x)

    def count(self, label: str) -> int:
        """Number of constraint blocks carrying ``label``."""
        return sum(1 for lab, _, _ in self.constraints if lab == label)

    def dump(self, fh=None) -> str:
        """Plain-text listing, one constraint per line.

        Each constraint line reads ``<label> <kind> <dim>`` followed by the
        ``h`` entries and the nonzeros of ``G`` as ``row:col:value``
        triplets, rows counted from the block start.
        """
        out = io.StringIO() if fh is None else fh
        out.write(f"conic-problem n={self.n} m={self.m}\n")
        out.write("objective " + " ".join(f"{i}:{v:.17g}" for i, v in enumerate(self.c) if v) + "\n")
        for name, sl in self.variables.items():
            out.write(f"variable {name} {sl.start} {sl.stop}\n")
        for label, start, rows in self._blocks():
            kind = "nonneg" if start < self.n_linear else "soc"
            block = self.G[start:start + rows].tocoo()
            trip = " ".join(f"{i}:{j}:{v:.17g}" for i, j, v in zip(block.row, block.col, block.data))
            hvals = " ".join(f"{v:.17g}" for v in self.h[start:start + rows])
            out.write(f"{label} {kind} {rows} h {hvals} G {trip}\n")
        return out.getvalue() if fh is None else ""

    def _blocks(self):
        if self.constraints:
            yield from self.constraints
            return
        for i in range(self.n_linear):
            yield ("linear", i, 1)
        start = self.n_linear
        for d in self.soc_dims:
            yield ("soc", start, d)
            start += d


class ConicBuilder:
    """Incremental construction of a :class:`ConicProblem`.

    Constraint data are given as dense rows over the full variable vector;
    the builder sorts linear rows ahead of cone rows.
    """

    def __init__(self):
        self._sizes = {}
        self._n = 0
        self._lin = []
        self._soc = []
        self._c = {}

    def variable(self, name: str, size: int) -> slice:
        sl = slice(self._n, self._n + size)
        self._sizes[name] = sl
        self._n += size
        return sl

    def _dense(self, coeffs):
        row = np.zeros(self._n)
        for sl, vals in coeffs:
            row[sl] += vals
        return row

    def set_objective(self, coeffs):
        self._c = coeffs

    def linear(self, label: str, A: np.ndarray, b: np.ndarray):
        """``A x <= b`` row-wise."""
        A = np.atleast_2d(A)
        self._lin.append((label, A, np.atleast_1d(np.asarray(b, dtype=float))))

    def soc(self, label: str, A: np.ndarray, b: np.ndarray):
        """``(A x + b)`` in the second-order cone (first entry is the bound)."""
        self._soc.append((label, -np.atleast_2d(A), np.asarray(b, dtype=float)))

    def quadratic(self, label: str, F: np.ndarray, g: np.ndarray, q: np.ndarray, d: float):
        """``||F x + g||^2 <= q'x + d`` as a rotated cone.

        Uses ``||(F x + g, (t-1)/2)|| <= (t+1)/2`` with ``t = q'x + d``.
        """
        F = np.atleast_2d(F)
        A = np.vstack([0.5 * q[None, :], F, 0.5 * q[None, :]])
        b = np.concatenate([[0.5 * (d + 1.0)], np.atleast_1d(g), [0.5 * (d - 1.0)]])
        self.soc(label, A, b)

    def build(self) -> ConicProblem:
        c = self._dense(self._c)
        rows, h, constraints, dims = [], [], [], []
        start = 0
        for label, A, b in self._lin:
            for i in range(A.shape[0]):
                rows.append(sp.csr_matrix(A[i:i + 1]))
                h.append(b[i:i + 1])
                constraints.append((label, start, 1))
                start += 1
        n_linear = start
        for label, G, b in self._soc:
            rows.append(sp.csr_matrix(G))
            h.append(b)
            constraints.append((label, start, G.shape[0]))
            dims.append(G.shape[0])
            start += G.shape[0]
        G = sp.vstack(rows, format="csr")
        return ConicProblem(c, G, np.concatenate(h), n_linear, dims, dict(self._sizes), constraints)


@dataclass
class ConicSolution:
    x: np.ndarray
    s: np.ndarray
    z: np.ndarray
    objective: float
    status: str
    gap: float
    max_violation: float
    iterations: int
    history: list = field(default_factory=list, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Cones:
    """Vectorised Jordan-algebra operations on ``R^l_+ x Q^{d1} x ...``."""

    def __init__(self, n_linear, soc_dims):
        self.l = n_linear
        self.dims = list(soc_dims)
        self.m = n_linear + sum(self.dims)
        self.degree = n_linear + len(self.dims)
        starts = n_linear + np.concatenate([[0], np.cumsum(self.dims)[:-1]]).astype(int) if self.dims else []
        self.starts = np.asarray(starts, dtype=int)
        groups = {}
        for k, (st, d) in enumerate(zip(self.starts, self.dims)):
            groups.setdefault(d, []).append((k, st))
        self.groups = []
        for d, items in groups.items():
            ids = np.array([k for k, _ in items])
            rows = np.array([st for _, st in items])[:, None] + np.arange(d)[None, :]
            self.groups.append((d, ids, rows))

    def identity(self):
        e = np.zeros(self.m)
        e[: self.l] = 1.0
        e[self.starts] = 1.0
        return e

    def min_eig(self, x):
        """Smallest eigenvalue of ``x`` in every cone, as a flat array."""
        out = [x[: self.l]]
        for d, _, rows in self.groups:
            X = x[rows]
            out.append(X[:, 0] - np.linalg.norm(X[:, 1:], axis=1))
        return np.concatenate(out) if out else np.zeros(0)

    def jprod(self, x, y):
        out = np.empty(self.m)
        out[: self.l] = x[: self.l] * y[: self.l]
        for _, _, rows in self.groups:
            X, Y = x[rows], y[rows]
            r = np.empty_like(X)
            r[:, 0] = np.einsum("ij,ij->i", X, Y)
            r[:, 1:] = X[:, :1] * Y[:, 1:] + Y[:, :1] * X[:, 1:]
            out[rows] = r
        return out

    def jdiv(self, lam, v):
        """Solve ``lam o u = v`` for ``u``."""
        out = np.empty(self.m)
        out[: self.l] = v[: self.l] / lam[: self.l]
        for _, _, rows in self.groups:
            Lm, V = lam[rows], v[rows]
            l0, l1 = Lm[:, 0], Lm[:, 1:]
            det = l0 * l0 - np.einsum("ij,ij->i", l1, l1)
            # near the boundary this can overflow; solve() reports the
            # resulting non-finite iterate as a breakdown
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                u0 = (l0 * V[:, 0] - np.einsum("ij,ij->i", l1, V[:, 1:])) / det
            r = np.empty_like(V)
            r[:, 0] = u0
            r[:, 1:] = (V[:, 1:] - u0[:, None] * l1) / l0[:, None]
            out[rows] = r
        return out

    def max_step(self, x, d):
        """Largest ``a`` with ``x + a d`` in the cone (``x`` interior)."""
        best = np.inf
        if self.l:
            neg = d[: self.l] < 0
            if np.any(neg):
                best = min(best, float(np.min(-x[: self.l][neg] / d[: self.l][neg])))
        for _, _, rows in self.groups:
            X, D = x[rows], d[rows]
            A = D[:, 0] ** 2 - np.einsum("ij,ij->i", D[:, 1:], D[:, 1:])
            B = X[:, 0] * D[:, 0] - np.einsum("ij,ij->i", X[:, 1:], D[:, 1:])
            C = X[:, 0] ** 2 - np.einsum("ij,ij->i", X[:, 1:], X[:, 1:])
            C = np.maximum(C, 0.0)
            alpha = np.full(A.shape, np.inf)
            # f(a) = A a^2 + 2 B a + C, f(0) = C > 0; first positive root
            disc = B * B - A * C
            lin = np.abs(A) <= 1e-300
            with np.errstate(divide="ignore", invalid="ignore"):
                alpha = np.where(lin & (B < 0), -C / (2 * B), alpha)
                sq = np.sqrt(np.maximum(disc, 0.0))
                q = -(B + np.copysign(sq, B))
                r1 = q / A
                r2 = C / q
                roots = np.stack([r1, r2])
                roots = np.where(roots > 0, roots, np.inf)
                cand = np.min(roots, axis=0)
                has_root = (~lin) & (disc >= 0) & ((A < 0) | (B < 0))
                alpha = np.where(has_root, cand, alpha)
                # leaving through the apex when the cone is degenerate
                apex = (D[:, 0] < 0) & (X[:, 0] + alpha * D[:, 0] < 0)
                alpha = np.where(apex, -X[:, 0] / np.where(apex, D[:, 0], -1.0), alpha)
            if alpha.size:
                best = min(best, float(np.min(alpha)))
        return best


class _Scaling:
    """Nesterov-Todd scaling ``W`` with ``W z = W^{-1} s = lambda``."""

    def __init__(self, cones: _Cones, s, z):
        self.cones = cones
        l = cones.l
        self.dl = np.sqrt(s[:l] / z[:l])
        self.groups = []
        for d, _, rows in cones.groups:
            S, Z = s[rows], z[rows]
            sJs = np.maximum(S[:, 0] ** 2 - np.einsum("ij,ij->i", S[:, 1:], S[:, 1:]), 1e-300)
            zJz = np.maximum(Z[:, 0] ** 2 - np.einsum("ij,ij->i", Z[:, 1:], Z[:, 1:]), 1e-300)
            sn = S / np.sqrt(sJs)[:, None]
            zn = Z / np.sqrt(zJz)[:, None]
            gamma = np.sqrt(np.maximum((1.0 + np.einsum("ij,ij->i", sn, zn)) / 2.0, 1e-300))
            Jzn = zn.copy()
            Jzn[:, 1:] *= -1.0
            wnt = (sn + Jzn) / (2.0 * gamma[:, None])
            # W = eta (2 v v' - J) with v the bisector of the NT point and e
            v = wnt.copy()
            v[:, 0] += 1.0
            v /= np.sqrt(2.0 * (wnt[:, 0] + 1.0))[:, None]
            eta = (sJs / zJz) ** 0.25
            self.groups.append((rows, eta, v))

    @staticmethod
    def _apply_group(X, eta, wbar, inverse):
        # W = eta (2 w w' - J);  W^{-1} = (2 Jw Jw' - J) / eta
        v = wbar.copy()
        if inverse:
            v[:, 1:] *= -1.0
        if X.ndim == 2:
            proj = np.einsum("ij,ij->i", v, X)
            JX = X.copy()
            JX[:, 1:] *= -1.0
            out = 2.0 * v * proj[:, None] - JX
            scale = 1.0 / eta if inverse else eta
            return out * scale[:, None]
        proj = np.einsum("ij,ijk->ik", v, X)
        JX = X.copy()
        JX[:, 1:, :] *= -1.0
        out = 2.0 * v[:, :, None] * proj[:, None, :] - JX
        scale = 1.0 / eta if inverse else eta
        return out * scale[:, None, None]

    def apply(self, x, inverse=False):
        out = np.empty_like(x)
        l = self.cones.l
        out[:l] = x[:l] / self.dl if inverse else x[:l] * self.dl
        for rows, eta, wbar in self.groups:
            out[rows] = self._apply_group(x[rows], eta, wbar, inverse)
        return out

    def group_params(self, cone_index):
        """``(eta, wbar)`` of cone ``cone_index`` (position in ``soc_dims``)."""
        for (d, ids, _), (rows, eta, wbar) in zip(self.cones.groups, self.groups):
            hit = np.nonzero(ids == cone_index)[0]
            if hit.size:
                return eta[hit[0]], wbar[hit[0]]
        raise KeyError(cone_index)


class _Identity(_Scaling):
    def __init__(self, cones: _Cones):
        self.cones = cones
        self.dl = np.ones(cones.l)
        self.groups = []
        for d, ids, rows in cones.groups:
            wbar = np.zeros((len(ids), d))
            wbar[:, 0] = 1.0
            self.groups.append((rows, np.ones(len(ids)), wbar))


class _NormalMatrix:
    """Assembles ``G' W^{-2} G`` exploiting the column footprint of each cone.

    Cones touching few columns contribute small dense blocks that are
    scattered into the result; cones touching many columns are batched into
    one dense product; very large cones use the identity-plus-rank-two
    structure of ``W^{-2}``.
    """

    LOCAL_COLS = 16
    BIG_DIM = 32

    def __init__(self, problem: ConicProblem, cones: _Cones):
        n = problem.n
        self.n = n
        G = problem.G.tocsr()
        G.sort_indices()
        self.G_lin = G[: cones.l].toarray() if cones.l * n <= 4_000_000 else G[: cones.l]
        ptr, idx, val = G.indptr, G.indices, G.data
        self.local = []
        self.mid = []
        self.big = []
        local_groups, mid_groups = {}, {}
        for k, (st, d) in enumerate(zip(cones.starts, cones.dims)):
            lo, hi = ptr[st], ptr[st + d]
            cols = np.unique(idx[lo:hi])
            # (row within block, column, value) of every nonzero
            rows = np.repeat(np.arange(d), np.diff(ptr[st:st + d + 1]))
            trip = (rows, idx[lo:hi], val[lo:hi])
            if d > self.BIG_DIM:
                span = self._span(cols)
                dense = self._dense(d, span, trip)
                self.big.append((k, span, dense, dense.T @ dense))
            elif cols.size <= self.LOCAL_COLS:
                local_groups.setdefault((d, cols.size), []).append((k, cols, trip))
            else:
                mid_groups.setdefault(d, []).append((k, cols, trip))
        for (d, kc), items in local_groups.items():
            ids = np.array([k for k, _, _ in items])
            cols = np.array([c for _, c, _ in items]).reshape(len(items), kc)
            blocks = np.stack([self._dense(d, c, tr) for _, c, tr in items])
            self.local.append((d, ids, cols, blocks))
        for d, items in mid_groups.items():
            ids = np.array([k for k, _, _ in items])
            span = self._span(np.unique(np.concatenate([c for _, c, _ in items])))
            blocks = np.stack([self._dense(d, span, tr) for _, _, tr in items])
            self.mid.append((d, ids, span, blocks))
        self._pos = {}
        for gi, (d, ids, rows) in enumerate(cones.groups):
            for j, k in enumerate(ids):
                self._pos[int(k)] = (gi, j)

    @staticmethod
    def _span(cols):
        """A slice when the columns are nearly contiguous, else the index array."""
        lo, hi = int(cols[0]), int(cols[-1]) + 1
        if hi - lo <= 1.25 * cols.size + 8:
            return slice(lo, hi)
        return cols

    @staticmethod
    def _dense(d, cols, trip):
        rows, c, v = trip
        if isinstance(cols, slice):
            out = np.zeros((d, cols.stop - cols.start))
            np.add.at(out, (rows, c - cols.start), v)
        else:
            out = np.zeros((d, cols.size))
            np.add.at(out, (rows, np.searchsorted(cols, c)), v)
        return out

    @staticmethod
    def _add(H, cols, block):
        if isinstance(cols, slice):
            H[cols, cols] += block
        else:
            H[np.ix_(cols, cols)] += block

    def _params(self, scaling, ids):
        gi_j = [self._pos[int(k)] for k in ids]
        gi = gi_j[0][0]
        js = np.array([j for _, j in gi_j])
        _, eta, wbar = scaling.groups[gi]
        return eta[js], wbar[js]

    def assemble(self, scaling: _Scaling) -> np.ndarray:
        n = self.n
        H = np.zeros((n, n))
        if self.G_lin.shape[0]:
            if isinstance(self.G_lin, np.ndarray):
                Gl = self.G_lin / scaling.dl[:, None]
                H += Gl.T @ Gl
            else:
                Gl = self.G_lin.multiply(1.0 / scaling.dl[:, None]).tocsr()
                H += (Gl.T @ Gl).toarray()
        for d, ids, cols, blocks in self.local:
            eta, wbar = self._params(scaling, ids)
            Gh = _Scaling._apply_group(blocks, eta, wbar, inverse=True)
            contrib = np.einsum("cdk,cdl->ckl", Gh, Gh)
            flat = (cols[:, :, None] * n + cols[:, None, :]).ravel()
            H.ravel()[:] += np.bincount(flat, weights=contrib.ravel(), minlength=n * n)
        for d, ids, cols, blocks in self.mid:
            eta, wbar = self._params(scaling, ids)
            Gh = _Scaling._apply_group(blocks, eta, wbar, inverse=True)
            Gh = Gh.reshape(-1, Gh.shape[-1])
            self._add(H, cols, Gh.T @ Gh)
        for k, cols, dense, gtg in self.big:
            eta, wbar = self._params(scaling, [k])
            eta, wbar = float(eta[0]), wbar[0]
            u = wbar.copy()
            u[1:] *= -1.0
            # W^{-2} = (I + 4|u|^2 u u' - 2 u u'J - 2 J u u') / eta^2
            Ju = u.copy()
            Ju[1:] *= -1.0
            p = dense.T @ u
            q = dense.T @ Ju
            block = gtg + 4.0 * (u @ u) * np.outer(p, p) - 2.0 * (np.outer(p, q) + np.outer(q, p))
            self._add(H, cols, block / eta**2)
        return H


def cone_violation(n_linear, soc_dims, x) -> float:
    """Distance-like measure of how far ``x`` lies outside the cone (0 if inside)."""
    cones = _Cones(n_linear, soc_dims)
    eig = cones.min_eig(np.asarray(x, dtype=float))
    return float(max(0.0, -eig.min())) if eig.size else 0.0


def _factor(H):
    n = H.shape[0]
    reg = 0.0
    scale = max(float(np.max(np.abs(np.diag(H)))), 1.0)
    for _ in range(8):
        try:
            return scipy.linalg.cho_factor(H + reg * np.eye(n), lower=False, check_finite=False), reg
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
            reg = scale * 1e-13 if reg == 0 else reg * 100
    raise np.linalg.LinAlgError("normal matrix is not positive definite")


def _solve_normal(factor, H, rhs):
    x = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    # one round of refinement against the unregularised matrix
    x += scipy.linalg.cho_solve(factor, rhs - H @ x, check_finite=False)
    return x


def solve(problem: ConicProblem, gap_tol: float = 1e-8, feas_tol: float = 1e-8,
          max_iter: int = 100, step: float = 0.99) -> ConicSolution:
    """Solve ``problem`` with a primal-dual interior-point method.

    Terminates with ``status='optimal'`` once the relative primal and dual
    residuals are below ``feas_tol`` and the complementarity ``s'z``,
    relative to ``max(1, |c'x|)``, is below ``gap_tol``.  Raises
    :class:`SolverError` if the iteration breaks down; the exception
    carries the residual history.
    """
    c, G, h = problem.c, problem.G, problem.h
    cones = _Cones(problem.n_linear, problem.soc_dims)
    normal = _NormalMatrix(problem, cones)
    GT = G.T.tocsr()
    e = cones.identity()
    hnorm = max(1.0, float(np.linalg.norm(h)))
    cnorm = max(1.0, float(np.linalg.norm(c)))

    H0 = normal.assemble(_Identity(cones))
    try:
        f0, _ = _factor(H0)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"constraint matrix is rank deficient: {exc}") from exc
    x = _solve_normal(f0, H0, GT @ h)
    s = h - G @ x
    z = -(G @ _solve_normal(f0, H0, c))
    for v in (s, z):
        shift = -cones.min_eig(v).min() if cones.m else -1.0
        if shift >= -1e-8:
            v += (1.0 + shift) * e

    history = []
    status = "max_iter"
    it = 0
    for it in range(max_iter + 1):
        rx = GT @ z + c
        rz = G @ x + s - h
        gap = float(s @ z)
        pcost = float(c @ x)
        pres = float(np.linalg.norm(rz)) / hnorm
        dres = float(np.linalg.norm(rx)) / cnorm
        relgap = gap / max(1.0, abs(pcost))
        history.append({"iter": it, "pcost": pcost, "gap": gap, "pres": pres, "dres": dres})
        if not all(map(math.isfinite, (gap, pcost, pres, dres))):
            raise SolverError("non-finite iterate", it, history)
        if pres <= feas_tol and dres <= feas_tol and relgap <= gap_tol:
            status = "optimal"
            break
        if it == max_iter:
            break

        W = _Scaling(cones, s, z)
        lam = W.apply(z)
        mu = gap / cones.degree
        try:
            H = normal.assemble(W)
            fac, _ = _factor(H)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"iteration {it}: {exc}", it, history) from exc

        def newton(rc):
            u = cones.jdiv(lam, rc)
            rhs = -rx - GT @ W.apply(W.apply(rz, inverse=True) + u, inverse=True)
            dx = _solve_normal(fac, H, rhs)
            gdx = G @ dx
            dz = W.apply(W.apply(gdx + rz, inverse=True) + u, inverse=True)
            # primal direction straight from the linearised equality keeps
            # the residual decay exact when W is badly conditioned
            return dx, -rz - gdx, dz

        def longest(ds, dz):
            return min(cones.max_step(s, ds), cones.max_step(z, dz))

        dx, ds, dz = newton(-cones.jprod(lam, lam))
        a_aff = min(1.0, longest(ds, dz))
        sigma = (1.0 - a_aff) ** 3
        dst, dzt = W.apply(ds, inverse=True), W.apply(dz)
        rc = -cones.jprod(lam, lam) - cones.jprod(dst, dzt) + sigma * mu * e
        dx, ds, dz = newton(rc)
        alpha = min(1.0, step * longest(ds, dz))
        if not alpha > 1e-12:
            raise SolverError(f"iteration {it}: step length collapsed", it, history)
        x = x + alpha * dx
        s = s + alpha * ds
        z = z + alpha * dz

    slack = h - G @ x
    return ConicSolution(
        x=x, s=s, z=z,
        objective=float(c @ x),
        status=status,
        gap=float(s @ z) / max(1.0, abs(float(c @ x))),
        max_violation=max(cone_violation(problem.n_linear, problem.soc_dims, slack),
                          float(np.max(np.abs(G @ x + s - h))) if problem.m else 0.0),
        iterations=it,
        history=history,
    )


def kkt_residuals(problem: ConicProblem, solution: ConicSolution):
    """``(stationarity, primal_feas, dual_feas, complementarity)``.

    All four are scaled to be dimensionless: stationarity is
    ``||G'z + c||_inf / (1 + ||c||_inf)``, primal feasibility the cone
    violation of ``h - Gx`` over ``1 + ||h||_inf``, dual feasibility the cone
    violation of ``z``, and complementarity ``|(h - Gx)'z| / (1 + |c'x|)``.
    """
    if solution.status == "numerical_failure":
        raise ValueError("no residuals for a failed solve")
    x, z = solution.x, solution.z
    c, G, h = problem.c, problem.G, problem.h
    slack = h - G @ x
    stat = float(np.max(np.abs(G.T @ z + c), initial=0.0)) / (1.0 + float(np.max(np.abs(c), initial=0.0)))
    prim = cone_violation(problem.n_linear, problem.soc_dims, slack) / (1.0 + float(np.max(np.abs(h), initial=0.0)))
    dual = cone_violation(problem.n_linear, problem.soc_dims, z)
    comp = abs(float(slack @ z)) / (1.0 + abs(float(c @ x)))
    return stat, prim, dual, comp
