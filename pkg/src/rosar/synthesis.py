"""Robust sparse azimuth-filter synthesis by successive convex approximation.

For every range bin a complex weight vector ``w`` over the visible phase
centres is found that keeps the worst-case main-lobe power above
``U_min`` and the worst-case sidelobe power ``eta`` below it while
minimising ``||w||_1``.  The nonconvex terms are linearised around the
previous iterate and each convex subproblem is handed to
:mod:`rosar.conic`.

All synthesis happens in the canonical frame (look direction ``pi/2``).
When the aperture window is symmetric about ``pi/2`` the mirror symmetry
of the circular array lets the subproblem be written over half of the
weights and one sidelobe arc; see :func:`build_subproblem`.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from . import conic
from .geometry import ApertureWindow, RadarConfig, SteeringVector, steering_matrix, visibility_window
from .signal import JitterModel, bin_range, sample_phase_errors

__all__ = [
    "SynthesisParams",
    "SubproblemState",
    "WeightEntry",
    "WeightTable",
    "SynthesisError",
    "worst_case_bounds",
    "sidelobe_grid",
    "build_subproblem",
    "sca_solve",
    "calibrate_delta",
    "synthesize_all",
    "certificate",
]

log = logging.getLogger(__name__)

LOOK = math.pi / 2


class SynthesisError(RuntimeError):
    """A conic solve failed inside the SCA loop."""

    def __init__(self, message, range_bin=None, iteration=None):
        super().__init__(message)
        self.range_bin = range_bin
        self.iteration = iteration


@dataclass(frozen=True)
class SynthesisParams:
    """Design parameters of the sparse filter (angles in radians).

    Attributes
    ----------
    phi_MW : float
        Half main-lobe width.
    eta : float
        Allowed sidelobe to main-lobe power ratio, ``0 < eta < 1``.
    grid_step : float
        Spacing of the constrained sidelobe directions.
    lambda_b : float
        Penalty on the feasibility slacks.
    U_min : float
        Minimum worst-case main-lobe power; the amplitude variable is held
        above ``sqrt(U_min)``.  The default 25 keeps the amplitude above 5.
    ITER : int
        Hard cap on SCA iterations.
    Th : float
        Relative objective change that ends the SCA loop early.
    zero_threshold : float
        Entries below ``zero_threshold * max|w|`` are set to zero.
    b_min : float
        Slack total below which a solution counts as verified.
    delta : float
        Default error-ball radius when no per-bin value is supplied.
    """

    phi_MW: float = math.radians(1.0)
    eta: float = 0.0005
    grid_step: float = math.radians(0.5)
    lambda_b: float = 50.0
    U_min: float = 25.0
    ITER: int = 50
    Th: float = 1e-3
    zero_threshold: float = 1e-3
    b_min: float = 1e-5
    delta: float = 0.0

    def __post_init__(self):
        if not 0 < self.eta < 1:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
        if not self.grid_step > 0:
            raise ValueError("grid_step must be positive")
        if not self.lambda_b > 0:
            raise ValueError("lambda_b must be positive")
        if self.U_min < 0 or self.delta < 0 or self.phi_MW < 0:
            raise ValueError("U_min, delta and phi_MW must be non-negative")
        if int(self.ITER) != self.ITER or self.ITER < 1:
            raise ValueError("ITER must be a positive integer")


@dataclass
class SubproblemState:
    """SCA anchor: the previous weights and main-lobe amplitude."""

    w: np.ndarray
    U: float
    objective: float = math.inf
    slacks: tuple = (0.0, 0.0, 0.0)


@dataclass
class WeightEntry:
    """Result of the synthesis for one range bin.

    ``weights`` spans the whole window (zeros included) and has already
    been thresholded; ``norm_before_threshold`` records ``||w||_2`` of the
    raw solver output.
    """

    range_bin: int
    R: float
    delta: float
    U: float
    slack_sum: float
    verified: bool
    window: ApertureWindow
    weights: np.ndarray
    iterations: int = 0
    objective_history: list = field(default_factory=list)
    norm_before_threshold: float = float("nan")
    error: str = ""

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.weights))

    @property
    def support(self) -> np.ndarray:
        """Window-relative indices of the nonzero weights."""
        return np.flatnonzero(self.weights)


@dataclass
class WeightTable:
    """Per-range-bin weights plus the configuration that produced them."""

    cfg: RadarConfig
    params: SynthesisParams
    entries: dict = field(default_factory=dict)

    def __getitem__(self, range_bin: int) -> WeightEntry:
        return self.entries[range_bin]

    def __contains__(self, range_bin) -> bool:
        return range_bin in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def bins(self) -> list:
        return sorted(self.entries)

    def verified_entry(self, range_bin: int) -> WeightEntry:
        entry = self.entries.get(range_bin)
        if entry is None:
            raise KeyError(f"no weights for range bin {range_bin}")
        if not entry.verified:
            raise KeyError(f"weights for range bin {range_bin} are not verified")
        return entry


def worst_case_bounds(w, a, delta: float):
    """Worst-case main-lobe and sidelobe powers under an error ball.

    For ``||w|| <= 1`` and any ``||e|| <= delta``,
    ``(|w^H a| - delta)^2 <= |w^H (a + e)|^2 <= (|w^H a| + delta)^2``;
    the lower bound is clamped at zero once ``delta`` exceeds ``|w^H a|``.

    Returns
    -------
    tuple of float
        ``(mainlobe_lb, sidelobe_ub)``.
    """
    a = a.entries if isinstance(a, SteeringVector) else np.asarray(a)
    resp = abs(np.vdot(w, a))
    return max(resp - delta, 0.0) ** 2, (resp + delta) ** 2


def sidelobe_grid(window: ApertureWindow, phi_delta: float, params: SynthesisParams,
                  one_sided: bool = False) -> np.ndarray:
    """Constrained sidelobe directions, stepping outward from ``pi/2 +- phi_MW``.

    The grid is clipped to the angular span of the window.  With
    ``one_sided`` only the arc below the look direction is returned.
    """
    lo = window.N_min * phi_delta
    hi = window.N_max * phi_delta
    eps = 1e-12
    k_left = math.floor((LOOK - params.phi_MW - lo) / params.grid_step + eps)
    left = LOOK - params.phi_MW - params.grid_step * np.arange(k_left + 1)
    left = left[::-1]
    if one_sided:
        return left
    k_right = math.floor((hi - LOOK - params.phi_MW) / params.grid_step + eps)
    right = LOOK + params.phi_MW + params.grid_step * np.arange(k_right + 1)
    return np.concatenate([left, right])


class _Fold:
    """Maps reduced weights ``v`` to full weights ``w = E v``.

    Without folding ``E`` is the identity.  With folding, entries ``j``
    and ``n-1-j`` share one variable and ``mult`` counts how many full
    entries each reduced entry stands for.
    """

    def __init__(self, n: int, fold: bool):
        self.n = n
        self.fold = fold
        if fold:
            h = (n + 1) // 2
            self.mult = np.full(h, 2.0)
            if n % 2:
                self.mult[-1] = 1.0
        else:
            self.mult = np.ones(n)

    @property
    def size(self) -> int:
        return self.mult.size

    def reduce(self, a: np.ndarray) -> np.ndarray:
        """``E^T a`` for each row of ``a``."""
        if not self.fold:
            return a
        h = self.size
        out = a[..., :h] + a[..., ::-1][..., :h]
        if self.n % 2:
            out[..., -1] = a[..., h - 1]
        return out

    def expand(self, v: np.ndarray) -> np.ndarray:
        if not self.fold:
            return v
        h = self.size
        w = np.empty(self.n, dtype=v.dtype)
        w[:h] = v
        w[self.n - h:] = v[::-1]
        return w

    def restrict(self, w: np.ndarray) -> np.ndarray:
        """Reduced vector of a mirror-symmetric ``w``."""
        return w[: self.size] if self.fold else w


def _entries(a):
    return a.entries if isinstance(a, SteeringVector) else np.asarray(a, dtype=complex)


def _response_rows(A: np.ndarray):
    """Rows mapping ``(v_re, v_im)`` to ``Re`` and ``Im`` of ``a^H v``."""
    ar, ai = A.real, A.imag
    re = np.concatenate([ar, ai], axis=-1)
    im = np.concatenate([-ai, ar], axis=-1)
    return re, im


def build_subproblem(state: SubproblemState, a_m, a_s, params: SynthesisParams,
                     delta: float = 0.0, fold: bool = False) -> conic.ConicProblem:
    """Convex SCA subproblem around the anchor ``state``.

    Variables are the real and imaginary parts of the (possibly folded)
    weights, one modulus bound ``t_j >= |v_j|`` per weight, the main-lobe
    amplitude ``U`` and the three slacks ``b, b1, b2``.  Constraints, in
    row order: the linearised norm lower bound (``C4``), ``U >= sqrt(U_min)``
    (``C5``) and slack signs as linear rows; then the linearised main-lobe
    cone (``C1``), one cone per sidelobe direction (``C2``), the norm
    upper bound (``C3``) and the modulus cones (``abs``).

    ``a_m`` is the main-lobe steering vector and ``a_s`` an ``(S, n)``
    array or list of sidelobe steering vectors.  With ``fold=True`` the
    caller guarantees that the window and the sidelobe set are mirror
    symmetric about the look direction; ``a_s`` then holds one arc only.
    """
    am = _entries(a_m)
    if isinstance(a_s, (list, tuple)):
        As = np.array([_entries(a) for a in a_s]) if len(a_s) else np.zeros((0, am.size), complex)
    else:
        As = np.atleast_2d(np.asarray(a_s, dtype=complex))
    if As.shape[0] == 0:
        raise ValueError("empty sidelobe grid")
    n = am.size
    fd = _Fold(n, fold)
    h = fd.size
    amr = fd.reduce(am)
    Asr = fd.reduce(As)
    v_i = fd.restrict(np.asarray(state.w, dtype=complex))
    U_i = float(state.U)
    eta, lam = params.eta, params.lambda_b
    se = math.sqrt(eta)
    S = Asr.shape[0]

    # scalars first so that every dense constraint block spans a
    # contiguous run of columns
    nx = 3 * h + 4
    iU, ib, ib1, ib2 = 0, 1, 2, 3
    iw = slice(4, 4 + 2 * h)
    it = slice(4 + 2 * h, 4 + 3 * h)
    variables = {"w_re": slice(4, 4 + h), "w_im": slice(4 + h, 4 + 2 * h), "abs": it,
                 "U": slice(iU, iU + 1), "b": slice(ib, ib + 1),
                 "b1": slice(ib1, ib1 + 1), "b2": slice(ib2, ib2 + 1)}

    c = np.zeros(nx)
    c[it] = fd.mult
    c[[ib, ib1, ib2]] = lam

    # linear rows: G x <= h
    n_lin = 5
    Gl = np.zeros((n_lin, nx))
    hl = np.zeros(n_lin)
    mv = fd.mult * v_i
    Gl[0, iw] = -2.0 * np.concatenate([mv.real, mv.imag])
    Gl[0, ib] = -1.0
    hl[0] = -1.0 - float(np.sum(fd.mult * np.abs(v_i) ** 2))
    Gl[1, iU] = -1.0
    hl[1] = -math.sqrt(params.U_min)
    Gl[2, ib] = Gl[3, ib1] = Gl[4, ib2] = -1.0

    # cone rows are written as A x + b0 in K, i.e. G = -A, h = b0
    blocks_A, blocks_b, constraints = [], [], []
    row = n_lin
    constraints += [("C4", 0, 1), ("C5", 1, 1), ("b>=0", 2, 1), ("b1>=0", 3, 1), ("b2>=0", 4, 1)]

    # C1: (U + delta)^2 <= 2 Re{conj(p_i) p(w)} - |p_i|^2 + b1
    re_m, im_m = _response_rows(amr)
    p_i = np.vdot(amr, v_i)
    tau = np.zeros(nx)
    tau[iw] = 2.0 * (p_i.real * re_m + p_i.imag * im_m)
    tau[ib1] = 1.0
    tau0 = -abs(p_i) ** 2
    A1 = np.zeros((3, nx))
    A1[0] = 0.5 * tau
    A1[2] = 0.5 * tau
    A1[1, iU] = 1.0
    blocks_A.append(A1)
    blocks_b.append(np.array([0.5 * (tau0 + 1.0), delta, 0.5 * (tau0 - 1.0)]))
    constraints.append(("C1", row, 3))
    row += 3

    # C2: |p_s(w)|^2 <= b2 - 2(sqrt(eta) delta - eta U_i) U - eta U_i^2 + delta^2
    re_s, im_s = _response_rows(Asr)
    A2 = np.zeros((S, 4, nx))
    tau2 = np.zeros(nx)
    tau2[ib2] = 1.0
    tau2[iU] = -2.0 * (se * delta - eta * U_i)
    tau20 = -eta * U_i**2 + delta**2
    A2[:, 0, :] = 0.5 * tau2
    A2[:, 3, :] = 0.5 * tau2
    A2[:, 1, iw] = re_s
    A2[:, 2, iw] = im_s
    b2 = np.tile([0.5 * (tau20 + 1.0), 0.0, 0.0, 0.5 * (tau20 - 1.0)], S)
    blocks_A.append(A2.reshape(4 * S, nx))
    blocks_b.append(b2)
    for s in range(S):
        constraints.append(("C2", row, 4))
        row += 4

    # C3: ||w||^2 <= 1 + b
    A3 = np.zeros((2 * h + 2, nx))
    sq = np.sqrt(fd.mult)
    A3[0, ib] = 0.5
    A3[-1, ib] = 0.5
    A3[1:1 + 2 * h, iw] = np.diag(np.concatenate([sq, sq]))
    b3 = np.zeros(2 * h + 2)
    b3[0] = 1.0
    blocks_A.append(A3)
    blocks_b.append(b3)
    constraints.append(("C3", row, 2 * h + 2))
    row += 2 * h + 2

    # modulus epigraphs: |v_j| <= t_j
    j = np.arange(h)
    rows_e = np.concatenate([3 * j, 3 * j + 1, 3 * j + 2])
    cols_e = np.concatenate([4 + 2 * h + j, 4 + j, 4 + h + j])
    Ae = sp.csr_matrix((np.ones(3 * h), (rows_e, cols_e)), shape=(3 * h, nx))
    for k in range(h):
        constraints.append(("abs", row, 3))
        row += 3

    G = sp.vstack([sp.csr_matrix(Gl), -sp.csr_matrix(np.vstack(blocks_A)), -Ae], format="csr")
    G.eliminate_zeros()
    hv = np.concatenate([hl] + blocks_b + [np.zeros(3 * h)])
    dims = [3] + [4] * S + [2 * h + 2] + [3] * h
    return conic.ConicProblem(c, G, hv, n_lin, dims, variables, constraints)


def _unpack(problem: conic.ConicProblem, x: np.ndarray):
    v = problem.variables
    w = x[v["w_re"]] + 1j * x[v["w_im"]]
    return w, float(x[v["U"]][0]), tuple(float(x[v[k]][0]) for k in ("b", "b1", "b2"))


def _design(cfg: RadarConfig, R: float, params: SynthesisParams, fold):
    window = visibility_window(cfg, R)
    symmetric = cfg.N % 4 == 0 and (window.N_min + window.N_max) == cfg.N // 2
    use_fold = symmetric if fold is None else bool(fold)
    if use_fold and not symmetric:
        raise ValueError("folding needs a window symmetric about the look direction")
    grid = sidelobe_grid(window, cfg.phi_delta, params, one_sided=use_fold)
    if grid.size == 0:
        raise ValueError(f"empty sidelobe grid at R={R} m")
    a_m = steering_matrix(cfg, [LOOK], R, window)[0]
    A_s = steering_matrix(cfg, grid, R, window)
    return window, use_fold, a_m, A_s


def sca_solve(range_bin: int, cfg: RadarConfig, params: SynthesisParams,
              delta: float | None = None, fold: bool | None = None,
              R: float | None = None, **solver_opts) -> WeightEntry:
    """Sparse weights for one range bin.

    Starts from uniform weights ``1/sqrt(n)`` with ``U`` equal to the
    initial main-lobe power, solves convex subproblems until the objective
    settles (relative change below ``Th``) or ``ITER`` is reached, then
    zeroes small entries.

    Parameters
    ----------
    range_bin : int
        Bin index; its centre range is used unless ``R`` is given.
    delta : float, optional
        Error-ball radius, defaults to ``params.delta``.
    fold : bool, optional
        Force the mirror-symmetric reduction on or off; by default it is
        used whenever the window allows it.

    Raises
    ------
    SynthesisError
        When a subproblem cannot be solved; carries the iteration index.
    """
    R = bin_range(cfg, range_bin) if R is None else float(R)
    delta = params.delta if delta is None else float(delta)
    window, use_fold, a_m, A_s = _design(cfg, R, params, fold)
    n = len(window)
    if not 0 <= delta <= np.linalg.norm(a_m):
        raise ValueError(f"delta={delta} outside [0, ||a||] at R={R} m")
    fd = _Fold(n, use_fold)

    w = np.full(n, 1.0 / math.sqrt(n), dtype=complex)
    state = SubproblemState(w=w, U=abs(np.vdot(w, a_m)) ** 2)
    history = []
    it = 0
    for it in range(1, params.ITER + 1):
        problem = build_subproblem(state, a_m, A_s, params, delta=delta, fold=use_fold)
        try:
            sol = conic.solve(problem, **solver_opts)
        except conic.SolverError as exc:
            raise SynthesisError(f"bin {range_bin}, SCA iteration {it}: {exc}", range_bin, it) from exc
        if sol.status != "optimal":
            log.warning("bin %d iteration %d: solver stopped with %s", range_bin, it, sol.status)
        v, U, slacks = _unpack(problem, sol.x)
        J = float(np.sum(fd.mult * np.abs(v)) + params.lambda_b * sum(slacks))
        history.append(J)
        prev = state.objective
        state = SubproblemState(w=fd.expand(v), U=U, objective=J, slacks=slacks)
        if math.isfinite(prev) and abs(J - prev) < params.Th * abs(prev):
            break

    w = state.w
    raw_norm = float(np.linalg.norm(w))
    mag = np.abs(w)
    w = np.where(mag < params.zero_threshold * mag.max(), 0.0, w)
    slack_sum = float(sum(max(s, 0.0) for s in state.slacks))
    return WeightEntry(
        range_bin=int(range_bin), R=R, delta=delta, U=state.U, slack_sum=slack_sum,
        verified=slack_sum < params.b_min, window=window, weights=w,
        iterations=it, objective_history=history, norm_before_threshold=raw_norm,
    )


def calibrate_delta(cfg: RadarConfig, jitter: JitterModel, R: float,
                    percentile: float = 0.99, draws: int = 10_000) -> float:
    """Error-ball radius covering ``percentile`` of jitter realisations.

    Empirical quantile of ``||a_hat - a||`` at the look direction.
    """
    if not 0 < percentile < 1:
        raise ValueError("percentile must lie in (0, 1)")
    if draws < 10_000:
        raise ValueError("at least 10000 draws are required")
    if jitter.sigma == 0:
        return 0.0
    norms = sample_phase_errors(cfg, jitter, R, draws)
    return float(np.quantile(norms, percentile))


def _solve_bin(args):
    range_bin, cfg, params, delta, fold = args
    try:
        return sca_solve(range_bin, cfg, params, delta=delta, fold=fold)
    except (SynthesisError, ValueError) as exc:
        R = bin_range(cfg, range_bin)
        try:
            window = visibility_window(cfg, R)
        except ValueError:
            window = ApertureWindow(0, 0, 0.0)
        return WeightEntry(range_bin, R, float(delta), float("nan"), float("inf"), False,
                           window, np.zeros(len(window), complex), error=str(exc))


def synthesize_all(cfg: RadarConfig, params: SynthesisParams, bins,
                   deltas=None, workers: int = 1, fold: bool | None = None) -> WeightTable:
    """Synthesise every bin in ``bins``; failures are recorded, not raised.

    ``deltas`` maps bin index to error radius (or is a sequence aligned
    with ``bins``); missing bins use ``params.delta``.
    """
    bins = [int(b) for b in bins]
    for b in bins:
        if not 0 <= bin_range(cfg, b) < cfg.unambiguous_range:
            raise ValueError(f"bin {b} beyond the unambiguous range")
    if deltas is None:
        dmap = {}
    elif isinstance(deltas, dict):
        dmap = {int(k): float(v) for k, v in deltas.items()}
    else:
        dmap = dict(zip(bins, map(float, deltas)))
    jobs = [(b, cfg, params, dmap.get(b, params.delta), fold) for b in bins]
    table = WeightTable(cfg, params)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_bin, jobs))
    else:
        results = [_solve_bin(j) for j in jobs]
    for entry in results:
        table.entries[entry.range_bin] = entry
        if entry.error:
            log.warning("bin %d failed: %s", entry.range_bin, entry.error)
    return table


def certificate(entry: WeightEntry, cfg: RadarConfig, params: SynthesisParams):
    """Worst-case margins of a finished entry over its design grid.

    Returns
    -------
    dict
        ``mainlobe_lb`` (worst-case main-lobe power), ``sidelobe_ub``
        (array of worst-case sidelobe powers on the full two-sided grid),
        ``sidelobe_cap`` (``eta * U^2``) and ``grid`` (the directions).
    """
    grid = sidelobe_grid(entry.window, cfg.phi_delta, params)
    a_m = steering_matrix(cfg, [LOOK], entry.R, entry.window)[0]
    A_s = steering_matrix(cfg, grid, entry.R, entry.window)
    lb, _ = worst_case_bounds(entry.weights, a_m, entry.delta)
    resp = np.abs(A_s @ np.conj(entry.weights))
    return {
        "mainlobe_lb": lb,
        "sidelobe_ub": (resp + entry.delta) ** 2,
        "sidelobe_cap": params.eta * entry.U**2,
        "grid": grid,
    }


def with_delta(params: SynthesisParams, delta: float) -> SynthesisParams:
    """Copy of ``params`` with a different default error radius."""
    return replace(params, delta=float(delta))
