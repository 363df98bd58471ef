"""Image formation: back-projection, sparse-weight filtering and their
range-FFT variants, evaluated independently per pixel.

The heavy lifting is done by ``render`` from the compiled extension when it
is importable, otherwise from the numpy reference in ``_kernels_py``.  Set
``ROSAR_KERNEL=python`` to force the reference implementation.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from ..geometry import RadarConfig, steering_matrix, visibility_window
from ..signal import STREAM_RBPA, DataMatrix, range_fft, substream
from ..synthesis import WeightTable
from . import _kernels_py

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = ("BPA", "FFT_BPA", "SAS", "FFT_SAS", "RBPA", "FFT_RBPA")

STATUS_MESSAGES = {
    1: "pixel range outside the radar's observable interval",
    2: "no weight entry for the pixel's range bin",
    3: "aperture column outside the recorded pulses",
    4: "range bin outside the range profile",
}


class ImagingError(RuntimeError):
    """Imaging aborted at a pixel; ``pixel`` holds ``(row, col, phi, R)``."""

    def __init__(self, message, pixel=None, status=None):
        super().__init__(message)
        self.pixel = pixel
        self.status = status


def kernel_name() -> str:
    """``"compiled"`` or ``"python"``, whichever ``image`` will use."""
    if _ckernels is None or os.environ.get("ROSAR_KERNEL", "").lower() == "python":
        return "python"
    return "compiled"


def _kernel(name: str | None = None):
    name = name or kernel_name()
    if name == "compiled":
        if _ckernels is None:
            raise ImportError("compiled kernels are not available")
        return _ckernels.render
    if name == "python":
        return _kernels_py.render
    raise ValueError(f"unknown kernel {name!r}")


@dataclass(frozen=True)
class ImageGrid:
    """Output pixel grid.

    Polar grids have one row per range and one column per azimuth.
    Cartesian grids span ``centre +- extent/2`` on both axes with rows
    along ``y`` and columns along ``x``; coordinates are relative to the
    rotation centre.
    """

    mode: str
    azimuths: np.ndarray | None = field(default=None, repr=False)
    ranges: np.ndarray | None = field(default=None, repr=False)
    extent_x: float = 0.0
    extent_y: float = 0.0
    step: float = 0.0
    centre_x: float = 0.0
    centre_y: float = 0.0

    @classmethod
    def polar(cls, azimuths, ranges) -> ImageGrid:
        az = np.atleast_1d(np.asarray(azimuths, dtype=float))
        rg = np.atleast_1d(np.asarray(ranges, dtype=float))
        if az.size == 0 or rg.size == 0:
            raise ValueError("polar grid needs at least one azimuth and one range")
        if np.any(rg < 0):
            raise ValueError("ranges must be non-negative")
        return cls("polar", azimuths=az, ranges=rg)

    @classmethod
    def cartesian(cls, extent_x: float, extent_y: float, step: float,
                  centre_x: float = 0.0, centre_y: float = 0.0) -> ImageGrid:
        if not step > 0:
            raise ValueError("step must be positive")
        if not (extent_x >= 0 and extent_y >= 0):
            raise ValueError("extents must be non-negative")
        return cls("cartesian", extent_x=float(extent_x), extent_y=float(extent_y),
                   step=float(step), centre_x=float(centre_x), centre_y=float(centre_y))

    @staticmethod
    def _axis(extent: float, step: float) -> np.ndarray:
        n = int(math.floor(extent / step + 1e-9)) + 1
        return (np.arange(n) - (n - 1) / 2.0) * step

    @property
    def x(self) -> np.ndarray:
        return self.centre_x + self._axis(self.extent_x, self.step)

    @property
    def y(self) -> np.ndarray:
        return self.centre_y + self._axis(self.extent_y, self.step)

    @property
    def shape(self) -> tuple:
        if self.mode == "polar":
            return (self.ranges.size, self.azimuths.size)
        return (self.y.size, self.x.size)

    @property
    def size(self) -> int:
        rows, cols = self.shape
        return rows * cols

    def pixel_coords(self):
        """Azimuth and range of every pixel, each shaped like the image."""
        if self.mode == "polar":
            phi, R = np.meshgrid(self.azimuths, self.ranges)
            return phi, R
        X, Y = np.meshgrid(self.x, self.y)
        return np.mod(np.arctan2(Y, X), 2.0 * math.pi), np.hypot(X, Y)

    def check(self, cfg: RadarConfig) -> None:
        if self.mode == "polar" and np.any(self.ranges >= cfg.unambiguous_range):
            raise ValueError(
                f"grid ranges must stay below the unambiguous range {cfg.unambiguous_range:.4f} m")


@dataclass
class SarImage:
    """Complex image plus the metadata needed to compare backends."""

    grid: ImageGrid
    pixels: np.ndarray
    backend: str
    seconds: float = 0.0
    preprocess_seconds: float = 0.0
    threads: int = 1
    table_hash: str | None = None
    kernel: str = ""

    def __post_init__(self):
        if self.pixels.shape != self.grid.shape:
            raise ValueError(f"pixels {self.pixels.shape} do not match grid {self.grid.shape}")
        if self.seconds < 0 or self.preprocess_seconds < 0:
            raise ValueError("wall-clock times must be non-negative")

    @property
    def total_seconds(self) -> float:
        return self.seconds + self.preprocess_seconds


@dataclass
class _Supports:
    """Per-bin column offsets and weights in CSR form for the kernels."""

    bin_ptr: np.ndarray
    offs: np.ndarray
    wre: np.ndarray
    wim: np.ndarray
    bin_ok: np.ndarray

    @classmethod
    def empty(cls):
        z = np.zeros(0)
        return cls(np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int32), z, z,
                   np.zeros(0, dtype=np.int8))

    @classmethod
    def build(cls, n_bins: int, rows: dict):
        """``rows`` maps bin -> (offsets, complex weights or None)."""
        bin_ptr = np.zeros(n_bins + 1, dtype=np.int64)
        bin_ok = np.zeros(n_bins, dtype=np.int8)
        offs, w = [], []
        for b in range(n_bins):
            if b in rows:
                o, wb = rows[b]
                bin_ok[b] = 1
                offs.append(np.asarray(o, dtype=np.int32))
                w.append(np.zeros(len(o), complex) if wb is None else np.asarray(wb, complex))
            bin_ptr[b + 1] = bin_ptr[b] + (len(offs[-1]) if b in rows else 0)
        offs = np.concatenate(offs) if offs else np.zeros(0, dtype=np.int32)
        w = np.concatenate(w) if w else np.zeros(0, complex)
        return cls(bin_ptr, offs.astype(np.int32), np.ascontiguousarray(w.real),
                   np.ascontiguousarray(w.imag), bin_ok)


def centred_offsets(support, window_length: int) -> np.ndarray:
    """Column offsets of window positions relative to the pixel's column.

    The window is centred with ``(length - 1) // 2`` positions on the left,
    which for even lengths puts the extra position on the right.
    """
    return np.asarray(support, dtype=np.int64) - (window_length - 1) // 2


def _table_supports(table: WeightTable, require_verified: bool) -> _Supports:
    rows = {}
    for b in table.bins():
        e = table[b]
        if e.error or (require_verified and not e.verified):
            continue
        sup = e.support
        rows[b] = (centred_offsets(sup, len(e.window)), e.weights[sup])
    n = max(rows) + 1 if rows else 0
    return _Supports.build(n, rows)


def rbpa_supports(table: WeightTable, seed: int, require_verified: bool = False) -> _Supports:
    """Uniformly random column subsets with the table's per-bin cardinality."""
    rows = {}
    for b in table.bins():
        e = table[b]
        if e.error or (require_verified and not e.verified):
            continue
        n = len(e.window)
        pick = np.sort(substream(seed, STREAM_RBPA, b).choice(n, size=e.nnz, replace=False))
        rows[b] = (centred_offsets(pick, n), None)
    n = max(rows) + 1 if rows else 0
    return _Supports.build(n, rows)


def _interleaved(data: np.ndarray) -> np.ndarray:
    # (samples, pulses) complex -> (pulses, 2*samples) float64
    return np.ascontiguousarray(data.T, dtype=np.complex128).view(np.float64)


def _run(kernel, y, phi, R, mode, domain, sup, cfg, threads):
    out_re = np.empty(phi.size)
    out_im = np.empty(phi.size)
    status = np.empty(phi.size, dtype=np.int8)
    kernel(y, np.ascontiguousarray(phi, dtype=float), np.ascontiguousarray(R, dtype=float),
           int(mode), int(domain), sup.bin_ptr, sup.offs, sup.wre, sup.wim, sup.bin_ok,
           float(cfg.r), int(cfg.N), float(cfg.K), float(cfg.t_s), float(cfg.c),
           float(cfg.wavenumber), int(cfg.L), float(cfg.unambiguous_range),
           out_re, out_im, status, int(threads))
    return out_re + 1j * out_im, status


def _check_data(data: DataMatrix, cfg: RadarConfig, kind: str) -> None:
    if data.kind != kind:
        raise ValueError(f"expected {kind} data, got {data.kind}")
    data.check_rows(cfg)
    if data.n_pulses > cfg.N:
        raise ValueError(f"data has {data.n_pulses} pulses, more than one revolution ({cfg.N})")


def image(backend: str, data: DataMatrix, cfg: RadarConfig, grid: ImageGrid,
          table: WeightTable | None = None, seed: int | None = None,
          threads: int | None = None, require_verified: bool = False,
          mask_outside: bool = True, kernel: str | None = None) -> SarImage:
    """Form an image with one of ``BACKENDS``.

    Time-domain backends take IF data.  FFT backends accept IF data, which
    is range-compressed first and timed separately, or range-compressed
    data directly.  ``SAS`` paths need ``table``; ``RBPA`` paths need
    ``table`` for the per-bin cardinality and ``seed``.

    Pixels whose range lies outside ``(r, unambiguous range)`` are set to
    zero when ``mask_outside`` is true; otherwise they abort imaging.  Any
    other per-pixel failure raises ``ImagingError`` naming the pixel.
    """
    backend = backend.upper().replace("+", "_")
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; choose from {', '.join(BACKENDS)}")
    fft = backend.startswith("FFT_")
    core = backend[4:] if fft else backend
    grid.check(cfg)
    threads = int(threads or os.cpu_count() or 1)
    if threads < 1:
        raise ValueError("threads must be >= 1")

    if core in ("SAS", "RBPA") and table is None:
        raise ValueError(f"{backend} needs a weight table")
    if core == "RBPA" and seed is None:
        raise ValueError(f"{backend} needs a seed")
    if table is not None and table.cfg != cfg:
        raise ValueError("weight table was synthesized for a different radar configuration")

    pre = 0.0
    if fft:
        if data.kind == "IF":
            t0 = time.perf_counter()
            data = range_fft(data, cfg)
            pre = time.perf_counter() - t0
        _check_data(data, cfg, "range_compressed")
    else:
        _check_data(data, cfg, "IF")

    if core == "BPA":
        mode, sup = 0, _Supports.empty()
    elif core == "SAS":
        mode, sup = 1, _table_supports(table, require_verified)
    else:
        mode, sup = 2, rbpa_supports(table, seed, require_verified)

    name = kernel or kernel_name()
    run = _kernel(name)
    y = _interleaved(data.data)
    phi, R = grid.pixel_coords()
    t0 = time.perf_counter()
    vals, status = _run(run, y, phi.ravel(), R.ravel(), mode, int(fft), sup, cfg, threads)
    seconds = time.perf_counter() - t0

    bad = status != 0
    if mask_outside:
        bad &= status != 1
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        row, col = divmod(i, grid.shape[1])
        st = int(status[i])
        raise ImagingError(
            f"{backend}: {STATUS_MESSAGES[st]} at pixel (row {row}, col {col}, "
            f"phi {math.degrees(phi.flat[i]):.4f} deg, R {R.flat[i]:.4f} m)",
            pixel=(row, col, float(phi.flat[i]), float(R.flat[i])), status=st)

    table_hash = None
    if table is not None:
        from ..formats import table_hash as _hash
        table_hash = _hash(table)
    return SarImage(grid=grid, pixels=vals.reshape(grid.shape), backend=backend,
                    seconds=seconds, preprocess_seconds=pre, threads=threads,
                    table_hash=table_hash, kernel=name)


def _single(mode, domain, data, cfg, phi, R, sup):
    vals, status = _run(_kernels_py.render, _interleaved(data.data), np.array([phi]),
                        np.array([R]), mode, domain, sup, cfg, 1)
    st = int(status[0])
    if st:
        raise ImagingError(f"{STATUS_MESSAGES[st]} at phi={phi:.6f} rad, R={R:.4f} m", status=st)
    return complex(vals[0])


def bpa_pixel(data: DataMatrix, cfg: RadarConfig, phi: float, R: float) -> complex:
    """Back-projection value at one point from IF data."""
    _check_data(data, cfg, "IF")
    if not cfg.r < R < cfg.unambiguous_range:
        raise ValueError(f"range {R} m outside ({cfg.r}, {cfg.unambiguous_range:.4f}) m")
    return _single(0, 0, data, cfg, phi, R, _Supports.empty())


def _entry_supports(cfg: RadarConfig, R: float, w, window_length: int) -> _Supports:
    w = np.asarray(w, dtype=complex)
    if w.size != window_length:
        raise ValueError(f"weight vector has {w.size} entries, window has {window_length}")
    sup = np.flatnonzero(w)
    b = int(math.floor(2.0 * R * cfg.K * cfg.t_s * cfg.L / cfg.c + 0.5))
    return _Supports.build(b + 1, {b: (centred_offsets(sup, w.size), w[sup])})


def sas_pixel(data: DataMatrix, cfg: RadarConfig, table: WeightTable, phi: float, R: float,
              require_verified: bool = False) -> complex:
    """Sparse-weight filtering at one point from IF data."""
    _check_data(data, cfg, "IF")
    b = int(math.floor(2.0 * R * cfg.K * cfg.t_s * cfg.L / cfg.c + 0.5))
    if b not in table or table[b].error:
        raise ImagingError(f"no weight entry for range bin {b}", status=2)
    e = table[b]
    if require_verified and not e.verified:
        raise ImagingError(f"weight entry for range bin {b} is not verified", status=2)
    return _single(1, 0, data, cfg, phi, R, _entry_supports(cfg, R, e.weights, len(e.window)))


def fft_pixel(data: DataMatrix, cfg: RadarConfig, w, phi: float, R: float) -> complex:
    """Range-profile lookup filtering at one point.

    ``w`` is a weight vector over the pixel's centred window, or ``None``
    for back-projection weights over the visibility window.
    """
    _check_data(data, cfg, "range_compressed")
    if w is None:
        return _single(0, 1, data, cfg, phi, R, _Supports.empty())
    return _single(1, 1, data, cfg, phi, R, _entry_supports(cfg, R, w, np.size(w)))


def matched_filter_table(cfg: RadarConfig, bins, scale: float = 1.0) -> WeightTable:
    """Table of dense steering-vector weights, one per bin, for cross-checks."""
    from ..signal import bin_range
    from ..synthesis import SynthesisParams, WeightEntry

    entries = {}
    for b in map(int, bins):
        R = bin_range(cfg, b)
        win = visibility_window(cfg, R)
        a = steering_matrix(cfg, [math.pi / 2], R, win)[0] * scale
        entries[b] = WeightEntry(range_bin=b, R=R, delta=0.0, U=float(abs(np.vdot(a, a))),
                                 slack_sum=0.0, verified=True, window=win, weights=a)
    return WeightTable(cfg, SynthesisParams(), entries)
