"""Evaluation metrics: array patterns, main-lobe width, PISR and image entropy.

Conventions: pattern levels are ``20*log10`` of magnitude ratios, power
quantities (PISR, ``eta``) are ``10*log10`` when shown in dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ApertureWindow, RadarConfig, steering_matrix, visibility_window
from .synthesis import LOOK, SynthesisParams, sidelobe_grid


class MetricError(ValueError):
    """Raised when a metric is undefined for its input."""


@dataclass(frozen=True)
class PatternTrace:
    """Sampled array response ``F(phi) = w^H (a(phi; R) + e)``."""

    angles: np.ndarray
    response: np.ndarray

    def __post_init__(self):
        if self.angles.shape != self.response.shape or self.angles.ndim != 1:
            raise ValueError("angles and response must be 1-D and equally long")
        if np.any(np.diff(self.angles) <= 0):
            raise ValueError("angles must be strictly increasing")

    @property
    def peak(self) -> float:
        """Largest magnitude, the 0 dB reference."""
        return float(np.max(np.abs(self.response)))

    def db(self, floor: float = -300.0) -> np.ndarray:
        """Magnitude in dB relative to the peak (20*log10)."""
        mag = np.abs(self.response) / self.peak
        with np.errstate(divide="ignore"):
            return np.maximum(20.0 * np.log10(mag), floor)


def array_pattern(w, cfg: RadarConfig, R: float, angles, error=None,
                  window: ApertureWindow | None = None) -> PatternTrace:
    """Response of weights ``w`` over ``angles`` at range ``R``.

    ``window`` defaults to the visibility window at ``R``; ``error`` is an
    optional fixed perturbation added to every steering vector.
    """
    window = window or visibility_window(cfg, R)
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    w = np.asarray(w, dtype=complex)
    if w.size != len(window):
        raise ValueError(f"weight vector has {w.size} entries, window has {len(window)}")
    lo, hi = window.N_min * cfg.phi_delta, window.N_max * cfg.phi_delta
    if np.any(angles < lo - 1e-12) or np.any(angles > hi + 1e-12):
        raise ValueError("angles must lie within the window's angular span")
    A = steering_matrix(cfg, angles, R, window)
    if error is not None:
        A = A + np.asarray(error, dtype=complex)[None, :]
    return PatternTrace(angles, A @ np.conj(w))


def half_mainlobe_width(trace: PatternTrace) -> float:
    """Distance from the peak to the nearest strict local minimum of ``|F|``."""
    mag = np.abs(trace.response)
    p = int(np.argmax(mag))
    if np.count_nonzero(mag == mag[p]) > 1:
        raise MetricError("pattern has no unique peak")
    inner = np.flatnonzero((mag[1:-1] < mag[:-2]) & (mag[1:-1] < mag[2:])) + 1
    if inner.size == 0:
        raise MetricError("pattern has no local minimum")
    return float(np.min(np.abs(trace.angles[inner] - trace.angles[p])))


def pisr(values, angles=None, peak_angle: float | None = None,
         mainlobe_halfwidth: float = math.radians(1.0)) -> float:
    """Peak power over the summed power of the sidelobe samples.

    ``values`` is a :class:`PatternTrace` or complex samples at ``angles``
    (for instance one range row of a polar image).  Sidelobe samples are
    those farther than ``mainlobe_halfwidth`` from ``peak_angle``, which
    defaults to the angle of the largest sample.  Zero sidelobe power gives
    ``inf``.
    """
    if isinstance(values, PatternTrace):
        values, angles = values.response, values.angles
    v = np.abs(np.asarray(values)) ** 2
    angles = np.asarray(angles, dtype=float)
    if v.shape != angles.shape:
        raise ValueError("values and angles must have the same shape")
    p = int(np.argmax(v))
    centre = angles[p] if peak_angle is None else float(peak_angle)
    side = np.abs(angles - centre) > mainlobe_halfwidth + 1e-12
    if not np.any(side):
        raise MetricError("no sidelobe samples")
    s = float(np.sum(v[side]))
    peak = float(v[p]) if peak_angle is None else float(np.max(v[~side], initial=0.0))
    return math.inf if s == 0.0 else peak / s


def design_pattern(w, cfg: RadarConfig, R: float, params: SynthesisParams, error=None,
                   window: ApertureWindow | None = None) -> PatternTrace:
    """Pattern at the look direction plus the constrained sidelobe grid."""
    window = window or visibility_window(cfg, R)
    grid = sidelobe_grid(window, cfg.phi_delta, params)
    angles = np.sort(np.concatenate([grid, [LOOK]]))
    return array_pattern(w, cfg, R, angles, error, window)


def grid_violations(w, cfg: RadarConfig, R: float, params: SynthesisParams, error=None,
                    window: ApertureWindow | None = None) -> int:
    """Sidelobe grid directions where ``|F(phi_s)|^2 > eta * |F(pi/2)|^2``."""
    trace = design_pattern(w, cfg, R, params, error, window)
    look = int(np.argmin(np.abs(trace.angles - LOOK)))
    p = np.abs(trace.response) ** 2
    side = np.ones(p.size, bool)
    side[look] = False
    return int(np.count_nonzero(p[side] > params.eta * p[look]))


def image_entropy(img) -> float:
    """Shannon entropy of the normalised pixel energy, ``-sum d ln d``."""
    pixels = img.pixels if hasattr(img, "pixels") else np.asarray(img)
    p = np.abs(pixels.ravel()) ** 2
    E = float(np.sum(p))
    if not E > 0:
        raise MetricError("image has no energy")
    d = p[p > 0] / E
    return float(-np.sum(d * np.log(d)))


def peak_index(img) -> tuple:
    """Row and column of the brightest pixel."""
    pixels = img.pixels if hasattr(img, "pixels") else np.asarray(img)
    return tuple(int(i) for i in np.unravel_index(np.argmax(np.abs(pixels)), pixels.shape))
