"""Closed-form geometry of a rotating SAR (ROSAR) platform.

The antenna rides a circle of radius ``r`` centred at the origin and fires
``N`` pulses per revolution; pulse ``n`` is emitted from the phase centre at
azimuth ``2*pi*n/N`` with its boresight pointing radially outwards.  All
angles are radians.

Synthesis works in a canonical frame in which the look direction is
``pi/2``.  A target at any other azimuth is handled by rotating phase-centre
indices by an integer amount, see :meth:`ApertureWindow.shifted`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RadarConfig",
    "TargetPolar",
    "ApertureWindow",
    "SteeringVector",
    "phase_center_direction",
    "target_range_angle",
    "element_gain",
    "visibility_window",
    "steering_vector",
    "steering_matrix",
]


@dataclass(frozen=True)
class RadarConfig:
    """Physical and waveform constants of the ROSAR system.

    Defaults reproduce the simulated 60 GHz platform (radius 14.5 cm,
    800 pulses per turn, 225 ADC samples at 4.5 MHz).

    Parameters
    ----------
    r : float
        Rotation radius in metres.
    N : int
        Pulses (phase centres) per revolution.
    f_c : float
        Chirp start frequency in Hz.
    K : float
        Chirp slope in Hz/s.
    F_s : float
        ADC sampling rate in Hz.
    M : int
        Fast-time samples per pulse.
    L : int
        Range-FFT length (number of range bins).
    T_start : float
        Delay between ramp start and the first ADC sample, seconds.
    c : float
        Propagation speed in m/s.
    antenna : str
        Element pattern; only ``"cosine"`` is supported.
    """

    r: float = 0.145
    N: int = 800
    f_c: float = 60e9
    K: float = 6.8e13
    F_s: float = 4.5e6
    M: int = 225
    L: int = 225
    T_start: float = 7e-6
    c: float = 3e8
    antenna: str = "cosine"

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"rotation radius must be positive, got {self.r}")
        if int(self.N) != self.N or self.N < 3:
            raise ValueError(f"N must be an integer >= 3, got {self.N}")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M}")
        if int(self.L) != self.L or self.L < 1:
            raise ValueError(f"L must be a positive integer, got {self.L}")
        if not (self.F_s > 0 and self.K > 0 and self.c > 0):
            raise ValueError("F_s, K and c must be positive")
        if self.antenna != "cosine":
            raise ValueError(f"unsupported antenna pattern {self.antenna!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "L", int(self.L))

    @property
    def t_s(self) -> float:
        """ADC sampling interval."""
        return 1.0 / self.F_s

    @property
    def phi_delta(self) -> float:
        """Azimuth step between consecutive phase centres."""
        return 2.0 * math.pi / self.N

    @property
    def wavenumber(self) -> float:
        """``k = 2*pi*(K*T_start + f_c)/c``, the phase slope per metre of one-way range."""
        return 2.0 * math.pi * (self.K * self.T_start + self.f_c) / self.c

    @property
    def bandwidth(self) -> float:
        """Bandwidth swept while the ADC is sampling."""
        return self.K * self.M * self.t_s

    @property
    def range_resolution(self) -> float:
        return self.c / (2.0 * self.bandwidth)

    @property
    def range_bin_spacing(self) -> float:
        """Range covered by one bin of an ``L``-point range FFT."""
        return self.c / (2.0 * self.K * self.t_s * self.L)

    @property
    def unambiguous_range(self) -> float:
        return self.c * self.F_s / (4.0 * self.K)


@dataclass(frozen=True)
class TargetPolar:
    """Target position in polar coordinates about the rotation centre."""

    phi: float
    R: float

    def check(self, cfg: RadarConfig) -> None:
        if not self.R > cfg.r:
            raise ValueError(
                f"target range {self.R} m must exceed the rotation radius {cfg.r} m"
            )


@dataclass(frozen=True)
class ApertureWindow:
    """Contiguous run of phase-centre indices that see a target.

    ``N_min`` and ``N_max`` are inclusive.  In the canonical frame both lie
    in ``[0, N-1]``; a shifted window may run past either end, the data
    column is then ``n % N``.
    """

    N_min: int
    N_max: int
    phi_v: float

    def __post_init__(self):
        if self.N_max < self.N_min:
            raise ValueError("empty aperture window")

    def __len__(self) -> int:
        return self.N_max - self.N_min + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.N_min, self.N_max + 1)

    def shifted(self, s: int) -> ApertureWindow:
        return ApertureWindow(self.N_min + s, self.N_max + s, self.phi_v)


@dataclass(frozen=True)
class SteeringVector:
    """Near-field response of the windowed aperture toward ``(phi, R)``."""

    window: ApertureWindow
    R: float
    phi: float
    entries: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.entries)

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))


def phase_center_direction(cfg: RadarConfig, n) -> float:
    """Boresight azimuth ``2*pi*n/N`` of phase centre ``n``."""
    if not 0 <= n < cfg.N:
        raise IndexError(f"phase-centre index {n} outside [0, {cfg.N})")
    return 2.0 * math.pi * n / cfg.N


def _wrap(delta):
    return (delta + np.pi) % (2.0 * np.pi) - np.pi


def _range_and_cosine(r, R, delta):
    """Distance from phase centres at azimuth offset ``delta`` and the cosine
    of the look angle off their boresight.

    The look angle is ``atan2(R*sin|delta|, R*cos|delta| - r)``; its cosine
    is ``(R*cos(delta) - r) / R_n`` which is negative when the target sits
    behind the element.
    """
    cd = np.cos(delta)
    Rn = np.sqrt(R * R + r * r - 2.0 * R * r * cd)
    return Rn, (R * cd - r) / Rn


def target_range_angle(cfg: RadarConfig, target: TargetPolar, n):
    """Range and look angle from phase centre(s) ``n`` to ``target``.

    ``n`` may be an integer or an integer array.  The look angle is
    measured from the element boresight and lies in ``[0, pi]``; values
    above ``pi/2`` mean the target is behind the element.
    """
    n_arr = np.asarray(n)
    if np.any((n_arr < 0) | (n_arr >= cfg.N)):
        raise IndexError(f"phase-centre index outside [0, {cfg.N})")
    target.check(cfg)
    delta = np.abs(_wrap(2.0 * np.pi * n_arr / cfg.N - target.phi))
    Rn = np.sqrt(target.R**2 + cfg.r**2 - 2.0 * cfg.r * target.R * np.cos(delta))
    theta = np.arctan2(target.R * np.sin(delta), target.R * np.cos(delta) - cfg.r)
    if np.ndim(Rn) == 0:
        return float(Rn), float(theta)
    return Rn, theta


def element_gain(theta):
    """Cosine element pattern, zero outside the open forward half-plane."""
    theta = np.asarray(theta)
    return np.where(np.abs(theta) < np.pi / 2, np.cos(theta), 0.0)


def visibility_window(cfg: RadarConfig, target) -> ApertureWindow:
    """Phase centres that see a target at range ``R`` in the canonical frame.

    ``target`` is either a :class:`TargetPolar` (its azimuth is ignored;
    the window is always expressed for a look direction of ``pi/2``) or a
    bare range in metres.
    """
    R = target.R if isinstance(target, TargetPolar) else float(target)
    if not R > cfg.r:
        raise ValueError(f"range {R} m must exceed the rotation radius {cfg.r} m")
    phi_v = math.acos(cfg.r / R)
    dphi = cfg.phi_delta
    n_min = math.ceil((math.pi / 2 - phi_v) / dphi)
    n_max = math.floor((math.pi / 2 + phi_v) / dphi)
    return ApertureWindow(n_min, n_max, phi_v)


def steering_matrix(cfg: RadarConfig, phis, R: float, window: ApertureWindow) -> np.ndarray:
    """Steering vectors for several look directions, one per row."""
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    phi_n = window.indices * cfg.phi_delta
    return element_response(cfg, R, phis[:, None] - phi_n[None, :])


def element_response(cfg: RadarConfig, R: float, delta) -> np.ndarray:
    """``cos(theta') * exp(j*2*k*R_n)`` for azimuth offsets ``delta``."""
    Rn, cos_look = _range_and_cosine(cfg.r, R, delta)
    gain = np.where(cos_look > 0.0, cos_look, 0.0)
    # 2k*R_n is thousands of radians; split off the common 2k*R so the
    # per-element part keeps full relative precision
    dR = (cfg.r * cfg.r - 2.0 * R * cfg.r * np.cos(delta)) / (Rn + R)
    return gain * np.exp(2j * cfg.wavenumber * dR) * np.exp(2j * cfg.wavenumber * R)


def steering_vector(cfg: RadarConfig, phi: float, R: float, window: ApertureWindow) -> SteeringVector:
    """Response ``cos(theta'_n) * exp(j*2*k*R_n(phi, R))`` over ``window``."""
    if len(window) == 0:
        raise ValueError("empty aperture window")
    entries = steering_matrix(cfg, [phi], R, window)[0]
    return SteeringVector(window=window, R=float(R), phi=float(phi), entries=entries)
