"""Deramped FMCW returns on the circular aperture, and range compression.

Random draws come from numpy's PCG64 generator.  Every draw is keyed by a
:class:`numpy.random.SeedSequence` built from the user seed plus a spawn
key ``(stream, index)``, so pulse ``n`` always sees the same jitter and
noise no matter how pulses are batched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .geometry import RadarConfig, TargetPolar, element_response, steering_matrix, visibility_window

__all__ = [
    "PointScene",
    "JitterModel",
    "DataMatrix",
    "simulate_if",
    "range_fft",
    "range_bin_of",
    "bin_range",
    "sample_error_vectors",
    "bounded_error_vectors",
    "valid_bins",
    "sample_phase_errors",
    "substream",
]

# spawn-key labels; fixed so that files written today replay tomorrow
STREAM_JITTER = 1
STREAM_NOISE = 2
STREAM_CALIBRATION = 3
STREAM_RBPA = 4
STREAM_PATTERN_ERROR = 5


def substream(seed: int, label: int, index: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, label, index)``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(label, index)))


@dataclass
class PointScene:
    """Point scatterers plus complex white receiver noise.

    ``targets`` holds ``(TargetPolar, reflectivity)`` pairs.  ``noise_power``
    is the variance of the circular complex Gaussian noise per sample.
    """

    targets: list = field(default_factory=list)
    noise_power: float = 0.0

    def __post_init__(self):
        if self.noise_power < 0:
            raise ValueError("noise power must be non-negative")
        for tgt, refl in self.targets:
            if not np.isfinite(refl):
                raise ValueError(f"non-finite reflectivity for {tgt}")


@dataclass(frozen=True)
class JitterModel:
    """Gaussian error on the azimuth of every phase centre (radians)."""

    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("jitter standard deviation must be non-negative")

    @classmethod
    def from_degrees(cls, sigma_deg: float, seed: int = 0) -> JitterModel:
        return cls(math.radians(sigma_deg), seed)


@dataclass
class DataMatrix:
    """Raw IF samples (``M x P``) or range profiles (``L x P``).

    Column ``p`` belongs to pulse ``p``; ``pulse_azimuths`` records where the
    antenna actually was, which differs from ``2*pi*p/N`` under jitter.
    """

    kind: Literal["IF", "range_compressed"]
    data: np.ndarray
    pulse_azimuths: np.ndarray

    def __post_init__(self):
        if self.kind not in ("IF", "range_compressed"):
            raise ValueError(f"unknown data kind {self.kind!r}")
        self.data = np.asarray(self.data, dtype=np.complex128)
        self.pulse_azimuths = np.asarray(self.pulse_azimuths, dtype=float)
        if self.data.ndim != 2 or self.data.shape[1] != self.pulse_azimuths.size:
            raise ValueError("column count must equal the number of pulse azimuths")

    @property
    def n_pulses(self) -> int:
        return self.data.shape[1]

    def check_rows(self, cfg: RadarConfig) -> None:
        rows = cfg.M if self.kind == "IF" else cfg.L
        if self.data.shape[0] != rows:
            raise ValueError(f"{self.kind} data must have {rows} rows, got {self.data.shape[0]}")


def _pulse_azimuths(cfg: RadarConfig, jitter: JitterModel, n_pulses: int) -> np.ndarray:
    nominal = np.arange(n_pulses) * cfg.phi_delta
    if jitter.sigma == 0:
        return nominal
    offsets = np.array(
        [substream(jitter.seed, STREAM_JITTER, p).standard_normal() for p in range(n_pulses)]
    )
    return nominal + jitter.sigma * offsets


def simulate_if(
    cfg: RadarConfig,
    scene: PointScene,
    jitter: JitterModel | None = None,
    n_pulses: int | None = None,
) -> DataMatrix:
    """Sampled IF signal for point targets, one column per pulse.

    Sample ``(m, p)`` is ``sum_t alpha * exp(j*2*pi*(tau*K*(m*t_s + T_start)
    + f_c*tau))`` plus noise, with ``tau = 2*R_p/c`` and ``alpha`` the cosine
    element gain times the reflectivity.  The residual video phase is
    dropped.  ``n_pulses`` defaults to one full revolution.
    """
    jitter = jitter or JitterModel()
    P = cfg.N if n_pulses is None else int(n_pulses)
    az = _pulse_azimuths(cfg, jitter, P)
    fast_time = np.arange(cfg.M) * cfg.t_s + cfg.T_start
    data = np.zeros((cfg.M, P), dtype=np.complex128)
    for tgt, refl in scene.targets:
        tgt.check(cfg)
        cd = np.cos(az - tgt.phi)
        Rn = np.sqrt(tgt.R**2 + cfg.r**2 - 2.0 * cfg.r * tgt.R * cd)
        cos_look = (tgt.R * cd - cfg.r) / Rn
        alpha = np.where(cos_look > 0, cos_look, 0.0) * refl
        tau = 2.0 * Rn / cfg.c
        phase = 2.0 * np.pi * (np.outer(fast_time, tau * cfg.K) + cfg.f_c * tau[None, :])
        data += alpha[None, :] * np.exp(1j * phase)
    if scene.noise_power > 0:
        scale = math.sqrt(scene.noise_power / 2.0)
        for p in range(P):
            g = substream(jitter.seed, STREAM_NOISE, p)
            data[:, p] += scale * (g.standard_normal(cfg.M) + 1j * g.standard_normal(cfg.M))
    return DataMatrix("IF", data, az)


def range_fft(matrix: DataMatrix, cfg: RadarConfig) -> DataMatrix:
    """``L``-point DFT of every pulse, zero-padding when ``L > M``."""
    if matrix.kind != "IF":
        raise ValueError("range_fft expects IF data")
    matrix.check_rows(cfg)
    if cfg.L < cfg.M:
        raise ValueError(f"L={cfg.L} must be at least M={cfg.M}")
    profiles = np.fft.fft(matrix.data, n=cfg.L, axis=0)
    return DataMatrix("range_compressed", profiles, matrix.pulse_azimuths.copy())


def range_bin_of(cfg: RadarConfig, R) -> int:
    """Range-FFT bin holding a scatterer at range ``R``.

    Rounds half up, ``floor(x + 0.5)``, which is also what the imaging
    kernels use.
    """
    R = float(R)
    if not 0 <= R < cfg.unambiguous_range:
        raise ValueError(f"range {R} m outside [0, {cfg.unambiguous_range:.4f}) m")
    return int(math.floor(2.0 * R * cfg.K * cfg.t_s * cfg.L / cfg.c + 0.5))


def bin_range(cfg: RadarConfig, index: int) -> float:
    """Centre range of bin ``index``."""
    return index * cfg.range_bin_spacing


def valid_bins(cfg: RadarConfig) -> list:
    """Range bins whose centre lies strictly between ``r`` and the unambiguous range."""
    return [b for b in range(cfg.L) if cfg.r < bin_range(cfg, b) < cfg.unambiguous_range]


def sample_error_vectors(cfg: RadarConfig, jitter: JitterModel, R: float, draws: int,
                         phi: float = math.pi / 2, stream: int = STREAM_CALIBRATION,
                         chunk: int = 256) -> np.ndarray:
    """Steering-vector errors ``a_hat - a`` caused by azimuth jitter.

    Returns a ``(draws, window_length)`` complex array; the window is the
    canonical one for range ``R``.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    window = visibility_window(cfg, R)
    a = steering_matrix(cfg, [phi], R, window)[0]
    out = np.empty((draws, len(window)), dtype=np.complex128)
    if jitter.sigma == 0:
        out[:] = 0
        return out
    rng = substream(jitter.seed, stream, 0)
    phi_n = window.indices * cfg.phi_delta
    for start in range(0, draws, chunk):
        stop = min(start + chunk, draws)
        phi_hat = phi_n + jitter.sigma * rng.standard_normal((stop - start, len(window)))
        out[start:stop] = element_response(cfg, R, phi - phi_hat) - a
    return out


def bounded_error_vectors(cfg: RadarConfig, jitter: JitterModel, R: float, draws: int,
                          radius: float, stream: int = STREAM_PATTERN_ERROR) -> np.ndarray:
    """Jitter-shaped steering errors rescaled to norm ``radius``.

    The direction of each draw follows the jitter model; only its length
    is fixed, so the draws sit on the boundary of the error ball used by
    the robust design.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if jitter.sigma == 0:
        raise ValueError("jitter with sigma > 0 is needed to shape the errors")
    e = sample_error_vectors(cfg, jitter, R, draws, stream=stream)
    return e * (radius / np.linalg.norm(e, axis=1))[:, None]


def sample_phase_errors(cfg: RadarConfig, jitter: JitterModel, R: float, draws: int) -> np.ndarray:
    """Norms ``||a_hat - a||`` of jitter-induced steering errors at range ``R``."""
    errs = sample_error_vectors(cfg, jitter, R, draws)
    return np.linalg.norm(errs, axis=1)
