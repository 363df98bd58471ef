"""Run configuration files.

An INI file with fixed sections and unit-suffixed keys (``_m``, ``_hz``,
``_s``, ``_deg``).  Angles are degrees in the file and radians everywhere
else.  Values are kept as written, so parse -> serialize -> parse is a
fixed point; the radar, synthesis and grid objects are built on demand.

Example::

    [radar]
    r_m = 0.145
    pulses_per_turn = 800

    [scene]
    targets = 90 2.0 1.0; 45 3.0 0.5
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field

from .geometry import RadarConfig, TargetPolar
from .signal import JitterModel, PointScene
from .synthesis import SynthesisParams


class ConfigError(ValueError):
    """Malformed or unknown configuration entry."""


def _floats(text: str) -> tuple:
    return tuple(float(t) for t in text.replace(",", " ").split())


def _ints(text: str) -> tuple:
    out = []
    for part in text.replace(",", " ").split():
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def _targets(text: str) -> tuple:
    out = []
    for chunk in text.split(";"):
        if chunk.strip():
            vals = _floats(chunk)
            if len(vals) != 3:
                raise ValueError(f"target needs 'azimuth_deg range_m reflectivity', got {chunk!r}")
            out.append(vals)
    return tuple(out)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return "; ".join(" ".join(repr(v) for v in t) for t in value)
        return ", ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
    return str(value)


_R = RadarConfig()
_P = SynthesisParams()

# section -> key -> (parser, default)
SCHEMA = {
    "radar": {
        "r_m": (float, _R.r),
        "pulses_per_turn": (int, _R.N),
        "f_c_hz": (float, _R.f_c),
        "slope_hz_per_s": (float, _R.K),
        "sample_rate_hz": (float, _R.F_s),
        "samples_per_pulse": (int, _R.M),
        "fft_length": (int, _R.L),
        "t_start_s": (float, _R.T_start),
        "c_m_per_s": (float, _R.c),
        "antenna": (str, _R.antenna),
    },
    "synthesis": {
        "half_mainlobe_deg": (float, 1.0),
        "sidelobe_ratio": (float, _P.eta),
        "grid_step_deg": (float, 0.5),
        "slack_penalty": (float, _P.lambda_b),
        "min_mainlobe_power": (float, _P.U_min),
        "max_iterations": (int, _P.ITER),
        "rel_tol": (float, _P.Th),
        "zero_threshold": (float, _P.zero_threshold),
        "verify_slack": (float, _P.b_min),
        "error_radius": (float, 0.035),
        "bins": (_ints, ()),
        "workers": (int, 1),
    },
    "jitter": {
        "sigma_deg": (float, 0.086),
        "percentile": (float, 0.99),
        "draws": (int, 10_000),
        "apply_to_simulation": (_bool, False),
    },
    "scene": {
        "targets": (_targets, ((90.0, 2.0, 1.0),)),
        "noise_power": (float, 0.0),
    },
    "grid": {
        "mode": (str, "cartesian"),
        "extent_x_m": (float, 9.8756),
        "extent_y_m": (float, 9.8756),
        "step_m": (float, 0.04),
        "centre_x_m": (float, 0.0),
        "centre_y_m": (float, 0.0),
        "azimuths_deg": (_floats, ()),
        "ranges_m": (_floats, ()),
    },
    "run": {
        "seed": (int, 0),
        "threads": (int, 0),
        "require_verified": (_bool, False),
    },
    "output": {
        "data": (str, "out/scene.rif1"),
        "deltas": (str, "out/deltas.csv"),
        "table": (str, "out/table.wgt1"),
        "images": (str, "out/images"),
        "report": (str, "out/report"),
    },
}


@dataclass
class RunConfig:
    """Typed view of a configuration file."""

    values: dict = field(default_factory=lambda: {
        s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()})

    def __getitem__(self, section: str) -> dict:
        return self.values[section]

    def __eq__(self, other) -> bool:
        return isinstance(other, RunConfig) and self.values == other.values

    @classmethod
    def parse(cls, text: str) -> RunConfig:
        cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
        cfg = cls()
        for section in cp.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]")
            for key, raw in cp.items(section):
                if key not in SCHEMA[section]:
                    raise ConfigError(f"unknown key '{key}' in [{section}]")
                parser = SCHEMA[section][key][0]
                try:
                    cfg.values[section][key] = parser(raw.strip())
                except ValueError as exc:
                    raise ConfigError(f"[{section}] {key}: {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> RunConfig:
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh.read())

    def dumps(self) -> str:
        out = io.StringIO()
        for section, keys in SCHEMA.items():
            out.write(f"[{section}]\n")
            for key in keys:
                out.write(f"{key} = {_fmt(self.values[section][key])}\n")
            out.write("\n")
        return out.getvalue()

    def validate(self) -> None:
        try:
            self.radar
            self.synthesis
            self.jitter
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        g = self["grid"]
        if g["mode"] not in ("cartesian", "polar"):
            raise ConfigError(f"grid mode must be cartesian or polar, got {g['mode']!r}")
        if g["mode"] == "polar" and not (g["azimuths_deg"] and g["ranges_m"]):
            raise ConfigError("polar grids need azimuths_deg and ranges_m")
        if g["mode"] == "cartesian" and not g["step_m"] > 0:
            raise ConfigError("step_m must be positive")
        if self["run"]["threads"] < 0 or self["synthesis"]["workers"] < 1:
            raise ConfigError("threads must be >= 0 and workers >= 1")

    @property
    def radar(self) -> RadarConfig:
        v = self["radar"]
        return RadarConfig(r=v["r_m"], N=v["pulses_per_turn"], f_c=v["f_c_hz"],
                           K=v["slope_hz_per_s"], F_s=v["sample_rate_hz"],
                           M=v["samples_per_pulse"], L=v["fft_length"], T_start=v["t_start_s"],
                           c=v["c_m_per_s"], antenna=v["antenna"])

    @property
    def synthesis(self) -> SynthesisParams:
        v = self["synthesis"]
        return SynthesisParams(
            phi_MW=math.radians(v["half_mainlobe_deg"]), eta=v["sidelobe_ratio"],
            grid_step=math.radians(v["grid_step_deg"]), lambda_b=v["slack_penalty"],
            U_min=v["min_mainlobe_power"], ITER=v["max_iterations"], Th=v["rel_tol"],
            zero_threshold=v["zero_threshold"], b_min=v["verify_slack"],
            delta=v["error_radius"])

    @property
    def jitter(self) -> JitterModel:
        return JitterModel.from_degrees(self["jitter"]["sigma_deg"], self["run"]["seed"])

    @property
    def scene(self) -> PointScene:
        v = self["scene"]
        targets = [(TargetPolar(math.radians(az), R), refl) for az, R, refl in v["targets"]]
        return PointScene(targets, v["noise_power"])

    @property
    def grid(self):
        from .imaging import ImageGrid

        g = self["grid"]
        if g["mode"] == "polar":
            return ImageGrid.polar([math.radians(a) for a in g["azimuths_deg"]], g["ranges_m"])
        return ImageGrid.cartesian(g["extent_x_m"], g["extent_y_m"], g["step_m"],
                                   g["centre_x_m"], g["centre_y_m"])

    @property
    def threads(self) -> int | None:
        return self["run"]["threads"] or None
