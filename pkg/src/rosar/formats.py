"""On-disk formats.

Every binary file starts with a UTF-8 text header of ``key=value`` lines
ended by an empty line, followed by little-endian payload.  The first
header line names the format (``format=RIF1`` etc.) and the second its
version; readers reject anything else.

* ``RIF1``: IF or range-compressed data, complex128 column-major, then
  the per-pulse azimuths as float64.
* ``WGT1``: weight tables.  After the header, each bin has one JSON line
  of metadata followed by ``nnz`` records of (window index, re, im) as
  float64.
* ``IMG1``: images, complex128 row-major pixels; polar images append
  their azimuth and range axes as float64.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import os
import tempfile

import numpy as np

from .geometry import ApertureWindow, RadarConfig
from .signal import DataMatrix
from .synthesis import SynthesisParams, WeightEntry, WeightTable

__all__ = [
    "FormatError",
    "atomic_write",
    "write_rif1",
    "read_rif1",
    "write_wgt1",
    "read_wgt1",
    "table_hash",
    "write_img1",
    "read_img1",
    "write_pgm",
    "write_report",
]

VERSION = 1

_CFG_FIELDS = [f.name for f in dataclasses.fields(RadarConfig)]
_PARAM_FIELDS = [f.name for f in dataclasses.fields(SynthesisParams)]


class FormatError(ValueError):
    """Malformed or unsupported file."""


def atomic_write(path, payload: bytes) -> None:
    """Write ``payload`` to a temporary file beside ``path`` and rename it."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        # mkstemp creates 0600; give the file the usual umask permissions
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header(fmt: str, fields: dict) -> bytes:
    lines = [f"format={fmt}", f"version={VERSION}"]
    for key, value in fields.items():
        text = repr(value) if isinstance(value, float) else str(value)
        if "\n" in text or "=" in key:
            raise ValueError(f"cannot store header field {key!r}")
        lines.append(f"{key}={text}")
    return ("\n".join(lines) + "\n\n").encode()


def _split(raw: bytes, fmt: str):
    end = raw.find(b"\n\n")
    if end < 0:
        raise FormatError("missing header terminator")
    fields = {}
    for line in raw[:end].decode().splitlines():
        key, sep, value = line.partition("=")
        if not sep:
            raise FormatError(f"bad header line {line!r}")
        fields[key] = value
    if fields.get("format") != fmt:
        raise FormatError(f"expected {fmt}, found {fields.get('format')!r}")
    if fields.get("version") != str(VERSION):
        raise FormatError(f"unsupported {fmt} version {fields.get('version')!r}")
    return fields, raw[end + 2:]


def _cfg_fields(cfg: RadarConfig) -> dict:
    return {f"cfg.{k}": getattr(cfg, k) for k in _CFG_FIELDS}


def _cfg_from(fields: dict) -> RadarConfig:
    kwargs = {}
    for f in dataclasses.fields(RadarConfig):
        value = fields[f"cfg.{f.name}"]
        kwargs[f.name] = value if f.type in ("str", str) else (
            int(value) if f.type in ("int", int) else float(value))
    return RadarConfig(**kwargs)


# RIF1

def write_rif1(path, matrix: DataMatrix, cfg: RadarConfig, **extra) -> None:
    matrix.check_rows(cfg)
    head = {"kind": matrix.kind, "rows": matrix.data.shape[0], "pulses": matrix.n_pulses}
    head.update(_cfg_fields(cfg))
    head.update({f"meta.{k}": v for k, v in extra.items()})
    body = np.asarray(matrix.data, dtype="<c16").tobytes(order="F")
    body += np.asarray(matrix.pulse_azimuths, dtype="<f8").tobytes()
    atomic_write(path, _header("RIF1", head) + body)


def read_rif1(path):
    """Returns ``(DataMatrix, RadarConfig, meta)``."""
    with open(path, "rb") as fh:
        fields, body = _split(fh.read(), "RIF1")
    rows, pulses = int(fields["rows"]), int(fields["pulses"])
    need = rows * pulses * 16 + pulses * 8
    if len(body) != need:
        raise FormatError(f"payload holds {len(body)} bytes, expected {need}")
    data = np.frombuffer(body[: rows * pulses * 16], dtype="<c16").reshape((rows, pulses), order="F")
    az = np.frombuffer(body[rows * pulses * 16:], dtype="<f8")
    cfg = _cfg_from(fields)
    meta = {k[5:]: v for k, v in fields.items() if k.startswith("meta.")}
    matrix = DataMatrix(fields["kind"], data.astype(np.complex128), az.astype(float))
    matrix.check_rows(cfg)
    return matrix, cfg, meta


# WGT1

def _params_from(fields: dict) -> SynthesisParams:
    kwargs = {}
    for f in dataclasses.fields(SynthesisParams):
        value = fields[f"param.{f.name}"]
        kwargs[f.name] = int(value) if f.type in ("int", int) else float(value)
    return SynthesisParams(**kwargs)


def _wgt1_bytes(table: WeightTable) -> bytes:
    head = _cfg_fields(table.cfg)
    head.update({f"param.{k}": getattr(table.params, k) for k in _PARAM_FIELDS})
    head["bins"] = len(table)
    out = io.BytesIO()
    out.write(_header("WGT1", head))
    for b in table.bins():
        e = table[b]
        idx = e.support
        meta = {
            "bin": int(e.range_bin), "R": float(e.R), "delta": float(e.delta), "U": float(e.U),
            "slack_sum": float(e.slack_sum), "verified": bool(e.verified),
            "N_min": int(e.window.N_min), "N_max": int(e.window.N_max),
            "phi_v": float(e.window.phi_v), "nnz": int(idx.size), "iterations": int(e.iterations),
            "norm_before_threshold": float(e.norm_before_threshold), "error": str(e.error),
        }
        out.write((json.dumps(meta) + "\n").encode())
        rec = np.empty((idx.size, 3), dtype="<f8")
        rec[:, 0] = idx
        rec[:, 1] = e.weights[idx].real
        rec[:, 2] = e.weights[idx].imag
        out.write(rec.tobytes())
    return out.getvalue()


def write_wgt1(path, table: WeightTable) -> None:
    atomic_write(path, _wgt1_bytes(table))


def table_hash(table: WeightTable) -> str:
    """SHA-256 of the table's WGT1 encoding."""
    return hashlib.sha256(_wgt1_bytes(table)).hexdigest()


def read_wgt1(path) -> WeightTable:
    with open(path, "rb") as fh:
        fields, body = _split(fh.read(), "WGT1")
    table = WeightTable(_cfg_from(fields), _params_from(fields))
    pos = 0
    for _ in range(int(fields["bins"])):
        nl = body.find(b"\n", pos)
        if nl < 0:
            raise FormatError("truncated bin record")
        meta = json.loads(body[pos:nl])
        pos = nl + 1
        nnz = int(meta["nnz"])
        rec = np.frombuffer(body[pos:pos + 24 * nnz], dtype="<f8")
        if rec.size != 3 * nnz:
            raise FormatError(f"truncated weights for bin {meta['bin']}")
        pos += 24 * nnz
        rec = rec.reshape(nnz, 3)
        window = ApertureWindow(int(meta["N_min"]), int(meta["N_max"]), float(meta["phi_v"]))
        w = np.zeros(len(window), dtype=np.complex128)
        w[rec[:, 0].astype(int)] = rec[:, 1] + 1j * rec[:, 2]
        table.entries[int(meta["bin"])] = WeightEntry(
            range_bin=int(meta["bin"]), R=float(meta["R"]), delta=float(meta["delta"]),
            U=float(meta["U"]), slack_sum=float(meta["slack_sum"]), verified=bool(meta["verified"]),
            window=window, weights=w, iterations=int(meta["iterations"]),
            norm_before_threshold=float(meta["norm_before_threshold"]), error=meta.get("error", ""),
        )
    if pos != len(body):
        raise FormatError("trailing bytes after the last bin")
    return table


# IMG1

def write_img1(path, image) -> None:
    grid = image.grid
    head = {"backend": image.backend, "mode": grid.mode,
            "rows": image.pixels.shape[0], "cols": image.pixels.shape[1],
            "seconds": float(image.seconds), "preprocess_seconds": float(image.preprocess_seconds),
            "threads": int(image.threads), "table_hash": image.table_hash or "-"}
    if grid.mode == "cartesian":
        head.update({"extent_x": float(grid.extent_x), "extent_y": float(grid.extent_y),
                     "step": float(grid.step), "centre_x": float(grid.centre_x),
                     "centre_y": float(grid.centre_y)})
    body = np.ascontiguousarray(image.pixels, dtype="<c16").tobytes()
    if grid.mode == "polar":
        body += np.asarray(grid.azimuths, dtype="<f8").tobytes()
        body += np.asarray(grid.ranges, dtype="<f8").tobytes()
    atomic_write(path, _header("IMG1", head) + body)


def read_img1(path):
    from .imaging import ImageGrid, SarImage

    with open(path, "rb") as fh:
        fields, body = _split(fh.read(), "IMG1")
    rows, cols = int(fields["rows"]), int(fields["cols"])
    npx = rows * cols * 16
    pixels = np.frombuffer(body[:npx], dtype="<c16").reshape(rows, cols).astype(np.complex128)
    if fields["mode"] == "polar":
        axes = np.frombuffer(body[npx:], dtype="<f8")
        if axes.size != rows + cols:
            raise FormatError("polar axes do not match the pixel shape")
        grid = ImageGrid.polar(axes[:cols].copy(), axes[cols:].copy())
    elif fields["mode"] == "cartesian":
        if len(body) != npx:
            raise FormatError("unexpected payload length")
        grid = ImageGrid.cartesian(float(fields["extent_x"]), float(fields["extent_y"]),
                                   float(fields["step"]), float(fields.get("centre_x", 0.0)),
                                   float(fields.get("centre_y", 0.0)))
    else:
        raise FormatError(f"unknown grid mode {fields['mode']!r}")
    th = fields.get("table_hash", "-")
    return SarImage(grid=grid, pixels=pixels, backend=fields["backend"],
                    seconds=float(fields["seconds"]),
                    preprocess_seconds=float(fields.get("preprocess_seconds", 0.0)),
                    threads=int(fields.get("threads", 1)),
                    table_hash=None if th == "-" else th)


def write_pgm(path, pixels, floor_db: float = -40.0) -> None:
    """8-bit binary graymap of ``20*log10(|I| / max|I|)`` clipped at ``floor_db``."""
    if floor_db >= 0:
        raise ValueError("floor_db must be negative")
    mag = np.abs(np.asarray(pixels))
    peak = mag.max()
    if peak > 0:
        with np.errstate(divide="ignore"):
            db = 20.0 * np.log10(mag / peak)
        level = np.clip((db - floor_db) / -floor_db, 0.0, 1.0)
    else:
        level = np.zeros_like(mag)
    img = np.round(level * 255).astype(np.uint8)
    # row 0 of the image is the top of the picture (largest y)
    img = img[::-1]
    head = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode()
    atomic_write(path, head + img.tobytes())


def write_report(path_txt, path_csv, rows) -> None:
    """Metrics report as an aligned text table and a CSV file.

    ``rows`` is an iterable of ``(metric, backend, value, units)``.
    """
    rows = [(str(m), str(b), float(v), str(u)) for m, b, v, u in rows]
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in ((0, "metric"), (1, "backend"))]
    lines = [f"{'metric':<{widths[0]}}  {'backend':<{widths[1]}}  {'value':>14}  units"]
    for m, b, v, u in rows:
        lines.append(f"{m:<{widths[0]}}  {b:<{widths[1]}}  {v:>14.6g}  {u}")
    atomic_write(path_txt, ("\n".join(lines) + "\n").encode())
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["metric", "backend", "value", "units"])
    for m, b, v, u in rows:
        wr.writerow([m, b, repr(v), u])
    atomic_write(path_csv, buf.getvalue().encode())
