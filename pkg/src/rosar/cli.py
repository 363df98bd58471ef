"""Command-line front end: ``rosar <command> [options]``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys

import numpy as np

from . import formats, metrics
from .config import ConfigError, RunConfig
from .conic import SolverError
from .imaging import BACKENDS, ImagingError, image
from .signal import bin_range, simulate_if, valid_bins
from .synthesis import SynthesisError, calibrate_delta, synthesize_all

log = logging.getLogger("rosar")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(args) -> RunConfig:
    return RunConfig.load(args.config) if args.config else RunConfig()


def _out(args, rc: RunConfig, key: str) -> str:
    path = args.out or rc["output"][key]
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return path


def read_deltas(path) -> dict:
    """``range_bin -> delta`` from a calibration CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    try:
        return {int(r["range_bin"]): float(r["delta"]) for r in rows}
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}: expected columns range_bin,range_m,delta") from exc


def write_deltas(path, cfg, deltas: dict) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["range_bin", "range_m", "delta"])
    for b in sorted(deltas):
        w.writerow([b, repr(bin_range(cfg, b)), repr(deltas[b])])
    formats.atomic_write(path, buf.getvalue().encode())


# commands

def cmd_config(args) -> int:
    text = _load(args).dumps()
    if args.out:
        formats.atomic_write(args.out, text.encode())
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(args, rc: RunConfig) -> int:
    cfg = rc.radar
    jitter = rc.jitter if rc["jitter"]["apply_to_simulation"] else None
    data = simulate_if(cfg, rc.scene, jitter, n_pulses=args.pulses)
    path = _out(args, rc, "data")
    formats.write_rif1(path, data, cfg, seed=rc["run"]["seed"])
    log.info("wrote %s (%d pulses)", path, data.n_pulses)
    return EXIT_OK


def _bins(args, rc, cfg) -> list:
    bins = args.bins if args.bins is not None else rc["synthesis"]["bins"]
    bins = list(bins) or valid_bins(cfg)
    bad = [b for b in bins if b not in set(valid_bins(cfg))]
    if bad:
        raise UsageError(f"range bins outside the observable interval: {bad}")
    return bins


def cmd_calibrate(args, rc: RunConfig) -> int:
    cfg = rc.radar
    j = rc["jitter"]
    deltas = {b: calibrate_delta(cfg, rc.jitter, bin_range(cfg, b), j["percentile"], j["draws"])
              for b in _bins(args, rc, cfg)}
    path = _out(args, rc, "deltas")
    write_deltas(path, cfg, deltas)
    log.info("wrote %s (%d bins)", path, len(deltas))
    return EXIT_OK


def cmd_synth(args, rc: RunConfig) -> int:
    cfg, params = rc.radar, rc.synthesis
    bins = _bins(args, rc, cfg)
    deltas = None
    if args.deltas:
        table = read_deltas(args.deltas)
        missing = [b for b in bins if b not in table]
        if missing:
            raise ValueError(f"no calibrated delta for bins {missing}")
        deltas = {b: table[b] for b in bins}
    workers = args.workers or rc["synthesis"]["workers"]
    table = synthesize_all(cfg, params, bins, deltas=deltas, workers=workers)
    path = _out(args, rc, "table")
    formats.write_wgt1(path, table)
    failed = [b for b in table.bins() if table[b].error]
    for b in table.bins():
        e = table[b]
        log.info("bin %d: nnz=%d U=%.4f slack=%.2e verified=%s%s", b, e.nnz, e.U, e.slack_sum,
                 e.verified, f" error={e.error}" if e.error else "")
    if failed:
        log.error("synthesis failed for bins %s", failed)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_image(args, rc: RunConfig) -> int:
    if ("SAS" in args.backend or "RBPA" in args.backend) and not args.table:
        raise UsageError(f"{args.backend} needs --table")
    data, cfg, _ = formats.read_rif1(args.data)
    if cfg != rc.radar:
        raise ValueError("data file was recorded with a different radar configuration")
    table = formats.read_wgt1(args.table) if args.table else None
    seed = args.seed if args.seed is not None else (rc["run"]["seed"] if "RBPA" in args.backend else None)
    img = image(args.backend, data, cfg, rc.grid, table=table, seed=seed,
                threads=args.threads or rc.threads,
                require_verified=args.strict or rc["run"]["require_verified"])
    if args.out:
        path = args.out
    else:
        os.makedirs(rc["output"]["images"], exist_ok=True)
        path = os.path.join(rc["output"]["images"], f"{img.backend.lower()}.img1")
    formats.write_img1(path, img)
    formats.write_pgm(os.path.splitext(path)[0] + ".pgm", img.pixels, args.floor_db)
    log.info("%s: %.3f s (+%.3f s range FFT), wrote %s", img.backend, img.seconds,
             img.preprocess_seconds, path)
    return EXIT_OK


def _image_rows(images) -> list:
    rows = []
    for name, img in images:
        row, col = metrics.peak_index(img)
        rows += [("entropy", name, metrics.image_entropy(img), "nats"),
                 ("filter_time", name, img.seconds, "s"),
                 ("range_fft_time", name, img.preprocess_seconds, "s"),
                 ("total_time", name, img.total_seconds, "s"),
                 ("threads", name, img.threads, "count"),
                 ("peak_row", name, row, "index"),
                 ("peak_col", name, col, "index")]
    return rows


def _pattern(args, rc) -> list:
    table = formats.read_wgt1(args.table)
    cfg, params = table.cfg, table.params
    entry = table[args.pattern_bin]
    lo = entry.window.N_min * cfg.phi_delta
    hi = entry.window.N_max * cfg.phi_delta
    angles = np.arange(lo, hi + 1e-12, params.grid_step / 10)
    trace = metrics.array_pattern(entry.weights, cfg, entry.R, angles, window=entry.window)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["azimuth_deg", "level_db"])
    for a, d in zip(trace.angles, trace.db()):
        w.writerow([f"{math.degrees(a):.6f}", f"{d:.4f}"])
    formats.atomic_write(args.pattern_out, buf.getvalue().encode())
    grid = metrics.design_pattern(entry.weights, cfg, entry.R, params, window=entry.window)
    tag = f"bin{args.pattern_bin}"
    return [("pattern_peak_azimuth", tag, math.degrees(trace.angles[np.argmax(np.abs(trace.response))]), "deg"),
            ("half_mainlobe_width", tag, math.degrees(metrics.half_mainlobe_width(trace)), "deg"),
            ("pisr", tag, metrics.pisr(grid, peak_angle=math.pi / 2,
                                       mainlobe_halfwidth=params.phi_MW), "ratio")]


def cmd_eval(args, rc: RunConfig) -> int:
    images = [(os.path.basename(p), formats.read_img1(p)) for p in args.images]
    rows = _image_rows([(img.backend, img) for _, img in images])
    if args.pattern_bin is not None:
        if not (args.table and args.pattern_out):
            raise UsageError("--pattern-bin needs --table and --pattern-out")
        rows += _pattern(args, rc)
    base = args.out or rc["output"]["report"]
    if os.path.dirname(base):
        os.makedirs(os.path.dirname(base), exist_ok=True)
    formats.write_report(base + ".txt", base + ".csv", rows)
    sys.stdout.write(open(base + ".txt", encoding="utf-8").read())
    return EXIT_OK


def cmd_bench(args, rc: RunConfig) -> int:
    data, cfg, _ = formats.read_rif1(args.data or rc["output"]["data"])
    table = formats.read_wgt1(args.table or rc["output"]["table"])
    counts = sorted({1, args.threads or os.cpu_count() or 1})
    rows = []
    nnz = np.mean([table[b].nnz for b in table.bins() if not table[b].error])
    for threads in counts:
        times = {}
        for backend in BACKENDS:
            img = image(backend, data, cfg, rc.grid, table=table, seed=rc["run"]["seed"],
                        threads=threads, require_verified=rc["run"]["require_verified"])
            times[backend] = img.total_seconds
            tag = f"{backend}@{threads}"
            rows += [("total_time", tag, img.total_seconds, "s"),
                     ("range_fft_time", tag, img.preprocess_seconds, "s"),
                     ("entropy", tag, metrics.image_entropy(img), "nats")]
            if backend != "BPA" and backend != "FFT_BPA":
                rows.append(("mean_nnz", tag, float(nnz), "columns"))
        for backend in BACKENDS:
            rows.append(("speedup_vs_BPA", f"{backend}@{threads}",
                         times["BPA"] / times[backend], "ratio"))
    base = args.out or os.path.join(rc["output"]["report"] + "_bench")
    if os.path.dirname(base):
        os.makedirs(os.path.dirname(base), exist_ok=True)
    formats.write_report(base + ".txt", base + ".csv", rows)
    sys.stdout.write(open(base + ".txt", encoding="utf-8").read())
    return EXIT_OK


def _bin_list(text: str) -> list:
    from .config import _ints

    try:
        return list(_ints(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad bin list {text!r}; use e.g. 40-50,60") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rosar", description="Rotating-radar imaging with sparse aperture weights.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help):
        s = sub.add_parser(name, help=help)
        s.add_argument("-c", "--config", help="run configuration (INI); defaults when omitted")
        s.set_defaults(fn=fn)
        return s

    s = add("config", cmd_config, "print or write the configuration with defaults filled in")
    s.add_argument("-o", "--out")

    s = add("simulate", cmd_simulate, "simulate IF data for the configured scene")
    s.add_argument("-o", "--out")
    s.add_argument("--pulses", type=int, help="pulses to record (default: one revolution)")

    s = add("calibrate", cmd_calibrate, "calibrate the error radius of every range bin")
    s.add_argument("-o", "--out")
    s.add_argument("--bins", type=_bin_list)

    s = add("synth", cmd_synth, "synthesize sparse weights")
    s.add_argument("-o", "--out")
    s.add_argument("--bins", type=_bin_list)
    s.add_argument("--deltas", help="calibration CSV; default is the configured error_radius")
    s.add_argument("--workers", type=int)

    s = add("image", cmd_image, "form an image")
    s.add_argument("--data", required=True)
    s.add_argument("--backend", required=True, type=str.upper, choices=BACKENDS)
    s.add_argument("--table")
    s.add_argument("--seed", type=int)
    s.add_argument("--threads", type=int)
    s.add_argument("--strict", action="store_true", help="only use verified weight entries")
    s.add_argument("--floor-db", type=float, default=-40.0)
    s.add_argument("-o", "--out")

    s = add("eval", cmd_eval, "metrics for one or more images")
    s.add_argument("images", nargs="+")
    s.add_argument("--table")
    s.add_argument("--pattern-bin", type=int)
    s.add_argument("--pattern-out")
    s.add_argument("-o", "--out", help="report path without extension")

    s = add("bench", cmd_bench, "time all backends on one dataset")
    s.add_argument("--data")
    s.add_argument("--table")
    s.add_argument("--threads", type=int)
    s.add_argument("-o", "--out", help="report path without extension")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "config":
            return cmd_config(args)
        return args.fn(args, _load(args))
    except (ConfigError, UsageError) as exc:
        print(f"rosar: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SynthesisError, SolverError) as exc:
        print(f"rosar: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ImagingError, formats.FormatError, ValueError, KeyError, OSError) as exc:
        print(f"rosar: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
