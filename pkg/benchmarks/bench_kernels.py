"""Compiled versus numpy imaging kernels on the same pixels.

Usage::

    python benchmarks/bench_kernels.py [--size 41] [--repeat 3] [--threads 1]

Prints the best-of-``repeat`` wall clock of each kernel for every backend
and the largest relative pixel difference between them.
"""

import argparse
import math
import time

import numpy as np

from rosar import imaging
from rosar.geometry import RadarConfig, TargetPolar
from rosar.imaging import ImageGrid, image, matched_filter_table
from rosar.signal import JitterModel, PointScene, bin_range, simulate_if, valid_bins


def best_of(fn, repeat):
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=41, help="pixels per side of the polar patch")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)

    if imaging._ckernels is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    cfg = RadarConfig()
    scene = PointScene([(TargetPolar(math.pi / 2, 2.0), 1.0)], noise_power=0.1)
    data = simulate_if(cfg, scene, JitterModel(seed=1))
    half = args.size // 2
    az = math.pi / 2 + np.arange(-half, half + 1) * cfg.phi_delta / 4
    bins = np.clip(45 + np.arange(-half, half + 1), valid_bins(cfg)[0], valid_bins(cfg)[-1])
    grid = ImageGrid.polar(az, [bin_range(cfg, b) for b in np.unique(bins)])
    table = matched_filter_table(cfg, np.unique(bins))

    print(f"{grid.size} pixels, {args.threads} thread(s), best of {args.repeat}")
    print(f"{'backend':<10} {'compiled s':>11} {'python s':>10} {'ratio':>7} {'max rel diff':>13}")
    for backend in imaging.BACKENDS:
        kw = dict(table=table, seed=3, threads=args.threads)
        tc, a = best_of(lambda: image(backend, data, cfg, grid, kernel="compiled", **kw), args.repeat)
        tp, b = best_of(lambda: image(backend, data, cfg, grid, kernel="python", **kw), args.repeat)
        diff = np.max(np.abs(a.pixels - b.pixels)) / np.max(np.abs(b.pixels))
        print(f"{backend:<10} {tc:>11.4f} {tp:>10.4f} {tp / tc:>7.1f} {diff:>13.2e}")


if __name__ == "__main__":
    main()
