#!/usr/bin/env python3
"""Benchmark the row-integration kernel: numba @njit vs pure-numpy fallback.

Times a full RSGR synthesis workload (29 frames by default) against both
backends in one process and prints a small table. The numba timing includes a
warm-up call so JIT compilation is excluded.

Usage:
    python benchmarks/bench_integration.py [--height 512] [--width 512]
                                           [--subframes 1024] [--frames 29]
"""

import argparse
import time

import numpy as np

from shuttersim import _kernels
from shuttersim.exposure import ExposureSchedule, ShutterMode, row_timing
from shuttersim.scenes import SceneKind, SceneSpec, gen_scene

MS = 1e-3


def window_grid(schedule, dt, frames):
    starts, durs = row_timing(schedule)
    grids = []
    for i in range(frames):
        trigger = i * 1 * MS
        grids.append(((trigger + starts) / dt, (trigger + starts + durs) / dt))
    return grids


def run_backend(impl, src, grids):
    for a, b in grids:
        out = np.zeros(src.shape[1:], dtype=np.float64)
        impl(src, a, b, out)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--height", type=int, default=512)
    ap.add_argument("--width", type=int, default=512)
    ap.add_argument("--subframes", type=int, default=1024)
    ap.add_argument("--frames", type=int, default=29)
    args = ap.parse_args()

    span = (args.frames + 1) * MS  # trigger span plus the 2 ms last-row window
    dt = span / args.subframes
    print(f"generating {args.subframes} subframes at {args.height}x{args.width} ...")
    src = gen_scene(
        SceneSpec(
            SceneKind.TRANSLATING_CHECKER,
            height=args.height,
            width=args.width,
            subframe_dt_s=dt,
            count=args.subframes,
            velocity=(4000.0, 0.0),
            seed=12,
            cell_px=16.0,
            dtype="float32",
        )
    ).data

    schedule = ExposureSchedule(ShutterMode.RSGR, args.height, 1 * MS, 1.0)
    grids = window_grid(schedule, dt, args.frames)

    backends = {}
    if _kernels.BACKEND == "numba":
        run_backend(_kernels._integrate_numba, src, grids[:1])  # JIT warm-up
        backends["numba"] = _kernels._integrate_numba
    else:
        print("numba unavailable or disabled; benchmarking numpy only")
    backends["numpy"] = _kernels._integrate_numpy

    results = {}
    for name, impl in backends.items():
        start = time.perf_counter()
        run_backend(impl, src, grids)
        results[name] = time.perf_counter() - start

    print(f"\n{args.frames} frames, {args.height}x{args.width}, {args.subframes} subframes")
    print(f"{'backend':<8} {'total [s]':>10} {'frames/s':>10}")
    for name, t in results.items():
        print(f"{name:<8} {t:>10.3f} {args.frames / t:>10.1f}")
    if len(results) == 2:
        print(f"\nnumba speedup: {results['numpy'] / results['numba']:.2f}x")


if __name__ == "__main__":
    main()
