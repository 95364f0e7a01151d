#!/usr/bin/env python3
"""Compare the compiled and pure-python solver kernels.

Runs both kernels on the same seeded random channels across a size sweep and
reports median solve time, speedup, and the objective agreement between the
two implementations. Agreement is in nats at the returned optimum; anything
above ~1e-9 would indicate the kernels have drifted apart.

Usage: python benchmarks/compare_kernels.py [--sizes 32,64,128] [--reps 3]
"""
from __future__ import annotations

import argparse
import math
import statistics
import time

import numpy as np

from gpid._kernels import HAVE_COMPILED
from gpid.bench import SCALING_DY, _scaling_channel
from gpid.solver import SolverConfig, solve


def time_kernel(ch, kernel: str, reps: int):
    cfg = SolverConfig(kernel=kernel)
    res = solve(ch, cfg)  # warm-up, also the correctness sample
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        solve(ch, cfg)
        times.append(time.perf_counter() - t0)
    return res, statistics.median(times)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="16,32,64,128,256",
                        help="comma-separated square sizes d1=d2")
    parser.add_argument("--reps", type=int, default=3)
    parser.add_argument("--seed", type=int, default=20260)
    args = parser.parse_args()

    if not HAVE_COMPILED:
        print("compiled kernel not available (GPID_PURE_PYTHON set or "
              "extension missing); nothing to compare")
        return 1

    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"dy={SCALING_DY}, reps={args.reps}, seed={args.seed}")
    print(f"{'d1=d2':>6} {'python':>10} {'compiled':>10} {'speedup':>8} "
          f"{'iters':>6} {'|df| nats':>10}")
    for i, d in enumerate(sizes):
        ch = _scaling_channel(d, d, args.seed + i)
        res_py, t_py = time_kernel(ch, "python", args.reps)
        res_c, t_c = time_kernel(ch, "compiled", args.reps)
        df = abs(res_py.min_mi - res_c.min_mi)
        print(f"{d:>6} {t_py:>9.4f}s {t_c:>9.4f}s {t_py / t_c:>7.2f}x "
              f"{res_c.iterations:>6} {df:>10.2e}")
        if not (math.isfinite(df) and df < 1e-9):
            print(f"kernel mismatch at d={d}: python {res_py.min_mi!r} "
                  f"vs compiled {res_c.min_mi!r}")
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
