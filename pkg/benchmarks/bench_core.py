"""Timing comparison of the compiled and pure-Python kernel backends.

Usage (after an editable install):

    python3 benchmarks/bench_core.py [--points 20000] [--draws 200000]

Reports best-of-five wall times per backend and the speedup ratio.  When
the compiled extension is unavailable the script still runs and says so.
"""

from __future__ import annotations

import argparse
import time

from lmaudit import _core_py

try:
    from lmaudit import _core_cy
except ImportError:  # extension not built
    _core_cy = None


def best_of(repeats: int, fn) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_beta(mod, points: int) -> float:
    rng = mod.Pcg32(1234, 7)
    xs = [rng.uniform() for _ in range(points)]
    return best_of(5, lambda: [mod.reg_incomplete_beta(x, 3.5, 120.0) for x in xs])


def bench_t_quantile(mod, points: int) -> float:
    ps = [(i + 0.5) / points for i in range(points)]
    return best_of(5, lambda: [mod.t_quantile(p, 41.0) for p in ps])


def bench_normals(mod, draws: int) -> float:
    rng = mod.Pcg32(99, 3)
    return best_of(5, lambda: rng.normals(draws))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=20000)
    parser.add_argument("--draws", type=int, default=200000)
    args = parser.parse_args()

    cases = [
        ("reg_incomplete_beta x%d" % args.points, bench_beta, args.points),
        ("t_quantile x%d" % args.points, bench_t_quantile, args.points),
        ("pcg32 normals x%d" % args.draws, bench_normals, args.draws),
    ]

    print(f"{'kernel':<34} {'pure (s)':>10} {'compiled (s)':>13} {'speedup':>8}")
    for label, fn, size in cases:
        pure = fn(_core_py, size)
        if _core_cy is None:
            print(f"{label:<34} {pure:>10.4f} {'n/a':>13} {'n/a':>8}")
        else:
            compiled = fn(_core_cy, size)
            print(f"{label:<34} {pure:>10.4f} {compiled:>13.4f} {pure / compiled:>7.1f}x")
    if _core_cy is None:
        print("\ncompiled extension not available; showing pure-Python timings only")


if __name__ == "__main__":
    main()
