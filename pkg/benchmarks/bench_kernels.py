"""Compare the numba and numpy kernels.

    python3 benchmarks/bench_kernels.py [--max-total 12] [--repeat 3]
"""

import argparse
import time

import numpy as np

from simpson_reversal import _kernels as K
from simpson_reversal import sweep as S


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def split_inputs(level):
    totals = [16, 24, 20, 20]
    steps = 2**level
    cands = np.array([[t * j for j in range(steps + 1)] for t in totals], dtype=np.int64)
    return [t * steps for t in totals], cands, [steps + 1] * 4


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-total", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--level", type=int, default=5, help="split grid 2**-level")
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if K.HAVE_NUMBA else [])
    rows = np.concatenate(list(S.iter_exhaustive(args.max_total)))
    print(f"sweep: {len(rows)} tables (per-stratum total <= {args.max_total})")
    if K.HAVE_NUMBA:
        K.sweep_flags(rows[:10], "numba")  # compile outside the timing
    results = {}
    for b in backends:
        t, flags = best_of(lambda: K.sweep_flags(rows, b), args.repeat)
        results[b] = flags
        print(f"  {b:6s} {t:8.3f} s  {len(rows) / t / 1e6:6.2f} M tables/s")
    if len(results) == 2:
        print("  flags identical:", np.array_equal(results["numpy"], results["numba"]))

    totals, cands, lens = split_inputs(args.level)
    print(f"split search: {lens[0] ** 4} candidate splits (step 1/{2 ** args.level}), margin 3/10")
    if K.HAVE_NUMBA:
        K.best_split(totals, cands, lens, 1, 3, 10, "numba")
    hits = {}
    for b in backends:
        t, hit = best_of(lambda: K.best_split(totals, cands, lens, 1, 3, 10, b), args.repeat)
        hits[b] = hit
        print(f"  {b:6s} {t:8.4f} s  best {hit}")
    if len(hits) == 2:
        print("  same split:", hits["numpy"] == hits["numba"])


if __name__ == "__main__":
    main()
