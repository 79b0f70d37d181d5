#!/usr/bin/env python3
"""Benchmark the max-similarity kernel: numba-jitted loop vs blocked numpy.

Generates synthetic normalized clip features and times both paths at a few
problem sizes, verifying they agree on every run. The production dispatch
(`mmprep.kernels.smax`) picks numba when available; set MMPREP_KERNEL=numpy
to force the fallback in real workloads.

    python3 benchmarks/bench_similarity.py [--dim 64] [--repeats 3]
"""

import argparse
import time

import numpy as np

from mmprep import kernels

SIZES = [(1000, 1000), (5000, 5000), (10000, 10000)]


def normalized(rng, n, dim):
    m = rng.normal(size=(n, dim))
    return m / np.linalg.norm(m, axis=1)[:, None]


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=64)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    if kernels.HAS_NUMBA:
        warm = normalized(rng, 8, args.dim)
        kernels.smax_numba(warm, warm)  # trigger JIT before timing

    print(f"dim={args.dim} repeats={args.repeats} (best-of)  numba available: {kernels.HAS_NUMBA}")
    print(f"{'cand x ref':>14} | {'numpy (s)':>10} | {'numba (s)':>10} | {'speedup':>8} | agree")
    print("-" * 62)
    for n_cand, n_ref in SIZES:
        cand = normalized(rng, n_cand, args.dim)
        ref = normalized(rng, n_ref, args.dim)
        t_np, out_np = best_of(lambda: kernels.smax_numpy(cand, ref), args.repeats)
        if kernels.HAS_NUMBA:
            t_nb, out_nb = best_of(lambda: kernels.smax_numba(cand, ref), args.repeats)
            agree = bool(np.abs(out_np - out_nb).max() < 1e-9)
            speedup = t_np / t_nb
            print(f"{n_cand:>6} x {n_ref:<5} | {t_np:>10.3f} | {t_nb:>10.3f} | {speedup:>7.2f}x | {agree}")
        else:
            print(f"{n_cand:>6} x {n_ref:<5} | {t_np:>10.3f} | {'n/a':>10} | {'n/a':>8} | n/a")


if __name__ == "__main__":
    main()
