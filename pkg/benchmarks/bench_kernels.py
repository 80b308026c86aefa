#!/usr/bin/env python3
"""Benchmark the jitted dominance-scan kernel against the numpy fallback.

The scan dominates the cost of constraint assembly and Monte-Carlo
sweeps, so this is the number that matters when choosing a backend.

Run:  python benchmarks/bench_kernels.py [--horizon 1000] [--queries 100000]
"""

import argparse
import time

import numpy as np

from monocert import _kernels


def make_workload(horizon: int, n_queries: int, dim: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    # decreasing trajectory with noise, the typical shape after convergence
    base = np.linspace(10.0, 1.0, horizon + 1)[:, None]
    traj = base + 0.05 * rng.standard_normal((horizon + 1, dim))
    offsets = np.linspace(0.0, 0.4, horizon + 1)
    queries = rng.uniform(0.0, 11.0, size=(n_queries, dim))
    return traj, offsets, queries


def bench(fn, *args, repeat: int = 5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--horizon", type=int, default=1000)
    ap.add_argument("--queries", type=int, default=100_000)
    ap.add_argument("--dim", type=int, default=5)
    args = ap.parse_args()

    traj, offsets, queries = make_workload(args.horizon, args.queries, args.dim)
    t_hi = args.horizon

    rows = []
    t_np, out_np = bench(_kernels._scan_numpy, traj, offsets, queries, t_hi, True)
    rows.append(("numpy", t_np))
    if _kernels._scan_numba is not None:
        _kernels._scan_numba(traj, offsets, queries[:16], t_hi, True)  # warm up JIT
        t_nb, out_nb = bench(_kernels._scan_numba, traj, offsets, queries, t_hi, True)
        rows.append(("numba", t_nb))
        assert np.array_equal(out_np, out_nb), "backends disagree!"
    else:
        print("numba unavailable or disabled; benchmarking numpy only")

    print(f"\nworkload: T={args.horizon}, Q={args.queries}, n={args.dim} "
          f"(upper scan, {queries.nbytes / 1e6:.1f} MB of queries)")
    print(f"{'backend':<8} {'best (s)':>10} {'queries/s':>14}")
    for name, t in rows:
        print(f"{name:<8} {t:>10.4f} {args.queries / t:>14.0f}")
    if len(rows) == 2:
        print(f"\nspeedup numba/numpy: {rows[0][1] / rows[1][1]:.1f}x")


if __name__ == "__main__":
    main()
