"""Timing comparison of the compiled solver kernels against the numpy fallback.

Runs the same elastic-net and SVR dual problems through both backends and
prints best-of-N wall times with the speedup.  Usage::

    python3 benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from emomix.learners import _kernels_py

try:
    from emomix.learners import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def enet_problem(rng, n, m):
    X = rng.normal(size=(n, m))
    y = X @ rng.normal(size=m) + 0.5 * rng.normal(size=n)
    X -= X.mean(axis=0)
    y -= y.mean()
    return X, y


def svr_problem(rng, n):
    X = rng.normal(size=(n, 10))
    sq = (X * X).sum(axis=1)
    K = np.exp(-0.1 * (sq[:, None] + sq[None, :] - 2 * X @ X.T))
    y = np.tanh(X @ rng.normal(size=10)) + 0.1 * rng.normal(size=n)
    return K, y


def run(repeats):
    rng = np.random.default_rng(0)
    rows = []

    for n, m in ((1000, 100), (4000, 200)):
        X, y = enet_problem(rng, n, m)

        def enet_on(kernels):
            w = np.zeros(m)
            return kernels.enet_coordinate_descent(X, y, 0.02, 0.01, w, 1000, 1e-8)

        t_py, out_py = best_of(lambda: enet_on(_kernels_py), repeats)
        row = [f"enet n={n} m={m} ({out_py[0]} sweeps)", t_py, None]
        if _kernels is not None:
            row[2], _ = best_of(lambda: enet_on(_kernels), repeats)
        rows.append(row)

    for n in (400, 800):
        K, y = svr_problem(rng, n)

        def svr_on(kernels):
            return kernels.svr_smo(K.copy(), y.copy(), 1.0, 0.1, 1e-3, 10_000_000)

        t_py, out_py = best_of(lambda: svr_on(_kernels_py), repeats)
        row = [f"svr  n={n} ({out_py[3]} iterations)", t_py, None]
        if _kernels is not None:
            row[2], _ = best_of(lambda: svr_on(_kernels), repeats)
        rows.append(row)

    width = max(len(r[0]) for r in rows)
    print(f"{'problem':<{width}}  {'python':>10}  {'cython':>10}  {'speedup':>8}")
    for name, t_py, t_cy in rows:
        if t_cy is None:
            print(f"{name:<{width}}  {t_py:>9.4f}s  {'n/a':>10}  {'':>8}")
        else:
            print(f"{name:<{width}}  {t_py:>9.4f}s  {t_cy:>9.4f}s  {t_py / t_cy:>7.1f}x")
    if _kernels is None:
        print("\ncompiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3, help="best-of-N timing")
    run(parser.parse_args().repeats)
