#!/usr/bin/env python3
"""Benchmark the numba @njit kernels against the pure-numpy fallbacks.

The package selects the implementation at import time (numba when
importable, unless HBARLAB_NO_NUMBA=1); this script times both paths on the
three hot kernels and checks that they agree numerically.

Usage:
    python3 benchmarks/bench_kernels.py [--steps N] [--chars N] [--phase N]
                                        [--iters I]
"""

import argparse
import time

import numpy as np

from hbarlab._kernels import IMPLEMENTATIONS, USING_NUMBA


def time_call(fn, args, iters):
    best = np.inf
    result = None
    for _ in range(iters):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def flatten(result):
    if isinstance(result, tuple):
        return np.concatenate([np.atleast_1d(np.asarray(r, dtype=float)).ravel()
                               for r in result])
    return np.asarray(result, dtype=float).ravel()


def bench(name, args, iters):
    rows = []
    results = {}
    for impl_name, impl in sorted(IMPLEMENTATIONS.items()):
        seconds, result = time_call(impl[name], args, iters)
        rows.append((impl_name, seconds))
        results[impl_name] = flatten(result)
    print(f"\n{name}")
    base = dict(rows)["numpy"]
    for impl_name, seconds in rows:
        speedup = base / seconds
        print(f"  {impl_name:<8s} {seconds * 1e3:10.3f} ms   "
              f"speedup vs numpy: {speedup:6.2f}x")
    if len(results) == 2:
        diff = np.max(np.abs(results["numpy"] - results["numba"]))
        print(f"  max |numpy - numba| = {diff:.3e}")
        assert diff <= 1e-10, "implementations disagree"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=200000,
                        help="trajectory steps (default 200000)")
    parser.add_argument("--chars", type=int, default=2048,
                        help="fan characteristics (default 2048)")
    parser.add_argument("--phase", type=int, default=256,
                        help="phase-space nodes per axis (default 256)")
    parser.add_argument("--iters", type=int, default=3,
                        help="timing repetitions, best-of (default 3)")
    args = parser.parse_args()

    print(f"numba available: {'numba' in IMPLEMENTATIONS}   "
          f"selected path: {'numba' if USING_NUMBA else 'numpy'}")

    fc = np.array([0.0, -1.0])            # harmonic force
    vc = np.array([0.0, 0.0, 0.5])

    if "numba" in IMPLEMENTATIONS:
        # compile outside the timing loop
        IMPLEMENTATIONS["numba"]["verlet_path"](fc, 1.0, 1.0, 0.0, 1e-4,
                                                16, 4, 1e6)
        IMPLEMENTATIONS["numba"]["fan_path"](
            fc, vc, 1.0, np.linspace(-1, 1, 8), np.zeros(8), 1e-4, 16,
            np.array([0, 16], dtype=np.int64))
        IMPLEMENTATIONS["numba"]["liouville_pullback"](
            fc, 1.0, np.linspace(-1, 1, 8), np.linspace(-1, 1, 8), 1e-3, 4,
            np.zeros((8, 8)), -1.0, 2 / 7, -1.0, 2 / 7)

    bench("verlet_path",
          (fc, 1.0, 1.0, 0.0, 1e-4, args.steps, args.steps // 100, 1e6),
          args.iters)

    x0 = np.linspace(-3, 3, args.chars)
    p0 = np.full(args.chars, 0.7)
    saves = np.linspace(0, 5000, 6).astype(np.int64)
    bench("fan_path", (fc, vc, 1.0, x0, p0, 1e-4, 5000, saves), args.iters)

    xn = np.linspace(-3, 3, args.phase)
    pn = np.linspace(-3, 3, args.phase)
    X, P = np.meshgrid(xn, pn, indexing="ij")
    rho0 = np.exp(-((X - 1) ** 2 + P ** 2) / 0.18)
    rho0 /= rho0.sum() * (xn[1] - xn[0]) * (pn[1] - pn[0])
    bench("liouville_pullback",
          (fc, 1.0, xn, pn, 1e-3, 500, rho0, xn[0], xn[1] - xn[0],
           pn[0], pn[1] - pn[0]),
          args.iters)


if __name__ == "__main__":
    main()
