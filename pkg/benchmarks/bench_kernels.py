#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Both backends produce identical results (asserted here); this script only
measures speed. Run after `pip install -e . --no-build-isolation`:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from ballotlab import _kernels
from ballotlab._kernels_py import I64_MIN


def timeit(fn, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_dp(name, probs, shifts, n, constraint):
    probs = np.asarray(probs, dtype=np.float64)
    shifts = np.asarray(shifts, dtype=np.int64)
    gmin = min(0, n * int(shifts.min()))
    gmax = max(0, n * int(shifts.max()))
    if constraint == "interior":
        tmin = np.ones(n, dtype=np.int64)
        tmin[-1] = I64_MIN
    elif constraint == "barrier":
        tmin = np.full(n, -8, dtype=np.int64)
    else:
        tmin = None
    results = {}
    times = {}
    for backend in available_backends():
        _kernels.set_backend(backend)
        times[backend], results[backend] = timeit(
            lambda: _kernels.dp_float_law(probs, shifts, n, gmin, gmax, tmin))
    check_equal(results)
    row(f"dp_float_law {name} n={n} ({constraint})", times)


def bench_mc(name, trials, n):
    rng = np.random.default_rng(7)
    msteps = rng.integers(-1, 2, size=(trials, n)).astype(np.int64)
    tmin = np.zeros(n, dtype=np.int64)
    results = {}
    times = {}
    for backend in available_backends():
        _kernels.set_backend(backend)
        times[backend], results[backend] = timeit(
            lambda: _kernels.mc_count_pair(msteps, tmin, -2, 3))
    check_equal(results)
    row(f"mc_count_pair {name} {trials}x{n}", times)


def available_backends():
    return ("numpy", "compiled") if _kernels.compiled_available() else ("numpy",)


def check_equal(results):
    if len(results) < 2:
        return
    a, b = results["numpy"], results["compiled"]
    if isinstance(a, tuple):
        assert a == b, "backend results differ"
    else:
        assert np.array_equal(a, b), "backend results differ"


def row(label, times):
    if "compiled" in times:
        speedup = times["numpy"] / times["compiled"]
        print(f"{label:<46} numpy {times['numpy']*1e3:9.2f} ms   "
              f"compiled {times['compiled']*1e3:9.2f} ms   x{speedup:5.1f}")
    else:
        print(f"{label:<46} numpy {times['numpy']*1e3:9.2f} ms   "
              f"(compiled kernels not built)")


def main():
    print(f"compiled kernels available: {_kernels.compiled_available()}")
    prev = _kernels.active_backend()
    try:
        bench_dp("unit walk", [0.5, 0.5], [-1, 1], 4096, "interior")
        bench_dp("skewed walk", [1 / 3, 2 / 3], [0, -1], 2048, "barrier")
        bench_dp("lazy walk", [1 / 3, 1 / 3, 1 / 3], [-1, 0, 1], 2048, "none")
        bench_mc("short paths", 1_000_000, 16)
        bench_mc("long paths", 250_000, 64)
    finally:
        _kernels.set_backend(prev)


if __name__ == "__main__":
    main()
