#!/usr/bin/env python3
"""Benchmark the compiled coupling-matrix kernel against the numpy fallback.

The pairwise coefficient assembly is the innermost numeric loop of the
simulator; this script times both backends on square grids of increasing
size and checks they agree. Run after building the extension:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from simforge._kernels import numpy_backend

try:
    from simforge._kernels import _rs_cython as compiled
except ImportError:
    compiled = None


def grid_points(n, pitch, z):
    r = np.arange(n)
    x = (r - (n - 1) / 2.0) * pitch
    xx, yy = np.meshgrid(x, x)
    return np.ascontiguousarray(
        np.column_stack([xx.ravel(), yy.ravel(), np.full(n * n, z)])
    )


def best_time(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    lam = 0.0107
    normal = np.array([0.0, 0.0, 1.0])
    area = (lam / 2) ** 2
    print(f"{'grid':>10} {'pairs':>12} {'numpy [ms]':>12} {'cython [ms]':>12} {'speedup':>8}")
    for n in (8, 16, 24, 32, 48):
        src = grid_points(n, lam / 2, 0.0)
        dst = grid_points(n, lam / 2, lam)
        t_np = best_time(lambda: numpy_backend.rs_matrix(src, dst, normal, area, lam))
        if compiled is None:
            print(f"{n}x{n:>4} {n**4:>12} {t_np * 1e3:>12.3f} {'n/a':>12} {'n/a':>8}")
            continue
        t_cy = best_time(lambda: compiled.rs_matrix(src, dst, normal, area, lam))
        a, _ = numpy_backend.rs_matrix(src, dst, normal, area, lam)
        b, _ = compiled.rs_matrix(src, dst, normal, area, lam)
        rel = np.max(np.abs(a - b)) / np.max(np.abs(a))
        assert rel < 1e-13, f"backend mismatch {rel:.2e}"
        print(
            f"{n}x{n:>4} {n**4:>12} {t_np * 1e3:>12.3f} {t_cy * 1e3:>12.3f} "
            f"{t_np / t_cy:>7.2f}x"
        )
    if compiled is None:
        print("compiled kernel not built; numpy fallback only")


if __name__ == "__main__":
    main()
