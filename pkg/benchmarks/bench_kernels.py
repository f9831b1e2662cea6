"""Benchmark the compiled kernels against the numpy/scipy fallback.

Run:  python benchmarks/bench_kernels.py [--sizes 513,2049,8193] [--repeat 200]

Both backends are imported directly, so the comparison works regardless of
which one the package selected at import time.
"""

import argparse
import time

import numpy as np

from radial_lab import _kernels_py
from radial_lab import kernels

try:
    from radial_lab import _kernels_cy
except ImportError:
    _kernels_cy = None


def _timeit(fn, args, repeat):
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def _problem(n, rng):
    sub = -rng.uniform(0.5, 1.0, n - 1)
    sup = -rng.uniform(0.5, 1.0, n - 1)
    diag = 2.5 + rng.uniform(0.0, 1.0, n)
    rhs = rng.standard_normal(n)
    y = np.cumsum(rng.standard_normal(n) * 0.1) + rng.standard_normal(n)
    w = rng.uniform(0.1, 1.0, n)
    return sub, diag, sup, rhs, y, w


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="513,2049,8193")
    parser.add_argument("--repeat", type=int, default=200)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(0)

    print(f"compiled extension available: {_kernels_cy is not None} "
          f"(package selected compiled={kernels.HAVE_COMPILED})")
    header = f"{'kernel':<22}{'n':>7}{'fallback':>12}{'compiled':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        sub, diag, sup, rhs, y, w = _problem(n, rng)
        cases = [
            ("thomas", (sub, diag, sup, rhs)),
            ("pav_nondecreasing", (y, w)),
            ("sturm_count", (diag, sub, 1.7)),
        ]
        for name, a in cases:
            t_py = _timeit(getattr(_kernels_py, name), a, args.repeat)
            if _kernels_cy is None:
                print(f"{name:<22}{n:>7}{t_py * 1e6:>10.1f}us{'-':>12}{'-':>9}")
                continue
            t_cy = _timeit(getattr(_kernels_cy, name), a, args.repeat)
            out_py = getattr(_kernels_py, name)(*a)
            out_cy = getattr(_kernels_cy, name)(*a)
            assert np.allclose(out_py, out_cy, rtol=1e-12, atol=1e-12)
            print(f"{name:<22}{n:>7}{t_py * 1e6:>10.1f}us{t_cy * 1e6:>10.1f}us"
                  f"{t_py / t_cy:>8.1f}x")


if __name__ == "__main__":
    main()
