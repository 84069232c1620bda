"""Benchmark the compiled pairwise kernel against the pure-Python fallback.

Usage:
    python3 benchmarks/bench_pairwise.py [--sizes 8,16,32] [--dims 1e4,1e5,1e6]

Prints per-configuration wall time for both backends and the speedup, and
checks that the two backends agree to tight tolerance on every benchmarked
input (their float64 accumulation orders differ, so the last ulp may not).
"""

import argparse
import time

import numpy as np

from effpred import kernels


def time_backend(mat, backend, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        kernels.pair_stats(mat, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="8,16,32")
    parser.add_argument("--dims", default="1e4,1e5,1e6")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    sizes = [int(s) for s in args.sizes.split(",")]
    dims = [int(float(d)) for d in args.dims.split(",")]

    if not kernels.HAVE_COMPILED:
        print("compiled kernel unavailable; benchmarking python backend only")

    gen = np.random.default_rng(args.seed)
    print(f"{'n':>4} {'dim':>9} {'python (ms)':>12} {'compiled (ms)':>14} {'speedup':>8}")
    for n in sizes:
        for dim in dims:
            mat = gen.standard_normal((n, dim)).astype(np.float32)
            t_py = time_backend(mat, "python", args.repeats)
            if kernels.HAVE_COMPILED:
                t_c = time_backend(mat, "compiled", args.repeats)
                sq_p, dots_p = kernels.pair_stats(mat, backend="python")
                sq_c, dots_c = kernels.pair_stats(mat, backend="compiled")
                match = np.allclose(sq_p, sq_c, rtol=1e-12) and np.allclose(
                    dots_p, dots_c, rtol=1e-10, atol=1e-9
                )
                tag = "" if match else "  (MISMATCH)"
                print(
                    f"{n:>4} {dim:>9} {t_py * 1e3:>12.3f} {t_c * 1e3:>14.3f}"
                    f" {t_py / t_c:>7.2f}x{tag}"
                )
            else:
                print(f"{n:>4} {dim:>9} {t_py * 1e3:>12.3f} {'-':>14} {'-':>8}")


if __name__ == "__main__":
    main()
