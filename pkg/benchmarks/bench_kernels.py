"""Compare the compiled and pure-Python output-entropy kernels.

Times ``product_output_entropies`` on representative workloads with both
backends, reports throughput and the largest disagreement, and degrades
gracefully when the compiled extension is unavailable.

Run with ``python3 benchmarks/bench_kernels.py [--samples N]``.
"""

import argparse
import time

import numpy as np

from relocc import _kernels_py
from relocc.linalg import random_unitary

try:
    from relocc import _kernels as _kernels_compiled
except ImportError:
    _kernels_compiled = None


def random_inputs(d_a, d_b, n, rng):
    a = rng.normal(size=(n, d_a)) + 1j * rng.normal(size=(n, d_a))
    b = rng.normal(size=(n, d_b)) + 1j * rng.normal(size=(n, d_b))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    return np.ascontiguousarray(a), np.ascontiguousarray(b)


def time_backend(fn, u, d_a, d_b, a, b, chunk=65536, repeats=3):
    n = a.shape[0]
    out = np.empty(n)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for lo in range(0, n, chunk):
            hi = min(lo + chunk, n)
            out[lo:hi] = fn(u, d_a, d_b, a[lo:hi], b[lo:hi])
        best = min(best, time.perf_counter() - start)
    return out, best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=200_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"samples per workload: {args.samples}")
    if _kernels_compiled is None:
        print("compiled kernel unavailable; timing only the pure-Python backend")
    for d_a, d_b in ((2, 2), (2, 3), (3, 4)):
        u = random_unitary(d_a * d_b, rng)
        a, b = random_inputs(d_a, d_b, args.samples, rng)
        ref, t_py = time_backend(
            _kernels_py.product_output_entropies, u, d_a, d_b, a, b
        )
        line = (
            f"{d_a} x {d_b}: pure-python {args.samples / t_py / 1e6:7.3f} Msamples/s"
        )
        if _kernels_compiled is not None:
            out, t_c = time_backend(
                _kernels_compiled.product_output_entropies, u, d_a, d_b, a, b
            )
            line += (
                f"  compiled {args.samples / t_c / 1e6:7.3f} Msamples/s"
                f"  speedup {t_py / t_c:5.2f}x"
                f"  max |delta| {np.max(np.abs(out - ref)):.2e}"
            )
        print(line)

    # The optimizer evaluates small batches (one row per restart) thousands
    # of times, so per-call overhead matters as much as bulk throughput.
    print("small-batch regime (32 rows per call):")
    repeats = max(10, min(5000, args.samples // 32))
    for d_a, d_b in ((2, 2), (3, 3)):
        u = random_unitary(d_a * d_b, rng)
        a, b = random_inputs(d_a, d_b, 32, rng)
        ref, t_py = time_backend(
            _kernels_py.product_output_entropies, u, d_a, d_b, a, b, repeats=repeats
        )
        line = f"{d_a} x {d_b}: pure-python {1.0 / t_py / 1e3:7.2f} kcalls/s"
        if _kernels_compiled is not None:
            out, t_c = time_backend(
                _kernels_compiled.product_output_entropies,
                u,
                d_a,
                d_b,
                a,
                b,
                repeats=repeats,
            )
            line += (
                f"  compiled {1.0 / t_c / 1e3:7.2f} kcalls/s"
                f"  speedup {t_py / t_c:5.2f}x"
                f"  max |delta| {np.max(np.abs(out - ref)):.2e}"
            )
        print(line)


if __name__ == "__main__":
    main()
