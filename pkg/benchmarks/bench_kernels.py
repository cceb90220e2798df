"""Benchmark the numba kernel builds against the pure-numpy builds.

Usage:
    python3 benchmarks/bench_kernels.py [--size 2000000] [--repeats 5]

Reports the best-of-N wall time per build and the speedup. When numba is
not installed only the numpy column is shown. The numba builds are run
once before timing so compilation cost is excluded.
"""

import argparse
import time

import numpy as np

from uqeval import kernels
from uqeval._backend import NUMBA_AVAILABLE


def best_of(fn, args, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=2_000_000,
                        help="elements per input array")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    p = rng.uniform(size=args.size)
    x = rng.uniform(0.1, 50.0, args.size)
    a = rng.uniform(0.5, 20.0, args.size)
    b = rng.uniform(0.5, 20.0, args.size)
    n_feat = max(args.size // 64, 1)
    features = rng.normal(size=(n_feat, 16))
    mu = rng.normal(size=(14, 16))
    var = rng.uniform(0.5, 2.0, (14, 16))

    cases = [
        ("binary_entropy", kernels.binary_entropy_np, (p,)),
        ("digamma", kernels.digamma_np, (x,)),
        ("trigamma", kernels.trigamma_np, (x,)),
        ("kl_beta_uniform", kernels.kl_beta_uniform_np, (a, b)),
        ("ddu_nll", kernels.ddu_nll_np, (features, mu, var)),
    ]

    print(f"size={args.size}, repeats={args.repeats} (best-of)")
    header = f"{'kernel':<18}{'numpy [ms]':>12}"
    if NUMBA_AVAILABLE:
        header += f"{'numba [ms]':>12}{'speedup':>10}"
    print(header)
    for name, fn_np, fn_args in cases:
        t_np = best_of(fn_np, fn_args, args.repeats)
        line = f"{name:<18}{t_np * 1e3:>12.2f}"
        if NUMBA_AVAILABLE:
            fn_nb = getattr(kernels, fn_np.__name__.replace("_np", "_nb"))
            fn_nb(*fn_args)  # warm up: trigger compilation outside the timer
            t_nb = best_of(fn_nb, fn_args, args.repeats)
            line += f"{t_nb * 1e3:>12.2f}{t_np / t_nb:>10.2f}x"
        print(line)


if __name__ == "__main__":
    main()
