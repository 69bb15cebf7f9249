"""Time the numba kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``.  Both backends are loaded in
the same process by calling the private implementations directly.
"""
import argparse
import timeit

import numpy as np

from tsallis_causal import _kernels as k


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    qs = np.geomspace(1.0, 100.0, 200)
    print(f"active backend: {k.backend()}")
    print(f"{'size':>8} {'kernel':>14} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for size in (8, 64, 4096, 40000):
        p = rng.dirichlet(np.ones(size))
        cases = [
            ("tsallis_many", lambda: k._tsallis_many_numpy(p, qs, 1e-9), lambda: k._tsallis_many_jit(p, qs, 1e-9)),
            ("power_sums", lambda: k._power_sums_numpy(p, qs), lambda: k._power_sums_jit(p, qs)),
            ("shannon", lambda: k._shannon_numpy(p), lambda: k._shannon_jit(p)),
        ]
        for name, fast_np, fast_jit in cases:
            fast_jit()  # compile outside the timed region
            number = max(1, 200000 // (size * (len(qs) if name != "shannon" else 1)))
            t_np = min(timeit.repeat(fast_np, number=number, repeat=args.repeat)) / number * 1e3
            t_jit = min(timeit.repeat(fast_jit, number=number, repeat=args.repeat)) / number * 1e3
            print(f"{size:>8} {name:>14} {t_np:>10.4f} {t_jit:>10.4f} {t_np / t_jit:>8.2f}")


if __name__ == "__main__":
    main()
