"""Compare the numba and numpy kernels on eigen-decomposition and contraction.

    python3 benchmarks/bench_kernels.py [--batch 2000] [--repeat 5]

The numba timings exclude the first (compiling) call.
"""

import argparse
import time

import numpy as np

from scenario_witness._accel import HAVE_NUMBA
from scenario_witness._kernels import jacobi_eigh, sandwich


def _random_hermitian(batch, d, rng):
    z = rng.standard_normal((batch, d, d)) + 1j * rng.standard_normal((batch, d, d))
    return 0.5 * (z + np.conj(np.swapaxes(z, 1, 2)))


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--batch", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    rng = np.random.default_rng(0)
    backends = [False] + ([True] if HAVE_NUMBA else [])
    print(f"{'kernel':10s} {'d':>3s} {'batch':>7s} " + " ".join(f"{'numba' if b else 'numpy':>10s}" for b in backends))
    for d in (2, 3, 4, 8, 9):
        a = _random_hermitian(args.batch, d, rng)
        row = []
        for b in backends:
            jacobi_eigh(a[:2], use_numba=b)  # warm-up / compile
            row.append(_time(lambda: jacobi_eigh(a, use_numba=b), args.repeat))
        print(f"{'jacobi':10s} {d:3d} {args.batch:7d} " + " ".join(f"{t * 1e3:9.2f}ms" for t in row))
    for D, b_dim in ((9, 3), (8, 2), (8, 4), (27, 9)):
        w = _random_hermitian(1, D, rng)[0]
        emb = rng.standard_normal((args.batch, D, b_dim)) + 1j * rng.standard_normal((args.batch, D, b_dim))
        row = []
        for b in backends:
            sandwich(emb[:2], w, use_numba=b)
            row.append(_time(lambda: sandwich(emb, w, use_numba=b), args.repeat))
        print(f"{'sandwich':10s} {D:3d} {args.batch:7d} " + " ".join(f"{t * 1e3:9.2f}ms" for t in row))
    if not HAVE_NUMBA:
        print("numba unavailable or disabled; only the numpy backend was timed")


if __name__ == "__main__":
    main()
