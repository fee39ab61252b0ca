"""Compare the compiled and numpy kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 2000]

Prints one line per (kernel, size) with microseconds per call for each
available backend and the max absolute difference between them.
"""
import argparse
import timeit

import numpy as np

from dictpr import kernels
from dictpr.problem import make_instance
from dictpr.solver import SolverConfig, solve_l1_analysis

SIZES = [(24, 4), (64, 8), (200, 16), (1000, 32)]


def _inputs(m, n, seed=0):
    rng = np.random.default_rng(seed)
    A = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y = np.abs(A.conj() @ x) ** 2 + 0.01 * rng.standard_normal(m)
    H = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
    return A, x, y, H, np.array([1.0, -1.0])


def bench(repeat):
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}")
    for m, n in SIZES:
        A, x, y, H, signs = _inputs(m, n)
        calls = {
            "intensities": lambda: kernels.intensities(A, x),
            "quartic_loss": lambda: kernels.quartic_loss(A, x, y),
            "quartic_loss_grad": lambda: kernels.quartic_loss_grad(A, x, y),
            "lifted_lowrank": lambda: kernels.lifted_lowrank(A, H, signs),
        }
        for name, fn in calls.items():
            times, outs = {}, {}
            for b in backends:
                prev = kernels.use_backend(b)
                try:
                    fn()
                    times[b] = min(timeit.repeat(fn, number=repeat, repeat=3)) / repeat * 1e6
                    outs[b] = fn()
                finally:
                    kernels.use_backend(prev)
            diff = 0.0
            if len(outs) == 2:
                a, c = outs.values()
                a = a[1] if isinstance(a, tuple) else a
                c = c[1] if isinstance(c, tuple) else c
                diff = float(np.max(np.abs(np.asarray(a) - np.asarray(c))))
            cols = "  ".join(f"{b}={t:8.2f}us" for b, t in times.items())
            print(f"{name:18s} m={m:5d} n={n:3d}  {cols}  maxdiff={diff:.1e}")


def bench_solver():
    """End-to-end l1 solves (the workload the kernels exist for)."""
    insts = [make_instance(8, 8, 64, 2, seed=s) for s in range(10)]
    for b in kernels.available_backends():
        prev = kernels.use_backend(b)
        try:
            t = min(timeit.repeat(lambda: [solve_l1_analysis(i, SolverConfig()) for i in insts],
                                  number=1, repeat=3))
        finally:
            kernels.use_backend(prev)
        print(f"solve_l1_analysis x10 (n=8, m=64)  {b}: {t * 1e3:8.1f} ms")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--repeat", type=int, default=2000)
    args = p.parse_args()
    bench(args.repeat)
    bench_solver()
