"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Also checks that both backends return identical results on each workload.
"""
import argparse
import math
import timeit

import numpy as np

from stablecv import _pykernels

try:
    from stablecv import _ckernels
except ImportError:
    _ckernels = None


def workloads():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(400, 5))
    y = np.sign(rng.normal(size=400))
    a = np.eye(5)
    a[0, 0] = 0.0
    m = rng.normal(size=(80, 80))
    spd = m @ m.T + 80 * np.eye(80)
    train = np.arange(400, dtype=np.int64)
    steps = math.log(400) / np.arange(1, 2001)
    return {
        "draw_indices(100k)": lambda k: k.draw_indices(7, 1000, 100_000),
        "cholesky(80x80)": lambda k: k.cholesky(spd),
        "sgd_quadratic(2000 steps)": lambda k: k.sgd_quadratic(a, x, y, train, steps, 3),
        "pegasos(2000 steps)": lambda k: k.pegasos(x, y, train, 0.1, 2000, 3),
        "sgd_counterexample(2000 reps)": lambda k: k.sgd_counterexample(100, 5, 10, 2000, 0, 2 / 3),
    }


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.allclose(a, b, rtol=1e-13, atol=1e-13)
    return a == b


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if _ckernels is None:
        print("compiled extension not built; nothing to compare")
        return
    print(f"{'kernel':32s} {'python s':>10s} {'cython s':>10s} {'speedup':>9s}  agree")
    for name, fn in workloads().items():
        py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat))
        cy = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat))
        speed = py / cy if cy > 0 else math.inf
        print(f"{name:32s} {py:10.4f} {cy:10.4f} {speed:8.1f}x  {same(fn(_pykernels), fn(_ckernels))}")


if __name__ == "__main__":
    main()
