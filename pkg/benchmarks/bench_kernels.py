"""Compare the compiled and pure-Python sparse kernels.

Times LU factorization, repeated solves and a full coupled Radau IIA run on
the network scenario for each available backend.

    python benchmarks/bench_kernels.py [--elements 10 20 40] [--repeat 3]
"""

import argparse
import time

import numpy as np

from netpdae.experiments import prepare
from netpdae.sparse import CSRMatrix, available_backends, factorize
from netpdae.steppers import TimeGrid, solve_coupled_rk


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def laplacian_2d(n):
    """5-point Laplacian on an n x n grid, a generic sparse test matrix."""
    N = n * n
    rows, cols, vals = [], [], []
    for i in range(n):
        for j in range(n):
            k = i * n + j
            rows.append(k), cols.append(k), vals.append(4.0)
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                if 0 <= i + di < n and 0 <= j + dj < n:
                    rows.append(k), cols.append((i + di) * n + j + dj), vals.append(-1.0)
    return CSRMatrix.from_triplets((N, N), rows, cols, vals)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--elements", type=int, nargs="+", default=[10, 20, 40])
    ap.add_argument("--grid", type=int, nargs="+", default=[20, 40])
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")

    print(f"\n{'matrix':>22} {'backend':>8} {'factor [s]':>11} {'100 solves [s]':>15}")
    for n in args.grid:
        A = laplacian_2d(n)
        b = np.ones(A.shape[0])
        for be in backends:
            tf = best_of(lambda: factorize(A, backend=be), args.repeat)
            F = factorize(A, backend=be)
            ts = best_of(lambda: [F.solve(b) for _ in range(100)], args.repeat)
            print(f"{f'laplacian {n}x{n}':>22} {be:>8} {tf:11.4f} {ts:15.4f}")

    print(f"\n{'network run':>22} {'backend':>8} {'time [s]':>11} {'steps/s':>15}")
    for el in args.elements:
        _, s, data, p, _ = prepare("fig1-network", el)
        grid = TimeGrid(1.0, args.steps)
        results = {}
        for be in backends:
            t = best_of(lambda: solve_coupled_rk(s, data, p, grid, "radau-iia-2", backend=be), args.repeat)
            results[be] = solve_coupled_rk(s, data, p, grid, "radau-iia-2", backend=be).p0
            print(f"{f'{el} el/edge, radau2':>22} {be:>8} {t:11.4f} {args.steps / t:15.0f}")
        if len(results) > 1:
            a, b = results.values()
            print(f"{'':>22} max backend difference {np.abs(a - b).max():.2e}")


if __name__ == "__main__":
    main()
