#!/usr/bin/env python3
"""Benchmark the compiled CSR kernels against the NumPy fallback.

The masked gram product is the hot loop: one call per conjugate-gradient
iteration of every refit in the removal search. Kernel timings run both
implementations in-process; the end-to-end fit timing re-executes this
script under each backend because the backend is fixed at import.

Usage:  python benchmarks/kernel_bench.py [--rows 4000] [--cols 20000]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from lmoselect import kernels
from lmoselect.kernels import pure
from lmoselect.regression import fit_ridge
from lmoselect.sparse import CsrMatrix

try:
    from lmoselect.kernels import _core
except ImportError:
    _core = None


def build_matrix(rows: int, cols: int, nnz_per_row: int, seed: int = 0) -> CsrMatrix:
    rng = np.random.default_rng(seed)
    indptr = np.arange(rows + 1, dtype=np.int64) * nnz_per_row
    indices = np.empty(rows * nnz_per_row, dtype=np.int32)
    for i in range(rows):
        indices[i * nnz_per_row : (i + 1) * nnz_per_row] = np.sort(
            rng.choice(cols, size=nnz_per_row, replace=False)
        )
    data = rng.normal(size=rows * nnz_per_row)
    data[data == 0.0] = 1.0
    return CsrMatrix(rows, cols, indptr, indices, data)


def best_of(fn, repeats: int = 7) -> float:
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return min(samples)


def bench_kernels(matrix: CsrMatrix) -> None:
    rng = np.random.default_rng(1)
    x = rng.normal(size=matrix.ncols)
    v = rng.normal(size=matrix.nrows)
    mask = rng.random(matrix.ncols) < 0.8
    mask_u8 = mask.view(np.uint8)
    tmp = np.empty(matrix.nrows)
    out_rows = np.empty(matrix.nrows)
    out_cols = np.empty(matrix.ncols)

    cases = {
        "matvec": (
            lambda: pure.matvec(matrix, x),
            (lambda: _core.matvec(matrix.indptr, matrix.indices, matrix.data, x, out_rows))
            if _core
            else None,
        ),
        "rmatvec": (
            lambda: pure.rmatvec(matrix, v),
            (lambda: _core.rmatvec(matrix.indptr, matrix.indices, matrix.data, v, out_cols))
            if _core
            else None,
        ),
        "masked_gram": (
            lambda: pure.masked_gram_matvec(matrix, mask, 1.0, x),
            (
                lambda: _core.masked_gram_matvec(
                    matrix.indptr, matrix.indices, matrix.data, mask_u8, 1.0, x, tmp, out_cols
                )
            )
            if _core
            else None,
        ),
    }

    print(f"{'kernel':<14}{'pure (ms)':>12}{'compiled (ms)':>16}{'speedup':>10}")
    for name, (pure_fn, core_fn) in cases.items():
        t_pure = best_of(pure_fn) * 1e3
        if core_fn is None:
            print(f"{name:<14}{t_pure:>12.3f}{'n/a':>16}{'-':>10}")
            continue
        t_core = best_of(core_fn) * 1e3
        print(f"{name:<14}{t_pure:>12.3f}{t_core:>16.3f}{t_pure / t_core:>9.1f}x")


def bench_fit(rows: int, cols: int, nnz: int) -> float:
    matrix = build_matrix(rows, cols, nnz)
    rng = np.random.default_rng(2)
    y = rng.normal(size=rows)
    active = rng.random(cols) < 0.9
    return best_of(lambda: fit_ridge(matrix, y, active, 1.0), repeats=3)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=4000)
    parser.add_argument("--cols", type=int, default=20000)
    parser.add_argument("--nnz-per-row", type=int, default=40)
    parser.add_argument("--fit-only", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.fit_only:
        t = bench_fit(args.rows, args.cols, args.nnz_per_row)
        print(f"{kernels.BACKEND}\t{t:.6f}")
        return 0

    print(f"matrix: {args.rows} x {args.cols}, {args.nnz_per_row} nnz/row")
    print(f"active backend: {kernels.BACKEND}\n")
    matrix = build_matrix(args.rows, args.cols, args.nnz_per_row)
    bench_kernels(matrix)

    print("\nend-to-end fit_ridge (fresh process per backend):")
    for backend in ("pure", "compiled"):
        if backend == "compiled" and _core is None:
            print(f"  {backend:<10} n/a (extension not built)")
            continue
        env = dict(os.environ, LMOSELECT_KERNELS=backend)
        cmd = [
            sys.executable,
            os.path.abspath(__file__),
            "--fit-only",
            "--rows",
            str(args.rows),
            "--cols",
            str(args.cols),
            "--nnz-per-row",
            str(args.nnz_per_row),
        ]
        proc = subprocess.run(cmd, env=env, capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"  {backend:<10} failed: {proc.stderr.strip()}")
            continue
        reported, seconds = proc.stdout.split()
        print(f"  {reported:<10} {float(seconds) * 1e3:9.1f} ms")
    return 0


if __name__ == "__main__":
    sys.exit(main())
