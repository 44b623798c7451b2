"""Time the hot kernels on the numba backend against their numpy twins.

Run from the repository root::

    python3 benchmarks/bench_backends.py [--quick]

Each kernel is warmed once per backend (JIT compilation, allocator),
then timed over the best of three passes.  The table reports per-pass
wall time and the numba speedup.  Absolute numbers are machine-bound;
the point of the exercise is the ratio and that both columns exist.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from osbd._backend import kernels, set_backend
from osbd._philox import (PURPOSE_CODES, PURPOSE_COUNT, PURPOSE_GAUSS,
                          PURPOSE_MARKS, compose_c3, split_key)
from osbd.brownian import STURM_TOL

K0, K1 = split_key(0xBE9C4)


def _field_gen(kern, scale):
    c3 = compose_c3(15, PURPOSE_MARKS)
    for rep in range(4 * scale):
        kern.gen_field_csr(K0, K1, c3, rep, 2000.0, 16, 1)


def _dp_sweep(kern, scale, _cache={}):
    if "fld" not in _cache:
        nb = kernels()  # whichever is active; field reused across backends
        c3 = compose_c3(15, PURPOSE_MARKS)
        _cache["fld"] = nb.gen_field_csr(K0, K1, c3, 0, 4000.0, 16, 1)
    times, offs = _cache["fld"]
    for _ in range(4 * scale):
        kern.dp_column_sweep(times, offs, 16, -1.0, 4000.0, False, False)


def _order_only(kern, scale):
    c3n = compose_c3(15, PURPOSE_COUNT)
    c3c = compose_c3(15, PURPOSE_CODES)
    n = 40 * scale
    hf = np.empty(n, dtype=np.int64)
    hs = np.empty(n, dtype=np.int64)
    ell = np.empty(n, dtype=np.int64)
    kern.batch_heights_orderonly(K0, K1, c3n, c3c, 0, n, 8000.0, 8, True,
                                 hf, hs, ell)


def _brownian(kern, scale):
    c3 = compose_c3(15, PURPOSE_GAUSS)
    n = 2 * scale
    out = np.empty(n)
    kern.batch_brownian_d(K0, K1, c3, 0, n, 1.0, 4, 50000, out)


def _gue(kern, scale):
    c3g = compose_c3(15, PURPOSE_GAUSS)
    c3m = compose_c3(15, 5)
    n = 10 * scale
    out = np.empty(n)
    kern.batch_gue_lambda_max(K0, K1, c3g, c3m, 0, n, 200, STURM_TOL, out)


BENCHES = (
    ("field generation 16 cols x t=2000", _field_gen),
    ("column DP sweep 64k marks", _dp_sweep),
    ("order-only heights lambda=8000", _order_only),
    ("Brownian functional m=50000", _brownian),
    ("eigenvalue batch k=200", _gue),
)


def _time(fn, kern, scale):
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        fn(kern, scale)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true",
                    help="quarter-size workloads")
    args = ap.parse_args()
    scale = 1 if args.quick else 4

    results = []
    for label, fn in BENCHES:
        row = {"label": label}
        for backend in ("numba", "numpy"):
            set_backend(backend)
            kern = kernels()
            fn(kern, 1)                      # warm: compile + allocate
            row[backend] = _time(fn, kern, scale)
        results.append(row)

    width = max(len(r["label"]) for r in results)
    print(f"{'kernel':<{width}}  {'numba':>9}  {'numpy':>9}  {'speedup':>7}")
    for r in results:
        ratio = r["numpy"] / r["numba"] if r["numba"] > 0 else float("inf")
        print(f"{r['label']:<{width}}  {r['numba']:>8.3f}s  "
              f"{r['numpy']:>8.3f}s  {ratio:>6.1f}x")


if __name__ == "__main__":
    main()
