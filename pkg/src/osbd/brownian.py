"""Discretized Brownian last-passage percolation and GUE sampling.

D(t,k) is the supremum over nondecreasing breakpoint chains of summed
Brownian increments; on an m-point grid it is a prefix-max DP per column.
The GUE largest eigenvalue is sampled from the symmetric tridiagonal
beta=2 reduction (diagonal N(0,1), squared off-diagonals Gamma(k-i,1))
in the normalization with lambda_max ~ N(0,1) at k=1, located by Sturm
bisection to absolute tolerance 1e-10.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from ._philox import (PURPOSE_GAMMA, PURPOSE_GAUSS, compose_c3, split_key)
from .rng import StreamKey
from .stats import KsResult, ks_two_sample

STURM_TOL = 1e-10
GRID_M_CAP = 1 << 16


@dataclass(frozen=True)
class BrownianGrid:
    """Per-column Brownian partial sums on the uniform grid j·t/m."""

    t: float
    k: int
    m: int
    values: np.ndarray    # shape (k, m+1); values[:, 0] = 0

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("grid needs at least 2 points per column")
        if self.values.shape != (self.k, self.m + 1):
            raise ValueError("values must have shape (k, m+1)")
        if np.any(self.values[:, 0] != 0.0):
            raise ValueError("paths must start at 0")


@dataclass(frozen=True)
class GueSample:
    k: int
    lambda_max: float


def make_brownian_grid(key: StreamKey, t: float, k: int,
                       m: int) -> BrownianGrid:
    """Columns use Gaussian streams (key, column=r); increments have
    variance t/m."""
    if t <= 0.0 or k < 1:
        raise ValueError("need positive horizon and at least one column")
    if m < 2:
        raise ValueError("grid needs at least 2 points per column")
    from ._kernels_np import _normals_grid
    k0, k1 = split_key(key.master_seed)
    c3 = compose_c3(key.experiment_id, PURPOSE_GAUSS)
    sig = math.sqrt(t / m)
    values = np.zeros((k, m + 1))
    for r in range(1, k + 1):
        z = _normals_grid(k0, k1, c3, [key.replica], r, m)[0]
        values[r - 1, 1:] = np.cumsum(sig * z)
    return BrownianGrid(t=float(t), k=int(k), m=int(m), values=values)


def brownian_lpp(grid: BrownianGrid) -> float:
    """D(t,k) on the grid: best[r][i] = B_r(t_i) + max_{j<=i}
    (best[r-1][j] - B_r(t_j)), paths starting at time 0."""
    m = grid.m
    prev = np.full(m + 1, -np.inf)
    prev[0] = 0.0
    for r in range(grid.k):
        b = grid.values[r]
        prev = b + np.maximum.accumulate(prev - b)
    return float(prev[m])


def sample_gue_lambda_max(key: StreamKey, k: int) -> GueSample:
    if k < 1:
        raise ValueError("matrix order must be at least 1")
    out = np.empty(1)
    k0, k1 = split_key(key.master_seed)
    kernels().batch_gue_lambda_max(
        k0, k1, compose_c3(key.experiment_id, PURPOSE_GAUSS),
        compose_c3(key.experiment_id, PURPOSE_GAMMA),
        key.replica, key.replica + 1, int(k), STURM_TOL, out)
    return GueSample(k=int(k), lambda_max=float(out[0]))


def sample_gue_batch(key: StreamKey, k: int, n: int) -> np.ndarray:
    """n largest-eigenvalue samples at replicas key.replica..+n-1."""
    out = np.empty(n)
    k0, k1 = split_key(key.master_seed)
    kernels().batch_gue_lambda_max(
        k0, k1, compose_c3(key.experiment_id, PURPOSE_GAUSS),
        compose_c3(key.experiment_id, PURPOSE_GAMMA),
        key.replica, key.replica + n, int(k), STURM_TOL, out)
    return out


def sample_brownian_batch(key: StreamKey, t: float, k: int, m: int,
                          n: int) -> np.ndarray:
    """n values of D(t,k) on m-point grids, replicas key.replica..+n-1."""
    if m < 2:
        raise ValueError("grid needs at least 2 points per column")
    out = np.empty(n)
    k0, k1 = split_key(key.master_seed)
    kernels().batch_brownian_d(
        k0, k1, compose_c3(key.experiment_id, PURPOSE_GAUSS),
        key.replica, key.replica + n, float(t), int(k), int(m), out)
    return out


def brownian_scaling_check(key: StreamKey, t: float, k: int, m: int,
                           n_samples: int,
                           significance: float = 1e-3) -> KsResult:
    """Two-sample KS between D(t,k) and sqrt(t)·D(1,k), independent
    replica blocks of the same key."""
    if n_samples < 2:
        raise ValueError("need at least 2 samples per side")
    a = sample_brownian_batch(key, t, k, m, n_samples)
    key_b = StreamKey(key.master_seed, key.experiment_id,
                      key.replica + n_samples, key.column)
    b = math.sqrt(t) * sample_brownian_batch(key_b, 1.0, k, m, n_samples)
    return ks_two_sample(a, b, significance)


def calibrate_grid_m(key: StreamKey, t: float, k: int,
                     start_m: int = 512, n_probe: int = 400,
                     tol_factor: float = 0.005,
                     cap: int = GRID_M_CAP) -> int:
    """Double m until the sampled median of D(t,k) shifts by less than
    tol_factor·sqrt(t); capped at GRID_M_CAP (documented)."""
    m = start_m
    med = np.median(sample_brownian_batch(key, t, k, m, n_probe))
    while m < cap:
        med2 = np.median(sample_brownian_batch(key, t, k, 2 * m, n_probe))
        if abs(med2 - med) < tol_factor * math.sqrt(t):
            return 2 * m
        m, med = 2 * m, med2
    return cap
