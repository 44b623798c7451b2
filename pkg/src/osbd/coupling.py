"""Coupled-realization gap statistics, tail bounds, and the parabola
inequality feeding the geodesic-localization experiments.

gap_FS = h°_F - h°_S and gap_LF = L - h°_F are computed on the *same*
mark field, so their nonnegativity is a pathwise (not distributional)
invariant.  The L-vs-D comparison is a distributional proxy: independent
samples of (L(t,k) - t)/sqrt(t) against D(t,k)/sqrt(t).
"""
from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .brownian import sample_brownian_batch
from .deposition import NEG_CUT
from ._philox import PURPOSE_CODES, PURPOSE_COUNT, compose_c3, split_key
from .lpp import auxiliary_lpp
from .rng import MarkField, StreamKey
from .stats import KsResult, ks_two_sample

_POS_INF = float("inf")


@dataclass(frozen=True)
class CouplingGapSample:
    t: float
    k: int
    gap_fs: float     # h°_F - h°_S; +inf when h°_S = -inf
    gap_lf: int       # L - h°_F; always a nonnegative integer


def coupled_gaps(field: MarkField, t: float, k: int) -> CouplingGapSample:
    """Both gaps from one sweep (plus the auxiliary chain) of one field."""
    end_val, _ = kernels().dp_column_sweep(
        field.times, field.offsets, k, -1.0, t, False, False)
    h_f = int(end_val.max())
    h_s = int(end_val[k - 1])
    ell = auxiliary_lpp(field, t, k)
    gap_fs = _POS_INF if h_s < NEG_CUT else float(h_f - h_s)
    return CouplingGapSample(t=float(t), k=int(k), gap_fs=gap_fs,
                             gap_lf=int(ell - h_f))


def lemma3_bound(t: float, k: int, x: int, c_prefactor: float = 10.0):
    """Tail bound C·exp[x·(log((k+x)t/x²) + 2) - t] for P(L(t,k) >= x),
    valid in the regime x >= t."""
    if int(x) != x or int(k) != k or x < 1 or k < 1:
        raise ValueError("x and k must be integers >= 1")
    if x < t:
        raise ValueError("bound requires x >= t")
    ln = (math.log(c_prefactor)
          + x * (math.log((k + x) * t / (x * x)) + 2.0) - t)
    return math.exp(ln) if ln < 700.0 else _POS_INF


ParabolaCheck = namedtuple("ParabolaCheck", "lhs rhs holds")


def parabola_inequality(t: float, alpha: int, gamma: float,
                        s: float) -> ParabolaCheck:
    """Deterministic inequality behind geodesic localization:
    sqrt(s·kg) + sqrt((t-s)(alpha-kg)) - sqrt(t·alpha) <=
    -(1/32)·sqrt(t·alpha^(-1/3))·alpha^(2(gamma-2/3)),
    where kg = floor((s/t)·alpha + alpha^gamma)."""
    if not 2.0 / 3.0 < gamma < 1.0:
        raise ValueError("gamma must lie strictly between 2/3 and 1")
    if alpha < 1 or t <= 0.0:
        raise ValueError("need alpha >= 1 and t > 0")
    s_max = t * (1.0 - alpha ** (gamma - 1.0))
    if not 0.0 <= s <= s_max:
        raise ValueError(f"s must lie in [0, {s_max}] for this (t, alpha, "
                         f"gamma)")
    kg = math.floor((s / t) * alpha + alpha ** gamma)
    lhs = (math.sqrt(s * kg) + math.sqrt((t - s) * (alpha - kg))
           - math.sqrt(t * alpha))
    rhs = (-(1.0 / 32.0) * math.sqrt(t * alpha ** (-1.0 / 3.0))
           * alpha ** (2.0 * (gamma - 2.0 / 3.0)))
    return ParabolaCheck(lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs))


def sample_l_batch(key: StreamKey, t: float, k: int, n: int) -> np.ndarray:
    """n samples of L(t,k) via the order-only replica kernel."""
    k0, k1 = split_key(key.master_seed)
    hf = np.empty(n, dtype=np.int64)
    hs = np.empty(n, dtype=np.int64)
    ell = np.empty(n, dtype=np.int64)
    kernels().batch_heights_orderonly(
        k0, k1,
        compose_c3(key.experiment_id, PURPOSE_COUNT),
        compose_c3(key.experiment_id, PURPOSE_CODES),
        key.replica, key.replica + n, t * k, int(k), True, hf, hs, ell)
    return ell


def l_vs_d_distance(keys, t: float, k: int, n_samples: int,
                    m_grid: int, significance: float = 1e-3) -> KsResult:
    """Two-sample KS between (L(t,k)-t)/sqrt(t) and D(t,k)/sqrt(t).

    ``keys`` is a pair (poisson-side key, brownian-side key) so the two
    sides draw independent randomness.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples per side")
    key_l, key_d = keys
    ell = sample_l_batch(key_l, t, k, n_samples)
    a = (ell - t) / math.sqrt(t)
    b = sample_brownian_batch(key_d, t, k, m_grid, n_samples) / math.sqrt(t)
    return ks_two_sample(a, b, significance)
