"""Experiment registry and run driver.

Eight numbered experiments (E1..E8) cover the verification surface of
the package: pathwise reversal, fixed-k Gaussian/GUE limits, the
growing-column Tracy-Widom regime, mean expansion, upper-tail skew,
geodesic deviation scaling, coupling gaps / tail bounds, and the
Brownian melon limit.  ``run_experiment`` resolves a preset, executes
replicas (sharded over threads into disjoint output slices, so byte
output is independent of the thread count), writes ``samples.csv`` /
``geodesics.csv``, and records a manifest with a pass/fail verdict per
check in ``summary.json``.

Stream discipline: every experiment owns the counter subspace tagged by
its number; independent sub-series within an experiment are decoupled
by replica-block offsets of 2**20 so no two draws ever share a counter.
"""
from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from ._backend import active_backend, kernels
from ._philox import (PURPOSE_CODES, PURPOSE_COUNT, PURPOSE_GAMMA,
                      PURPOSE_GAUSS, PURPOSE_MARKS, compose_c3, split_key)
from .brownian import STURM_TOL
from .config import (CODE_VERSION, SCHEMA_VERSION, ConfigError,
                     ExperimentConfig, RunManifest)
from .coupling import lemma3_bound, parabola_inequality
from .deposition import NEG_CUT, InitialCondition, _ordered_marks
from .rng import StreamKey, generate_marks, reverse_field
from .stats import (ks_one_sample_normal, ks_two_sample, loglog_fit,
                    tail_estimator, wilson_interval)

#: Replica-block stride separating independent sub-series of one
#: experiment in the counter space.
SERIES_BLOCK = 1 << 20

SAMPLE_HEADER = "experiment,replica,t,k,raw_value,rescaled_value"
GEO_HEADER = ("experiment,replica,t,k,policy,"
              "sup_deviation,dev_q25,dev_q50,dev_q75")


def _g(x) -> str:
    return format(float(x), ".17g")


def rescale_height(h, t: float, k: int):
    """Repo-wide fluctuation convention:
    (h - t - 2 sqrt(t k)) / sqrt(t k**(-1/3))."""
    return ((np.asarray(h, dtype=np.float64) - t - 2.0 * math.sqrt(t * k))
            / math.sqrt(t * k ** (-1.0 / 3.0)))


def rescale_gue(lam, k: int):
    """Edge convention for the largest eigenvalue:
    k**(1/6) (lambda - 2 sqrt(k))."""
    return (np.asarray(lam, dtype=np.float64) - 2.0 * math.sqrt(k)) \
        * k ** (1.0 / 6.0)


def aggregate(replica_outputs, n_expected: int) -> list:
    """Order replica payloads ascending by index.

    Accepts (index, payload) pairs in any completion order; duplicates
    and missing indices are hard errors, so a permuted or partially
    merged run can never silently change or truncate the reduction.
    """
    got = {}
    for idx, payload in replica_outputs:
        if idx in got:
            raise ValueError(f"duplicate replica index {idx}")
        got[idx] = payload
    missing = sorted(set(range(n_expected)) - set(got))
    if missing:
        shown = ", ".join(str(i) for i in missing[:20])
        more = "" if len(missing) <= 20 else f", ... ({len(missing)} total)"
        raise ValueError(f"missing replica indices: {shown}{more}")
    return [got[i] for i in range(n_expected)]


class _CsvSink:
    """Line-oriented CSV writer with 17-significant-digit floats."""

    def __init__(self, path: Path, header: str):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8", newline="")
        self._fh.write(header + "\n")

    def row(self, *vals):
        self._fh.write(",".join(
            _g(v) if isinstance(v, float) else str(v) for v in vals) + "\n")

    def bulk(self, series: str, t: float, k: int, raw, rescaled,
             rep0: int = 0):
        """One row per entry of ``raw``/``rescaled`` with ascending
        replica indices starting at rep0."""
        ts = _g(t)
        intraw = raw.dtype.kind in "iu"
        buf = []
        for i in range(raw.shape[0]):
            rv = str(raw[i]) if intraw else _g(raw[i])
            buf.append(f"{series},{rep0 + i},{ts},{k},{rv},{_g(rescaled[i])}")
            if len(buf) == 65536:
                self._fh.write("\n".join(buf) + "\n")
                buf.clear()
        if buf:
            self._fh.write("\n".join(buf) + "\n")

    def close(self):
        self._fh.close()


class _RunContext:
    def __init__(self, outdir: Path, seed: int, threads: int):
        self.outdir = outdir
        self.seed = seed
        self.threads = threads
        self.samples = _CsvSink(outdir / "samples.csv", SAMPLE_HEADER)
        self._geo = None

    @property
    def geodesics(self) -> _CsvSink:
        if self._geo is None:
            self._geo = _CsvSink(self.outdir / "geodesics.csv", GEO_HEADER)
        return self._geo

    def close(self) -> dict:
        self.samples.close()
        files = [self.samples.path]
        if self._geo is not None:
            self._geo.close()
            files.append(self._geo.path)
        return {p.name: _sha256(p) for p in files}


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _shard_ranges(n: int, threads: int):
    bounds = np.linspace(0, n, threads + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])
            if b > a]


def _run_sharded(call: Callable, n: int, threads: int, outs):
    """call(lo, hi, *out_slices) over disjoint contiguous ranges.

    Replica streams are self-contained, so the results are identical
    bytes for any thread count; kernels drop the GIL.
    """
    if threads <= 1 or n < 4 * threads:
        call(0, n, *outs)
        return
    with ThreadPoolExecutor(max_workers=threads) as ex:
        futs = [ex.submit(call, lo, hi, *(o[lo:hi] for o in outs))
                for lo, hi in _shard_ranges(n, threads)]
        for f in futs:
            f.result()


def _heights(seed, exp_id, rep0, n, t, k, want_l, threads):
    """(h_flat, h_seed, L) over n replicas of the order-only sampler."""
    k0, k1 = split_key(seed)
    c3n = compose_c3(exp_id, PURPOSE_COUNT)
    c3c = compose_c3(exp_id, PURPOSE_CODES)
    hf = np.empty(n, dtype=np.int64)
    hs = np.empty(n, dtype=np.int64)
    ell = np.empty(n, dtype=np.int64)
    kern = kernels().batch_heights_orderonly

    def call(lo, hi, a, b, c):
        kern(k0, k1, c3n, c3c, rep0 + lo, rep0 + hi,
             float(t) * k, int(k), want_l, a, b, c)

    _run_sharded(call, n, threads, (hf, hs, ell))
    return hf, hs, ell


def _gue(seed, exp_id, rep0, n, k, threads):
    k0, k1 = split_key(seed)
    c3g = compose_c3(exp_id, PURPOSE_GAUSS)
    c3m = compose_c3(exp_id, PURPOSE_GAMMA)
    out = np.empty(n)
    kern = kernels().batch_gue_lambda_max

    def call(lo, hi, o):
        kern(k0, k1, c3g, c3m, rep0 + lo, rep0 + hi, int(k), STURM_TOL, o)

    _run_sharded(call, n, threads, (out,))
    return out


def _brownian(seed, exp_id, rep0, n, t, k, m, threads):
    k0, k1 = split_key(seed)
    c3g = compose_c3(exp_id, PURPOSE_GAUSS)
    out = np.empty(n)
    kern = kernels().batch_brownian_d

    def call(lo, hi, o):
        kern(k0, k1, c3g, rep0 + lo, rep0 + hi, float(t), int(k), int(m), o)

    _run_sharded(call, n, threads, (out,))
    return out


def _ks_record(ks, bound=None) -> dict:
    rec = {"statistic": ks.statistic, "threshold": ks.threshold,
           "n1": ks.n1, "n2": ks.n2}
    rec["passed"] = ks.statistic < bound if bound is not None else ks.passed
    if bound is not None:
        rec["bound"] = bound
    return rec


# ---------------------------------------------------------------------------
# E1: pathwise reversal identity


def _run_e1(params, ctx):
    t = float(params["t"])
    k = int(params["k"])
    n = int(params["replicas"])
    stairs = InitialCondition.table(
        tuple(-(j // 2) for j in range(k)), in_class_i=True)
    gs = {"flat": InitialCondition.flat(),
          "seed": InitialCondition.seed(),
          "stairs": stairs}
    gvecs = {name: g.values_up_to(k) for name, g in gs.items()}
    grev = {name: v[::-1].copy() for name, v in gvecs.items()}
    kern = kernels()
    mism = {name: 0 for name in gs}
    raws = np.empty(n, dtype=np.int64)
    for rep in range(n):
        fld = generate_marks(StreamKey(ctx.seed, 1, rep, 1), t, k)
        _, cols = _ordered_marks(fld, k, t)
        hcols = {name: v.copy() for name, v in gvecs.items()}
        for c in cols:
            ci = int(c)
            for h in hcols.values():
                if ci == 0:
                    h[0] += 1
                else:
                    m = h[ci - 1] if h[ci - 1] > h[ci] else h[ci]
                    h[ci] = m + 1
        rev = reverse_field(fld)
        end_val, _ = kern.dp_column_sweep(
            rev.times, rev.offsets, k, -1.0, t, False, False)
        for name in gs:
            direct = int(hcols[name][k - 1])
            lpp = int(np.max(end_val + grev[name]))
            both_neg = direct < NEG_CUT and lpp < NEG_CUT
            if not (both_neg or direct == lpp):
                mism[name] += 1
        raws[rep] = hcols["flat"][k - 1]
    ctx.samples.bulk("E1", t, k, raws, rescale_height(raws, t, k))
    bad = sum(mism.values())
    metrics = {"replicas": n, "initial_conditions": sorted(gs),
               "mismatches": dict(sorted(mism.items())),
               "match_rate": 1.0 - bad / (3.0 * n)}
    checks = {"exact_match": {"passed": bad == 0, "mismatches": bad,
                              "comparisons": 3 * n}}
    return metrics, checks


# ---------------------------------------------------------------------------
# E2: fixed-k limits (k=1 Gaussian, k=2 GUE corner)


def _run_e2(params, ctx):
    t1 = float(params["t"])
    n1 = int(params["replicas"])
    sig = float(params["significance"])
    hf, _, _ = _heights(ctx.seed, 2, 0, n1, t1, 1, False, ctx.threads)
    z1 = (hf - t1) / math.sqrt(t1)
    ctx.samples.bulk("E2", t1, 1, hf, z1)
    ks1 = ks_one_sample_normal(z1, significance=sig)

    t2 = float(params["t_k2"])
    n2 = int(params["replicas_k2"])
    hf2, _, _ = _heights(ctx.seed, 2, SERIES_BLOCK, n2, t2, 2, False,
                         ctx.threads)
    z2 = (hf2 - t2) / math.sqrt(t2)
    lam = _gue(ctx.seed, 2, 0, n2, 2, ctx.threads)
    ctx.samples.bulk("E2", t2, 2, hf2, z2)
    ctx.samples.bulk("E2/gue", t2, 2, lam, lam)
    ks2 = ks_two_sample(z2, lam, significance=sig)

    metrics = {"k1": {"replicas": n1, "t": t1, "mean": float(z1.mean()),
                      "std": float(z1.std()), "ks": ks1.statistic},
               "k2": {"replicas": n2, "t": t2, "ks": ks2.statistic}}
    checks = {"gaussian_k1": _ks_record(ks1),
              "gue_k2": _ks_record(ks2, bound=float(params["ks_bound_k2"]))}
    return metrics, checks


# ---------------------------------------------------------------------------
# E3: slowly growing columns vs the GUE edge


def _run_e3(params, ctx):
    t = float(params["t"])
    a = float(params["alpha_exponent"])
    k = max(1, int(math.floor(t ** a)))
    n = int(params["replicas"])
    ref_k = int(params["ref_k"])
    hf, _, _ = _heights(ctx.seed, 3, 0, n, t, k, False, ctx.threads)
    z = rescale_height(hf, t, k)
    lam = _gue(ctx.seed, 3, 0, n, k, ctx.threads)
    zg = rescale_gue(lam, k)
    lam_ref = _gue(ctx.seed, 3, SERIES_BLOCK, n, ref_k, ctx.threads)
    zr = rescale_gue(lam_ref, ref_k)
    ctx.samples.bulk("E3", t, k, hf, z)
    ctx.samples.bulk("E3/gue", t, k, lam, zg)
    ctx.samples.bulk("E3/gue-ref", t, ref_k, lam_ref, zr)
    ks = ks_two_sample(z, zg)
    ks_ref = ks_two_sample(z, zr)
    metrics = {"alpha": k, "replicas": n,
               "mean_height_rescaled": float(z.mean()),
               "mean_gue_rescaled": float(zg.mean()),
               "ks_same_k": ks.statistic,
               "ks_vs_large_k_reference": ks_ref.statistic,
               "reference_k": ref_k}
    checks = {"edge_match": _ks_record(ks, bound=float(params["ks_bound"]))}
    return metrics, checks


# ---------------------------------------------------------------------------
# E4: mean expansion at moderate k


def _run_e4(params, ctx):
    t = float(params["t"])
    k = int(params["k"])
    n = int(params["replicas"])
    ref_k = int(params["ref_k"])
    hf, _, _ = _heights(ctx.seed, 4, 0, n, t, k, False, ctx.threads)
    z = rescale_height(hf, t, k)
    lam_ref = _gue(ctx.seed, 4, 0, n, ref_k, ctx.threads)
    zr = rescale_gue(lam_ref, ref_k)
    ctx.samples.bulk("E4", t, k, hf, z)
    ctx.samples.bulk("E4/gue-ref", t, ref_k, lam_ref, zr)
    diff = abs(float(z.mean()) - float(zr.mean()))
    tol = float(params["mean_tol"])
    metrics = {"replicas": n, "mean_height_rescaled": float(z.mean()),
               "mean_reference": float(zr.mean()),
               "abs_difference": diff, "reference_k": ref_k}
    checks = {"mean_window": {"passed": diff <= tol, "abs_difference": diff,
                              "tolerance": tol}}
    return metrics, checks


# ---------------------------------------------------------------------------
# E5: upper-tail deficit (skew of the rescaled height)


def _run_e5(params, ctx):
    t = float(params["t"])
    a = float(params["alpha_exponent"])
    k = max(1, int(math.floor(t ** a)))
    n = int(params["replicas"])
    conf = float(params["confidence"])
    xs = tuple(float(x) for x in params["x_values"])
    hf, _, _ = _heights(ctx.seed, 5, 0, n, t, k, False, ctx.threads)
    z = rescale_height(hf, t, k)
    ctx.samples.bulk("E5", t, k, hf, z)
    tails = tail_estimator(z, xs, confidence=conf)
    metrics = {"alpha": k, "replicas": n, "confidence": conf, "tails": {}}
    checks = {}
    for tp in tails:
        key = f"x={tp.x:g}"
        metrics["tails"][key] = {
            "p_upper": tp.p_upper, "p_lower": tp.p_lower,
            "upper_ci": [tp.upper_lo, tp.upper_hi],
            "lower_ci": [tp.lower_lo, tp.lower_hi]}
        checks[f"tail_skew_{key}"] = {
            "passed": (tp.p_upper < tp.p_lower
                       and tp.upper_hi < tp.lower_lo),
            "p_upper": tp.p_upper, "p_lower": tp.p_lower,
            "upper_hi": tp.upper_hi, "lower_lo": tp.lower_lo}
    return metrics, checks


# ---------------------------------------------------------------------------
# E6: geodesic deviation scaling


def _dev_stats(jt, t: float, k: int, fractions):
    """Sup and fixed-fraction deviations of a 1->... geodesic from the
    straight line u = (k/t) s, matching the per-path reference
    implementation exactly (piecewise-constant, left-continuous)."""
    nj = jt.shape[0]
    slope = k / t
    sup = 1.0                                     # s = 0: |1 - 0|
    if nj:
        cols = np.arange(1, nj + 1, dtype=np.float64)
        line = slope * jt
        sup = max(sup,
                  float(np.max(np.abs(cols - line))),
                  float(np.max(np.abs(cols + 1.0 - line))))
    sup = max(sup, float(abs((nj + 1) - k)))      # s = t
    devs = []
    for f in fractions:
        col = 1 + int(np.searchsorted(jt, f * t, side="left"))
        devs.append(abs(col - k * f))
    return sup, devs


def _run_e6(params, ctx):
    k_list = tuple(int(v) for v in params["k_list"])
    tf = float(params["t_factor"])
    reps = int(params["replicas"])
    initial = params["initial"]
    gammas = tuple(float(g) for g in params["gamma_grid"])
    fracs = tuple(float(f) for f in params["s_fractions"])
    kern = kernels()
    k0, k1 = split_key(ctx.seed)
    c3m = compose_c3(6, PURPOSE_MARKS)
    points = []
    by_policy = {"prefer-jump": {}, "prefer-stay": {}}
    contain = {}
    gap_violations = 0
    geodesic_failures = 0
    per_k = {}
    for ki, k in enumerate(k_list):
        t = tf * k ** 3
        rows = []
        sups = {"prefer-jump": [], "prefer-stay": []}
        nin = {gm: 0 for gm in gammas}
        gfs_max = 0
        glf_max = 0
        for rep in range(reps):
            c2 = ki * reps + rep
            times, offs = kern.gen_field_csr(
                k0, k1, c3m, c2, t, k, 1)
            end_val, w = kern.dp_column_sweep_traced(times, offs, k)
            hf = int(end_val.max())
            hs = int(end_val[k - 1])
            ell = int(kern.aux_chain_csr(times, offs, k))
            gap_fs = hf - hs
            gap_lf = ell - hf
            if hs < NEG_CUT or gap_fs < 0 or gap_lf < 0:
                gap_violations += 1
            gfs_max = max(gfs_max, gap_fs)
            glf_max = max(glf_max, gap_lf)
            if initial == "seed":
                ends = {"prefer-jump": k - 1, "prefer-stay": k - 1}
            else:
                rev_arg = int(np.argmax(end_val[::-1]))
                ends = {"prefer-jump": k - 1 - rev_arg,
                        "prefer-stay": int(np.argmax(end_val))}
            prow = {}
            for policy, prefer_jump in (("prefer-jump", True),
                                        ("prefer-stay", False)):
                e = ends[policy]
                jt, nj, ok = kern.backtrack_geodesic(
                    times, offs, w, e, end_val[e], prefer_jump)
                if not ok:
                    geodesic_failures += 1
                    continue
                sup, devs = _dev_stats(jt[:nj], t, k, fracs)
                prow[policy] = (sup, devs)
            payload = (hs, gap_fs, gap_lf, prow)
            rows.append((rep, payload))
            del times, offs, end_val, w, jt
        ordered = aggregate(rows, reps)
        raws = np.empty(reps, dtype=np.int64)
        for rep, (hs, gap_fs, gap_lf, prow) in enumerate(ordered):
            raws[rep] = hs
            vals = []
            for policy, (sup, devs) in sorted(prow.items()):
                ctx.geodesics.row("E6", rep, float(t), k, policy,
                                  float(sup), *map(float, devs))
                sups[policy].append(sup)
                vals.append(sup)
                if policy == "prefer-jump":
                    for gm in gammas:
                        if sup <= k ** gm:
                            nin[gm] += 1
            if vals:
                # one point per replica (policies share the field, so
                # averaging keeps the bootstrap strata independent)
                points.append((float(k), float(np.mean(vals))))
        ctx.samples.bulk("E6", t, k, raws, rescale_height(raws, t, k))
        for policy in sups:
            if sups[policy]:
                by_policy[policy][f"k={k}"] = float(np.mean(sups[policy]))
        contain[f"k={k}"] = {f"gamma={gm:g}": nin[gm] / reps
                             for gm in gammas}
        per_k[f"k={k}"] = {"t": t, "max_gap_fs": gfs_max,
                           "max_gap_lf": glf_max}
    fit = loglog_fit(points, n_bootstrap=int(params["bootstrap"]),
                     ci_level=float(params["ci_level"]))
    lo, hi = float(params["slope_lo"]), float(params["slope_hi"])
    metrics = {"replicas": reps, "k_list": list(k_list),
               "initial": initial, "slope": fit.slope,
               "slope_ci": [fit.ci_lo, fit.ci_hi],
               "mean_sup_by_policy": by_policy,
               "containment_rate": contain, "per_k": per_k}
    checks = {
        "slope_band": {"passed": fit.ci_lo <= hi and fit.ci_hi >= lo,
                       "slope": fit.slope, "ci": [fit.ci_lo, fit.ci_hi],
                       "band": [lo, hi]},
        "gaps_nonneg": {"passed": gap_violations == 0,
                        "violations": gap_violations},
        "geodesics_found": {"passed": geodesic_failures == 0,
                            "failures": geodesic_failures}}
    return metrics, checks


# ---------------------------------------------------------------------------
# E7: coupling gaps, tail bound, L vs Brownian distance, curvature grid


def _run_e7(params, ctx):
    checks = {}
    metrics = {}
    # (a) coupled gaps
    tg = float(params["t_gaps"])
    kg = int(params["k_gaps"])
    ng = int(params["n_gaps"])
    hf, hs, ell = _heights(ctx.seed, 7, 0, ng, tg, kg, True, ctx.threads)
    gap_fs = hf - hs
    gap_lf = ell - hf
    violations = int(np.sum((hs < NEG_CUT) | (gap_fs < 0) | (gap_lf < 0)))
    denom = kg * math.log(tg)
    ratio = gap_lf / denom
    ctx.samples.bulk("E7/gap-lf", tg, kg, gap_lf, ratio)
    ctx.samples.bulk("E7/gap-fs", tg, kg, gap_fs,
                     gap_fs.astype(np.float64))
    metrics["gaps"] = {"replicas": ng, "t": tg, "k": kg,
                       "mean_gap_fs": float(gap_fs.mean()),
                       "mean_gap_lf": float(gap_lf.mean()),
                       "mean_ratio": float(ratio.mean()),
                       "max_gap_lf": int(gap_lf.max())}
    checks["gaps_nonneg"] = {"passed": violations == 0,
                             "violations": violations}
    bound_ratio = float(params["gap_ratio_bound"])
    checks["gap_growth"] = {"passed": float(ratio.mean()) < bound_ratio,
                            "mean_ratio": float(ratio.mean()),
                            "bound": bound_ratio}
    # (b) tail bound on L
    tt = float(params["t_tail"])
    kt = int(params["k_tail"])
    xt = int(params["x_tail"])
    nt = int(params["n_tail"])
    cpre = float(params["c_prefactor"])
    _, _, ell_t = _heights(ctx.seed, 7, SERIES_BLOCK, nt, tt, kt, True,
                           ctx.threads)
    count = int(np.sum(ell_t >= xt))
    bound = lemma3_bound(tt, kt, xt, cpre)
    phat = count / nt
    wlo = wilson_interval(count, nt)[0] if count else 0.0
    ctx.samples.bulk("E7/tail", tt, kt, ell_t,
                     (ell_t - tt) / math.sqrt(tt), rep0=0)
    metrics["tail"] = {"replicas": nt, "x": xt, "exceedances": count,
                       "p_hat": phat, "bound": bound}
    checks["tail_bound"] = {"passed": phat <= bound or wlo <= bound,
                            "exceedances": count, "p_hat": phat,
                            "bound": bound}
    # (c) auxiliary process vs Brownian functional
    tl = float(params["t_lvd"])
    kl = int(params["k_lvd"])
    nl = int(params["n_lvd"])
    gm_grid = int(params["grid_m"])
    _, _, ell_l = _heights(ctx.seed, 7, 2 * SERIES_BLOCK, nl, tl, kl, True,
                           ctx.threads)
    zl = (ell_l - tl) / math.sqrt(tl)
    d = _brownian(ctx.seed, 7, 0, nl, tl, kl, gm_grid, ctx.threads)
    zd = d / math.sqrt(tl)
    ctx.samples.bulk("E7/lvd-l", tl, kl, ell_l, zl)
    ctx.samples.bulk("E7/lvd-d", tl, kl, d, zd)
    ks = ks_two_sample(zl, zd)
    metrics["l_vs_d"] = {"replicas": nl, "t": tl, "k": kl,
                         "grid_m": gm_grid, "ks": ks.statistic}
    checks["l_matches_d"] = _ks_record(
        ks, bound=float(params["ks_bound_lvd"]))
    # (d) curvature inequality grid
    ts = tuple(float(v) for v in params["parab_ts"])
    alphas = tuple(int(v) for v in params["parab_alphas"])
    gammas = tuple(float(v) for v in params["gamma_grid"])
    n_s = int(params["n_s"])
    all_hold = []
    counts = {}
    for t in ts:
        ok = 0
        total = 0
        for alpha in alphas:
            for gm in gammas:
                smax = t * (1.0 - alpha ** (gm - 1.0))
                for s in np.linspace(0.0, smax, n_s):
                    total += 1
                    if parabola_inequality(t, alpha, gm, float(s)).holds:
                        ok += 1
        all_hold.append(ok == total)
        counts[_g(t)] = {"holds": ok, "total": total}
    threshold = None
    for i, t in enumerate(ts):
        if all(all_hold[i:]):
            threshold = t
            break
    metrics["parabola"] = {"counts": counts, "t_threshold": threshold}
    checks["parabola_grid"] = {"passed": threshold is not None,
                               "t_threshold": threshold}
    return metrics, checks


# ---------------------------------------------------------------------------
# E8: Brownian functional limit and diffusive scaling


def _run_e8(params, ctx):
    kgue = int(params["k_gue"])
    m = int(params["grid_m"])
    n = int(params["replicas"])
    d = _brownian(ctx.seed, 8, 0, n, 1.0, kgue, m, ctx.threads)
    lam = _gue(ctx.seed, 8, 0, n, kgue, ctx.threads)
    ctx.samples.bulk("E8/brownian", 1.0, kgue, d, d)
    ctx.samples.bulk("E8/gue", 1.0, kgue, lam, lam)
    ks1 = ks_two_sample(d, lam)

    ts = float(params["t_scale"])
    ks_ = int(params["k_scale"])
    ms = int(params["m_scale"])
    ns = int(params["n_scale"])
    da = _brownian(ctx.seed, 8, SERIES_BLOCK, ns, ts, ks_, ms, ctx.threads)
    db = math.sqrt(ts) * _brownian(ctx.seed, 8, 2 * SERIES_BLOCK, ns, 1.0,
                                   ks_, ms, ctx.threads)
    ctx.samples.bulk("E8/scale-t", ts, ks_, da, da / math.sqrt(ts))
    ctx.samples.bulk("E8/scale-1", 1.0, ks_, db, db / math.sqrt(ts))
    ks2 = ks_two_sample(da, db)

    metrics = {"gue": {"replicas": n, "k": kgue, "grid_m": m,
                       "ks": ks1.statistic,
                       "mean_d": float(d.mean()),
                       "mean_lambda": float(lam.mean())},
               "scaling": {"replicas": ns, "t": ts, "k": ks_,
                           "grid_m": ms, "ks": ks2.statistic}}
    checks = {"gue_limit": _ks_record(ks1,
                                      bound=float(params["ks_bound_gue"])),
              "diffusive_scaling": _ks_record(
                  ks2, bound=float(params["ks_bound_scale"]))}
    return metrics, checks


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class ExperimentDef:
    name: str
    title: str
    presets: dict
    runner: Callable


_REGISTRY = {}


def _register(name, title, runner, desk, full):
    _REGISTRY[name] = ExperimentDef(
        name=name, title=title, presets={"desk": desk, "full": full},
        runner=runner)


_register(
    "E1", "pathwise reversal identity (direct heights == reflected DP)",
    _run_e1,
    desk=dict(t=20.0, k=8, replicas=10000),
    full=dict(t=50.0, k=12, replicas=100000))

_register(
    "E2", "fixed-k limits: k=1 Gaussian, k=2 eigenvalue corner",
    _run_e2,
    desk=dict(t=1.0e4, replicas=100000, significance=1.0e-3,
              t_k2=400.0, replicas_k2=20000, ks_bound_k2=0.03),
    full=dict(t=1.0e6, replicas=100000, significance=1.0e-3,
              t_k2=1600.0, replicas_k2=50000, ks_bound_k2=0.02))

_register(
    "E3", "slow-growth column curve vs the spectral edge",
    _run_e3,
    desk=dict(t=1.0e4, alpha_exponent=0.25, replicas=10000,
              ref_k=400, ks_bound=0.05),
    full=dict(t=1.0e6, alpha_exponent=0.25, replicas=20000,
              ref_k=800, ks_bound=0.04))

_register(
    "E4", "mean of the rescaled height vs large-k edge reference",
    _run_e4,
    desk=dict(t=1.0e4, k=20, replicas=10000, ref_k=400, mean_tol=0.35),
    full=dict(t=1.0e5, k=30, replicas=20000, ref_k=800, mean_tol=0.25))

_register(
    "E5", "one-sided tail deficit of the rescaled height",
    _run_e5,
    desk=dict(t=1.0e4, alpha_exponent=0.33, replicas=1000000,
              x_values=(2.0, 2.5), confidence=0.99),
    full=dict(t=1.0e4, alpha_exponent=0.33, replicas=4000000,
              x_values=(2.0, 2.5, 3.0), confidence=0.99))

_register(
    "E6", "transversal fluctuation exponent of geodesics",
    _run_e6,
    desk=dict(k_list=(8, 16, 32, 64), t_factor=4.0, replicas=200,
              initial="seed", gamma_grid=(0.7, 0.8, 0.9),
              s_fractions=(0.25, 0.5, 0.75), bootstrap=1000,
              ci_level=0.95, slope_lo=0.55, slope_hi=0.80),
    full=dict(k_list=(8, 16, 32, 64, 128), t_factor=4.0, replicas=400,
              initial="seed", gamma_grid=(0.7, 0.8, 0.9),
              s_fractions=(0.25, 0.5, 0.75), bootstrap=2000,
              ci_level=0.95, slope_lo=0.55, slope_hi=0.80))

_register(
    "E7", "coupling gaps, chain tail bound, Brownian distance, curvature",
    _run_e7,
    desk=dict(t_gaps=2000.0, k_gaps=20, n_gaps=10000, gap_ratio_bound=5.0,
              t_tail=10.0, k_tail=10, x_tail=100, n_tail=1000000,
              c_prefactor=10.0,
              t_lvd=5000.0, k_lvd=5, n_lvd=20000, grid_m=10000,
              ks_bound_lvd=0.03,
              parab_ts=(1.0e4, 1.0e6), parab_alphas=(100, 1000),
              gamma_grid=(0.7, 0.8, 0.9), n_s=100),
    full=dict(t_gaps=20000.0, k_gaps=40, n_gaps=20000, gap_ratio_bound=5.0,
              t_tail=10.0, k_tail=10, x_tail=100, n_tail=4000000,
              c_prefactor=10.0,
              t_lvd=20000.0, k_lvd=5, n_lvd=50000, grid_m=20000,
              ks_bound_lvd=0.02,
              parab_ts=(1.0e4, 1.0e6, 1.0e8), parab_alphas=(100, 1000),
              gamma_grid=(0.7, 0.8, 0.9), n_s=100))

_register(
    "E8", "Brownian functional: spectral law and diffusive scaling",
    _run_e8,
    desk=dict(k_gue=3, grid_m=100000, replicas=20000, ks_bound_gue=0.02,
              t_scale=4.0, k_scale=2, m_scale=10000, n_scale=20000,
              ks_bound_scale=0.02),
    full=dict(k_gue=3, grid_m=200000, replicas=50000, ks_bound_gue=0.015,
              t_scale=4.0, k_scale=2, m_scale=20000, n_scale=50000,
              ks_bound_scale=0.015))


def list_experiments():
    """(name, title, desk-preset summary) for every registered entry."""
    rows = []
    for name in sorted(_REGISTRY):
        exp = _REGISTRY[name]
        desk = exp.presets["desk"]
        summary = ", ".join(f"{k}={v}" for k, v in sorted(desk.items()))
        rows.append((name, exp.title, summary))
    return rows


def resolve_params(config: ExperimentConfig) -> dict:
    """Preset table merged with the config's explicit overrides."""
    exp = _REGISTRY[config.experiment]
    params = dict(exp.presets[config.preset])
    for key, val in config.overrides().items():
        if key not in params:
            raise ConfigError(
                f"{config.experiment} takes no parameter {key!r}; "
                f"known: {', '.join(sorted(params))}")
        params[key] = val
    return params


def run_experiment(config: ExperimentConfig) -> RunManifest:
    """Execute one experiment and write samples/geodesics/summary files.

    Output bytes depend only on (experiment, preset, parameter
    overrides, seed, backend) -- never on the thread count.
    """
    exp = _REGISTRY[config.experiment]
    params = resolve_params(config)
    outdir = Path(config.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    ctx = _RunContext(outdir, config.seed, config.threads)
    t0 = time.perf_counter()
    try:
        metrics, checks = exp.runner(params, ctx)
    finally:
        files = ctx.close()
    wall = time.perf_counter() - t0
    echo = {"experiment": config.experiment, "preset": config.preset,
            "seed": config.seed, "threads": config.threads,
            "out_dir": str(config.out_dir), "backend": active_backend()}
    for key, val in params.items():
        echo[key] = list(val) if isinstance(val, tuple) else val
    manifest = RunManifest(
        experiment=config.experiment, preset=config.preset, config=echo,
        schema_version=SCHEMA_VERSION, code_version=CODE_VERSION,
        wall_clock_s=wall, metrics=metrics, checks=checks, files=files)
    (outdir / "summary.json").write_text(manifest.to_json() + "\n",
                                         encoding="utf-8")
    return manifest
