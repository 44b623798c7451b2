"""NumPy backend: vectorized (or plain-Python scalar) kernel twins.

Every function here matches the signature and the Philox word-consumption
pattern of its ``_kernels_nb`` twin.  Integer pipelines (mark fields,
column DP, Poisson counts, heights) are bit-identical across backends
because their scalar math goes through the same libm; Gaussian pipelines
use vectorized numpy transcendentals and may differ in the last ulp.
"""
from __future__ import annotations

import math

import numpy as np

from ._philox import philox4_scalar, u32_words, u64_words, uniforms53

NEG = np.int64(-(1 << 60))
NEG_CUT = np.int64(-(1 << 59))

_TWO_PI = 2.0 * math.pi
_U53 = 2.0 ** -53


def _u53_int(word: int) -> float:
    return ((word >> 11) + 0.5) * _U53


def philox_u32s(k0, k1, c3, c2, c1, block0, n):
    return u32_words(k0, k1, c3, c2, c1, block0, n)


def philox_u64s(k0, k1, c3, c2, c1, block0, n):
    return u64_words(k0, k1, c3, c2, c1, block0, n)


def uniforms(k0, k1, c3, c2, c1, block0, n):
    return uniforms53(k0, k1, c3, c2, c1, block0, n)


def poisson_draw(k0, k1, c3, c2, lam):
    """Scalar Poisson draw; word-for-word the same stream walk as numba."""
    key = (int(k0), int(k1))
    c2i = int(c2)
    c3i = int(c3)
    if lam < 10.0:
        target = math.exp(-lam)
        prod = 1.0
        n = -1
        widx = 0
        w_hi = 0
        while prod > target:
            if widx % 2 == 0:
                x0, x1, x2, x3 = philox4_scalar(
                    (widx // 2, 0, c2i, c3i), key)
                w = x0 | (x1 << 32)
                w_hi = x2 | (x3 << 32)
            else:
                w = w_hi
            prod *= _u53_int(w)
            n += 1
            widx += 1
        return n
    slam = math.sqrt(lam)
    loglam = math.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    blk = 0
    while True:
        x0, x1, x2, x3 = philox4_scalar((blk, 0, c2i, c3i), key)
        blk += 1
        u = _u53_int(x0 | (x1 << 32)) - 0.5
        v = _u53_int(x2 | (x3 << 32))
        us = 0.5 - abs(u)
        fk = math.floor((2.0 * a / us + b) * u + lam + 0.43)
        if us >= 0.07 and v <= vr:
            return int(fk)
        if fk < 0.0 or (us < 0.013 and v > us):
            continue
        if (math.log(v) + math.log(invalpha) - math.log(a / (us * us) + b)
                <= -lam + fk * loglam - math.lgamma(fk + 1.0)):
            return int(fk)


def batch_heights_orderonly(k0, k1, c3_count, c3_codes, rep_lo, rep_hi,
                            lam, k, want_l, out_hf, out_hs, out_l):
    neg = int(NEG)
    for rep in range(rep_lo, rep_hi):
        n = poisson_draw(k0, k1, c3_count, rep, lam)
        if k == 1:
            out_hf[rep - rep_lo] = n
            out_hs[rep - rep_lo] = n
            if want_l:
                out_l[rep - rep_lo] = n
            continue
        codes = u32_words(k0, k1, c3_codes, rep, 0, 0, n)
        cols = ((codes.astype(np.uint64) * np.uint64(k))
                >> np.uint64(32)).astype(np.int64)
        best = [neg] * k
        best[0] = 0
        chain = [0] * k
        for col in cols:
            c = int(col)
            v = best[c] + 1
            best[c] = v
            if c + 1 < k and best[c + 1] < v:
                best[c + 1] = v
            if want_l:
                q = chain[c] + 1
                j = c
                while j < k and chain[j] < q:
                    chain[j] = q
                    j += 1
        out_hf[rep - rep_lo] = max(best)
        out_hs[rep - rep_lo] = best[k - 1]
        if want_l:
            out_l[rep - rep_lo] = chain[k - 1]


def aux_chain_csr(times, offs, ncols):
    """Longest strictly-increasing-time, nondecreasing-column chain over
    the whole CSR field.  Equal-time groups are queried before any of
    them updates, so simultaneous marks never chain on one another."""
    k = ncols
    n = times.shape[0]
    if n == 0:
        return 0
    cols = np.repeat(np.arange(k, dtype=np.int64), np.diff(offs))
    order = np.lexsort((cols, times))
    st = times[order]
    sc = cols[order]
    chain = [0] * k
    i = 0
    while i < n:
        j = i + 1
        while j < n and st[j] == st[i]:
            j += 1
        qs = [chain[int(sc[g])] + 1 for g in range(i, j)]
        for g in range(i, j):
            q = qs[g - i]
            c = int(sc[g])
            while c < k and chain[c] < q:
                chain[c] = q
                c += 1
        i = j
    return chain[k - 1]


def gen_field_csr(k0, k1, c3, c2, t, k, col_base):
    """Scalar-math twin of the numba generator (bit-identical fields)."""
    key = (int(k0), int(k1))
    c2i = int(c2)
    c3i = int(c3)
    chunks = []
    offs = np.empty(k + 1, dtype=np.int64)
    offs[0] = 0
    total = 0
    for col in range(k):
        c1i = int(col_base) + col
        out = []
        s = 0.0
        widx = 0
        w_hi = 0
        while True:
            if widx % 2 == 0:
                x0, x1, x2, x3 = philox4_scalar(
                    (widx // 2, c1i, c2i, c3i), key)
                w = x0 | (x1 << 32)
                w_hi = x2 | (x3 << 32)
            else:
                w = w_hi
            widx += 1
            s += -math.log(_u53_int(w))
            if s > t:
                break
            if out and s <= out[-1]:
                s = math.nextafter(out[-1], math.inf)
                if s > t:
                    break
            out.append(s)
        chunks.append(out)
        total += len(out)
        offs[col + 1] = total
    times = np.empty(total, dtype=np.float64)
    for col in range(k):
        times[offs[col]:offs[col + 1]] = chunks[col]
    return times, offs


def gen_column_times(k0, k1, c3, c2, c1, t):
    times, _ = gen_field_csr(k0, k1, c3, c2, t, 1, c1)
    return times


def _sweep_column(seg, inj_e, inj_v, base):
    """One column of the sweep: mark values, final run, exact-end value.

    An injection (e, v) contributes v - c(e) to marks at times >= e, where
    c(e) counts this column's windowed marks strictly before e (the chain
    keeps collecting marks of the previous column until it jumps).
    """
    cnt = seg.shape[0]
    if inj_e.shape[0]:
        cj = np.searchsorted(seg, inj_e, side="left")
        pref = np.maximum.accumulate(inj_v - cj)
        jj = np.searchsorted(inj_e, seg, side="right") - 1
        run = np.where(jj >= 0, pref[np.maximum(jj, 0)], NEG)
        run = np.maximum(run, base)
        tail = max(pref[-1], base)
    else:
        run = np.full(cnt, base, dtype=np.int64)
        tail = base
    w = np.arange(1, cnt + 1, dtype=np.int64) + run
    return w, np.int64(cnt + tail), (w[-1] if cnt else NEG)


def dp_column_sweep(times, offs, ncols, lo_cut, hi_cut, include_hi,
                    free_start):
    end_val = np.empty(ncols, dtype=np.int64)
    end_exact = np.empty(ncols, dtype=np.int64)
    inj_e = np.empty(0, dtype=np.float64)
    inj_v = np.empty(0, dtype=np.int64)
    for r in range(ncols):
        seg = times[offs[r]:offs[r + 1]]
        wa = np.searchsorted(seg, lo_cut, side="right")
        wb = np.searchsorted(seg, hi_cut,
                             side="right" if include_hi else "left")
        seg = seg[wa:wb]
        base = np.int64(0) if (r == 0 or free_start) else NEG
        w, end_val[r], end_exact[r] = _sweep_column(seg, inj_e, inj_v, base)
        inj_e = seg
        inj_v = w
    return end_val, end_exact


def dp_column_sweep_traced(times, offs, ncols):
    n_total = int(offs[ncols])
    w = np.empty(n_total, dtype=np.int64)
    end_val = np.empty(ncols, dtype=np.int64)
    inj_e = np.empty(0, dtype=np.float64)
    inj_v = np.empty(0, dtype=np.int64)
    for r in range(ncols):
        a, b = int(offs[r]), int(offs[r + 1])
        seg = times[a:b]
        base = np.int64(0) if r == 0 else NEG
        wcol, end_val[r], _ = _sweep_column(seg, inj_e, inj_v, base)
        w[a:b] = wcol
        inj_e = seg
        inj_v = wcol
    return end_val, w


def backtrack_geodesic(times, offs, w, end_col, target, prefer_jump):
    jt = np.empty(end_col if end_col > 0 else 1, dtype=np.float64)
    nj = 0
    if target <= 0:
        return jt, 0, bool(target == 0 and end_col == 0)
    r = int(end_col)
    a, b = int(offs[r]), int(offs[r + 1])
    seg = w[a:b]
    idx = -1
    if b > a:
        j = int(np.searchsorted(seg, target))
        if j < b - a and seg[j] == target:
            idx = a + j
    late = -1
    if r > 0:
        pa, pb = int(offs[r - 1]), int(offs[r])
        segp = w[pa:pb]
        j = int(np.searchsorted(segp, target))
        if j < pb - pa and segp[j] == target:
            cand = pa + j
            if b == a or times[cand] > times[b - 1]:
                late = cand
    if idx < 0 and late < 0:
        return jt, 0, False
    use_late = late >= 0 and (idx < 0 or not prefer_jump)
    if use_late:
        jt[nj] = times[late]
        nj += 1
        r -= 1
        idx = late
    v = int(target)
    while v > 1:
        stay = -1
        if idx > offs[r] and w[idx - 1] == v - 1:
            stay = idx - 1
        jump = -1
        if r > 0:
            pa, pb = int(offs[r - 1]), int(offs[r])
            segp = w[pa:pb]
            j = int(np.searchsorted(segp, v - 1))
            if j < pb - pa and segp[j] == v - 1:
                cand = pa + j
                if times[cand] <= times[idx]:
                    jump = cand
        if jump < 0 and stay < 0:
            return jt, 0, False
        # backward walk: staying longer means entering this column at a
        # lower value, i.e. at an earlier forward time (see numba twin)
        take_jump = jump >= 0 and (stay < 0 or not prefer_jump)
        if take_jump:
            jt[nj] = times[jump]
            nj += 1
            r -= 1
            idx = jump
        else:
            idx = stay
        v -= 1
    if r != 0:
        return jt, 0, False
    return jt[:nj][::-1].copy(), nj, True


def _normals_grid(k0, k1, c3, reps, c1, count):
    """count Box-Muller normals per replica row, matching scalar pairing."""
    pairs = (count + 1) // 2
    nw = 2 * pairs
    rows = len(reps)
    wgrid = np.empty((rows, nw), dtype=np.uint64)
    for i, rep in enumerate(reps):
        wgrid[i] = u64_words(k0, k1, c3, rep, c1, 0, nw)
    u1 = ((wgrid[:, 0::2] >> np.uint64(11)).astype(np.float64) + 0.5) * _U53
    u2 = ((wgrid[:, 1::2] >> np.uint64(11)).astype(np.float64) + 0.5) * _U53
    rr = np.sqrt(-2.0 * np.log(u1))
    z = np.empty((rows, nw), dtype=np.float64)
    z[:, 0::2] = rr * np.cos(_TWO_PI * u2)
    z[:, 1::2] = rr * np.sin(_TWO_PI * u2)
    return z[:, :count]


def batch_brownian_d(k0, k1, c3, rep_lo, rep_hi, t, k, m, out):
    sig = math.sqrt(t / m)
    chunk = max(1, int(4.0e6 / (m + 1)))
    for lo in range(rep_lo, rep_hi, chunk):
        hi = min(lo + chunk, rep_hi)
        reps = list(range(lo, hi))
        rows = len(reps)
        prev = np.full((rows, m + 1), -np.inf)
        prev[:, 0] = 0.0
        bpath = np.empty((rows, m + 1))
        for col in range(1, k + 1):
            z = _normals_grid(k0, k1, c3, reps, col, m)
            bpath[:, 0] = 0.0
            np.cumsum(sig * z, axis=1, out=bpath[:, 1:])
            prev = bpath + np.maximum.accumulate(prev - bpath, axis=1)
        out[lo - rep_lo:hi - rep_lo] = prev[:, m]


def sturm_lambda_max(d, e2, tol):
    out = np.empty(1)
    _sturm_max_rows(d[None, :], e2[None, :] if d.shape[0] > 1 else
                    np.empty((1, 0)), tol, out)
    return float(out[0])


def _sturm_max_rows(d, e2, tol, out):
    rows, k = d.shape
    if k == 1:
        out[:] = d[:, 0]
        return
    e = np.sqrt(e2)
    rad = np.zeros_like(d)
    rad[:, :-1] += e
    rad[:, 1:] += e
    lo = (d - rad).min(axis=1)
    hi = (d + rad).max(axis=1)
    while True:
        gap = hi - lo
        if not np.any(gap > tol):
            break
        mid = 0.5 * (lo + hi)
        q = d[:, 0] - mid
        cnt = (q < 0.0).astype(np.int64)
        for i in range(1, k):
            q = np.where(q == 0.0, -1e-307, q)
            q = d[:, i] - mid - e2[:, i - 1] / q
            cnt += q < 0.0
        all_below = cnt >= k
        hi = np.where(all_below, mid, hi)
        lo = np.where(all_below, lo, mid)
    out[:] = 0.5 * (lo + hi)


def batch_gue_lambda_max(k0, k1, c3_gauss, c3_gamma, rep_lo, rep_hi, k,
                         tol, out):
    nexp = k * (k - 1) // 2
    chunk = max(1, int(8.0e6 / (nexp + 2 * k + 1)))
    lens = np.arange(k - 1, 0, -1)
    bounds = np.concatenate(([0], np.cumsum(lens)))[:-1].astype(np.int64)
    for lo in range(rep_lo, rep_hi, chunk):
        hi = min(lo + chunk, rep_hi)
        reps = list(range(lo, hi))
        rows = len(reps)
        d = _normals_grid(k0, k1, c3_gauss, reps, 0, k)
        if k > 1:
            wgrid = np.empty((rows, nexp), dtype=np.uint64)
            for i, rep in enumerate(reps):
                wgrid[i] = u64_words(k0, k1, c3_gamma, rep, 0, 0, nexp)
            expo = -np.log(
                ((wgrid >> np.uint64(11)).astype(np.float64) + 0.5) * _U53)
            e2 = np.add.reduceat(expo, bounds, axis=1)
        else:
            e2 = np.empty((rows, 0))
        _sturm_max_rows(d, e2, tol, out[lo - rep_lo:hi - rep_lo])
