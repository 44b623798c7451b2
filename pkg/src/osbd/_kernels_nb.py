"""Numba backend: scalar Philox + jitted Monte Carlo / DP kernels.

Stream addressing, word order, and algorithm structure mirror
``_kernels_np`` exactly; integer outputs are bit-identical across the two
backends for fixed inputs, float pipelines up to libm ulp differences.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from ._philox import (PURPOSE_CODES, PURPOSE_COUNT, PURPOSE_GAMMA,
                      PURPOSE_GAUSS, PURPOSE_MARKS)

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_SH32 = np.uint64(32)
_SH11 = np.uint64(11)
_U53 = 2.0 ** -53

NEG = np.int64(-(1 << 60))        # integer -inf sentinel
NEG_CUT = np.int64(-(1 << 59))    # values below this are "minus infinity"

TWO_PI = 2.0 * math.pi


@njit(cache=True, inline="always")
def _philox_block(c0, c1, c2, c3, k0, k1):
    x0 = c0 & _MASK32
    x1 = c1 & _MASK32
    x2 = c2 & _MASK32
    x3 = c3 & _MASK32
    kk0 = k0 & _MASK32
    kk1 = k1 & _MASK32
    for rnd in range(10):
        p0 = _M0 * x0
        p1 = _M1 * x2
        hi0 = p0 >> _SH32
        lo0 = p0 & _MASK32
        hi1 = p1 >> _SH32
        lo1 = p1 & _MASK32
        x0 = hi1 ^ x1 ^ kk0
        x1 = lo1
        x2 = hi0 ^ x3 ^ kk1
        x3 = lo0
        if rnd < 9:
            kk0 = (kk0 + _W0) & _MASK32
            kk1 = (kk1 + _W1) & _MASK32
    return x0, x1, x2, x3


@njit(cache=True, inline="always")
def _u53(word):
    return (np.float64(word >> _SH11) + 0.5) * _U53


@njit(cache=True)
def philox_u32s(k0, k1, c3, c2, c1, block0, n):
    out = np.empty(n, dtype=np.uint32)
    c1u = np.uint64(c1)
    c2u = np.uint64(c2)
    c3u = np.uint64(c3)
    k0u = np.uint64(k0)
    k1u = np.uint64(k1)
    i = 0
    blk = np.uint64(block0)
    while i < n:
        x0, x1, x2, x3 = _philox_block(blk, c1u, c2u, c3u, k0u, k1u)
        out[i] = np.uint32(x0)
        if i + 1 < n:
            out[i + 1] = np.uint32(x1)
        if i + 2 < n:
            out[i + 2] = np.uint32(x2)
        if i + 3 < n:
            out[i + 3] = np.uint32(x3)
        i += 4
        blk = (blk + np.uint64(1)) & _MASK32
    return out


@njit(cache=True)
def philox_u64s(k0, k1, c3, c2, c1, block0, n):
    out = np.empty(n, dtype=np.uint64)
    c1u = np.uint64(c1)
    c2u = np.uint64(c2)
    c3u = np.uint64(c3)
    k0u = np.uint64(k0)
    k1u = np.uint64(k1)
    i = 0
    blk = np.uint64(block0)
    while i < n:
        x0, x1, x2, x3 = _philox_block(blk, c1u, c2u, c3u, k0u, k1u)
        out[i] = x0 | (x1 << _SH32)
        if i + 1 < n:
            out[i + 1] = x2 | (x3 << _SH32)
        i += 2
        blk = (blk + np.uint64(1)) & _MASK32
    return out


@njit(cache=True)
def uniforms(k0, k1, c3, c2, c1, block0, n):
    words = philox_u64s(k0, k1, c3, c2, c1, block0, n)
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = _u53(words[i])
    return out


# ---------------------------------------------------------------------------
# Poisson counts (Hörmann PTRS for lambda >= 10, product method below).
# One rejection round of PTRS consumes exactly one Philox block (two words).

@njit(cache=True)
def poisson_draw(k0, k1, c3, c2, lam):
    c1u = np.uint64(0)
    c2u = np.uint64(c2)
    c3u = np.uint64(c3)
    k0u = np.uint64(k0)
    k1u = np.uint64(k1)
    if lam < 10.0:
        # product-of-uniforms; one word per step
        target = math.exp(-lam)
        prod = 1.0
        n = -1
        widx = 0
        w_hi = np.uint64(0)
        while prod > target:
            if widx % 2 == 0:
                x0, x1, x2, x3 = _philox_block(
                    np.uint64(widx // 2), c1u, c2u, c3u, k0u, k1u)
                w = x0 | (x1 << _SH32)
                w_hi = x2 | (x3 << _SH32)
            else:
                w = w_hi
            prod *= _u53(w)
            n += 1
            widx += 1
        return np.int64(n)
    slam = math.sqrt(lam)
    loglam = math.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    blk = np.uint64(0)
    while True:
        x0, x1, x2, x3 = _philox_block(blk, c1u, c2u, c3u, k0u, k1u)
        blk = (blk + np.uint64(1)) & _MASK32
        u = _u53(x0 | (x1 << _SH32)) - 0.5
        v = _u53(x2 | (x3 << _SH32))
        us = 0.5 - abs(u)
        fk = math.floor((2.0 * a / us + b) * u + lam + 0.43)
        if us >= 0.07 and v <= vr:
            return np.int64(fk)
        if fk < 0.0 or (us < 0.013 and v > us):
            continue
        if (math.log(v) + math.log(invalpha) - math.log(a / (us * us) + b)
                <= -lam + fk * loglam - math.lgamma(fk + 1.0)):
            return np.int64(fk)


# ---------------------------------------------------------------------------
# Order-only replica batches: heights need the field only through the
# time-ordered column sequence, so draw N ~ Poisson(t*k) and N uniform
# column codes per replica instead of materializing mark times.

@njit(cache=True, nogil=True)
def batch_heights_orderonly(k0, k1, c3_count, c3_codes, rep_lo, rep_hi,
                            lam, k, want_l, out_hf, out_hs, out_l):
    k0u = np.uint64(k0)
    k1u = np.uint64(k1)
    c1u = np.uint64(0)
    c3cu = np.uint64(c3_codes)
    kk = np.uint64(k)
    best = np.empty(k + 1, dtype=np.int64)   # one pad slot: branch-free
    chain = np.empty(k, dtype=np.int64)
    BUF = 8192
    ubuf = np.empty(BUF, dtype=np.uint32)
    for rep in range(rep_lo, rep_hi):
        n = poisson_draw(k0, k1, c3_count, rep, lam)
        if k == 1:
            # single column: every statistic is the mark count
            out_hf[rep - rep_lo] = n
            out_hs[rep - rep_lo] = n
            if want_l:
                out_l[rep - rep_lo] = n
            continue
        c2u = np.uint64(rep)
        best[0] = 0
        for j in range(1, k + 1):
            best[j] = NEG
        if want_l:
            for j in range(k):
                chain[j] = 0
        done = 0
        blk0 = np.uint64(0)
        while done < n:
            todo = n - done
            if todo > BUF:
                todo = BUF
            nblk = (todo + 3) // 4
            for i in range(nblk):
                x0, x1, x2, x3 = _philox_block(
                    (blk0 + np.uint64(i)) & _MASK32, c1u, c2u, c3cu,
                    k0u, k1u)
                ubuf[4 * i] = np.uint32(x0)
                ubuf[4 * i + 1] = np.uint32(x1)
                ubuf[4 * i + 2] = np.uint32(x2)
                ubuf[4 * i + 3] = np.uint32(x3)
            blk0 = (blk0 + np.uint64(nblk)) & _MASK32
            if want_l:
                for i in range(todo):
                    col = np.int64((np.uint64(ubuf[i]) * kk) >> _SH32)
                    v = best[col] + 1
                    best[col] = v
                    b = best[col + 1]
                    best[col + 1] = b if b >= v else v
                    q = chain[col] + 1
                    c = col
                    while c < k and chain[c] < q:
                        chain[c] = q
                        c += 1
            else:
                for i in range(todo):
                    col = np.int64((np.uint64(ubuf[i]) * kk) >> _SH32)
                    v = best[col] + 1
                    best[col] = v
                    b = best[col + 1]
                    best[col + 1] = b if b >= v else v
            done += todo
        hf = best[0]
        for j in range(1, k):
            if best[j] > hf:
                hf = best[j]
        out_hf[rep - rep_lo] = hf
        out_hs[rep - rep_lo] = best[k - 1]
        if want_l:
            out_l[rep - rep_lo] = chain[k - 1]


@njit(cache=True, inline="always")
def _heap_swap(ht, hc, a, b):
    tt = ht[a]
    ht[a] = ht[b]
    ht[b] = tt
    tc = hc[a]
    hc[a] = hc[b]
    hc[b] = tc


@njit(cache=True, nogil=True)
def aux_chain_csr(times, offs, ncols):
    """Longest strictly-increasing-time, nondecreasing-column chain over
    the whole CSR field: k-way heap merge in (time, column) order with a
    prefix-max raise per mark.  Marks at equal times are grouped so they
    never chain on one another."""
    k = ncols
    ht = np.empty(k, dtype=np.float64)
    hc = np.empty(k, dtype=np.int64)
    pos = np.empty(k, dtype=np.int64)
    gcol = np.empty(k, dtype=np.int64)
    gq = np.empty(k, dtype=np.int64)
    hn = 0
    for c in range(k):
        pos[c] = offs[c]
        if offs[c] < offs[c + 1]:
            # sift up
            i = hn
            ht[i] = times[offs[c]]
            hc[i] = c
            hn += 1
            while i > 0:
                p = (i - 1) // 2
                if (ht[i] < ht[p]
                        or (ht[i] == ht[p] and hc[i] < hc[p])):
                    _heap_swap(ht, hc, i, p)
                    i = p
                else:
                    break
    chain = np.zeros(k, dtype=np.int64)
    while hn > 0:
        t0 = ht[0]
        gn = 0
        while hn > 0 and ht[0] == t0:
            c = hc[0]
            gcol[gn] = c
            gn += 1
            # advance column c and replace the heap root
            pos[c] += 1
            if pos[c] < offs[c + 1]:
                ht[0] = times[pos[c]]
                hc[0] = c
            else:
                hn -= 1
                ht[0] = ht[hn]
                hc[0] = hc[hn]
            # sift down
            i = 0
            while True:
                l = 2 * i + 1
                if l >= hn:
                    break
                r = l + 1
                m = l
                if r < hn and (ht[r] < ht[l]
                               or (ht[r] == ht[l] and hc[r] < hc[l])):
                    m = r
                if (ht[m] < ht[i]
                        or (ht[m] == ht[i] and hc[m] < hc[i])):
                    _heap_swap(ht, hc, i, m)
                    i = m
                else:
                    break
        for g in range(gn):
            gq[g] = chain[gcol[g]] + 1
        for g in range(gn):
            q = gq[g]
            c = gcol[g]
            while c < k and chain[c] < q:
                chain[c] = q
                c += 1
    return chain[k - 1]


# ---------------------------------------------------------------------------
# Mark-field generation: one rate-1 Poisson process per column, times as
# cumulative exponential gaps, bumped by one ulp on float collisions.

@njit(cache=True, inline="always")
def _bump(prev, s):
    if s > prev:
        return s
    return math.nextafter(prev, math.inf)


@njit(cache=True, nogil=True)
def gen_field_csr(k0, k1, c3, c2, t, k, col_base):
    """CSR mark field (times, offsets) for columns col_base..col_base+k-1."""
    k0u = np.uint64(k0)
    k1u = np.uint64(k1)
    c2u = np.uint64(c2)
    c3u = np.uint64(c3)
    exp_total = t * k
    cap = int(exp_total + 6.0 * math.sqrt(exp_total + 1.0) + 16.0 * k + 64.0)
    times = np.empty(cap, dtype=np.float64)
    offs = np.empty(k + 1, dtype=np.int64)
    offs[0] = 0
    pos = 0
    for col in range(k):
        c1u = np.uint64(col_base + col)
        s = 0.0
        widx = 0
        w_hi = np.uint64(0)
        start = pos
        while True:
            if widx % 2 == 0:
                x0, x1, x2, x3 = _philox_block(
                    np.uint64(widx // 2), c1u, c2u, c3u, k0u, k1u)
                w = x0 | (x1 << _SH32)
                w_hi = x2 | (x3 << _SH32)
            else:
                w = w_hi
            widx += 1
            s += -math.log(_u53(w))
            if s > t:
                break
            if pos > start:
                s = _bump(times[pos - 1], s)
                if s > t:
                    break
            if pos == cap:
                cap = cap * 2
                grown = np.empty(cap, dtype=np.float64)
                grown[:pos] = times[:pos]
                times = grown
            times[pos] = s
            pos += 1
        offs[col + 1] = pos
    return times[:pos], offs


@njit(cache=True)
def gen_column_times(k0, k1, c3, c2, c1, t):
    times, offs = gen_field_csr(k0, k1, c3, c2, t, 1, c1)
    return times


# ---------------------------------------------------------------------------
# Column-sweep DP.  Equivalent reorganization of the event-driven scheme
# (process marks in time order; at a mark in column r: v = best[r]+1,
# best[r] = v, best[r+1] = max(best[r+1], v)): within column r, the value
# of its i-th windowed mark is i + max over injections (e,v) with e <= m_i
# of (v - #column-r marks before e), injections being the valued marks of
# column r-1 (plus a virtual (time -inf, value 0) for the start column).

@njit(cache=True, nogil=True)
def dp_column_sweep(times, offs, ncols, lo_cut, hi_cut, include_hi,
                    free_start):
    """Value-only sweep over a (lo_cut, hi_cut) time window.

    Returns (end_val, end_exact): end_val[r] is the DP's final best[r]
    (chain value at the horizon, end jumps included); end_exact[r] is the
    best value over chains whose last mark lies in column r (NEG if none).
    """
    end_val = np.empty(ncols, dtype=np.int64)
    end_exact = np.empty(ncols, dtype=np.int64)
    maxn = 0
    for r in range(ncols):
        n = offs[r + 1] - offs[r]
        if n > maxn:
            maxn = n
    inj_e = np.empty(maxn + 1, dtype=np.float64)
    inj_v = np.empty(maxn + 1, dtype=np.int64)
    new_e = np.empty(maxn + 1, dtype=np.float64)
    new_v = np.empty(maxn + 1, dtype=np.int64)
    n_inj = 0
    for r in range(ncols):
        a = offs[r]
        b = offs[r + 1]
        seg = times[a:b]
        wa = a + np.searchsorted(seg, lo_cut, side="right")
        if include_hi:
            wb = a + np.searchsorted(seg, hi_cut, side="right")
        else:
            wb = a + np.searchsorted(seg, hi_cut, side="left")
        if r == 0 or free_start:
            run = np.int64(0)
        else:
            run = NEG
        jj = 0
        cnt = np.int64(0)
        nn = 0
        for idx in range(wa, wb):
            q = times[idx]
            while jj < n_inj and inj_e[jj] <= q:
                one = inj_v[jj] - cnt
                if one > run:
                    run = one
                jj += 1
            cnt += 1
            w = cnt + run
            new_e[nn] = q
            new_v[nn] = w
            nn += 1
        while jj < n_inj:
            one = inj_v[jj] - cnt
            if one > run:
                run = one
            jj += 1
        end_val[r] = cnt + run
        if nn > 0:
            end_exact[r] = new_v[nn - 1]
        else:
            end_exact[r] = NEG
        te = inj_e
        inj_e = new_e
        new_e = te
        tv = inj_v
        inj_v = new_v
        new_v = tv
        n_inj = nn
    return end_val, end_exact


@njit(cache=True, nogil=True)
def dp_column_sweep_traced(times, offs, ncols):
    """Full-window sweep recording every mark's chain value (for tracing)."""
    n_total = offs[ncols]
    w = np.empty(n_total, dtype=np.int64)
    end_val = np.empty(ncols, dtype=np.int64)
    for r in range(ncols):
        a = offs[r]
        b = offs[r + 1]
        if r == 0:
            pa = 0
            pb = 0
            run = np.int64(0)
        else:
            pa = offs[r - 1]
            pb = a
            run = NEG
        jj = pa
        cnt = np.int64(0)
        for idx in range(a, b):
            q = times[idx]
            while jj < pb and times[jj] <= q:
                one = w[jj] - cnt
                if one > run:
                    run = one
                jj += 1
            cnt += 1
            w[idx] = cnt + run
        while jj < pb:
            one = w[jj] - cnt
            if one > run:
                run = one
            jj += 1
        end_val[r] = cnt + run
    return end_val, w


@njit(cache=True, nogil=True)
def backtrack_geodesic(times, offs, w, end_col, target, prefer_jump):
    """Extract jump times/columns of an optimal chain from a traced sweep.

    Returns (jump_times, n_jumps, ok); jump_times[i] pairs with the jump
    leaving 0-based column i (paths visit consecutive columns, so the
    from-columns are implicit).  ok=False flags an inconsistent trace
    (never expected; guards against silent corruption).
    """
    jt = np.empty(end_col if end_col > 0 else 1, dtype=np.float64)
    nj = 0
    if target <= 0:
        # empty path sitting at the start column
        return jt, 0, target == 0 and end_col == 0
    r = end_col
    a = offs[r]
    b = offs[r + 1]
    seg = w[a:b]
    idx = -1
    if b > a:
        j = np.searchsorted(seg, target)
        if j < b - a and seg[j] == target:
            idx = a + j
    # late entry: the unique mark of column r-1 holding the target value,
    # later than every windowed mark of column r (or r has no marks).
    late = -1
    if r > 0:
        pa = offs[r - 1]
        pb = offs[r]
        segp = w[pa:pb]
        j = np.searchsorted(segp, target)
        if j < pb - pa and segp[j] == target:
            cand = pa + j
            if b == a or times[cand] > times[b - 1]:
                late = cand
    if idx < 0 and late < 0:
        return jt, 0, False
    use_late = late >= 0 and (idx < 0 or not prefer_jump)
    if use_late:
        # PreferStay enters the end column as late as possible
        jt[nj] = times[late]
        nj += 1
        r -= 1
        idx = late
    v = target
    while v > 1:
        stay = -1
        if idx > offs[r] and w[idx - 1] == v - 1:
            stay = idx - 1
        jump = -1
        if r > 0:
            pa = offs[r - 1]
            pb = offs[r]
            segp = w[pa:pb]
            j = np.searchsorted(segp, v - 1)
            if j < pb - pa and segp[j] == v - 1:
                cand = pa + j
                if times[cand] <= times[idx]:
                    jump = cand
        if jump < 0 and stay < 0:
            return jt, 0, False
        # Walking backward, postponing the jump lowers the value at which
        # the column is entered, which moves the forward entry time
        # earlier: the pointwise-highest path stays while it can.
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
    # jumps were recorded walking backward: reverse into forward order
    for i in range(nj // 2):
        tmp = jt[i]
        jt[i] = jt[nj - 1 - i]
        jt[nj - 1 - i] = tmp
    return jt, nj, True


# ---------------------------------------------------------------------------
# Gaussian consumers.

@njit(cache=True, nogil=True)
def batch_brownian_d(k0, k1, c3, rep_lo, rep_hi, t, k, m, out):
    """Discretized Brownian LPP value D(t,k) on an m-point grid per column."""
    k0u = np.uint64(k0)
    k1u = np.uint64(k1)
    c3u = np.uint64(c3)
    sig = math.sqrt(t / m)
    prev = np.empty(m + 1, dtype=np.float64)
    cur = np.empty(m + 1, dtype=np.float64)
    for rep in range(rep_lo, rep_hi):
        c2u = np.uint64(rep)
        prev[0] = 0.0
        for j in range(1, m + 1):
            prev[j] = -np.inf
        for col in range(1, k + 1):
            c1u = np.uint64(col)
            bval = 0.0
            run = -np.inf
            have = False
            znext = 0.0
            blk = np.uint64(0)
            for j in range(m + 1):
                if j > 0:
                    if have:
                        z = znext
                        have = False
                    else:
                        x0, x1, x2, x3 = _philox_block(
                            blk, c1u, c2u, c3u, k0u, k1u)
                        blk = (blk + np.uint64(1)) & _MASK32
                        u1 = _u53(x0 | (x1 << _SH32))
                        u2 = _u53(x2 | (x3 << _SH32))
                        rr = math.sqrt(-2.0 * math.log(u1))
                        z = rr * math.cos(TWO_PI * u2)
                        znext = rr * math.sin(TWO_PI * u2)
                        have = True
                    bval += sig * z
                diff = prev[j] - bval
                if diff > run:
                    run = diff
                cur[j] = bval + run
            tmp = prev
            prev = cur
            cur = tmp
        out[rep - rep_lo] = prev[m]


@njit(cache=True)
def _sturm_count_below(d, e2, x):
    """Number of eigenvalues of the symmetric tridiagonal (d, e2) below x."""
    cnt = 0
    q = d[0] - x
    if q < 0.0:
        cnt += 1
    for i in range(1, d.shape[0]):
        if q == 0.0:
            q = -1e-307
        q = d[i] - x - e2[i - 1] / q
        if q < 0.0:
            cnt += 1
    return cnt


@njit(cache=True)
def sturm_lambda_max(d, e2, tol):
    k = d.shape[0]
    if k == 1:
        return d[0]
    lo = d[0]
    hi = d[0]
    for i in range(k):
        r = 0.0
        if i > 0:
            r += math.sqrt(e2[i - 1])
        if i < k - 1:
            r += math.sqrt(e2[i])
        if d[i] - r < lo:
            lo = d[i] - r
        if d[i] + r > hi:
            hi = d[i] + r
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _sturm_count_below(d, e2, mid) >= k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@njit(cache=True, nogil=True)
def batch_gue_lambda_max(k0, k1, c3_gauss, c3_gamma, rep_lo, rep_hi, k,
                         tol, out):
    """Largest eigenvalue of the k x k GUE (entries variance 1 off-diagonal,
    standard normal diagonal) via its symmetric tridiagonal reduction:
    d_i ~ N(0,1), e_i^2 ~ Gamma(k-i, 1)."""
    k0u = np.uint64(k0)
    k1u = np.uint64(k1)
    c3gu = np.uint64(c3_gauss)
    c3mu = np.uint64(c3_gamma)
    c1u = np.uint64(0)
    d = np.empty(k, dtype=np.float64)
    e2 = np.empty(k - 1 if k > 1 else 1, dtype=np.float64)
    for rep in range(rep_lo, rep_hi):
        c2u = np.uint64(rep)
        # diagonal: Box-Muller pairs, one block each
        blk = np.uint64(0)
        j = 0
        while j < k:
            x0, x1, x2, x3 = _philox_block(blk, c1u, c2u, c3gu, k0u, k1u)
            blk = (blk + np.uint64(1)) & _MASK32
            u1 = _u53(x0 | (x1 << _SH32))
            u2 = _u53(x2 | (x3 << _SH32))
            rr = math.sqrt(-2.0 * math.log(u1))
            d[j] = rr * math.cos(TWO_PI * u2)
            if j + 1 < k:
                d[j + 1] = rr * math.sin(TWO_PI * u2)
            j += 2
        # off-diagonal squares: sums of unit exponentials
        widx = 0
        w_hi = np.uint64(0)
        blk = np.uint64(0)
        for i in range(k - 1):
            s = 0.0
            for _ in range(k - 1 - i):
                if widx % 2 == 0:
                    x0, x1, x2, x3 = _philox_block(
                        blk, c1u, c2u, c3mu, k0u, k1u)
                    blk = (blk + np.uint64(1)) & _MASK32
                    w = x0 | (x1 << _SH32)
                    w_hi = x2 | (x3 << _SH32)
                else:
                    w = w_hi
                widx += 1
                s += -math.log(_u53(w))
            e2[i] = s
        if k == 1:
            out[rep - rep_lo] = d[0]
        else:
            out[rep - rep_lo] = sturm_lambda_max(d, e2, tol)
