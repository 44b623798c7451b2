"""Last-passage representations: optimal values, geodesics, deviations.

The height h°_G(t,k) is computed by an event-driven DP over marks in time
order (ties in ascending column): at a mark of column r, v = best[r]+1,
best[r] = v, best[r+1] = max(best[r+1], v); the answer is
max_j(best[j] + G(k-j+1)).  The kernels run the equivalent column-sweep
reorganization; geodesics are backtracked from a per-mark value trace.

Tie fields (marks at equal times in adjacent columns) are resolved like
the direct recursion: the DP may chain equal-time marks in ascending
column order, which an interval-based path evaluation cannot reproduce.
This divergence has probability zero for generated fields.
"""
from __future__ import annotations

import enum
import math
from bisect import bisect_left
from collections import namedtuple
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from ._backend import kernels
from .deposition import NEG, NEG_CUT, InitialCondition, _check_coverage
from .rng import MarkField

_NEG_INF = float("-inf")


class TiePolicy(enum.Enum):
    """Frozen geodesic tie-breaking: the two extremal traced geodesics."""

    PREFER_STAY = "prefer-stay"
    PREFER_JUMP = "prefer-jump"


class NoGeodesic(Exception):
    """Raised when the optimum is minus infinity: no admissible path."""


@dataclass(frozen=True)
class DirectedPath:
    """Monotone column trajectory: start at (time, column), unit-column
    jumps at the recorded (time, from-column) pairs, alive until end_time.

    The column function is left-continuous: column_at(s) counts jumps
    strictly before s, so a mark at a jump time still belongs to the
    departed column (occupancy intervals are closed at the jump).
    """

    start: tuple
    jumps: tuple
    end_time: float

    def __post_init__(self):
        t0, c0 = self.start
        if t0 < 0.0 or self.end_time < t0:
            raise ValueError("path must live on a forward time interval")
        if c0 < 1:
            raise ValueError("start column must be >= 1")
        prev_t, prev_c = t0, c0 - 1
        for (tau, frm) in self.jumps:
            if frm != prev_c + 1:
                raise ValueError("jump from-columns must increase by "
                                 "exactly 1 from the start column")
            if tau < prev_t or not (t0 <= tau <= self.end_time):
                raise ValueError("jump times must be nondecreasing within "
                                 "the path's interval")
            prev_t, prev_c = tau, frm

    @property
    def start_column(self) -> int:
        return self.start[1]

    @property
    def end_column(self) -> int:
        return self.start[1] + len(self.jumps)

    def column_at(self, s: float) -> int:
        times = [tau for (tau, _) in self.jumps]
        return self.start[1] + bisect_left(times, s)


@dataclass(frozen=True)
class LppOutcome:
    value: object                      # int, or float('-inf')
    end_column: int
    geodesic: Optional[DirectedPath]
    tie_policy: TiePolicy
    trace: Optional["DpTrace"] = dc_field(default=None, repr=False,
                                          compare=False)


Containment = namedtuple("Containment", "a_event b_events")


@dataclass(frozen=True)
class GeodesicStats:
    sup_deviation: float
    deviations_at: dict
    containment: dict


@dataclass(frozen=True)
class DpTrace:
    """Windowed field plus per-mark chain values, enough to backtrack."""

    times: np.ndarray
    offsets: np.ndarray
    ncols: int
    col_base: int          # public (1-based) column of local column 0
    start_time: float
    end_time: float
    end_val: np.ndarray    # final DP best[] per local column
    w: np.ndarray          # chain value of each windowed mark
    g: InitialCondition


def _window_csr(fld: MarkField, k_lo: int, k_hi: int, t_lo: float,
                t_hi: float, include_hi: bool):
    """Copy of the CSR restricted to columns k_lo..k_hi and the time
    window (t_lo, t_hi) or (t_lo, t_hi] when include_hi."""
    ncols = k_hi - k_lo + 1
    side = "right" if include_hi else "left"
    chunks = []
    offs = np.empty(ncols + 1, dtype=np.int64)
    offs[0] = 0
    for r in range(ncols):
        col = fld.column(k_lo + r)
        a = np.searchsorted(col, t_lo, side="right")
        b = np.searchsorted(col, t_hi, side=side)
        chunks.append(col[a:b])
        offs[r + 1] = offs[r] + (b - a)
    times = (np.concatenate(chunks) if chunks
             else np.empty(0, dtype=np.float64))
    return times, offs


def _scores(end_val: np.ndarray, g: InitialCondition, ncols: int):
    g_rev = g.values_up_to(ncols)[::-1]
    return end_val + g_rev


def _resolve_end(scores: np.ndarray, policy: TiePolicy):
    if policy is TiePolicy.PREFER_JUMP:
        ec = scores.shape[0] - 1 - int(np.argmax(scores[::-1]))
    else:
        ec = int(np.argmax(scores))
    return ec, int(scores[ec])


def _outcome(end_val, trace, g, ncols, col_base, tie_policy, keep_trace):
    scores = _scores(end_val, g, ncols)
    ec, raw = _resolve_end(scores, tie_policy)
    if raw < NEG_CUT:
        value = _NEG_INF
        geo = None
    else:
        value = int(raw)
        geo = extract_geodesic(trace, tie_policy) if keep_trace else None
    return LppOutcome(value=value, end_column=col_base + ec, geodesic=geo,
                      tie_policy=tie_policy, trace=trace)


def lpp_height(field: MarkField, g: InitialCondition, t: float, k: int,
               tie_policy: TiePolicy = TiePolicy.PREFER_JUMP,
               keep_trace: bool = False) -> LppOutcome:
    """h°_G(t,k): optimum over directed paths from column 1, marks with
    time strictly below t."""
    _check_coverage(field, t, k)
    if keep_trace:
        times, offs = _window_csr(field, 1, k, -1.0, t, False)
        end_val, w = kernels().dp_column_sweep_traced(times, offs, k)
        trace = DpTrace(times=times, offsets=offs, ncols=k, col_base=1,
                        start_time=0.0, end_time=t, end_val=end_val,
                        w=w, g=g)
    else:
        end_val, _ = kernels().dp_column_sweep(
            field.times, field.offsets, k, -1.0, t, False, False)
        trace = None
    return _outcome(end_val, trace, g, k, 1, tie_policy, keep_trace)


def lpp_point_to_point(field: MarkField, g: InitialCondition, frm, to,
                       tie_policy: TiePolicy = TiePolicy.PREFER_JUMP,
                       keep_trace: bool = False) -> LppOutcome:
    """h°_G((t1,k1) -> (t2,k2)): paths start at column k1 at time t1,
    marks in (t1, t2], columns k1..k2, G offset G(k2 - end + 1)."""
    t1, k1 = frm
    t2, k2 = to
    if t1 > t2 or k1 > k2:
        raise ValueError("point-to-point needs t1 <= t2 and k1 <= k2")
    if t1 < 0.0 or k1 < 1:
        raise ValueError("source point out of domain")
    _check_coverage(field, t2, k2)
    ncols = k2 - k1 + 1
    if keep_trace:
        times, offs = _window_csr(field, k1, k2, t1, t2, True)
        end_val, w = kernels().dp_column_sweep_traced(times, offs, ncols)
        trace = DpTrace(times=times, offsets=offs, ncols=ncols,
                        col_base=k1, start_time=t1, end_time=t2,
                        end_val=end_val, w=w, g=g)
    else:
        end_val, _ = kernels().dp_column_sweep(
            field.times, field.offsets[k1 - 1:k2 + 1], ncols,
            t1, t2, True, False)
        trace = None
    return _outcome(end_val, trace, g, ncols, k1, tie_policy, keep_trace)


def extract_geodesic(trace: DpTrace,
                     tie_policy: TiePolicy) -> DirectedPath:
    """Backtrack one extremal geodesic from a traced DP.

    PreferJump moves to higher columns as early as possible (pointwise
    highest traced geodesic); PreferStay as late as possible (lowest).
    """
    if trace is None:
        raise ValueError("outcome was computed without keep_trace")
    scores = _scores(trace.end_val, trace.g, trace.ncols)
    ec, raw = _resolve_end(scores, tie_policy)
    if raw < NEG_CUT:
        raise NoGeodesic("optimal value is minus infinity: no path")
    target = int(trace.end_val[ec])
    jt, nj, ok = kernels().backtrack_geodesic(
        trace.times, trace.offsets, trace.w, ec, target,
        tie_policy is TiePolicy.PREFER_JUMP)
    if not ok:
        raise RuntimeError("trace backtrack failed; corrupted DP state")
    jumps = tuple((float(jt[i]), trace.col_base + i) for i in range(nj))
    return DirectedPath(start=(trace.start_time, trace.col_base),
                        jumps=jumps, end_time=trace.end_time)


def is_valid_upath(path: DirectedPath, field: MarkField) -> bool:
    """True iff every jump from column r happens at a mark of column r."""
    for (tau, frm) in path.jumps:
        if frm > field.k:
            return False
        col = field.column(frm)
        i = np.searchsorted(col, tau)
        if i >= col.shape[0] or col[i] != tau:
            return False
    return True


def evaluate_path(path: DirectedPath, field: MarkField,
                  g: InitialCondition, k: int, *,
                  closed_end: bool = False):
    """Independent H(u,Y) + G(k - u(end)+1) evaluation of a path.

    Counts marks of each occupied column in the interval (entry, exit]
    — closed at the departing jump — with the final interval open at
    end_time unless closed_end (point-to-point windows include their
    right endpoint).

    On fields where adjacent columns carry marks at exactly equal times
    (measure zero for Poisson fields), the optimal chain may step
    columns at a single instant; such a step is not representable in
    this half-open counting, so the evaluation can fall below the
    optimum attached to the path.  It never exceeds it.
    """
    total = 0
    entry = path.start[0]
    col = path.start[1]
    for (tau, frm) in path.jumps:
        seg = field.column(frm)
        total += (np.searchsorted(seg, tau, side="right")
                  - np.searchsorted(seg, entry, side="right"))
        entry = tau
        col = frm + 1
    seg = field.column(col)
    side = "right" if closed_end else "left"
    total += (np.searchsorted(seg, path.end_time, side=side)
              - np.searchsorted(seg, entry, side="right"))
    gv = g.values_up_to(k)[k - col]  # G(k - end_col + 1), 0-based
    if gv < NEG_CUT:
        return _NEG_INF
    return int(total + gv)


def auxiliary_lpp(field: MarkField, t: float, k: int) -> int:
    """L(t,k): longest chain of marks with strictly increasing times and
    nondecreasing columns within 1..k (marks strictly before t).  Marks
    at equal times are queried together before any of them updates, so
    they can never chain on each other."""
    _check_coverage(field, t, k)
    times, offs = _window_csr(field, 1, k, -1.0, t, False)
    return int(kernels().aux_chain_csr(times, offs, k))


def geodesic_deviation(path: DirectedPath, t: float, k: int,
                       gammas=(0.7, 0.8, 0.9),
                       fractions=(0.25, 0.5, 0.75)) -> GeodesicStats:
    """Exact sup of |u(s) - (k/t)s| over the piecewise-constant path,
    plus fixed-fraction deviations and cylinder-containment flags."""
    if t <= 0.0:
        raise ValueError("t must be positive")
    slope = k / t
    dev = abs(path.start[1])          # s = 0: line is at 0
    col = path.start[1]
    for (tau, _) in path.jumps:
        line = slope * tau
        d = abs(col - line)
        if d > dev:
            dev = d
        col += 1
        d = abs(col - line)
        if d > dev:
            dev = d
    d = abs(col - k)                  # s = t, right value
    if d > dev:
        dev = d
    dev_at = {}
    for f in fractions:
        dev_at[f] = abs(path.column_at(f * t) - k * f)
    containment = {}
    for gm in gammas:
        thr = k ** gm
        containment[gm] = Containment(
            a_event=dev <= thr,
            b_events={f: dev_at[f] <= thr for f in fractions})
    return GeodesicStats(sup_deviation=float(dev), deviations_at=dev_at,
                         containment=containment)


CrossSectionScore = namedtuple("CrossSectionScore",
                               "column u_score v_score")


class ScoreList(list):
    """Cross-section rows plus the columns excluded from the section."""

    def __init__(self, rows, excluded):
        super().__init__(rows)
        self.excluded = tuple(excluded)


def _reversed_window_csr(fld: MarkField, alpha: int, t_lo: float,
                         t_hi: float):
    """Columns 1..alpha with marks in (t_lo, t_hi], column-reflected
    (c -> alpha-c+1) and time-reflected (q -> t_hi - q)."""
    chunks = []
    offs = np.empty(alpha + 1, dtype=np.int64)
    offs[0] = 0
    for r in range(alpha):
        col = fld.column(alpha - r)
        a = np.searchsorted(col, t_lo, side="right")
        b = np.searchsorted(col, t_hi, side="right")
        seg = (t_hi - col[a:b])[::-1]
        if seg.shape[0] > 1:
            bad = np.diff(seg) <= 0.0
            if bad.any():
                seg = seg.copy()
                for i in range(1, seg.shape[0]):
                    if seg[i] <= seg[i - 1]:
                        seg[i] = np.nextafter(seg[i - 1], np.inf)
        chunks.append(seg)
        offs[r + 1] = offs[r] + seg.shape[0]
    times = (np.concatenate(chunks) if chunks
             else np.empty(0, dtype=np.float64))
    return times, offs


def cross_section_scores(field: MarkField, t: float, alpha: int, s: float,
                         gamma: float) -> ScoreList:
    """Rescaled scores along the cross-section {k': |k'-s·alpha| <= alpha^gamma}.

    U(s,k') rescales h°_S(st,k') (marks before st); V(s,k') rescales the
    flat point-to-point height (st,k') -> (t,alpha) (marks in (st,t]).
    Both come from one forward seed sweep and one reflected free-start
    sweep of the same field.  Columns of the ideal section outside
    1..alpha are reported in .excluded; at k' = alpha the V denominator
    degenerates and v_score is NaN.
    """
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie strictly between 0 and 1")
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    _check_coverage(field, t, alpha)
    st = s * t
    half = alpha ** gamma
    lo = math.ceil(s * alpha - half)
    hi = math.floor(s * alpha + half)
    included = [c for c in range(lo, hi + 1) if 1 <= c <= alpha]
    excluded = [c for c in range(lo, hi + 1) if not 1 <= c <= alpha]
    end_val_u, _ = kernels().dp_column_sweep(
        field.times, field.offsets, alpha, -1.0, st, False, False)
    rtimes, roffs = _reversed_window_csr(field, alpha, st, t)
    _, end_exact_r = kernels().dp_column_sweep(
        rtimes, roffs, alpha, -1.0, math.inf, True, True)
    rows = []
    rem_t = (1.0 - s) * t
    for kp in included:
        hs = int(end_val_u[kp - 1])
        if hs < NEG_CUT:
            u_sc = _NEG_INF
        else:
            u_sc = ((hs - st - 2.0 * math.sqrt(st * kp))
                    / math.sqrt(st * kp ** (-1.0 / 3.0)))
        if kp == alpha:
            v_sc = float("nan")
        else:
            vraw = max(0, int(end_exact_r[alpha - kp]))
            v_sc = ((vraw - rem_t - 2.0 * math.sqrt(rem_t * (alpha - kp)))
                    / math.sqrt(rem_t * (alpha - kp) ** (-1.0 / 3.0)))
        rows.append(CrossSectionScore(column=kp, u_score=u_sc,
                                      v_score=v_sc))
    return ScoreList(rows, excluded)
