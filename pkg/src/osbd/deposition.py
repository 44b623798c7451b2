"""Direct simulation of the one-sided ballistic deposition recursion.

Heights are exact integers with a dedicated minus-infinity sentinel; the
public profile exposes float('-inf') for unreachable columns.  Marks at
equal times (a measure-zero event for real fields) are processed in
ascending column order, mirroring the LPP engine.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .rng import MarkField

NEG = -(1 << 60)
NEG_CUT = -(1 << 59)

_NEG_INF = float("-inf")


class InitialCondition:
    """Initial height profile G over columns 1..k.

    Three variants: Flat (G ≡ 0), Seed (0 at column 1, -inf elsewhere),
    and an explicit Table of integer-or-minus-infinity values.  A table
    flagged in_class_i must satisfy Seed ≤ G ≤ Flat: G(1) = 0 and
    G(j) ≤ 0 for j ≥ 2.
    """

    __slots__ = ("kind", "_table", "in_class_i")

    def __init__(self, kind: str, table=None, in_class_i: bool = False):
        if kind not in ("flat", "seed", "table"):
            raise ValueError(f"unknown initial-condition kind {kind!r}")
        self.kind = kind
        self.in_class_i = bool(in_class_i) or kind in ("flat", "seed")
        if kind == "table":
            if table is None or len(table) == 0:
                raise ValueError("table variant needs at least one value")
            vals = []
            for v in table:
                if v == _NEG_INF:
                    vals.append(NEG)
                elif float(v).is_integer():
                    vals.append(int(v))
                else:
                    raise ValueError(
                        "table values must be integers or -inf")
            self._table = np.asarray(vals, dtype=np.int64)
            if in_class_i:
                if self._table[0] != 0:
                    raise ValueError("class-I table must have value 0 at "
                                     "column 1")
                if np.any((self._table[1:] > 0)):
                    raise ValueError("class-I table values must be <= 0 "
                                     "beyond column 1")
        else:
            self._table = None

    @classmethod
    def flat(cls) -> "InitialCondition":
        return cls("flat")

    @classmethod
    def seed(cls) -> "InitialCondition":
        return cls("seed")

    @classmethod
    def table(cls, values, in_class_i: bool = False) -> "InitialCondition":
        return cls("table", table=values, in_class_i=in_class_i)

    def values_up_to(self, k: int) -> np.ndarray:
        """G(1..k) as int64 with the NEG sentinel for minus infinity."""
        if k < 1:
            raise ValueError("k must be at least 1")
        if self.kind == "flat":
            return np.zeros(k, dtype=np.int64)
        if self.kind == "seed":
            out = np.full(k, NEG, dtype=np.int64)
            out[0] = 0
            return out
        if len(self._table) < k:
            raise ValueError(
                f"table covers {len(self._table)} columns, need {k}")
        return self._table[:k].copy()

    def __repr__(self) -> str:
        if self.kind == "table":
            return f"InitialCondition.table(len={len(self._table)})"
        return f"InitialCondition.{self.kind}()"


@dataclass(frozen=True)
class HeightProfile:
    """Heights h(1..k) at a fixed time; -inf marks unreachable columns."""

    time: float
    heights: tuple

    def __post_init__(self):
        if self.time < 0.0:
            raise ValueError("profile time must be nonnegative")

    def height(self, column: int) -> float:
        return self.heights[column - 1]

    @property
    def k(self) -> int:
        return len(self.heights)


def _as_public(h: np.ndarray) -> tuple:
    return tuple(_NEG_INF if v < NEG_CUT else int(v) for v in h)


def _ordered_marks(field: MarkField, k: int, t: float):
    """(times, columns) of all marks with time < t in columns 1..k,
    sorted by time, ties by ascending column."""
    n = int(field.offsets[k])
    times = field.times[:n]
    cols = np.repeat(np.arange(k, dtype=np.int64),
                     np.diff(field.offsets[:k + 1]))
    m = times < t
    times, cols = times[m], cols[m]
    order = np.lexsort((cols, times))
    return times[order], cols[order]


def _check_coverage(field: MarkField, t: float, k: int) -> None:
    if k < 1:
        raise ValueError("k must be at least 1")
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if field.k < k:
        raise ValueError(f"field has {field.k} columns, need {k}")
    if field.t < t:
        raise ValueError(f"field horizon {field.t} shorter than t={t}")


def simulate_heights(q_field: MarkField, g: InitialCondition, t: float,
                     k: int) -> HeightProfile:
    """Left limit h_G(t-, 1..k): apply every mark strictly before t.

    Column 1 just counts its marks on top of G(1); a mark in column c >= 2
    sets h(c) to 1 + max(h(c-1), h(c)), where minus infinity absorbs.
    """
    _check_coverage(q_field, t, k)
    h = g.values_up_to(k).copy()
    _, cols = _ordered_marks(q_field, k, t)
    for c in cols:
        if c == 0:
            h[0] += 1
        else:
            m = h[c - 1] if h[c - 1] > h[c] else h[c]
            h[c] = m + 1
    return HeightProfile(time=t, heights=_as_public(h))


def height_snapshots(q_field: MarkField, g: InitialCondition,
                     times: Sequence[float], k: int):
    """Profiles h_G(t_i-, .) for an increasing list of times, one pass."""
    times = [float(x) for x in times]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("snapshot times must be strictly increasing")
    if not times:
        return []
    _check_coverage(q_field, times[-1], k)
    h = g.values_up_to(k).copy()
    mtimes, cols = _ordered_marks(q_field, k, times[-1])
    out = []
    pos = 0
    n = cols.shape[0]
    for cut in times:
        while pos < n and mtimes[pos] < cut:
            c = cols[pos]
            if c == 0:
                h[0] += 1
            else:
                m = h[c - 1] if h[c - 1] > h[c] else h[c]
                h[c] = m + 1
            pos += 1
        out.append(HeightProfile(time=cut, heights=_as_public(h)))
    return out
