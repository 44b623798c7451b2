"""Reproducible Poisson mark fields and their time-space reversals.

A mark field is the shared randomness of the whole laboratory: one rate-1
Poisson process per column on (0, t].  Fields are stored in CSR form
(concatenated per-column sorted times plus offsets) and are regenerable
bit-for-bit from their StreamKey on either compute backend.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._backend import kernels
from ._philox import PURPOSE_MARKS, compose_c3, split_key

_MAGIC = b"OSBD"
_DUMP_VERSION = 1


@dataclass(frozen=True)
class StreamKey:
    """Addresses one independent randomness stream.

    ``column`` is the stream index of the field's first column; a k-column
    field occupies stream columns column..column+k-1.
    """

    master_seed: int
    experiment_id: int = 0
    replica: int = 0
    column: int = 1

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 1 << 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if not 0 <= self.experiment_id <= 0xFFFF:
            raise ValueError("experiment_id out of range 0..65535")
        if not 0 <= self.replica < 1 << 32:
            raise ValueError("replica must be a 32-bit nonnegative integer")
        if not 1 <= self.column < 1 << 31:
            raise ValueError("column must be a positive 31-bit integer")


class MarkField:
    """Per-column sorted Poisson mark times on (0, t], CSR layout."""

    __slots__ = ("t", "k", "times", "offsets", "key")

    def __init__(self, t, k, times, offsets, key=None, validate=True):
        self.t = float(t)
        self.k = int(k)
        self.times = np.asarray(times, dtype=np.float64)
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.key = key
        if validate:
            self._validate()

    def _validate(self) -> None:
        if self.t <= 0.0:
            raise ValueError("horizon must be positive")
        if self.k < 1:
            raise ValueError("need at least one column")
        if self.offsets.shape != (self.k + 1,) or self.offsets[0] != 0:
            raise ValueError("offsets must have shape (k+1,) starting at 0")
        if np.any(np.diff(self.offsets) < 0):
            raise ValueError("offsets must be nondecreasing")
        if self.offsets[-1] != self.times.shape[0]:
            raise ValueError("offsets do not cover the time array")
        if self.times.shape[0]:
            if self.times.min() <= 0.0 or self.times.max() > self.t:
                raise ValueError("mark times must lie in (0, t]")
            d = np.diff(self.times)
            bnd = self.offsets[1:-1]  # column boundaries may decrease
            bnd = bnd[(bnd > 0) & (bnd < self.times.shape[0])]
            d[bnd - 1] = 1.0
            if np.any(d <= 0.0):
                raise ValueError("per-column times must strictly increase")

    # descriptive aliases
    @property
    def horizon_t(self) -> float:
        return self.t

    @property
    def columns_k(self) -> int:
        return self.k

    @property
    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def n_marks(self) -> int:
        return int(self.offsets[-1])

    def column(self, r: int) -> np.ndarray:
        """Sorted mark times of 1-based column r (read-only view)."""
        if not 1 <= r <= self.k:
            raise ValueError(f"column {r} outside 1..{self.k}")
        return self.times[self.offsets[r - 1]:self.offsets[r]]

    def __eq__(self, other):
        if not isinstance(other, MarkField):
            return NotImplemented
        return (self.t == other.t and self.k == other.k
                and np.array_equal(self.offsets, other.offsets)
                and np.array_equal(self.times, other.times))

    def __repr__(self) -> str:
        return (f"MarkField(t={self.t}, k={self.k}, "
                f"n_marks={self.n_marks})")


def generate_marks(key: StreamKey, t: float, k: int) -> MarkField:
    """Fresh field: column r of the output uses stream column
    key.column + r - 1, so column streams never depend on k."""
    if t <= 0.0:
        raise ValueError("horizon t must be positive")
    if k < 1:
        raise ValueError("column count k must be at least 1")
    k0, k1 = split_key(key.master_seed)
    c3 = compose_c3(key.experiment_id, PURPOSE_MARKS)
    times, offsets = kernels().gen_field_csr(
        k0, k1, c3, key.replica, float(t), int(k), key.column)
    return MarkField(t, k, times, offsets, key=key, validate=False)


def reverse_field(field: MarkField) -> MarkField:
    """Time-space reversal: output column r holds {t - q} for the marks q
    of input column k-r+1 with q < t, sorted increasing.  Marks exactly at
    the horizon map to 0 and are dropped (half-open reversal window)."""
    t, k = field.t, field.k
    keep = np.empty(k, dtype=np.int64)
    out_chunks = []
    for r in range(k, 0, -1):
        col = field.column(r)
        col = col[col < t]
        keep[k - r] = col.shape[0]  # note: reversed position
        out_chunks.append((t - col)[::-1])
    offsets = np.concatenate(([0], np.cumsum(keep)))
    times = (np.concatenate(out_chunks) if out_chunks
             else np.empty(0, dtype=np.float64))
    # float cancellation can collapse neighbouring reversed times; nudge
    # collisions up one ulp to restore strict per-column increase
    for r in range(k):
        a, b = offsets[r], offsets[r + 1]
        seg = times[a:b]
        if seg.shape[0] > 1 and np.any(np.diff(seg) <= 0.0):
            for i in range(1, seg.shape[0]):
                if seg[i] <= seg[i - 1]:
                    seg[i] = np.nextafter(seg[i - 1], np.inf)
    return MarkField(t, k, times, offsets, key=field.key, validate=False)


def dump_field(field: MarkField, path) -> None:
    """Binary dump: magic, version, t, k, per-column counts, times
    (all little-endian; counts int64, times float64)."""
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _DUMP_VERSION))
        fh.write(struct.pack("<d", field.t))
        fh.write(struct.pack("<q", field.k))
        fh.write(field.counts.astype("<i8").tobytes())
        fh.write(field.times.astype("<f8").tobytes())


def load_field(path) -> MarkField:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError("not a mark-field dump (bad magic)")
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != _DUMP_VERSION:
        raise ValueError(f"unsupported dump version {version}")
    (t,) = struct.unpack_from("<d", raw, 8)
    (k,) = struct.unpack_from("<q", raw, 16)
    counts = np.frombuffer(raw, dtype="<i8", count=k, offset=24)
    total = int(counts.sum())
    times = np.frombuffer(raw, dtype="<f8", count=total, offset=24 + 8 * k)
    offsets = np.concatenate(([0], np.cumsum(counts)))
    return MarkField(t, k, times.copy(), offsets, key=None, validate=True)
