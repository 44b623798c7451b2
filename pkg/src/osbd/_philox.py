"""Philox4x32-10 counter-based generator, vectorized numpy core.

Every random quantity in this package is a pure function of
(key, counter).  The key is the 64-bit master seed split into two 32-bit
words; the 128-bit counter is laid out as

    c3 = (experiment_id << 16) | purpose
    c2 = replica index
    c1 = column / substream index
    c0 = block counter within the substream

so replicas and columns own disjoint, independently addressable streams.
One block yields four 32-bit words, i.e. two 64-bit words.

The numba backend re-implements the same permutation scalar-style in
``_kernels_nb``; both must agree bit for bit (see tests).
"""
from __future__ import annotations

import numpy as np

# Multipliers and Weyl key-schedule constants of the Philox4x32 permutation.
PHILOX_M0 = np.uint64(0xD2511F53)
PHILOX_M1 = np.uint64(0xCD9E8D57)
PHILOX_W0 = np.uint64(0x9E3779B9)
PHILOX_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)

# Stream purposes (c3 low half).  Each (experiment, purpose) pair is a
# separate counter family so no two consumers can collide.
PURPOSE_MARKS = 1        # per-column mark times
PURPOSE_COUNT = 2        # per-replica Poisson mark totals
PURPOSE_CODES = 3        # per-replica column-code streams
PURPOSE_GAUSS = 4        # Gaussian consumers (Brownian grids, tridiag diagonal)
PURPOSE_GAMMA = 5        # Gamma/chi-squared consumers (tridiag off-diagonal)
PURPOSE_BOOT = 6         # bootstrap resampling
PURPOSE_TABLE = 7        # auxiliary per-replica draws (initial-condition tables)

_U53_SCALE = float(2.0 ** -53)


def compose_c3(experiment_id: int, purpose: int) -> int:
    if not (0 <= experiment_id <= 0xFFFF):
        raise ValueError(f"experiment_id out of range: {experiment_id}")
    if not (0 <= purpose <= 0xFFFF):
        raise ValueError(f"purpose out of range: {purpose}")
    return (experiment_id << 16) | purpose


def split_key(master_seed: int) -> tuple[int, int]:
    """64-bit master seed -> (k0, k1) Philox key words."""
    if not (0 <= master_seed < 2 ** 64):
        raise ValueError("master seed must fit in 64 bits")
    return master_seed & 0xFFFFFFFF, (master_seed >> 32) & 0xFFFFFFFF


def philox4(c0, c1, c2, c3, k0: int, k1: int):
    """Apply the 10-round Philox4x32 permutation elementwise.

    The counter words may be scalars or broadcastable integer arrays; the
    result is four uint64 arrays (values < 2**32) in lane order x0..x3.
    """
    x0 = np.asarray(c0, dtype=np.uint64)
    x1 = np.asarray(c1, dtype=np.uint64)
    x2 = np.asarray(c2, dtype=np.uint64)
    x3 = np.asarray(c3, dtype=np.uint64)
    x0, x1, x2, x3 = np.broadcast_arrays(x0, x1, x2, x3)
    x0 = x0.copy()
    kk0 = np.uint64(k0)
    kk1 = np.uint64(k1)
    for rnd in range(10):
        p0 = PHILOX_M0 * x0
        p1 = PHILOX_M1 * x2
        hi0 = p0 >> np.uint64(32)
        lo0 = p0 & _MASK32
        hi1 = p1 >> np.uint64(32)
        lo1 = p1 & _MASK32
        x0 = hi1 ^ x1 ^ kk0
        x1 = lo1
        x2 = hi0 ^ x3 ^ kk1
        x3 = lo0
        if rnd < 9:
            kk0 = (kk0 + PHILOX_W0) & _MASK32
            kk1 = (kk1 + PHILOX_W1) & _MASK32
    return x0, x1, x2, x3


def philox4_scalar(ctr: tuple[int, int, int, int], key: tuple[int, int]):
    """Plain-integer reference used by the known-answer tests."""
    x0, x1, x2, x3 = (c & 0xFFFFFFFF for c in ctr)
    k0, k1 = key[0] & 0xFFFFFFFF, key[1] & 0xFFFFFFFF
    for rnd in range(10):
        p0 = 0xD2511F53 * x0
        p1 = 0xCD9E8D57 * x2
        hi0, lo0 = p0 >> 32, p0 & 0xFFFFFFFF
        hi1, lo1 = p1 >> 32, p1 & 0xFFFFFFFF
        x0 = hi1 ^ x1 ^ k0
        x1 = lo1
        x2 = hi0 ^ x3 ^ k1
        x3 = lo0
        if rnd < 9:
            k0 = (k0 + 0x9E3779B9) & 0xFFFFFFFF
            k1 = (k1 + 0xBB67AE85) & 0xFFFFFFFF
    return x0, x1, x2, x3


def u64_words(k0: int, k1: int, c3: int, c2: int, c1: int,
              block0: int, n: int) -> np.ndarray:
    """n consecutive uint64 words of the (c3,c2,c1) substream.

    Word 2*b comes from lanes (x0, x1) of block ``block0+b`` and word
    2*b+1 from lanes (x2, x3): the same order the scalar backend uses.
    """
    if n <= 0:
        return np.empty(0, dtype=np.uint64)
    nblocks = (n + 1) // 2
    c0 = (np.uint64(block0) + np.arange(nblocks, dtype=np.uint64)) & _MASK32
    x0, x1, x2, x3 = philox4(c0, c1, c2, c3, k0, k1)
    lo = x0 | (x1 << np.uint64(32))
    hi = x2 | (x3 << np.uint64(32))
    out = np.empty(2 * nblocks, dtype=np.uint64)
    out[0::2] = lo
    out[1::2] = hi
    return out[:n]


def u32_words(k0: int, k1: int, c3: int, c2: int, c1: int,
              block0: int, n: int) -> np.ndarray:
    """n consecutive uint32 lanes (x0,x1,x2,x3 per block)."""
    if n <= 0:
        return np.empty(0, dtype=np.uint32)
    nblocks = (n + 3) // 4
    c0 = (np.uint64(block0) + np.arange(nblocks, dtype=np.uint64)) & _MASK32
    lanes = philox4(c0, c1, c2, c3, k0, k1)
    out = np.empty(4 * nblocks, dtype=np.uint32)
    for i, lane in enumerate(lanes):
        out[i::4] = lane.astype(np.uint32)
    return out[:n]


def uniforms53(k0: int, k1: int, c3: int, c2: int, c1: int,
               block0: int, n: int) -> np.ndarray:
    """Uniforms strictly inside (0,1): ((w >> 11) + 0.5) * 2**-53."""
    w = u64_words(k0, k1, c3, c2, c1, block0, n)
    return ((w >> np.uint64(11)).astype(np.float64) + 0.5) * _U53_SCALE


def uniform_from_u64(w):
    """Same mapping as :func:`uniforms53`, for words already in hand."""
    w = np.asarray(w, dtype=np.uint64)
    return ((w >> np.uint64(11)).astype(np.float64) + 0.5) * _U53_SCALE
