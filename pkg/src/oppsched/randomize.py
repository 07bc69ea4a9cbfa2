"""Single randomization variable realized as a seeded bit stream.

A source holds one conceptual uniform draw R in [0,1] whose binary digits are
produced on demand by a counter-based generator: digit i is a pure function of
(seed, i), so any digit can be read in O(1) without sequential state.  Slot
uniforms U_1, U_2, ... are carved out of R by giving slot k the digits at
positions pair(k, 0), pair(k, 1), ... where pair is the Cantor pairing
function; distinct slots therefore read disjoint digit sets.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import InputError

DEFAULT_DEPTH = 53

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

# 2^-(i+1) for i = 0..depth-1; subset sums of these are exact in float64.
_BIT_WEIGHTS = 0.5 ** (1.0 + np.arange(DEFAULT_DEPTH))

_U64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def cantor_pair(k, i):
    """Cantor pairing (k+i)(k+i+1)/2 + i, injective on pairs of nonnegative ints."""
    with np.errstate(over="ignore"):
        t = np.asarray(k, dtype=np.uint64) + np.asarray(i, dtype=np.uint64)
        return ((t * (t + np.uint64(1))) >> np.uint64(1)) + np.asarray(i, dtype=np.uint64)


def bit_positions(k: int, depth: int = DEFAULT_DEPTH) -> np.ndarray:
    """Digit positions of R consumed by the slot-k uniform."""
    if k < 1:
        raise InputError(f"slot index must be >= 1, got {k}")
    ks = np.full(depth, k, dtype=np.uint64)
    return cantor_pair(ks, np.arange(depth, dtype=np.uint64))


def _mix64(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):  # 64-bit wraparound is the point
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class RandSource:
    """One randomization variable, addressed by 64-bit seed.

    ``bit(i)`` is the i-th binary digit of the conceptual R; it depends only on
    (seed, i), so values reproduce across runs and platforms.
    """

    seed: int

    def __post_init__(self):
        object.__setattr__(self, "seed", self.seed & 0xFFFFFFFFFFFFFFFF)

    def _words(self, idx: np.ndarray) -> np.ndarray:
        # Counter-based: 64-bit word j mixes seed + (j+1)*golden.
        s = np.uint64(self.seed)
        with np.errstate(over="ignore"):
            return _mix64(s + (idx + np.uint64(1)) * _GOLDEN)

    def bits(self, positions: np.ndarray) -> np.ndarray:
        """Digits of R at the given positions, as a 0/1 array."""
        positions = np.asarray(positions, dtype=np.uint64)
        words = self._words(positions >> np.uint64(6))
        return ((words >> (positions & np.uint64(63))) & np.uint64(1)).astype(np.float64)

    def bit(self, i: int) -> int:
        return int(self.bits(np.array([i], dtype=np.uint64))[0])

    def uniform(self, k: int, depth: int = DEFAULT_DEPTH) -> float:
        """The slot-k uniform U_k in [0, 1)."""
        return slot_uniform(self, k, depth)

    def uniforms(self, count: int, depth: int = DEFAULT_DEPTH) -> np.ndarray:
        """U_1..U_count as one array (same values as repeated ``uniform`` calls)."""
        return slot_uniforms(self, np.arange(1, count + 1, dtype=np.uint64), depth)

    def stream(self, tag: str) -> "RandSource":
        """An unrelated child source addressed by a stable name."""
        digest = hashlib.blake2b(tag.encode(), digest_size=8).digest()
        child = np.uint64(self.seed) ^ np.uint64(int.from_bytes(digest, "big"))
        with np.errstate(over="ignore"):
            return RandSource(int(_mix64(child + _GOLDEN)))


def slot_uniform(src: RandSource, k: int, depth: int = DEFAULT_DEPTH) -> float:
    """U_k = sum of bit(pair(k, i)) * 2^-(i+1) over i < depth."""
    bits = src.bits(bit_positions(k, depth))
    return float(bits @ _weights(depth))


# Seed-independent word multipliers and bit offsets for slots 1..n, cached
# because long runs reuse the same slot layout with different seeds.
_BATCH_CACHE: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}


def _contiguous_tables(count: int, depth: int) -> tuple[np.ndarray, np.ndarray]:
    key = (count, depth)
    hit = _BATCH_CACHE.get(key)
    if hit is None:
        ks = np.arange(1, count + 1, dtype=np.uint64)
        i = np.arange(depth, dtype=np.uint64)
        pos = cantor_pair(ks[:, None], i[None, :]).ravel()
        with np.errstate(over="ignore"):
            w_base = ((pos >> np.uint64(6)) + np.uint64(1)) * _GOLDEN
        offsets = (pos & np.uint64(63)).astype(np.uint8)
        if len(_BATCH_CACHE) >= 3:
            _BATCH_CACHE.clear()
        _BATCH_CACHE[key] = hit = (w_base, offsets)
    return hit


_CHUNK = 1 << 18


def slot_uniforms(src: RandSource, ks: np.ndarray, depth: int = DEFAULT_DEPTH) -> np.ndarray:
    """Vectorized ``slot_uniform`` over an array of slot indices."""
    ks = np.asarray(ks, dtype=np.uint64)
    n = ks.size
    if n and int(ks.min()) < 1:
        raise InputError("slot indices must be >= 1")
    if n > _CHUNK:  # bound the working set for very long sweeps
        out = np.empty(n)
        for i in range(0, n, _CHUNK):
            out[i : i + _CHUNK] = slot_uniforms(src, ks[i : i + _CHUNK], depth)
        return out
    if n >= 4096 and ks[0] == 1 and ks[-1] == n and bool(
        (ks == np.arange(1, n + 1, dtype=np.uint64)).all()
    ):
        w_base, offsets = _contiguous_tables(n, depth)
        with np.errstate(over="ignore"):
            words = _mix64(np.uint64(src.seed) + w_base)
        bits = ((words >> offsets) & np.uint64(1)).astype(np.float64)
        return bits.reshape(n, depth) @ _weights(depth)
    i = np.arange(depth, dtype=np.uint64)
    positions = cantor_pair(ks[:, None], i[None, :])
    bits = src.bits(positions.ravel()).reshape(n, depth)
    return bits @ _weights(depth)


def _weights(depth: int) -> np.ndarray:
    if depth == DEFAULT_DEPTH:
        return _BIT_WEIGHTS
    return 0.5 ** (1.0 + np.arange(depth))


def uniform_across_seeds(seeds, k: int, depth: int = DEFAULT_DEPTH) -> np.ndarray:
    """U_k under many seeds at once; equals RandSource(seed).uniform(k) per entry.

    Meant for statistical audits that sample the slot-k uniform across a
    population of sources.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    pos = bit_positions(k, depth)
    offs = pos & np.uint64(63)
    with np.errstate(over="ignore"):
        base = ((pos >> np.uint64(6)) + np.uint64(1)) * _GOLDEN
        words = _mix64(seeds[:, None] + base[None, :])
    bits = ((words >> offs[None, :]) & np.uint64(1)).astype(np.float64)
    return bits @ _weights(depth)


def draw_option(u: float, weights) -> int:
    """Inverse-CDF index of u under the given simplex weights; ties go low.

    Returns the first index i with cumsum(weights)[i] >= u.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise InputError("weights must be a nonempty vector")
    if np.any(w < -1e-15):
        raise InputError("weights must be nonnegative")
    total = float(w.sum())
    if abs(total - 1.0) > 1e-9:
        raise InputError(f"weights must sum to 1 within 1e-9, got {total!r}")
    cum = np.cumsum(w)
    cum[-1] = max(cum[-1], 1.0)  # guard the top edge against rounding
    return int(np.searchsorted(cum, u, side="left"))
