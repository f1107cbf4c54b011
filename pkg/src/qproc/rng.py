"""Deterministic 64-bit hashing used for every random draw in the package.

Two consumers share the same finalizer:

* the tree of uniforms ``U^v`` indexed by binary-tree addresses, and
* the per-split pivot stream of the instrumented sorter.

Pure-Python versions are the reference; the ``*_nb`` twins are numba
kernels and must agree bit for bit.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numba as nb
import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TWO64 = float(2**64)
#: largest double strictly below one
ONE_BELOW = float(np.nextafter(1.0, 0.0))


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit word."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def to_unit(z: int) -> float:
    """Map a 64-bit word to ``(z + 1) / (2**64 + 1)`` in floating point, kept inside (0, 1)."""
    if z >= MASK64:
        return ONE_BELOW
    return min(float(z + 1) / _TWO64, ONE_BELOW)


def child_state(state: int, symbol: int, position: int) -> int:
    return mix64(state ^ ((symbol + GOLDEN * position) & MASK64))


def address_state(seed: int, address: Iterable[int]) -> int:
    state = seed & MASK64
    for pos, c in enumerate(address, start=1):
        if c not in (1, 2):
            raise ValueError(f"address symbols must be 1 or 2, got {c!r}")
        state = child_state(state, c, pos)
    return state


def uniform_at(seed: int, address: Sequence[int] = ()) -> float:
    """Uniform ``U^v`` attached to the vertex ``address`` of the tree seeded by ``seed``.

    The empty address is the root.  Symbol ``c`` at 1-based depth ``p``
    updates the state as ``mix64(state ^ (c + GOLDEN * p))``.
    """
    return to_unit(mix64(address_state(seed, address)))


def base_from_seed(seed: int) -> int:
    """Batch base ``mix64(seed)``.

    XOR-ing a raw small seed with the sample index would make nearby seeds
    (9 and 10, say) enumerate the same set of sample seeds in permuted order.
    """
    return mix64(seed & MASK64)


def sample_seed(seed: int, index: int) -> int:
    """Seed of the ``index``-th Monte-Carlo sample: ``mix64(base ^ index)``."""
    return mix64(base_from_seed(seed) ^ index)


def stream_word(seed: int, k: int) -> int:
    """``k``-th word (0-based) of the counter-based SplitMix64 stream keyed by ``seed``."""
    return mix64((seed + (k + 1) * GOLDEN) & MASK64)


def scaled_index(word: int, s: int) -> int:
    """Map a 64-bit word to ``{1, ..., s}`` by the high half of ``word * s``."""
    return ((word * s) >> 64) + 1


# ---------------------------------------------------------------------------
# numba twins

_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_U_GOLDEN = np.uint64(GOLDEN)
_U_MAX = np.uint64(MASK64)
_U_ONE = np.uint64(1)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U32 = np.uint64(32)
_LO32 = np.uint64(0xFFFFFFFF)


@nb.njit(cache=True, inline="always")
def mix64_nb(z):
    z = (z ^ (z >> _U30)) * _U_M1
    z = (z ^ (z >> _U27)) * _U_M2
    return z ^ (z >> _U31)


@nb.njit(cache=True, inline="always")
def to_unit_nb(z):
    if z == _U_MAX:
        return ONE_BELOW
    u = np.float64(z + _U_ONE) / _TWO64
    if u > ONE_BELOW:
        return ONE_BELOW
    return u


@nb.njit(cache=True, inline="always")
def child_state_nb(state, symbol, position):
    return mix64_nb(state ^ (np.uint64(symbol) + _U_GOLDEN * np.uint64(position)))


@nb.njit(cache=True, inline="always")
def uniform_nb(state):
    return to_unit_nb(mix64_nb(state))


@nb.njit(cache=True, inline="always")
def stream_word_nb(seed, k):
    return mix64_nb(seed + np.uint64(k + 1) * _U_GOLDEN)


@nb.njit(cache=True, inline="always")
def scaled_index_nb(word, s):
    # high 64 bits of word * s via 32-bit limbs
    us = np.uint64(s)
    a_hi, a_lo = word >> _U32, word & _LO32
    b_hi, b_lo = us >> _U32, us & _LO32
    lo_lo = a_lo * b_lo
    hi_lo = a_hi * b_lo
    lo_hi = a_lo * b_hi
    cross = (lo_lo >> _U32) + (hi_lo & _LO32) + lo_hi
    hi = a_hi * b_hi + (hi_lo >> _U32) + (cross >> _U32)
    return np.int64(hi) + 1


def sample_seeds(seed: int, count: int) -> np.ndarray:
    """Per-sample seeds ``mix64(base ^ i)``, ``i = 0..count-1``, with ``base = mix64(seed)``."""
    base = base_from_seed(seed)
    return np.array([mix64(base ^ i) for i in range(count)], dtype=np.uint64)
