"""Instrumented Quicksort on the fly.

The simulator never touches keys: a sublist is just its size, and a split
draws the pivot rank uniformly from ``{1..s}``.  The worklist is an explicit
stack whose top is the leftmost pending item, so the leftmost sublist is
always finished first and order statistics come out in increasing order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numba as nb
import numpy as np

from .analytics import DomainError, expected_cost_float, snap_floor
from .rng import MASK64, scaled_index, scaled_index_nb, stream_word, stream_word_nb

_PIVOT = -1


@dataclass(frozen=True)
class ComparisonTrace:
    """``x[l]`` = comparisons made when the ``l``-th smallest is output, ``x[0] = 0``."""

    n: int
    x: np.ndarray

    def check(self) -> list[str]:
        """Names of violated structural invariants (empty when the trace is valid)."""
        return trace_violations(self.x[None, :], self.n)[0]


def run_on_the_fly(n: int, seed: int) -> ComparisonTrace:
    """Run the algorithm on ``n`` elements with pivot stream keyed by ``seed``."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    x = _run_kernel(n, np.uint64(seed & MASK64))
    return ComparisonTrace(n, x)


def run_on_the_fly_py(n: int, seed: int) -> ComparisonTrace:
    """Pure-Python twin of :func:`run_on_the_fly`, used to cross-check the kernel."""
    x = [0] * (n + 1)
    stack = [n] if n > 0 else []
    comparisons = 0
    emitted = 0
    splits = 0
    while stack:
        s = stack.pop()
        if s == _PIVOT or s == 1:
            emitted += 1
            x[emitted] = comparisons
        elif s >= 2:
            comparisons += s - 1
            i = scaled_index(stream_word(seed & MASK64, splits), s)
            splits += 1
            stack.extend((s - i, _PIVOT, i - 1))
    return ComparisonTrace(n, np.array(x, dtype=np.int64))


@nb.njit(cache=True)
def _run_into(n, seed, x, stack):
    x[0] = 0
    top = 0
    if n > 0:
        stack[0] = n
        top = 1
    comparisons = 0
    emitted = 0
    splits = 0
    while top > 0:
        top -= 1
        s = stack[top]
        if s == -1 or s == 1:
            emitted += 1
            x[emitted] = comparisons
        elif s >= 2:
            comparisons += s - 1
            i = scaled_index_nb(stream_word_nb(seed, splits), s)
            splits += 1
            stack[top] = s - i
            stack[top + 1] = -1
            stack[top + 2] = i - 1
            top += 3


@nb.njit(cache=True)
def _run_kernel(n, seed):
    x = np.zeros(n + 1, dtype=np.int64)
    stack = np.empty(2 * n + 3, dtype=np.int64)
    _run_into(n, seed, x, stack)
    return x


@nb.njit(cache=True, nogil=True)
def _batch_kernel(n, seeds):
    out = np.zeros((seeds.shape[0], n + 1), dtype=np.int64)
    stack = np.empty(2 * n + 3, dtype=np.int64)
    for k in range(seeds.shape[0]):
        _run_into(n, seeds[k], out[k], stack)
    return out


def run_batch(n: int, seeds: np.ndarray) -> np.ndarray:
    """Traces for every seed; row ``k`` is ``x`` for ``seeds[k]``."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    return _batch_kernel(n, np.asarray(seeds, dtype=np.uint64))


def trace_violations(xs: np.ndarray, n: int) -> list[list[str]]:
    """Per-row list of violated invariants for a batch of traces."""
    xs = np.atleast_2d(xs)
    bad_monotone = np.any(np.diff(xs, axis=1) < 0, axis=1)
    bad_start = xs[:, 0] != 0
    if n >= 2:
        bad_tail = xs[:, n] != xs[:, n - 1]
    else:
        bad_tail = np.any(xs != 0, axis=1)
    bad_cap = xs[:, -1] > n * (n - 1) // 2
    names = ("monotone", "x0_zero", "tail_repeat", "worst_case_cap")
    out = []
    for row in zip(bad_monotone, bad_start, bad_tail, bad_cap):
        out.append([name for name, b in zip(names, row) if b])
    return out


@dataclass(frozen=True)
class NormalizedPath:
    n: int
    grid: np.ndarray
    values: np.ndarray


def grid_indices(n: int, grid: Sequence[float]) -> np.ndarray:
    """``floor(n t)`` for each grid point, with a guard against float fuzz."""
    g = np.asarray(grid, dtype=np.float64)
    if np.any(~(g >= 0.0)) or np.any(g > 1.0):
        raise DomainError("grid points must lie in [0, 1]")
    return np.array([snap_floor(n * t) for t in g], dtype=np.int64)


def mean_row(n: int) -> np.ndarray:
    """``a(n, l)`` for ``l = 0..n`` as floats."""
    return np.array([expected_cost_float(n, l) for l in range(n + 1)])


def normalize(trace: ComparisonTrace, grid: Sequence[float]) -> NormalizedPath:
    """Right-continuous step extension ``Y_n(t) = (x[floor(nt)] - a(n, floor(nt))) / n``."""
    n = trace.n
    idx = grid_indices(n, grid)
    if n == 0:
        vals = np.zeros(len(idx))
    else:
        a = mean_row(n)
        vals = (trace.x[idx] - a[idx]) / n
    return NormalizedPath(n, np.asarray(grid, dtype=np.float64), vals)


def normalize_batch(n: int, xs: np.ndarray, grid: Sequence[float]) -> np.ndarray:
    """Normalized values, shape ``(len(xs), len(grid))``."""
    idx = grid_indices(n, grid)
    if n == 0:
        return np.zeros((len(xs), len(idx)))
    a = mean_row(n)
    return (xs[:, idx] - a[idx]) / n


def write_trace_csv(fh, trace: ComparisonTrace) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["l", "x"])
    for l, v in enumerate(trace.x):
        w.writerow([l, int(v)])


def write_batch_csv(fh, seeds: Sequence[int], xs: np.ndarray) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["seed", "l", "x"])
    for seed, row in zip(seeds, xs):
        for l, v in enumerate(row):
            w.writerow([int(seed), l, int(v)])


def read_trace_csv(fh) -> ComparisonTrace:
    rows = list(csv.DictReader(fh))
    x = np.array([int(r["x"]) for r in sorted(rows, key=lambda r: int(r["l"]))], dtype=np.int64)
    return ComparisonTrace(len(x) - 1, x)
