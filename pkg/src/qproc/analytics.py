"""Exact and closed-form quantities for Quicksort on the fly.

Notation follows the usual one for the algorithm: ``a(n, l)`` is the
expected number of comparisons until the ``l``-th smallest of ``n``
elements is output, ``H_j`` the harmonic numbers.

Exact results use :class:`fractions.Fraction`; the float path (needed for
``n`` in the 10^4 -- 10^6 range) uses a compensated harmonic table.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numba as nb
import numpy as np
from scipy import integrate

FLOAT_HARMONIC_MAX = 10**6


class DomainError(ValueError):
    """Argument outside the domain of a closed-form quantity."""


# ---------------------------------------------------------------------------
# harmonic numbers


@dataclass(frozen=True)
class HarmonicTable:
    """Exact harmonic numbers ``H_1..H_max`` with a float view.

    ``values[j - 1] == H_j``.
    """

    max_index: int
    values: tuple[Fraction, ...]
    floats: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, max_index: int) -> "HarmonicTable":
        if max_index < 1:
            raise DomainError("max_index must be positive")
        vals = []
        h = Fraction(0)
        for j in range(1, max_index + 1):
            h += Fraction(1, j)
            vals.append(h)
        floats = np.array([float(v) for v in vals])
        return cls(max_index, tuple(vals), floats)

    def __getitem__(self, j: int) -> Fraction:
        if j == 0:
            return Fraction(0)
        if not 1 <= j <= self.max_index:
            raise DomainError(f"harmonic index {j} outside 1..{self.max_index}")
        return self.values[j - 1]


_exact_cache: list[Fraction] = [Fraction(0)]


def harmonic(j: int) -> Fraction:
    """Exact ``H_j = sum_{i=1..j} 1/i``."""
    if j < 1:
        raise DomainError(f"harmonic number needs j >= 1, got {j}")
    while len(_exact_cache) <= j:
        k = len(_exact_cache)
        _exact_cache.append(_exact_cache[-1] + Fraction(1, k))
    return _exact_cache[j]


@nb.njit(cache=True)
def _kahan_harmonics(m):
    out = np.empty(m + 1)
    out[0] = 0.0
    s = 0.0
    c = 0.0
    for i in range(1, m + 1):
        y = 1.0 / i - c
        t = s + y
        c = (t - s) - y
        s = t
        out[i] = s
    return out


_float_table = np.zeros(1)


def harmonic_floats(m: int) -> np.ndarray:
    """Array ``h`` with ``h[j] = H_j`` for ``0 <= j <= m`` (``h[0] = 0``)."""
    global _float_table
    if m > FLOAT_HARMONIC_MAX:
        raise DomainError(f"float harmonic table capped at {FLOAT_HARMONIC_MAX}")
    if len(_float_table) <= m:
        size = max(m, 2 * (len(_float_table) - 1), 1024)
        _float_table = _kahan_harmonics(min(size, FLOAT_HARMONIC_MAX))
    return _float_table[: m + 1]


def harmonic_float(j: int) -> float:
    if j < 1:
        raise DomainError(f"harmonic number needs j >= 1, got {j}")
    return float(harmonic_floats(j)[j])


# ---------------------------------------------------------------------------
# expectation a(n, l)


def _check_nl(n: int, l: int) -> None:
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    if l < 0 or l > n:
        raise DomainError(f"l must lie in [0, n], got l={l}, n={n}")


def expected_cost(n: int, l: int) -> Fraction:
    """Closed form ``a(n,l) = 2n + 2(n+1)H_n - 2(n+3-l)H_{n+1-l} - 6l + 6``.

    Returns 0 for ``l = 0`` and ``n <= 1`` where the formula does not give
    the expectation.
    """
    _check_nl(n, l)
    if l == 0 or n <= 1:
        return Fraction(0)
    return 2 * n + 2 * (n + 1) * harmonic(n) - 2 * (n + 3 - l) * harmonic(n + 1 - l) - 6 * l + 6


def expected_cost_float(n: int, l: int) -> float:
    _check_nl(n, l)
    if l == 0 or n <= 1:
        return 0.0
    h = harmonic_floats(n)
    return 2.0 * n + 2.0 * (n + 1) * h[n] - 2.0 * (n + 3 - l) * h[n + 1 - l] - 6.0 * l + 6.0


def quicksort_mean_floats(m: int) -> np.ndarray:
    """``a_j = a(j, j) = 2(j+1)H_j - 4j`` for ``j = 0..m`` as floats."""
    h = harmonic_floats(m)
    j = np.arange(m + 1, dtype=np.float64)
    a = 2.0 * (j + 1.0) * h - 4.0 * j
    a[:2] = 0.0
    return a


@dataclass(frozen=True)
class ExpectationTable:
    """``a(n, l)`` for ``0 <= l <= n <= n_max`` from the expectation recursion."""

    n_max: int
    rows: tuple[tuple[Fraction, ...], ...]

    def a(self, n: int, l: int) -> Fraction:
        _check_nl(n, l)
        if n > self.n_max:
            raise DomainError(f"table covers n <= {self.n_max}, got {n}")
        return self.rows[n][l]

    __call__ = a

    def floats(self, n: int) -> np.ndarray:
        return np.array([float(v) for v in self.rows[n]])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            write_expectation_csv(fh, ((n, l, self.rows[n][l]) for n in range(self.n_max + 1) for l in range(n + 1)))


def write_expectation_csv(fh, entries: Iterable[tuple[int, int, Fraction]]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "l", "a_exact_num", "a_exact_den", "a_float"])
    for n, l, v in entries:
        w.writerow([n, l, v.numerator, v.denominator, repr(float(v))])


def read_expectation_csv(fh) -> dict[tuple[int, int], Fraction]:
    out = {}
    for row in csv.DictReader(fh):
        out[int(row["n"]), int(row["l"])] = Fraction(int(row["a_exact_num"]), int(row["a_exact_den"]))
    return out


def expected_cost_oracle(n_max: int) -> ExpectationTable:
    """Fill ``a(n, l)`` by the expectation recursion in exact arithmetic.

    For ``n >= 2`` and ``1 <= l <= n``::

        a(n,l) = n - 1 + (1/n) sum_{j<=l} (a(j-1,j-1) + a(n-j,l-j))
                       + (1/n) sum_{j>l} a(j-1,l)

    with ``a(0,.) = a(1,.) = 0`` and ``a(n,0) = 0``.  The three sums are
    carried as running prefix sums (along the diagonal, along the column
    ``l`` and along diagonals of fixed offset ``n - l``), so the table costs
    O(n_max^2) fraction operations.
    """
    if n_max < 2:
        raise DomainError("n_max must be at least 2")
    zero = Fraction(0)
    rows: list[list[Fraction]] = [[zero], [zero, zero]]
    # diag_prefix[k] = sum_{r<k} a(r, r)
    diag_prefix = [zero, zero, zero]
    # col_sum[l] = sum_{k=l}^{n-1} a(k, l) for the current n
    col_sum = [zero, zero]  # a(0,0) + a(1,0), a(1,1)
    # off_sum[(d, r)] stays implicit: offd[d][r] = sum_{q<r} a(d+q, q)
    offd: list[list[Fraction]] = [[zero, zero, zero], [zero, zero]]
    for n in range(2, n_max + 1):
        row = [zero] * (n + 1)
        for l in range(1, n + 1):
            d = n - l
            s_left = diag_prefix[l] + offd[d][l]
            s_right = col_sum[l] if l < len(col_sum) else zero
            row[l] = n - 1 + (s_left + s_right) / n
        rows.append(row)
        # roll the running sums forward to n + 1
        col_sum.append(zero)
        for l in range(n + 1):
            col_sum[l] += row[l]
        diag_prefix.append(diag_prefix[-1] + row[n])
        offd.append([zero])
        for l in range(n + 1):
            d = n - l
            lst = offd[d]
            while len(lst) <= l + 1:
                lst.append(zero)
            lst[l + 1] = lst[l] + row[l]
    return ExpectationTable(n_max, tuple(tuple(r) for r in rows))


def expected_cost_bruteforce(n_max: int) -> list[list[Fraction]]:
    """Direct O(n^3) evaluation of the expectation recursion (small n only)."""
    a = [[Fraction(0)] * (n + 1) for n in range(n_max + 1)]
    for n in range(2, n_max + 1):
        for l in range(1, n + 1):
            s = Fraction(0)
            for j in range(1, l + 1):
                s += a[j - 1][j - 1] + a[n - j][l - j]
            for j in range(l + 1, n + 1):
                s += a[j - 1][l]
            a[n][l] = n - 1 + s / n
    return a


# ---------------------------------------------------------------------------
# discrete tolls


def discrete_toll(n: int, l: int, i: int, a=expected_cost) -> Fraction:
    """Toll ``C(n, l, i)`` of the normalized recursion for pivot rank ``i``.

    ``a`` is any callable ``(n, l) -> a(n, l)``; the default closed form
    gives exact fractions, :func:`expected_cost_float` gives floats.
    """
    if n < 2:
        raise DomainError(f"discrete toll needs n >= 2, got {n}")
    if not 1 <= i <= n:
        raise DomainError(f"pivot rank {i} outside 1..{n}")
    if not 0 <= l <= n:
        raise DomainError(f"l={l} outside 0..{n}")
    if l == 0:
        return a(0, 0)  # zero in the caller's number type
    if l < i:
        inner = a(i - 1, l)
    elif l == i:
        inner = a(i - 1, i - 1)
    else:
        inner = a(i - 1, i - 1) + a(n - i, l - i)
    return (n - 1 + inner - a(n, l)) / n


def discrete_toll_float(n: int, l: int, i: int) -> float:
    return float(discrete_toll(n, l, i, a=expected_cost_float))


def quicksort_toll(n: int, i: int) -> Fraction:
    """``C_n(i) = (n - 1 - a_n + a_{i-1} + a_{n-i}) / n`` with ``a_j = a(j, j)``."""
    if n < 2:
        raise DomainError(f"quicksort toll needs n >= 2, got {n}")
    if not 1 <= i <= n:
        raise DomainError(f"pivot rank {i} outside 1..{n}")
    aj = lambda j: expected_cost(j, j)
    return (n - 1 - aj(n) + aj(i - 1) + aj(n - i)) / Fraction(n)


# ---------------------------------------------------------------------------
# limiting tolls


def xlogx(y):
    """``y ln y`` with ``0 ln 0 = 0``; works on scalars and arrays."""
    y = np.asarray(y, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(y > 0.0, y * np.log(np.where(y > 0.0, y, 1.0)), 0.0)
    return out if out.ndim else float(out)


def _check_unit(name: str, v) -> None:
    arr = np.asarray(v, dtype=np.float64)
    if np.any(~(arr >= 0.0)) or np.any(arr > 1.0):
        raise DomainError(f"{name} must lie in [0, 1]")


def toll_limit_point(x):
    """``C(x) = 1 + 2 x ln x + 2 (1-x) ln(1-x)``."""
    _check_unit("x", x)
    x = np.asarray(x, dtype=np.float64)
    out = 1.0 + 2.0 * xlogx(x) + 2.0 * xlogx(1.0 - x)
    return out if np.ndim(out) else float(out)


def toll_limit(t, x):
    """Limit toll ``C(t, x)``; reduces to ``C(x)`` for ``t >= x``."""
    _check_unit("t", t)
    _check_unit("x", x)
    t = np.asarray(t, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    base = toll_limit_point(x)
    gap = np.clip(x - t, 0.0, 1.0)
    extra = 2.0 * (-1.0 + x + xlogx(1.0 - t) - xlogx(1.0 - x) - xlogx(gap))
    out = np.where(t < x, base + extra, base)
    return out if np.ndim(out) else float(out)


@nb.njit(cache=True, inline="always")
def xlogx_nb(y):
    if y <= 0.0:
        return 0.0
    return y * math.log(y)


@nb.njit(cache=True, inline="always")
def toll_limit_nb(t, x):
    c = 1.0 + 2.0 * xlogx_nb(x) + 2.0 * xlogx_nb(1.0 - x)
    if t < x:
        c += 2.0 * (-1.0 + x + xlogx_nb(1.0 - t) - xlogx_nb(1.0 - x) - xlogx_nb(x - t))
    return c


def snap_floor(v: float) -> int:
    """``floor(v)`` that treats values within 1e-9 (relative) of an integer as that integer."""
    r = round(v)
    if abs(v - r) <= 1e-9 * max(1.0, abs(v)):
        return int(r)
    return math.floor(v)


def snap_ceil(v: float) -> int:
    r = round(v)
    if abs(v - r) <= 1e-9 * max(1.0, abs(v)):
        return int(r)
    return math.ceil(v)


def toll_limit_of_discrete(t: float, x: float, n_list: Sequence[int]) -> list[float]:
    """``C(n, max(floor(n t), 1), ceil(n x))`` for each ``n`` in ``n_list``."""
    if t == x:
        raise DomainError("toll convergence requires t != x")
    if not 0.0 < t <= 1.0 or not 0.0 < x < 1.0:
        raise DomainError("need t in (0, 1] and x in (0, 1)")
    out = []
    for n in n_list:
        if n < 2:
            raise DomainError(f"n must be >= 2, got {n}")
        l = max(snap_floor(n * t), 1)
        i = min(max(snap_ceil(n * x), 1), n)
        out.append(discrete_toll_float(n, l, i))
    return out


# ---------------------------------------------------------------------------
# moments and bounds


def split_moment(n: int) -> Fraction:
    """Closed form ``2/3 - 1/n + 1/(3 n^2)`` offered for ``E b(n, I_n)^2``.

    It is exactly the mean of ``((I_n - 1)/n)^2 + ((n - I_n)/n)^2``
    (:func:`split_square_sum_bruteforce`).  With ``b(n, i) = max(i - 1, n - i) / n``
    the true ``E b(n, I_n)^2`` (:func:`split_moment_bruteforce`) is strictly
    smaller for ``n >= 3``; both stay below 2/3.
    """
    if n < 1:
        raise DomainError("n must be positive")
    return Fraction(2, 3) - Fraction(1, n) + Fraction(1, 3 * n * n)


def split_moment_bruteforce(n: int) -> Fraction:
    """Enumerate ``E b(n, I_n)^2 = (1/n) sum_i max(i - 1, n - i)^2 / n^2``."""
    if n < 1:
        raise DomainError("n must be positive")
    total = sum(max(i - 1, n - i) ** 2 for i in range(1, n + 1))
    return Fraction(total, n**3)


def split_square_sum_bruteforce(n: int) -> Fraction:
    """Enumerate ``(1/n) sum_i ((i-1)^2 + (n-i)^2) / n^2``."""
    if n < 1:
        raise DomainError("n must be positive")
    total = sum((i - 1) ** 2 + (n - i) ** 2 for i in range(1, n + 1))
    return Fraction(total, n**3)


@dataclass(frozen=True)
class BoundConstants:
    p: float
    k_p: float
    q_norm_p: float
    bound: float


def lp_bound(p: float, q_norm_p: float) -> BoundConstants:
    """Bound ``(8 + 2^{-1/p} k_p ||Q||_p) / (1 - k_p)`` on the p-norm of the sup of the truncated process."""
    if not p > 1.0:
        raise DomainError("p must exceed 1")
    if q_norm_p < 0:
        raise DomainError("q_norm_p must be nonnegative")
    k_p = (2.0 / (p + 1.0)) ** (1.0 / p)
    bound = (8.0 + 2.0 ** (-1.0 / p) * k_p * q_norm_p) / (1.0 - k_p)
    return BoundConstants(p, k_p, q_norm_p, bound)


def variance_limit(toll=None) -> float:
    """Variance of the limiting Quicksort law, ``3 * int_0^1 C(x)^2 dx``.

    From the fixed point ``Q = U Q1 + (1-U) Q2 + C(U)`` with ``E Q = 0``.
    ``toll`` replaces ``C`` (used for the degenerate check).
    """
    f = toll if toll is not None else toll_limit_point
    val, err = integrate.quad(lambda x: f(x) ** 2, 0.0, 1.0, epsabs=1e-11, epsrel=1e-11, limit=200)
    if err > 1e-8:
        raise ArithmeticError(f"quadrature error estimate {err} above 1e-8")
    return 3.0 * val


VARIANCE_LIMIT_EXACT = 7.0 - 2.0 * math.pi**2 / 3.0


def toll_integral(t: float) -> float:
    """``int_0^1 C(t, x) dx`` by adaptive quadrature (breakpoint at ``x = t``)."""
    pts = [t] if 0.0 < t < 1.0 else None
    val, _ = integrate.quad(lambda x: toll_limit(t, x), 0.0, 1.0, points=pts, epsabs=1e-10, limit=200)
    return val
