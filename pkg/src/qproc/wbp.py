"""Weighted branching process on the binary tree ``{1,2}*``.

Every vertex ``v`` carries a uniform ``U^v`` drawn from
:class:`UniformTreeSource`.  From the same tree we evaluate

* the discrete normalized Quicksort cost ``Q_n^v`` (exact finite recursion),
* the discrete process ``Y_n(t)`` with pivot ranks ``I = ceil(n U^v)``,
* the limit process ``Y(t)`` truncated after ``depth_m`` generations, with
  the limit Quicksort variable replaced by ``Q^v_{n_star}``.

Because discrete and limit evaluations read uniforms at identical addresses,
evaluating both on one source gives the coupling used to estimate
``E (Y_n(t) - Y(t))^2``.

Grid evaluation descends once per sample: at a vertex the grid points that
fall left of the split form a prefix of the (sorted) grid, so every vertex
handles one contiguous index range and each ``Q^{v1}`` is computed once.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numba as nb
import numpy as np

from .analytics import (
    DomainError,
    harmonic_floats,
    quicksort_mean_floats,
    snap_floor,
    toll_limit_nb,
)
from .rng import MASK64, address_state, child_state_nb, sample_seeds, uniform_at, uniform_nb

DEFAULT_N_STAR = 2**14
DEFAULT_DEPTH = 30


def default_grid(points: int = 64) -> np.ndarray:
    """Dyadic grid ``k / points``, ``k = 1..points``."""
    return np.arange(1, points + 1, dtype=np.float64) / points


@dataclass(frozen=True)
class EvalConfig:
    depth_m: int = DEFAULT_DEPTH
    n_star: int = DEFAULT_N_STAR
    grid: np.ndarray = field(default_factory=default_grid)

    def __post_init__(self):
        if self.depth_m < 0:
            raise DomainError("depth_m must be nonnegative")
        if self.n_star < 1:
            raise DomainError("n_star must be positive")
        g = np.asarray(self.grid, dtype=np.float64)
        if g.ndim != 1 or np.any(np.diff(g) < 0):
            raise DomainError("grid must be a sorted 1-d sequence")
        object.__setattr__(self, "grid", g)


class UniformTreeSource:
    """Deterministic map from vertex addresses to uniforms in (0, 1)."""

    def __init__(self, seed: int):
        self.seed = seed & MASK64

    def uniform(self, address: Sequence[int] = ()) -> float:
        return uniform_at(self.seed, address)

    def state(self, address: Sequence[int] = ()) -> np.uint64:
        return np.uint64(address_state(self.seed, address))

    def __repr__(self) -> str:
        return f"UniformTreeSource(seed={self.seed:#x})"


# ---------------------------------------------------------------------------
# kernels


@nb.njit(cache=True)
def _discrete_q(state, depth, n, amean, st_state, st_depth, st_n, st_w):
    if n <= 1:
        return 0.0
    total = 0.0
    st_state[0] = state
    st_depth[0] = depth
    st_n[0] = n
    st_w[0] = 1.0
    top = 1
    while top > 0:
        top -= 1
        s = st_state[top]
        d = st_depth[top]
        m = st_n[top]
        w = st_w[top]
        u = uniform_nb(s)
        i = np.int64(math.ceil(m * u))
        if i < 1:
            i = 1
        elif i > m:
            i = m
        total += w * (m - 1 - amean[m] + amean[i - 1] + amean[m - i]) / m
        if i - 1 >= 2:
            st_state[top] = child_state_nb(s, 1, d + 1)
            st_depth[top] = d + 1
            st_n[top] = i - 1
            st_w[top] = w * (i - 1) / m
            top += 1
        if m - i >= 2:
            st_state[top] = child_state_nb(s, 2, d + 1)
            st_depth[top] = d + 1
            st_n[top] = m - i
            st_w[top] = w * (m - i) / m
            top += 1
    return total


@nb.njit(cache=True, inline="always")
def _a_float(m, l, h):
    if l == 0 or m <= 1:
        return 0.0
    return 2.0 * m + 2.0 * (m + 1) * h[m] - 2.0 * (m + 3 - l) * h[m + 1 - l] - 6.0 * l + 6.0


@nb.njit(cache=True, inline="always")
def _discrete_toll(m, l, i, h):
    if l == 0:
        return 0.0
    if l < i:
        inner = _a_float(i - 1, l, h)
    elif l == i:
        inner = _a_float(i - 1, i - 1, h)
    else:
        inner = _a_float(i - 1, i - 1, h) + _a_float(m - i, l - i, h)
    return (m - 1 + inner - _a_float(m, l, h)) / m


@nb.njit(cache=True)
def _discrete_descent(state, n, ls, out, h, amean, qbuf_s, qbuf_d, qbuf_n, qbuf_w, r_state, r_depth, r_n, r_w, r_lo, r_hi):
    """Add ``Y_n`` at integer times ``ls`` (sorted, modified in place) to ``out``."""
    g = ls.shape[0]
    if n <= 1 or g == 0:
        return
    r_state[0] = state
    r_depth[0] = 0
    r_n[0] = n
    r_w[0] = 1.0
    r_lo[0] = 0
    r_hi[0] = g
    top = 1
    while top > 0:
        top -= 1
        s = r_state[top]
        d = r_depth[top]
        m = r_n[top]
        w = r_w[top]
        lo = r_lo[top]
        hi = r_hi[top]
        u = uniform_nb(s)
        i = np.int64(math.ceil(m * u))
        if i < 1:
            i = 1
        elif i > m:
            i = m
        p = hi
        for k in range(lo, hi):
            out[k] += w * _discrete_toll(m, ls[k], i, h)
            if p == hi and ls[k] >= i:
                p = k
        c1 = child_state_nb(s, 1, d + 1)
        if p < hi:
            q = _discrete_q(c1, d + 1, i - 1, amean, qbuf_s, qbuf_d, qbuf_n, qbuf_w)
            for k in range(p, hi):
                out[k] += w * (i - 1) / m * q
                ls[k] -= i
            if m - i >= 2:
                r_state[top] = child_state_nb(s, 2, d + 1)
                r_depth[top] = d + 1
                r_n[top] = m - i
                r_w[top] = w * (m - i) / m
                r_lo[top] = p
                r_hi[top] = hi
                top += 1
        if p > lo and i - 1 >= 2:
            r_state[top] = c1
            r_depth[top] = d + 1
            r_n[top] = i - 1
            r_w[top] = w * (i - 1) / m
            r_lo[top] = lo
            r_hi[top] = p
            top += 1


@nb.njit(cache=True)
def _limit_descent(state, ts, depth_m, n_star, gen, amean, qbuf_s, qbuf_d, qbuf_n, qbuf_w, r_state, r_depth, r_w, r_lo, r_hi):
    """Add generation-wise terms of the truncated limit process to ``gen[k, d]``.

    ``ts`` holds sorted times in [0, 1] and is overwritten with local times.
    """
    g = ts.shape[0]
    if depth_m <= 0 or g == 0:
        return
    r_state[0] = state
    r_depth[0] = 0
    r_w[0] = 1.0
    r_lo[0] = 0
    r_hi[0] = g
    top = 1
    while top > 0:
        top -= 1
        s = r_state[top]
        d = r_depth[top]
        w = r_w[top]
        lo = r_lo[top]
        hi = r_hi[top]
        u = uniform_nb(s)
        p = hi
        for k in range(lo, hi):
            gen[k, d] += w * toll_limit_nb(ts[k], u)
            if p == hi and ts[k] >= u:
                p = k
        c1 = child_state_nb(s, 1, d + 1)
        deeper = d + 1 < depth_m
        if p < hi:
            q = _discrete_q(c1, d + 1, n_star, amean, qbuf_s, qbuf_d, qbuf_n, qbuf_w)
            for k in range(p, hi):
                gen[k, d] += w * u * q
                ts[k] = (ts[k] - u) / (1.0 - u)
            if deeper:
                r_state[top] = child_state_nb(s, 2, d + 1)
                r_depth[top] = d + 1
                r_w[top] = w * (1.0 - u)
                r_lo[top] = p
                r_hi[top] = hi
                top += 1
        if p > lo:
            for k in range(lo, p):
                ts[k] = ts[k] / u
            if deeper:
                r_state[top] = c1
                r_depth[top] = d + 1
                r_w[top] = w * u
                r_lo[top] = lo
                r_hi[top] = p
                top += 1


@nb.njit(cache=True, nogil=True)
def _batch_q(seeds, n, amean):
    out = np.zeros(seeds.shape[0])
    size = max(n, 2) + 2
    bs = np.empty(size, dtype=np.uint64)
    bd = np.empty(size, dtype=np.int64)
    bn = np.empty(size, dtype=np.int64)
    bw = np.empty(size)
    for k in range(seeds.shape[0]):
        out[k] = _discrete_q(seeds[k], 0, n, amean, bs, bd, bn, bw)
    return out


@nb.njit(cache=True, nogil=True)
def _batch_discrete(seeds, n, ls0, h, amean):
    m = seeds.shape[0]
    g = ls0.shape[0]
    out = np.zeros((m, g))
    size = max(n, 2) + 2
    bs = np.empty(size, dtype=np.uint64)
    bd = np.empty(size, dtype=np.int64)
    bn = np.empty(size, dtype=np.int64)
    bw = np.empty(size)
    rs = np.empty(g + 1, dtype=np.uint64)
    rd = np.empty(g + 1, dtype=np.int64)
    rn = np.empty(g + 1, dtype=np.int64)
    rw = np.empty(g + 1)
    rlo = np.empty(g + 1, dtype=np.int64)
    rhi = np.empty(g + 1, dtype=np.int64)
    ls = np.empty(g, dtype=np.int64)
    for k in range(m):
        ls[:] = ls0
        _discrete_descent(seeds[k], n, ls, out[k], h, amean, bs, bd, bn, bw, rs, rd, rn, rw, rlo, rhi)
    return out


@nb.njit(cache=True, nogil=True)
def _batch_limit(seeds, ts0, depth_m, n_star, amean):
    m = seeds.shape[0]
    g = ts0.shape[0]
    gen = np.zeros((m, g, max(depth_m, 1)))
    size = max(n_star, 2) + 2
    bs = np.empty(size, dtype=np.uint64)
    bd = np.empty(size, dtype=np.int64)
    bn = np.empty(size, dtype=np.int64)
    bw = np.empty(size)
    rs = np.empty(g + 1, dtype=np.uint64)
    rd = np.empty(g + 1, dtype=np.int64)
    rw = np.empty(g + 1)
    rlo = np.empty(g + 1, dtype=np.int64)
    rhi = np.empty(g + 1, dtype=np.int64)
    ts = np.empty(g)
    for k in range(m):
        ts[:] = ts0
        _limit_descent(seeds[k], ts, depth_m, n_star, gen[k], amean, bs, bd, bn, bw, rs, rd, rw, rlo, rhi)
    return gen


# ---------------------------------------------------------------------------
# tables shared by the kernels


def _tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    m = max(n, 2)
    return harmonic_floats(m + 1).copy(), quicksort_mean_floats(m)


def _sorted_grid(grid) -> tuple[np.ndarray, np.ndarray]:
    g = np.asarray(grid, dtype=np.float64).ravel()
    order = np.argsort(g, kind="stable")
    return g[order], order


def _check_times(g: np.ndarray, open_left: bool) -> None:
    if np.any(~(g >= 0.0)) or np.any(g > 1.0):
        raise DomainError("times must lie in [0, 1]")
    if open_left and np.any(g <= 0.0):
        raise DomainError("limit process evaluated on (0,1] only")


def _seed_array(seeds) -> np.ndarray:
    return np.asarray(seeds, dtype=np.uint64).ravel()


# ---------------------------------------------------------------------------
# batch API


def batch_discrete_q(seeds, n: int) -> np.ndarray:
    """``Q_n`` at the root of each seeded tree."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    _, amean = _tables(n)
    return _batch_q(_seed_array(seeds), n, amean)


def batch_limit_q(seeds, cfg: EvalConfig) -> np.ndarray:
    return batch_discrete_q(seeds, cfg.n_star)


def batch_discrete_process(seeds, grid, n: int) -> np.ndarray:
    """``Y_n`` on ``grid`` for each tree; shape ``(len(seeds), len(grid))``."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    g, order = _sorted_grid(grid)
    _check_times(g, open_left=False)
    ls = np.array([snap_floor(n * t) for t in g], dtype=np.int64)
    h, amean = _tables(n)
    vals = _batch_discrete(_seed_array(seeds), n, ls, h, amean)
    out = np.empty_like(vals)
    out[:, order] = vals
    return out


def batch_limit_generations(seeds, grid, cfg: EvalConfig) -> np.ndarray:
    """Generation-wise terms ``S_d(t)`` of the truncated limit process.

    Shape ``(len(seeds), len(grid), depth_m)``; summing the last axis gives
    ``R_{depth_m}(t)``.
    """
    g, order = _sorted_grid(grid)
    _check_times(g, open_left=True)
    _, amean = _tables(cfg.n_star)
    gen = _batch_limit(_seed_array(seeds), g, cfg.depth_m, cfg.n_star, amean)
    if cfg.depth_m == 0:
        gen = gen[:, :, :0]
    out = np.empty_like(gen)
    out[:, order, :] = gen
    return out


def batch_limit_process(seeds, grid, cfg: EvalConfig) -> np.ndarray:
    """Truncated limit process ``R_{depth_m}`` on ``grid``; shape ``(len(seeds), len(grid))``."""
    return batch_limit_generations(seeds, grid, cfg).sum(axis=2)


def batch_coupled(seeds, grid, n: int, cfg: EvalConfig) -> tuple[np.ndarray, np.ndarray]:
    """``(Y_n, Y)`` on the same trees."""
    return batch_discrete_process(seeds, grid, n), batch_limit_process(seeds, grid, cfg)


def coupled_distance(seeds, t: float, n_list: Sequence[int], cfg: EvalConfig) -> dict[int, float]:
    """``D(n) = sqrt(mean (Y_n(t) - Y(t))^2)`` over the seeded trees, for each ``n``."""
    y = batch_limit_process(seeds, [t], cfg)[:, 0]
    out = {}
    for n in n_list:
        yn = batch_discrete_process(seeds, [t], n)[:, 0]
        out[n] = float(np.sqrt(np.mean((yn - y) ** 2)))
    return out


def increment_norms(seed_count: int, cfg: EvalConfig, m_max: int, base_seed: int = 0) -> np.ndarray:
    """Monte-Carlo ``b_m^2 = E sup_grid S_m(t)^2`` for ``m = 0..m_max``.

    ``S_m = R_{m+1} - R_m`` is the generation-``m`` term of the descent.
    """
    if m_max > cfg.depth_m - 1:
        raise DomainError("m_max must be below depth_m (S_m needs R_{m+1})")
    seeds = sample_seeds(base_seed, seed_count)
    sub = EvalConfig(depth_m=m_max + 1, n_star=cfg.n_star, grid=cfg.grid)
    gen = batch_limit_generations(seeds, cfg.grid, sub)
    return np.mean(np.max(gen**2, axis=1), axis=0)


def sup_norm_moment(seeds, cfg: EvalConfig) -> float:
    """Monte-Carlo ``E (sup_grid |R_{depth_m}|)^2``."""
    r = batch_limit_process(seeds, cfg.grid, cfg)
    return float(np.mean(np.max(np.abs(r), axis=1) ** 2))


# ---------------------------------------------------------------------------
# single evaluations


def _one(seed_state) -> np.ndarray:
    return np.array([seed_state], dtype=np.uint64)


def discrete_q(src: UniformTreeSource, v: Sequence[int], n: int) -> float:
    """``Q_n^v``: normalized Quicksort cost on the subtree rooted at ``v``."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    _, amean = _tables(n)
    size = max(n, 2) + 2
    bufs = (
        np.empty(size, dtype=np.uint64),
        np.empty(size, dtype=np.int64),
        np.empty(size, dtype=np.int64),
        np.empty(size),
    )
    return float(_discrete_q(src.state(v), len(v), n, amean, *bufs))


def limit_q(src: UniformTreeSource, v: Sequence[int], cfg: EvalConfig) -> float:
    """Surrogate ``Q^v ~ Q^v_{n_star}`` for the limit Quicksort variable."""
    return discrete_q(src, v, cfg.n_star)


def eval_discrete_process(src: UniformTreeSource, t: float, n: int) -> float:
    if not 0.0 <= t <= 1.0:
        raise DomainError("t must lie in [0, 1]")
    return float(batch_discrete_process(_one(src.seed), [t], n)[0, 0])


def eval_limit_process(src: UniformTreeSource, t: float, cfg: EvalConfig) -> float:
    if not 0.0 < t <= 1.0:
        raise DomainError("limit process evaluated on (0,1] only")
    return float(batch_limit_process(_one(src.seed), [t], cfg)[0, 0])


def coupled_eval(src: UniformTreeSource, t: float, n: int, cfg: EvalConfig) -> tuple[float, float]:
    if n < 2:
        raise DomainError("n must be >= 2")
    return eval_discrete_process(src, t, n), eval_limit_process(src, t, cfg)


# ---------------------------------------------------------------------------
# CSV exports


def write_samples_csv(fh, seeds, grid, n, values) -> None:
    """Rows ``seed,t,n,value``; ``n`` is ``inf`` for the limit process."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["seed", "t", "n", "value"])
    label = "inf" if n is None or n == math.inf else str(int(n))
    for seed, row in zip(seeds, values):
        for t, v in zip(grid, row):
            w.writerow([int(seed), repr(float(t)), label, repr(float(v))])


def write_coupled_csv(fh, seeds, grid, n, y_n, y_lim) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["seed", "t", "n", "y_n", "y_limit", "diff"])
    for seed, rn, rl in zip(seeds, y_n, y_lim):
        for t, a, b in zip(grid, rn, rl):
            w.writerow([int(seed), repr(float(t)), int(n), repr(float(a)), repr(float(b)), repr(float(a - b))])
