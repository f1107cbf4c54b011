"""Slow recursive evaluators written directly from the process recursions.

They operate on explicit vertex addresses, use the time-based form of the
recursions (rather than the integer bookkeeping of the kernels in
:mod:`qproc.wbp`) and can record every address whose uniform they read.
Intended for cross-checks on small trees.
"""

from __future__ import annotations

import math
from typing import Optional

from .analytics import discrete_toll, expected_cost_float, snap_floor, toll_limit
from .wbp import EvalConfig, UniformTreeSource


def _pivot(src: UniformTreeSource, v: tuple, n: int, log) -> tuple[float, int]:
    u = src.uniform(v)
    if log is not None:
        log.append(v)
    return u, min(max(math.ceil(n * u), 1), n)


def discrete_q(src: UniformTreeSource, v: tuple, n: int, log: Optional[list] = None) -> float:
    if n <= 1:
        return 0.0
    _, i = _pivot(src, v, n, log)
    a = lambda j: expected_cost_float(j, j)
    toll = (n - 1 - a(n) + a(i - 1) + a(n - i)) / n
    return (
        (i - 1) / n * discrete_q(src, v + (1,), i - 1, log)
        + (n - i) / n * discrete_q(src, v + (2,), n - i, log)
        + toll
    )


def discrete_process(
    src: UniformTreeSource, v: tuple, t: float, n: int, log: Optional[list] = None, path: Optional[list] = None
) -> float:
    if n <= 1:
        return 0.0
    if path is not None:
        path.append(v)
    u, i = _pivot(src, v, n, log)
    un = i / n
    l = snap_floor(n * t)
    value = float(discrete_toll(n, l, i, a=expected_cost_float))
    if l < i:
        if i > 1:
            value += (i - 1) / n * discrete_process(src, v + (1,), min(1.0, l / (i - 1)), i - 1, log, path)
    else:
        value += (i - 1) / n * discrete_q(src, v + (1,), i - 1, log)
        if i < n:
            value += (n - i) / n * discrete_process(src, v + (2,), max(0.0, (t - un) / (1 - un)), n - i, log, path)
    return value


def limit_process(
    src: UniformTreeSource,
    v: tuple,
    t: float,
    cfg: EvalConfig,
    log: Optional[list] = None,
    path: Optional[list] = None,
) -> float:
    if len(v) >= cfg.depth_m:
        return 0.0
    if path is not None:
        path.append(v)
    u = src.uniform(v)
    if log is not None:
        log.append(v)
    value = toll_limit(t, u)
    if t < u:
        value += u * limit_process(src, v + (1,), t / u, cfg, log, path)
    else:
        value += u * discrete_q(src, v + (1,), cfg.n_star, log)
        value += (1 - u) * limit_process(src, v + (2,), (t - u) / (1 - u), cfg, log, path)
    return value
