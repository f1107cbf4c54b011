"""Batch statistics and one-dimensional two-sample distances."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analytics import DomainError


@dataclass(frozen=True)
class StatsSummary:
    count: int
    mean: float
    variance: float
    std_error: float

    def within(self, target: float, k: float = 4.0) -> bool:
        """True when ``|mean - target| <= k * std_error``."""
        return abs(self.mean - target) <= k * self.std_error


def summarize(samples: Sequence[float]) -> StatsSummary:
    """Mean, unbiased variance and standard error of the mean.

    Sums are exactly rounded (:func:`math.fsum`), so the result does not
    depend on the order of ``samples``.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    n = x.size
    if n < 2:
        raise DomainError("summarize needs at least two samples")
    mean = math.fsum(x) / n
    var = math.fsum((x - mean) ** 2) / (n - 1)
    return StatsSummary(n, mean, var, math.sqrt(var / n))


def variance_summary(samples: Sequence[float]) -> StatsSummary:
    """Summary of the squared deviations; its mean is the (biased) variance
    and its standard error serves as the standard error of the variance."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    mean = math.fsum(x) / x.size
    return summarize((x - mean) ** 2 * (x.size / (x.size - 1)))


@dataclass(frozen=True)
class TwoSampleResult:
    statistic: float
    threshold: float
    passed: bool


def ks_critical(alpha: float) -> float:
    """Asymptotic two-sample KS constant ``c(alpha) = sqrt(-ln(alpha/2) / 2)``."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    return math.sqrt(-math.log(alpha / 2.0) / 2.0)


def ks_statistic(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise DomainError("both samples must be nonempty")
    support = np.concatenate([a, b])
    fa = np.searchsorted(a, support, side="right") / a.size
    fb = np.searchsorted(b, support, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_two_sample(a: Sequence[float], b: Sequence[float], alpha: float = 0.01) -> TwoSampleResult:
    stat = ks_statistic(a, b)
    na, nb = len(a), len(b)
    thr = ks_critical(alpha) * math.sqrt((na + nb) / (na * nb))
    return TwoSampleResult(stat, thr, stat <= thr)


def wasserstein1(a: Sequence[float], b: Sequence[float]) -> float:
    """W1 distance between two empirical laws of equal size."""
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    if a.size != b.size:
        raise DomainError("wasserstein1 needs samples of equal length")
    if a.size == 0:
        raise DomainError("samples must be nonempty")
    return math.fsum(np.abs(a - b)) / a.size
