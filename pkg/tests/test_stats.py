import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from qproc import stats
from qproc.analytics import DomainError
from qproc.rng import uniform_at


def test_summary_of_constant_batch():
    s = stats.summarize([1, 1, 1, 1])
    assert (s.mean, s.variance, s.std_error) == (1.0, 0.0, 0.0)


def test_summary_two_points():
    s = stats.summarize([0, 2])
    assert s.mean == 1.0 and s.variance == 2.0


def test_summary_needs_two_samples():
    with pytest.raises(DomainError):
        stats.summarize([1.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=200))
def test_summary_agrees_with_numpy(xs):
    s = stats.summarize(xs)
    assert s.mean == pytest.approx(np.mean(xs), rel=1e-9, abs=1e-6)
    assert s.variance == pytest.approx(np.var(xs, ddof=1), rel=1e-7, abs=1e-4)


def test_summary_is_order_independent():
    x = np.random.default_rng(0).normal(size=1000) * 1e8
    assert stats.summarize(x) == stats.summarize(x[::-1])


def test_uniform_moments():
    u = np.array([uniform_at(s) for s in range(10**6)])
    s = stats.summarize(u)
    assert s.within(0.5, 4.0)
    v = stats.variance_summary(u)
    assert v.within(1 / 12, 4.0)


def test_ks_identical_and_disjoint():
    a = np.random.default_rng(1).random(1000)
    r = stats.ks_two_sample(a, a.copy())
    assert r.statistic == 0.0 and r.passed
    r = stats.ks_two_sample(a, a + 1)
    assert r.statistic == 1.0 and not r.passed


@pytest.mark.parametrize("seed", range(5))
def test_ks_statistic_matches_scipy(seed):
    g = np.random.default_rng(seed)
    a, b = g.normal(size=300), g.normal(0.1, 1.0, size=450)
    assert stats.ks_statistic(a, b) == pytest.approx(sps.ks_2samp(a, b).statistic, abs=1e-12)


def test_ks_ties_match_scipy():
    a = np.array([0, 0, 1, 1, 2], dtype=float)
    b = np.array([0, 1, 1, 1, 3, 3], dtype=float)
    assert stats.ks_statistic(a, b) == pytest.approx(sps.ks_2samp(a, b).statistic)


def test_ks_critical_value():
    assert stats.ks_critical(0.05) == pytest.approx(1.3581, abs=1e-4)
    with pytest.raises(DomainError):
        stats.ks_critical(0.0)


def test_wasserstein_examples():
    a = np.random.default_rng(2).random(500)
    assert stats.wasserstein1(a, a) == 0.0
    assert stats.wasserstein1(np.zeros(10), np.full(10, -2.5)) == 2.5
    assert stats.wasserstein1(a, a[::-1] + 0.3) == pytest.approx(0.3)
    b = np.random.default_rng(3).random(500)
    assert stats.wasserstein1(a, b) == pytest.approx(sps.wasserstein_distance(a, b), abs=1e-12)


def test_wasserstein_rejects_unequal_sizes():
    with pytest.raises(DomainError):
        stats.wasserstein1([1, 2], [1])
