import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qproc import analytics as an


def test_harmonic_small_values():
    assert an.harmonic(1) == 1
    assert an.harmonic(2) == Fraction(3, 2)
    assert an.harmonic(6) == Fraction(49, 20)
    assert an.harmonic(4) == Fraction(25, 12)
    assert an.harmonic_float(10**6) == pytest.approx(14.392726722865772, abs=1e-12)


def test_harmonic_zero_is_a_domain_error():
    with pytest.raises(an.DomainError):
        an.harmonic(0)


def test_expected_cost_small_table():
    assert [an.expected_cost(3, l) for l in (1, 2, 3)] == [Fraction(7, 3), Fraction(8, 3), Fraction(8, 3)]
    assert an.expected_cost(1, 1) == 0
    assert an.expected_cost(2, 1) == an.expected_cost(2, 2) == 1
    assert an.expected_cost(5, 0) == 0


@pytest.mark.parametrize("n,l", [(3, 4), (3, -1), (-1, 0)])
def test_expected_cost_rejects_out_of_range(n, l):
    with pytest.raises(an.DomainError):
        an.expected_cost(n, l)


def test_oracle_matches_bruteforce_recursion():
    fast = an.expected_cost_oracle(40)
    slow = an.expected_cost_bruteforce(40)
    for n in range(1, 41):
        for l in range(1, n + 1):
            assert fast.a(n, l) == slow[n][l] == an.expected_cost(n, l)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=2, max_value=400))
def test_full_sort_identities(n):
    full = 2 * (n + 1) * an.harmonic(n) - 4 * n
    assert an.expected_cost(n, n) == full
    assert an.expected_cost(n, n - 1) == full


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=300), st.data())
def test_expected_cost_nondecreasing_in_l(n, data):
    l = data.draw(st.integers(min_value=1, max_value=n))
    if l < n:
        assert an.expected_cost(n, l) <= an.expected_cost(n, l + 1)
    assert an.expected_cost(n, l) >= n - 1


def test_expected_cost_float_close_to_exact():
    for n, l in [(10, 3), (1000, 250), (5000, 5000)]:
        assert an.expected_cost_float(n, l) == pytest.approx(float(an.expected_cost(n, l)), rel=1e-13)


def test_expectation_csv_round_trip():
    entries = [(n, l, an.expected_cost(n, l)) for n in range(1, 8) for l in range(1, n + 1)]
    buf = io.StringIO()
    an.write_expectation_csv(buf, entries)
    buf.seek(0)
    back = an.read_expectation_csv(buf)
    assert back == {(n, l): a for n, l, a in entries}


def test_quicksort_toll_values():
    # (3,2): (2 - 8/3 + 0 + 0) / 3
    assert an.quicksort_toll(3, 2) == Fraction(-2, 9)
    assert an.quicksort_toll(3, 1) == Fraction(1, 9)
    assert an.quicksort_toll(2, 1) == 0


@pytest.mark.parametrize("n", [2, 3, 7, 40])
def test_quicksort_toll_is_centered(n):
    assert sum(an.quicksort_toll(n, i) for i in range(1, n + 1)) == 0


@pytest.mark.parametrize("n,l", [(5, 1), (5, 3), (12, 7), (12, 12)])
def test_discrete_toll_is_centered(n, l):
    # E X(n,l) = a(n,l) forces the tolls to average to zero over the pivot
    assert sum(an.discrete_toll(n, l, i) for i in range(1, n + 1)) == 0


def test_discrete_toll_at_full_sort_equals_quicksort_toll():
    for n in (4, 9):
        for i in range(1, n + 1):
            assert an.discrete_toll(n, n, i) == an.quicksort_toll(n, i)


def test_toll_limit_endpoints_and_convention():
    assert an.toll_limit_point(0.0) == 1.0
    assert an.toll_limit_point(1.0) == 1.0
    assert an.toll_limit_point(0.5) == pytest.approx(1 + 2 * 0.5 * math.log(0.5) * 2)
    assert an.toll_limit(1.0, 0.3) == pytest.approx(an.toll_limit_point(0.3))
    assert np.isfinite(an.toll_limit(np.array([0.0, 0.5, 1.0]), np.array([0.0, 1.0, 0.5]))).all()


def test_toll_limit_rejects_outside_unit_square():
    with pytest.raises(an.DomainError):
        an.toll_limit(1.2, 0.5)
    with pytest.raises(an.DomainError):
        an.toll_limit(0.5, -0.1)


@pytest.mark.parametrize("t", [0.1, 0.37, 0.5, 0.9, 1.0])
def test_toll_limit_integrates_to_zero(t):
    assert an.toll_integral(t) == pytest.approx(0.0, abs=1e-10)


def test_toll_limit_matches_numba_twin():
    rng = np.random.default_rng(3)
    for t, x in rng.random((50, 2)):
        assert an.toll_limit_nb(t, x) == pytest.approx(an.toll_limit(t, x), abs=1e-14)


def test_discrete_toll_converges():
    errs = [abs(v - an.toll_limit(0.3, 0.7)) for v in an.toll_limit_of_discrete(0.3, 0.7, [100, 1000, 10000])]
    assert errs[2] < errs[0]
    assert errs[2] < 5e-3


def test_snap_guards_float_fuzz():
    assert an.snap_floor(0.29 * 100) == 29
    assert an.snap_ceil(0.7 * 10) == 7
    assert an.snap_floor(2.5) == 2 and an.snap_ceil(2.5) == 3


@pytest.mark.parametrize("n", [1, 2, 3, 10, 57])
def test_split_formula_is_the_square_sum_moment(n):
    assert an.split_moment(n) == an.split_square_sum_bruteforce(n)


@pytest.mark.parametrize("n", [1, 2])
def test_split_formula_matches_max_moment_for_tiny_n(n):
    assert an.split_moment(n) == an.split_moment_bruteforce(n)


def test_max_moment_falls_short_of_formula():
    assert an.split_moment_bruteforce(3) == Fraction(1, 3)
    assert an.split_moment(3) == Fraction(10, 27)
    for n in range(3, 60):
        assert an.split_moment_bruteforce(n) < an.split_moment(n) < Fraction(2, 3)


def test_variance_limit_closed_form():
    assert an.variance_limit() == pytest.approx(7 - 2 * math.pi**2 / 3, abs=1e-10)
    assert an.VARIANCE_LIMIT_EXACT == pytest.approx(0.42026373, abs=1e-8)


def test_lp_bound_constants():
    b = an.lp_bound(2.0, math.sqrt(an.variance_limit()))
    assert b.k_p == pytest.approx(math.sqrt(2 / 3))
    assert b.bound == pytest.approx(45.64, abs=0.01)
    with pytest.raises(an.DomainError):
        an.lp_bound(0.5, 1.0)


@pytest.mark.parametrize(
    "n,l,i,expected",
    [(2, 1, 1, Fraction(0)), (2, 2, 1, Fraction(0)), (3, 1, 2, Fraction(-1, 9)), (9, 0, 4, Fraction(0))],
)
def test_discrete_toll_examples(n, l, i, expected):
    assert an.discrete_toll(n, l, i) == expected


def test_toll_limit_examples():
    assert an.toll_limit_point(0.5) == pytest.approx(1 - 2 * math.log(2), abs=1e-15)
    assert an.toll_limit(0.3, 0.7) == pytest.approx(0.134343, abs=1e-6)
    assert an.toll_limit(0.9, 0.2) == an.toll_limit_point(0.2)


def test_split_moment_examples():
    assert an.split_moment(1) == 0
    assert an.split_moment(2) == Fraction(1, 4)


def test_lp_bound_degenerate_and_large_p():
    b = an.lp_bound(2.0, 0.0)
    assert b.k_p == pytest.approx(0.816497, abs=1e-6)
    assert b.bound == pytest.approx(43.60, abs=0.005)
    assert an.lp_bound(200.0, 0.0).k_p > 0.97
    assert an.lp_bound(200.0, 0.0).bound > an.lp_bound(20.0, 0.0).bound


def test_variance_limit_of_zero_toll():
    assert an.variance_limit(lambda x: 0.0 * x) == 0.0
