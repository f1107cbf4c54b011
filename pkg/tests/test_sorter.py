import io
from fractions import Fraction

import numpy as np
import pytest

from qproc import analytics as an
from qproc import sorter, stats
from qproc.rng import sample_seeds


def test_tiny_inputs_are_deterministic():
    assert sorter.run_on_the_fly(0, 1).x.tolist() == [0]
    assert sorter.run_on_the_fly(1, 1).x.tolist() == [0, 0]
    for seed in range(20):
        assert sorter.run_on_the_fly(2, seed).x.tolist() == [0, 1, 1]


@pytest.mark.parametrize("n", [3, 10, 77])
def test_kernel_matches_python_twin(n):
    for seed in range(25):
        assert np.array_equal(sorter.run_on_the_fly(n, seed).x, sorter.run_on_the_fly_py(n, seed).x)


def test_batch_rows_match_single_runs():
    seeds = sample_seeds(5, 30)
    xs = sorter.run_batch(40, seeds)
    for s, row in zip(seeds, xs):
        assert np.array_equal(row, sorter.run_on_the_fly(40, int(s)).x)


def test_traces_satisfy_structure():
    xs = sorter.run_batch(50, sample_seeds(6, 2000))
    assert all(not v for v in sorter.trace_violations(xs, 50))
    assert sorter.run_on_the_fly(50, 1).check() == []


def test_trace_violations_detects_each_defect():
    good = sorter.run_on_the_fly(6, 3).x
    bad_mono = good.copy()
    bad_mono[2], bad_mono[3] = good[3] + 1, good[2]
    bad_tail = good.copy()
    bad_tail[6] += 1
    bad_cap = np.array([0, 20, 20, 20, 20, 20, 20])
    found = sorter.trace_violations(np.stack([bad_mono, bad_tail, bad_cap]), 6)
    assert "monotone" in found[0]
    assert "tail_repeat" in found[1]
    assert found[2] == ["worst_case_cap"]


def _exact_mean_by_enumeration(n):
    """E x[l] over all pivot-rank sequences, computed by exhaustive recursion."""

    def walk(stack, comps, emitted, prob, acc):
        if not stack:
            return
        s = stack[-1]
        rest = stack[:-1]
        if s in (-1, 1):
            acc[emitted + 1] += prob * comps
            walk(rest, comps, emitted + 1, prob, acc)
        elif s == 0:
            walk(rest, comps, emitted, prob, acc)
        else:
            for i in range(1, s + 1):
                walk(rest + [s - i, -1, i - 1], comps + s - 1, emitted, prob / s, acc)

    acc = [Fraction(0)] * (n + 1)
    walk([n], 0, 0, Fraction(1), acc)
    return acc


@pytest.mark.parametrize("n", [3, 4, 5])
def test_enumerated_mean_equals_closed_form(n):
    acc = _exact_mean_by_enumeration(n)
    assert acc[1:] == [an.expected_cost(n, l) for l in range(1, n + 1)]


def test_simulated_mean_for_three_elements():
    xs = sorter.run_batch(3, sample_seeds(7, 10**5))
    for l, target in zip((1, 2, 3), (Fraction(7, 3), Fraction(8, 3), Fraction(8, 3))):
        assert stats.summarize(xs[:, l]).within(float(target), 4.0)


def test_normalize_boundaries():
    tr = sorter.run_on_the_fly(2, 9)
    assert sorter.normalize(tr, [0.5, 1.0]).values.tolist() == [0.0, 0.0]
    tr = sorter.run_on_the_fly(17, 9)
    assert sorter.normalize(tr, [0.0]).values.tolist() == [0.0]


def test_normalize_uses_floor_of_nt():
    tr = sorter.run_on_the_fly(10, 2)
    a = sorter.mean_row(10)
    got = sorter.normalize(tr, [0.29, 0.3, 0.999]).values
    expect = [(tr.x[l] - a[l]) / 10 for l in (2, 3, 9)]
    assert got.tolist() == pytest.approx(expect)


def test_normalize_batch_agrees_with_single():
    seeds = sample_seeds(8, 5)
    xs = sorter.run_batch(12, seeds)
    grid = [0.1, 0.5, 1.0]
    batch = sorter.normalize_batch(12, xs, grid)
    for k, row in enumerate(xs):
        single = sorter.normalize(sorter.ComparisonTrace(12, row), grid).values
        assert np.array_equal(batch[k], single)


def test_normalize_rejects_out_of_range_grid():
    with pytest.raises(an.DomainError):
        sorter.grid_indices(5, [1.5])


def test_negative_size_rejected():
    with pytest.raises(an.DomainError):
        sorter.run_on_the_fly(-1, 0)


def test_trace_csv_round_trip():
    tr = sorter.run_on_the_fly(30, 4)
    buf = io.StringIO()
    sorter.write_trace_csv(buf, tr)
    buf.seek(0)
    back = sorter.read_trace_csv(buf)
    assert back.n == 30 and np.array_equal(back.x, tr.x)


def test_batch_csv_layout():
    seeds = sample_seeds(1, 2)
    buf = io.StringIO()
    sorter.write_batch_csv(buf, seeds, sorter.run_batch(3, seeds))
    lines = buf.getvalue().splitlines()
    assert lines[0] == "seed,l,x"
    assert len(lines) == 1 + 2 * 4
