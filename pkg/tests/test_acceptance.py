"""Acceptance gate: every check at full scale, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import json
import sys

import pytest

from qproc.checks import CHECKS, FULL


def _line(res) -> str:
    return f"{'PASS' if res.passed else 'FAIL'} {res.check_id}: {res.description}"


@pytest.mark.parametrize("check_id", list(CHECKS))
def test_acceptance(check_id, capsys):
    res = CHECKS[check_id](FULL)
    with capsys.disabled():
        print(f"\n{_line(res)}")
        if not res.passed:
            print(json.dumps(res.to_dict(), default=str)[:2000])
    assert res.passed, res.observed


if __name__ == "__main__":
    failed = 0
    for fn in CHECKS.values():
        r = fn(FULL)
        failed += not r.passed
        print(_line(r), flush=True)
    sys.exit(1 if failed else 0)
