"""The nine acceptance criteria; each prints one PASS/FAIL line."""

import pytest

from fracblow.verify import CRITERIA, run_criterion


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA])
def test_criterion(number):
    r = run_criterion(number)
    print()
    print(r.line())
    print(f"  details: {r.details}")
    assert r.passed, r.line()
