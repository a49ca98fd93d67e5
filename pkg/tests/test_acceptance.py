"""Acceptance criteria, one test each, at their stated tolerances and time
budgets.  Each test reports a single PASS/FAIL line, collected into the
terminal summary."""
import pytest

from chi3 import checks

from conftest import ACCEPTANCE_LINES

SLOW = {fn.__name__ for fn in checks.SLOW}
CASES = [pytest.param(fn, id=fn.__name__.removeprefix("check_"),
                      marks=[pytest.mark.slow] if fn.__name__ in SLOW else [])
         for fn in checks.ACCEPTANCE]


@pytest.mark.parametrize("criterion", CASES)
def test_criterion(criterion):
    result = criterion()
    ACCEPTANCE_LINES.append(result.line())
    assert result.passed, result.detail
    assert result.runtime < result.budget, f"{result.runtime:.1f}s over budget"
