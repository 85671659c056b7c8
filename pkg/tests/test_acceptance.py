"""The eleven acceptance criteria, each at its own time limit.

Run with ``pytest tests/test_acceptance.py`` (a summary line per criterion is
printed at the end of the session) or directly as a script.
"""
import sys

import pytest

from vplab.acceptance import CHECKS, mutation_check, run_check

RESULTS = []


@pytest.mark.parametrize("number", [c[0] for c in CHECKS],
                         ids=[f"{c[0]:02d}-{c[1].replace(' ', '-')}" for c in CHECKS])
def test_criterion(number):
    result = run_check(number)
    RESULTS.append(result)
    print(result.line())
    assert result.passed, result.line()
    assert result.seconds <= result.limit


def test_injected_fault_is_caught():
    rep = mutation_check("negation")
    assert rep["detected"], rep


def test_guard_marks_skips():
    result = run_check(1, guard=10)
    assert result.skipped and "skipped" in result.line()


if __name__ == "__main__":
    failed = 0
    for num, *_ in CHECKS:
        r = run_check(num)
        print(r.line())
        failed += not r.passed
    sys.exit(1 if failed else 0)
