"""Acceptance criteria: one check per criterion, each printing a PASS/FAIL line.

Run standalone with ``python3 tests/test_acceptance.py`` or through pytest
(``pytest tests/test_acceptance.py -s`` shows the lines).
"""

import sys

import pytest

from singleprobe.claims import CLAIMS, run_claim


@pytest.mark.parametrize("number", [num for num, *_ in CLAIMS], ids=[name for _, name, *_ in CLAIMS])
def test_criterion(number, record_property):
    result = run_claim(number)
    print(result.line())
    record_property("acceptance", (number, result.line()))
    assert result.passed, result.line()


if __name__ == "__main__":
    failed = 0
    for num, *_ in CLAIMS:
        r = run_claim(num)
        print(r.line(), flush=True)
        failed += not r.passed
    sys.exit(1 if failed else 0)
