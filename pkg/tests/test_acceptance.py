"""End-to-end acceptance criteria; one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they are
produced; they are repeated in the terminal summary either way. Criteria 1-5
simulate n up to 512 and take a minute or two.
"""

import pytest

from agelab.acceptance import CRITERIA

LINES: list[str] = []


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    result = CRITERIA[number]()
    line = result.line()
    LINES.append(line)
    print(line)
    assert result.passed, line
