import sys
from fractions import Fraction

import pytest

from simpson_reversal import CellCounts, StratifiedTable

F = Fraction


@pytest.fixture
def recovery():
    """Recovery by treatment, stratified by sex (male first)."""
    return StratifiedTable(
        (
            ("male", CellCounts(7, 3, 18, 12)),
            ("female", CellCounts(9, 21, 2, 8)),
        )
    )


@pytest.fixture
def disjoint():
    # treatment rates {0.8, 0.9}, non-treatment {0.1, 0.2}
    return StratifiedTable(
        (
            ("z", CellCounts(8, 2, 1, 9)),
            ("z'", CellCounts(9, 1, 2, 8)),
        )
    )


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
