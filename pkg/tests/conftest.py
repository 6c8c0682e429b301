from __future__ import annotations

import pytest

from fairselect.model import Cardinality, GroupCount, GroupStructure, Instance, LowerBounds, Modular

# (criterion number, title, passed, detail), filled by the acceptance tests
ACCEPTANCE_LINES: list[tuple[int, str, bool, str]] = []


def make_i1(k: int = 2) -> Instance:
    """Three items a, b, c with weights 3, 2, 1; groups {a} and {b, c}; |S| <= k."""
    return Instance(3, GroupStructure.from_lists([[0], [1, 2]]), Modular((3.0, 2.0, 1.0)),
                    (GroupCount(0), GroupCount(1)), Cardinality(k))


@pytest.fixture
def i1() -> Instance:
    return make_i1()


@pytest.fixture
def i1_fairness() -> LowerBounds:
    return LowerBounds((0.5, 1.0))


@pytest.fixture
def criterion():
    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        ACCEPTANCE_LINES.append((number, title, bool(passed), detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_LINES):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} {detail}".rstrip())
