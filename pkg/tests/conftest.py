from pathlib import Path

import pytest

from waning.trial_data import TrialSummary

DATA = Path(__file__).resolve().parent.parent / "data"

_ACCEPTANCE_LINES: list[str] = []


def pytest_addoption(parser):
    parser.addoption(
        "--bnt-summary",
        default=None,
        help="summary JSON with pre-estimated BNT162b2 period summaries; enables that fixture",
    )


@pytest.fixture
def report():
    """Record one pass/fail line for the acceptance summary."""

    def _report(label: str, passed: bool, detail: str) -> bool:
        line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def hpylori() -> TrialSummary:
    return TrialSummary.from_person_time(36, 1416.0, 14, 673.6, 10, 1403.6, 4, 670.7)


@pytest.fixture
def data_dir() -> Path:
    return DATA
