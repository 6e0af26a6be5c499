"""Shared test plumbing.

The acceptance tests in test_acceptance.py register one verdict per
criterion through record_criterion; the terminal-summary hook prints a
single PASS/FAIL line for each so the run ends with a readable scorecard
even when the detailed assertion output scrolls away.
"""

from __future__ import annotations

ACCEPTANCE_RESULTS: list[tuple[int, str, bool, str]] = []


def record_criterion(number: int, label: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((number, label, ok, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, label, ok, detail in sorted(ACCEPTANCE_RESULTS):
        verdict = "PASS" if ok else "FAIL"
        line = f"criterion {number:2d} [{label}]: {verdict}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
