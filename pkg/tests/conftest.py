"""Shared test plumbing.

ACCEPTANCE_LINES collects the per-criterion verdict lines emitted by
tests/test_acceptance.py; the terminal-summary hook reprints them after
the run so the verdicts are visible without -s.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.line(line)
