"""Shared test plumbing.

The acceptance battery in test_acceptance.py registers one scoreboard line
per criterion through record_acceptance; the hook below replays them as a
dedicated section after the normal pytest summary so the twelve verdicts
are visible in one block regardless of which tests were selected.
"""

_acceptance_lines: list[str] = []


def record_acceptance(line: str) -> None:
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
