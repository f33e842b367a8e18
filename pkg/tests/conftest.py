"""Shared test plumbing.

The acceptance tests record one status line per criterion; pytest's fd
capture would otherwise hide the lines for passing tests, so they are
replayed in the terminal summary.
"""

_STATUS_LINES: list[str] = []


def record_status(line: str) -> None:
    _STATUS_LINES.append(line)


def pytest_terminal_summary(terminalreporter) -> None:
    if _STATUS_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _STATUS_LINES:
            terminalreporter.write_line(line)
