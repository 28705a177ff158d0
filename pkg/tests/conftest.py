"""Shared test plumbing: echo acceptance pass/fail lines past capture."""

_ACCEPTANCE_LINES: list[str] = []


def acceptance_line(line: str):
    print(line)
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
