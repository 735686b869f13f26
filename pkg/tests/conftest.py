import pytest

_LINES = []


@pytest.fixture
def acceptance_log():
    return _LINES


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[0][2:].rstrip(":"))):
            terminalreporter.write_line(line)
