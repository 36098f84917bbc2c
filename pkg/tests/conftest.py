import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report_line():
    def record(res):
        line = res.line()
        print(line)
        ACCEPTANCE_LINES.append(line)
        return res
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
