import pytest

VERDICTS = []


@pytest.fixture
def report():
    """Record one ``PASS``/``FAIL`` line; the lines are repeated in the terminal summary."""

    def emit(criterion, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}"
        VERDICTS.append(line)
        print(line)
        return passed

    return emit


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
