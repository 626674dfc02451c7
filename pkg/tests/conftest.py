import pytest

REPORT: dict = {}


@pytest.fixture
def record_criterion():
    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        REPORT[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for number in sorted(REPORT):
            terminalreporter.write_line(REPORT[number])
