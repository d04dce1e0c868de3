import pytest

_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """report(number, passed, detail) prints and records one PASS/FAIL line."""

    def report(number: int, passed: bool, detail: str) -> bool:
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
        _CRITERIA[number] = line
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
