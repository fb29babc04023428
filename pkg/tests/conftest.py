import pytest

# (criterion number, description, passed) appended by the acceptance tests.
ACCEPTANCE_RESULTS: list[tuple[int, str, bool]] = []


@pytest.fixture
def acceptance():
    """Record one acceptance line; the summary is printed at session end."""

    def record(number: int, description: str, passed: bool) -> None:
        ACCEPTANCE_RESULTS.append((number, description, passed))

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, passed in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {description}")
