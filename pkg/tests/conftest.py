import pytest

_ACCEPTANCE = {}


@pytest.fixture
def record():
    """``record(criterion, passed, detail)`` adds a line to the acceptance summary."""
    def add(criterion, passed, detail):
        _ACCEPTANCE[criterion] = (passed, detail)
    return add


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[criterion]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}")
