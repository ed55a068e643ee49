import pytest

_LINES = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_LINES] = {}


@pytest.fixture
def record_criterion(request):
    """Record one acceptance criterion as a PASS/FAIL line, then assert it."""

    def record(num: int, ok: bool, detail: str) -> None:
        line = f"AC{num:<3}{'PASS' if ok else 'FAIL'}  {detail}"
        request.config.stash[_LINES][num] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash[_LINES]
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
