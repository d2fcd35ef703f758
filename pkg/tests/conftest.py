import pytest

_RESULTS = []


class Criterion:
    """Records one acceptance line; ``check`` asserts after recording."""

    def __call__(self, number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        _RESULTS.append(line)
        print(line)
        return ok

    def check(self, number, ok, detail):
        assert self(number, ok, detail), detail


@pytest.fixture
def criterion():
    return Criterion()


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance")
        for line in _RESULTS:
            terminalreporter.write_line(line)
