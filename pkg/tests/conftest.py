import pytest

from concsize.registry import ThreadRegistry

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def registry():
    reg = ThreadRegistry(16)
    reg.register()
    yield reg
    if reg.is_registered():
        reg.deregister()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
