import pytest

from tendersim.core import QuorumParams, Value


@pytest.fixture
def q4():
    return QuorumParams(4, 1)


@pytest.fixture
def v():
    return Value("v")


@pytest.fixture
def w():
    return Value("w")


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.REPORT:
        terminalreporter.write_line(line)
