import pytest

from fracbvp.fraccalc import UniformGrid
from fracbvp.problem import builtin_problem

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def grid1024():
    return UniformGrid(1024)


@pytest.fixture(scope="session")
def example1():
    return builtin_problem("example1")


@pytest.fixture(scope="session")
def example2():
    return builtin_problem("example2")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
