import pytest

from cubulate import acceptance
from cubulate.presentation import builtin


@pytest.fixture(scope="session")
def P0():
    return builtin("P0")


@pytest.fixture(scope="session")
def P1():
    return builtin("P1")


@pytest.fixture(scope="session")
def P2():
    return builtin("P2")


@pytest.fixture(scope="session")
def ball_p0():
    return acceptance.ball("P0", 4)


@pytest.fixture(scope="session")
def ball_p1():
    return acceptance.ball("P1", 8)


@pytest.fixture(scope="session")
def ball_p2():
    return acceptance.ball("P2", 6)
