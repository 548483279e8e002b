from fractions import Fraction as Q

import pytest

from gitstrata.torusgit import TorusProblem


def torus(*weights, **kwargs) -> TorusProblem:
    rows = [tuple(Q(x) for x in w) for w in weights]
    return TorusProblem.build(rows, **kwargs)


def qv(*xs):
    return tuple(Q(x) for x in xs)


def supports(*lists):
    return [frozenset(l) for l in lists]


@pytest.fixture
def interval():
    return torus((-1,), (1,))


@pytest.fixture
def shifted():
    return torus((1,), (2,))
