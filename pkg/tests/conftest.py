import random
from fractions import Fraction

import pytest

from fpet.fpoly import FPolyFamily
from fpet.torus import TorusSystem, TrigPoly


@pytest.fixture
def rng():
    return random.Random(20260810)


@pytest.fixture
def circle_system():
    """m = D = 1, A = [1]."""
    return TorusSystem.make([[1]])


@pytest.fixture
def plane_system():
    """m = D = 2, A = identity."""
    return TorusSystem.make([[1, 0], [0, 1]])


@pytest.fixture
def linear_pair_family():
    """{t e_1, t e_2} at height 1 in Q^2."""
    return FPolyFamily.make([[[1, 0]], [[0, 1]]])


def character(m, chi, coeff=1.0):
    return TrigPoly.character(m, chi, coeff)


def frac(s):
    return Fraction(s)
