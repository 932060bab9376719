import os

import hypothesis
import numpy as np
import pytest

from exact_algebra import FourierPoly, set_precision_bits
from symbol_calculus import ClassicalSymbol, EigenvalueLaw, Weight

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=60, deadline=None)
hypothesis.settings.register_profile("dev", max_examples=25, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))


@pytest.fixture(scope="session", autouse=True)
def working_precision():
    set_precision_bits(256)
    yield


@pytest.fixture(scope="session")
def law():
    return EigenvalueLaw.laplace_shift()


@pytest.fixture(scope="session")
def Q():
    return Weight.laplace_shift()


@pytest.fixture(scope="session")
def identity():
    return ClassicalSymbol.identity()


@pytest.fixture(scope="session")
def abs_d():
    return ClassicalSymbol.abs_xi_power(1)


@pytest.fixture(scope="session")
def shift_up():
    """Multiplication by e^{ix}."""
    return ClassicalSymbol.exponential(1)


@pytest.fixture(scope="session")
def shift_down():
    return ClassicalSymbol.exponential(-1)


@pytest.fixture(scope="session")
def shifted_abs_d():
    """e^{-ix}|D|."""
    poly = FourierPoly.exponential(-1)
    return ClassicalSymbol.scalar_term(1, poly, poly)


@pytest.fixture
def scenario_doc():
    """Small rank-1 scenario as a JSON document."""
    return {
        "name": "unit",
        "testbed": {"dim": 1, "rank": 1},
        "weights": {"Q": {"eigenvalue_law": ["1", "0", "1"]}},
        "operators": {
            "I": [{"degree": 0, "plus": [[0, 1, 1]], "minus": [[0, 1, 1]]}],
            "absD": [{"degree": 1, "plus": [[0, 1, 1]], "minus": [[0, 1, 1]]}],
            "U": [{"degree": 0, "plus": [[1, 1, 1]], "minus": [[1, 1, 1]]}],
            "Vabs": [{"degree": 1, "plus": [[-1, 1, 1]], "minus": [[-1, 1, 1]]}],
            "Qinv": {"weight_power": "Q", "power": -1},
        },
        "families": {
            "F": {"base": "Q", "direction": "absD", "direction_law": ["0", "1"]},
        },
        "tasks": [],
    }
