from fractions import Fraction

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given
import hypothesis.strategies as st

from exact_algebra import CRational, ZERO
from oracle import OracleError, commutator_with_law, law_operator, product_of, quantize
from oracle.spectral_operator import series_shift, series_value
from symbol_calculus import ClassicalSymbol, DirectionLaw, EigenvalueLaw

LAW = EigenvalueLaw.laplace_shift()


def test_quantized_shift_entries(shift_up):
    op = quantize(shift_up)
    assert op.bandwidth == 1
    assert op.entry(4, 3) == 1
    assert op.entry(3, 3) == ZERO
    assert op.entry(6, 3) == ZERO


def test_quantized_abs_d_vanishes_at_zero_frequency(abs_d, identity):
    assert quantize(abs_d).diagonal(-3) == 3
    assert quantize(abs_d).diagonal(0) == ZERO
    assert quantize(identity).diagonal(0) == 1


def test_quantize_is_scalar_only():
    with pytest.raises(OracleError):
        quantize(ClassicalSymbol.identity(2))


def test_shift_product_is_identity(shift_up, shift_down):
    product = quantize(shift_up) @ quantize(shift_down)
    npt.assert_allclose(product.matrix(3), np.eye(7))


def test_law_operator_inverse_tail():
    op = law_operator(LAW, -1)
    assert op.diagonal(2) == CRational.of(Fraction(1, 5))
    assert op.tail(0, 1, -5) == {-2: CRational.of(1), -4: CRational.of(-1)}
    assert op.tail(1, 1, -5) == {}


@given(st.integers(3, 60))
def test_law_tail_approximates_diagonal(n):
    op = law_operator(LAW, -1)
    series = op.tail(0, 1, -9)
    remainder = abs(complex(op.diagonal(n) - series_value(series, n)))
    assert remainder <= float(n) ** -10


def test_product_tail(abs_d):
    product = quantize(abs_d) @ law_operator(LAW, -1)
    assert product.tail(0, 1, -4) == {-1: CRational.of(1), -3: CRational.of(-1)}
    assert product.diagonal(-2) == CRational.of(Fraction(2, 5))


def test_direction_law_needs_nonnegative_power():
    with pytest.raises(OracleError):
        law_operator(DirectionLaw(("0", "1")), -1)


def test_commutator_with_law(shift_up):
    comm = commutator_with_law(LAW, quantize(shift_up))
    assert comm.entry(3, 2) == 5
    assert comm.entry(-1, -2) == -3
    assert comm.diagonal(2) == ZERO


def test_product_of_requires_factors():
    with pytest.raises(OracleError):
        product_of([])


def test_series_shift_reexpands():
    # (m + 1)^2 = m^2 + 2m + 1
    shifted = series_shift({2: CRational.of(1)}, 1, -1)
    assert shifted == {2: CRational.of(1), 1: CRational.of(2), 0: CRational.of(1)}
