import math
from fractions import Fraction

import pytest
from hypothesis import given
import hypothesis.strategies as st

from exact_algebra import (AlgebraError, CRational, DomainError, FourierPoly, I_UNIT, LaurentGerm,
                           ONE, ZERO, convolve, derivative_x, hurwitz_zeta_germ, mp_log,
                           rational_sum, set_precision_bits, to_fraction)

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)
gaussian = st.builds(CRational, fractions, fractions)
polys = st.dictionaries(st.integers(-4, 4), fractions, max_size=5).map(FourierPoly)


def test_to_fraction_accepts_exact_inputs():
    assert to_fraction("3/4") == Fraction(3, 4)
    assert to_fraction(" -2 ") == Fraction(-2)
    assert to_fraction(Fraction(1, 3)) == Fraction(1, 3)


@pytest.mark.parametrize("value", [True, 0.5, None])
def test_to_fraction_rejects_inexact_inputs(value):
    with pytest.raises(DomainError):
        to_fraction(value)


def test_gaussian_rational_arithmetic():
    a = CRational(Fraction(1), Fraction(2))
    b = CRational(Fraction(3), Fraction(-1))
    assert a * b == CRational(Fraction(5), Fraction(5))
    assert (a * b) / b == a
    assert I_UNIT * I_UNIT == -ONE
    assert CRational.of(2) ** -2 == CRational.of(Fraction(1, 4))
    assert str(CRational(Fraction(1, 2), Fraction(-1, 3))) == "1/2-1/3i"
    assert complex(a) == 1 + 2j


def test_division_by_zero_raises():
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO


@given(gaussian, gaussian, gaussian)
def test_gaussian_rationals_form_a_field(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a + b) - b == a
    if not b.is_zero():
        assert (a / b) * b == a


def test_fourier_poly_drops_zero_coefficients():
    poly = FourierPoly({0: 0, 2: CRational.of(3), -1: "1/2"})
    assert poly.items() == ((-1, CRational.of(Fraction(1, 2))), (2, CRational.of(3)))
    assert poly.support_bound == 2
    assert poly.mean() == ZERO
    assert FourierPoly().is_zero()


def test_convolve_multiplies_pointwise():
    cosine = FourierPoly({1: 1, -1: 1})
    assert convolve(cosine, cosine) == FourierPoly({2: 1, 0: 2, -2: 1})
    assert cosine.evaluate(math.pi / 3) == pytest.approx(1.0)


@given(polys, polys)
def test_convolve_is_commutative(f, g):
    assert convolve(f, g) == convolve(g, f)


def test_derivative_x_scales_by_frequency():
    wave = FourierPoly.exponential(3, 2)
    assert derivative_x(wave) == FourierPoly.exponential(3, 6)
    assert derivative_x(wave, 2) == FourierPoly.exponential(3, 18)
    assert derivative_x(FourierPoly.constant(5)).is_zero()


def test_laurent_germ_product_with_pole_drops_linear_term():
    pole = LaurentGerm(1 + 0j, 2 + 0j, 0j)
    regular = LaurentGerm.regular(3, 4)
    product = pole * regular
    assert product.pole == 3
    assert product.const == 10
    assert product.exact_to == 0
    assert product.to_json()['linear'] is None


def test_laurent_germ_two_poles_raise():
    pole = LaurentGerm(1 + 0j)
    with pytest.raises(AlgebraError):
        pole * pole


def test_laurent_germ_shift():
    shifted = LaurentGerm(1 + 0j, 2 + 0j, 3 + 0j).shift(1)
    assert (shifted.pole, shifted.const, shifted.linear) == (0, 1, 2)


def test_hurwitz_germ_at_zero():
    germ = hurwitz_zeta_germ(0, 1, 2)
    assert germ.pole == 0
    assert germ.const.real == pytest.approx(-0.5, abs=1e-14)
    assert germ.linear.real == pytest.approx(-math.log(2 * math.pi), abs=1e-12)


def test_hurwitz_germ_at_pole():
    germ = hurwitz_zeta_germ(1, 1, 2)
    assert germ.pole.real == pytest.approx(0.5)
    assert germ.const.real == pytest.approx(0.5772156649015329, abs=1e-14)


def test_hurwitz_germ_regular_point():
    germ = hurwitz_zeta_germ(2, 1, 1)
    assert germ.const.real == pytest.approx(math.pi ** 2 / 6, abs=1e-14)
    assert germ.linear.real == pytest.approx(-0.9375482543158437, abs=1e-12)


def test_hurwitz_germ_rejects_nonpositive_parameter():
    with pytest.raises(DomainError):
        hurwitz_zeta_germ(2, 0, 1)
    with pytest.raises(DomainError):
        hurwitz_zeta_germ(2, 1, 0)


def test_precision_floor():
    with pytest.raises(DomainError):
        set_precision_bits(32)


def test_mp_log():
    assert mp_log(1) == 0.0
    assert mp_log("1/2") == pytest.approx(-math.log(2))
    with pytest.raises(DomainError):
        mp_log(0)


def test_rational_sum():
    assert rational_sum([CRational.of(Fraction(1, 3))] * 3) == ONE
    assert rational_sum([]) == ZERO
