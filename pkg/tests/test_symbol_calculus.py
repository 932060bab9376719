from fractions import Fraction

import pytest
from hypothesis import given
import hypothesis.strategies as st

import fixture_factory
from exact_algebra import CRational, FourierPoly, ZERO
from symbol_calculus import (ClassicalSymbol, DirectionLaw, EigenvalueLaw, FloorUnreachable, HomTerm,
                             InsufficientDepth, NotElliptic, RankMismatch, SymbolError, Weight,
                             ad_power, block_scalar, commutator, compose, compose_chain,
                             generalized_binomial, inverse, power_neg, wodzicki_residue)

E = FourierPoly.exponential(1)


def test_generalized_binomial_negative_degree():
    assert generalized_binomial(-2, 3) == -4
    assert generalized_binomial(2, 3) == 0
    assert generalized_binomial(5, 0) == 1


def test_symbol_rejects_unsorted_terms():
    one = block_scalar(1, 1)
    with pytest.raises(SymbolError):
        ClassicalSymbol(1, (HomTerm(0, one, one), HomTerm(1, one, one)))


def test_xi_power_sign_on_negative_branch():
    assert ClassicalSymbol.xi_power(3).term(3).minus == block_scalar(1, -1)
    assert ClassicalSymbol.abs_xi_power(3).term(3).minus == block_scalar(1, 1)


def test_compose_differentiates_the_right_factor(shift_up):
    xi = ClassicalSymbol.xi_power(1)
    expected = ClassicalSymbol.scalar_term(1, E, -E) + shift_up
    assert compose(xi, shift_up) == expected
    assert compose(shift_up, xi) == ClassicalSymbol.scalar_term(1, E, -E)


def test_commutator_with_laplace_shift(Q, shift_up):
    expected = ClassicalSymbol.scalar_term(1, E.scale(2), E.scale(-2)) + shift_up
    assert commutator(Q, shift_up) == expected


def test_commutator_of_x_independent_symbol_vanishes(Q, abs_d):
    assert commutator(Q, abs_d).is_zero()
    assert ad_power(Q, abs_d, 3).is_zero()


def test_commutator_of_truncated_symbol_keeps_its_floor(Q):
    one = block_scalar(1, 1)
    truncated = ClassicalSymbol(1, (HomTerm(0, one, one),), -3)
    comm = commutator(Q, truncated)
    assert not comm.is_complete()
    assert not comm.is_zero()
    assert comm.terms == ()
    assert comm.valid_down_to == -2
    assert ad_power(Q, truncated, 2).valid_down_to == -1
    with pytest.raises(FloorUnreachable):
        commutator(Q, truncated, -5)


def test_ad_power_zero_is_identity(Q, shift_up):
    assert ad_power(Q, shift_up, 0) is shift_up


def test_inverse_of_laplace_shift(Q):
    parametrix = inverse(Q, -7)
    expected = ClassicalSymbol.from_terms(1, [
        HomTerm(-2, block_scalar(1, 1), block_scalar(1, 1)),
        HomTerm(-4, block_scalar(1, -1), block_scalar(1, -1)),
        HomTerm(-6, block_scalar(1, 1), block_scalar(1, 1)),
    ], -7)
    assert parametrix == expected


def test_parametrix_inverts_the_weight(Q, identity):
    product = compose_chain([Q.symbol, inverse(Q, -7)], -5)
    assert product.agrees_with(identity, -5)


def test_inverse_floor_must_lie_below_order(Q):
    with pytest.raises(FloorUnreachable):
        inverse(Q, -2)


def test_power_neg_square(Q):
    square = power_neg(Q, 2, -8)
    assert square.valid_down_to == -8
    assert square.term(-4).plus == block_scalar(1, 1)
    assert square.term(-6).plus == block_scalar(1, -2)
    assert square.term(-5).is_zero()


def test_compose_below_certified_floor_raises(Q):
    with pytest.raises(FloorUnreachable):
        compose(inverse(Q, -4), inverse(Q, -4), -8)


def test_rank_mismatch(identity):
    with pytest.raises(RankMismatch):
        compose(identity, ClassicalSymbol.identity(2))


def test_residue_of_basic_symbols(Q, abs_d):
    assert wodzicki_residue(ClassicalSymbol.abs_xi_power(-1)) == 2
    assert wodzicki_residue(ClassicalSymbol.xi_power(-1)) == ZERO
    assert wodzicki_residue(ClassicalSymbol.abs_xi_power(-2)) == ZERO
    assert wodzicki_residue(compose_chain([abs_d, inverse(Q, -5)], -2)) == 2


def test_residue_needs_degree_minus_one():
    truncated = ClassicalSymbol.from_terms(1, [HomTerm(0, block_scalar(1, 1), block_scalar(1, 1))], -1)
    with pytest.raises(InsufficientDepth):
        wodzicki_residue(truncated)


def test_residue_of_matrix_symbol_takes_the_trace():
    symbol = ClassicalSymbol.abs_xi_power(-1, rank=2)
    assert wodzicki_residue(symbol) == 4


@given(st.integers(0, 2 ** 32 - 1))
def test_residue_vanishes_on_commutators(seed):
    rng = fixture_factory.make_rng(seed)
    a, b = fixture_factory.random_pairs(rng, 1, (-3, 3))[0]
    difference = compose_chain([a, b], -2) - compose_chain([b, a], -2)
    assert wodzicki_residue(difference) == ZERO


@given(st.integers(0, 2 ** 32 - 1), st.integers(-2, 2))
def test_truncation_keeps_higher_terms(seed, order):
    rng = fixture_factory.make_rng(seed)
    symbol = fixture_factory.random_symbol(rng, order)
    floor = order - 2
    truncated = symbol.truncate(floor)
    assert truncated.agrees_with(symbol, floor)
    assert all(d > floor for d in truncated.degrees())


def test_eigenvalue_law_validation():
    with pytest.raises(NotElliptic):
        EigenvalueLaw(("1", "0", "-1"))
    with pytest.raises(NotElliptic):
        EigenvalueLaw(("-5", "0", "1"))
    with pytest.raises(NotElliptic):
        EigenvalueLaw(("1",))


def test_eigenvalue_law_values_and_affine_shift():
    law = EigenvalueLaw.laplace_shift()
    assert law.value(-3) == 10
    assert law.order == 2
    shifted = law.affine(DirectionLaw(("0", "1")), "1/2")
    assert shifted.coeffs == (Fraction(1), Fraction(1, 2), Fraction(1))


def test_weight_from_law(Q):
    assert Q.q == 2
    assert Q.leading_coefficients() == (Fraction(1), Fraction(1))
    assert Q.symbol == EigenvalueLaw.laplace_shift().symbol()


def test_weight_rejects_x_dependent_leading_term():
    symbol = ClassicalSymbol.scalar_term(2, FourierPoly({0: 1, 1: 1}), FourierPoly({0: 1, 1: 1}))
    with pytest.raises(NotElliptic):
        Weight(symbol, 2)


def test_weight_rejects_symbol_not_matching_law():
    with pytest.raises(NotElliptic):
        Weight(ClassicalSymbol.abs_xi_power(2), 2, EigenvalueLaw.laplace_shift())


def test_weight_rejects_negative_leading_coefficient():
    with pytest.raises(NotElliptic):
        Weight(ClassicalSymbol.scalar_term(2, CRational.of(-1), CRational.of(1)), 2)
