import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

import fixture_factory
from anomaly_engine import (CochainValue, CoefficientConvention, EngineError, FamilySpec, MultiIndex,
                            OutOfRange, coboundary_anomaly, coboundary_terms, convention_pair,
                            correction_sum, correction_terms, expansion_coefficient, family_derivative,
                            gauss_legendre_unit, hochschild_b, interpolation_difference,
                            iterated_simplex_integral, mellin_residue, multi_indices, resolve_arguments,
                            richardson_derivative, simplex_constant)
from exact_algebra import CRational, ZERO
from symbol_calculus import ClassicalSymbol, DirectionLaw, Weight, power_neg

EXACT = CoefficientConvention.EXACT
PAPER = CoefficientConvention.PAPER


@pytest.fixture(scope="module")
def family(Q, abs_d):
    return FamilySpec(Q, abs_d, DirectionLaw(("0", "1")))


def test_multi_index_helpers():
    k = MultiIndex((2, 0, 1))
    assert k.total == 3
    assert k.factorial() == 2
    assert k.shifted_factorial() == 12
    assert k.partial_sums() == (2, 2, 3)
    with pytest.raises(EngineError):
        MultiIndex((1, -1))


def test_multi_indices_order():
    assert [k.entries for k in multi_indices(2, 2)] == [(2, 0), (1, 1), (0, 2)]
    assert [k.entries for k in multi_indices(0, 0)] == [()]
    assert list(multi_indices(0, 1)) == []


@given(st.integers(1, 4), st.integers(0, 6))
def test_multi_indices_count(slots, total):
    found = list(multi_indices(slots, total))
    assert len(found) == math.comb(total + slots - 1, slots - 1)
    assert all(k.total == total and k.size == slots for k in found)


def test_simplex_constant_conventions_differ():
    constant = simplex_constant(MultiIndex((0, 0)))
    assert constant.value_exact == Fraction(1, 2)
    assert constant.value_paper == 1
    assert expansion_coefficient(MultiIndex((1, 0)), EXACT) == Fraction(1, 6)
    assert expansion_coefficient(MultiIndex((1, 0)), PAPER) == Fraction(1, 2)


@given(st.integers(0, 8))
def test_single_slot_conventions_agree(k):
    constant = simplex_constant(MultiIndex((k,)))
    assert constant.value_exact == constant.value_paper == Fraction(1, k + 1)


def test_simplex_constant_matches_iterated_integral():
    for slots in range(1, 4):
        for total in range(5):
            for k in multi_indices(slots, total):
                assert simplex_constant(k).value_exact == iterated_simplex_integral(k)


def test_convention_parse():
    assert CoefficientConvention.parse("PAPER") is PAPER
    assert CoefficientConvention.parse(EXACT) is EXACT
    with pytest.raises(EngineError):
        CoefficientConvention.parse("rounded")


def test_cochain_value_keeps_exact_part_only_when_both_exact():
    exact = CochainValue.exact(CRational.of(2))
    numeric = CochainValue(1.5 + 0j, 1e-9)
    assert (exact + exact).exact_part == CRational.of(4)
    assert (exact + numeric).exact_part is None
    assert (exact + numeric).err == pytest.approx(1e-9)
    assert exact.scale(-1).exact_part == CRational.of(-2)


def test_hochschild_b_of_trace_vanishes():
    a = np.array([[1, 2], [3, 4]], dtype=object)
    b = np.array([[0, 1], [5, -2]], dtype=object)
    value = hochschild_b(lambda args: int(np.trace(args[0])), [a, b], np.matmul)
    assert value.exact_part == ZERO


def test_hochschild_b_needs_two_arguments():
    with pytest.raises(EngineError):
        hochschild_b(lambda args: 0, [1])


@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 2))
def test_hochschild_b_is_nilpotent(seed, degree):
    rng = fixture_factory.make_rng(seed)
    phi = fixture_factory.random_cochain(rng, degree)
    args = fixture_factory.random_matrices(rng, degree + 3)
    value = hochschild_b(lambda inner: hochschild_b(phi, inner, np.matmul), args, np.matmul)
    assert value.exact_part == ZERO


def test_resolve_arguments_composes_words(Q, abs_d):
    q_inverse = power_neg(Q, 1, -14)
    resolved = resolve_arguments([abs_d, (abs_d, q_inverse)])
    assert resolved[0] is abs_d
    assert resolved[1].order == -1
    with pytest.raises(EngineError):
        resolve_arguments([()])


def test_mellin_residue(Q, abs_d):
    q_inverse = power_neg(Q, 1, -14)
    assert mellin_residue(Q, [abs_d, q_inverse]) == 1
    assert mellin_residue(Q, [ClassicalSymbol.abs_xi_power(-1)]) == 1
    assert mellin_residue(Q, [abs_d]) == ZERO


def test_correction_terms_need_two_arguments(Q, abs_d):
    assert correction_terms(Q, [abs_d]) == []


def test_correction_sum_vanishes_for_commuting_arguments(Q, identity, abs_d):
    assert correction_sum(Q, [identity, identity, identity]) == ZERO
    assert correction_sum(Q, [abs_d, abs_d], PAPER) == ZERO


def test_coboundary_anomaly_of_shift_pair(Q, shift_up, shifted_abs_d):
    # tr^Q(|D|) - tr^Q(|D + 1|) = -1
    assert coboundary_anomaly(Q, [shift_up, shifted_abs_d], EXACT) == -1
    assert coboundary_anomaly(Q, [shift_up, shifted_abs_d], PAPER) == -1


def test_coboundary_terms_record_every_slot(Q, shift_up, shifted_abs_d):
    terms = coboundary_terms(Q, [shift_up, shifted_abs_d])
    assert [t.k.entries for t in terms] == [(0,), (1,)]
    assert [t.slot for t in terms] == [1, 1]
    assert [t.contribution for t in terms] == [CRational.of(1), CRational.of(-2)]


def test_coboundary_needs_even_arity(Q, shift_up):
    with pytest.raises(EngineError):
        coboundary_anomaly(Q, [shift_up, shift_up, shift_up])


@given(st.integers(0, 2 ** 32 - 1))
def test_coboundary_vanishes_below_order_minus_one(seed):
    Q = Weight.laplace_shift()
    rng = fixture_factory.make_rng(seed)
    symbols = fixture_factory.random_tuple(rng, 2, (-3, 1), support=2, max_sum=-1)
    assert coboundary_anomaly(Q, symbols, EXACT, extra_shells=2) == ZERO


def test_extra_shells_add_only_vanishing_residues(Q, shift_up, shifted_abs_d):
    base = correction_terms(Q, [shift_up, shifted_abs_d])
    extended = correction_terms(Q, [shift_up, shifted_abs_d], EXACT, extra_shells=2)
    assert extended[:len(base)] == base
    assert len(extended) > len(base)
    assert all(t.residue.is_zero() for t in extended[len(base):])


def test_convention_pair(Q, shift_up, shifted_abs_d):
    pair = convention_pair(lambda c: coboundary_anomaly(Q, [shift_up, shifted_abs_d], c))
    assert pair['agree']
    assert pair['value_exact'] == pair['value_paper'] == -1


def test_family_derivative_along_abs_d(family, identity):
    assert family_derivative(family, "1/2", [identity]) == -1
    assert family_derivative(family, 0, [identity], PAPER) == -1


def test_family_range_and_validation(Q, family, identity):
    with pytest.raises(OutOfRange):
        family.weight_at(2)
    with pytest.raises(EngineError):
        FamilySpec(Q, ClassicalSymbol.abs_xi_power(3), DirectionLaw(("0", "0", "0", "1")))
    with pytest.raises(EngineError):
        FamilySpec(Q, ClassicalSymbol.abs_xi_power(1))
    assert family.weight_at("1/2").spectral_model.coeffs == (1, Fraction(1, 2), 1)


def test_interpolation_difference(family, identity):
    result = interpolation_difference(family, [identity], nodes=4)
    assert result.value == pytest.approx(-1.0, abs=1e-12)
    assert result.err < 1e-10


def test_gauss_legendre_unit_weights():
    nodes = gauss_legendre_unit(6)
    assert sum(w for _, w in nodes) == pytest.approx(1.0)
    assert all(0 < t < 1 for t, _ in nodes)


def test_richardson_derivative_of_cubic():
    value, err = richardson_derivative(lambda x: x ** 3, 1.0, 0.1, levels=3)
    assert value == pytest.approx(3.0, abs=1e-10)
    assert err < 1e-8
    with pytest.raises(EngineError):
        richardson_derivative(lambda x: x, 0.0, 0.1, levels=0)
