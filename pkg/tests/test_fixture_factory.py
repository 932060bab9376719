import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

import fixture_factory


def test_same_seed_same_fixtures():
    first = fixture_factory.random_tuple(fixture_factory.make_rng(7), 3, (-2, 2))
    second = fixture_factory.random_tuple(fixture_factory.make_rng(7), 3, (-2, 2))
    assert first == second


@given(st.integers(0, 2 ** 32 - 1), st.integers(-3, 3))
def test_random_symbol_has_requested_order(seed, order):
    symbol = fixture_factory.random_symbol(fixture_factory.make_rng(seed), order)
    assert symbol.order == order
    assert symbol.is_complete()
    assert symbol.rank == 1


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4), st.integers(0, 6))
def test_random_orders_respect_max_sum(seed, size, slack):
    max_sum = -size + slack
    orders = fixture_factory.random_orders(fixture_factory.make_rng(seed), size, -1, 3, max_sum=max_sum)
    assert len(orders) == size
    assert sum(orders) <= max_sum
    assert all(-1 <= o <= 3 for o in orders)


def test_unreachable_order_sum():
    with pytest.raises(ValueError):
        fixture_factory.random_orders(fixture_factory.make_rng(), 3, 0, 2, max_sum=-1)


def test_random_cochain_is_multilinear():
    rng = fixture_factory.make_rng(3)
    phi = fixture_factory.random_cochain(rng, 1)
    a, b, c = fixture_factory.random_matrices(rng, 3)
    assert phi([2 * a, b]) == 2 * phi([a, b])
    assert phi([a, b + c]) == phi([a, b]) + phi([a, c])
    with pytest.raises(ValueError):
        phi([a])


def test_random_matrices_are_exact_integers():
    mats = fixture_factory.random_matrices(fixture_factory.make_rng(), 2, dim=3)
    assert all(m.shape == (3, 3) and m.dtype == np.dtype(object) for m in mats)
