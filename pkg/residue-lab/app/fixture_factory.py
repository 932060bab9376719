"""
Fixture Factory für residue-lab
Zufällige Symbole, Tupel und Kozyklen-Tabellen für die Eigenschaftsprüfungen.
Alle Zufallszahlen kommen aus einem numpy Generator mit festem Seed.
"""

from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

from exact_algebra import CRational, FourierPoly
from symbol_calculus import ClassicalSymbol, HomTerm, block_of

DEFAULT_SEED = 20240901


def make_rng(seed: int = DEFAULT_SEED) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_poly(rng: np.random.Generator, support: int, density: float = 0.6) -> FourierPoly:
    """Fourier polynomial with small Gaussian-rational coefficients on |freq| <= support."""
    coeffs = {}
    for freq in range(-support, support + 1):
        if rng.random() > density:
            continue
        re = Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4)))
        im = Fraction(int(rng.integers(-2, 3)), int(rng.integers(1, 3))) if rng.random() < 0.3 else Fraction(0)
        coeffs[freq] = CRational(re, im)
    return FourierPoly(coeffs)


def _nonzero_poly(rng: np.random.Generator, support: int) -> FourierPoly:
    poly = random_poly(rng, support)
    while poly.is_zero():
        poly = random_poly(rng, support)
    return poly


def random_symbol(rng: np.random.Generator, order: int, support: int = 3, depth: int = 3) -> ClassicalSymbol:
    """Complete rank-1 symbol with nonzero top term at ``order`` and up to ``depth`` terms below it."""
    terms = [HomTerm(order, block_of([[_nonzero_poly(rng, support)]]), block_of([[_nonzero_poly(rng, support)]]))]
    for degree in range(order - 1, order - 1 - int(rng.integers(0, depth + 1)), -1):
        terms.append(HomTerm(degree, block_of([[random_poly(rng, support)]]),
                             block_of([[random_poly(rng, support)]])))
    return ClassicalSymbol.from_terms(1, terms)


def random_orders(rng: np.random.Generator, size: int, low: int, high: int,
                  max_sum: int = None) -> List[int]:
    """Orders in [low, high]; with ``max_sum`` the largest ones are lowered until the sum fits."""
    orders = [int(o) for o in rng.integers(low, high + 1, size=size)]
    if max_sum is not None:
        if low * size > max_sum:
            raise ValueError(f"Summe {max_sum} mit {size} Ordnungen >= {low} nicht erreichbar")
        while sum(orders) > max_sum:
            i = int(np.argmax(orders))
            orders[i] -= 1
    return orders


def random_tuple(rng: np.random.Generator, size: int, orders: Tuple[int, int], support: int = 3,
                 max_sum: int = None) -> List[ClassicalSymbol]:
    return [random_symbol(rng, m, support) for m in random_orders(rng, size, orders[0], orders[1], max_sum)]


def random_pairs(rng: np.random.Generator, count: int, orders: Tuple[int, int],
                 support: int = 3) -> List[Tuple[ClassicalSymbol, ClassicalSymbol]]:
    return [tuple(random_tuple(rng, 2, orders, support)) for _ in range(count)]


def random_cochain(rng: np.random.Generator, degree: int, dim: int = 2):
    """
    Integer multilinear functional on dim x dim matrices:
    φ(A_0..A_n) = Σ T[i_0..i_n] Π (A_j)_{i_j}, exact in int arithmetic.
    """
    size = dim * dim
    tensor = rng.integers(-3, 4, size=(size,) * (degree + 1)).astype(object)

    def phi(args: Sequence[np.ndarray]) -> int:
        if len(args) != degree + 1:
            raise ValueError(f"Kozykel vom Grad {degree} braucht {degree + 1} Argumente")
        out = tensor
        for a in reversed(args):
            out = out.dot(np.asarray(a, dtype=object).reshape(size))
        return int(out)

    return phi


def random_matrices(rng: np.random.Generator, count: int, dim: int = 2) -> List[np.ndarray]:
    return [rng.integers(-4, 5, size=(dim, dim)).astype(object) for _ in range(count)]
