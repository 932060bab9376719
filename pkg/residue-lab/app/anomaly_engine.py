"""
Anomaly Engine für residue-lab
Simplex-Konstanten, Korrekturterme der gewichteten Spur-Kozyklen, Hochschild-
Korand-Anomalie, Variation entlang einer Gewichtsfamilie und die
Interpolationsdifferenz. Alle Residuensummen sind exakt rational.
"""

import logging
import math
import operator
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from exact_algebra import CRational, RationalLike, ZERO, rational_sum, to_fraction
from symbol_calculus import (ClassicalSymbol, DirectionLaw, Weight,
                             ad_power, compose_chain, factor_floors,
                             power_neg, wodzicki_residue)

logger = logging.getLogger(__name__)


class EngineError(Exception):
    """Basisklasse für Fehler der Anomalie-Engine."""

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class OutOfRange(EngineError):
    """Familienparameter außerhalb des erlaubten Intervalls."""


# ---------------------------------------------------------------------------
# Multiindizes und Simplex-Konstanten
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MultiIndex:
    entries: Tuple[int, ...]

    def __post_init__(self):
        if any(k < 0 for k in self.entries):
            raise EngineError(f"Multiindex mit negativem Eintrag: {self.entries}")

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def total(self) -> int:
        return sum(self.entries)

    def factorial(self) -> int:
        return math.prod(math.factorial(k) for k in self.entries)

    def shifted_factorial(self) -> int:
        """(k+1)! = Π (k_j + 1)!."""
        return math.prod(math.factorial(k + 1) for k in self.entries)

    def partial_sums(self) -> Tuple[int, ...]:
        sums, acc = [], 0
        for k in self.entries:
            acc += k
            sums.append(acc)
        return tuple(sums)

    def __iter__(self):
        return iter(self.entries)

    def __str__(self):
        return "(" + ",".join(str(k) for k in self.entries) + ")"


def multi_indices(slots: int, total: int) -> Iterator[MultiIndex]:
    """All k with ``slots`` entries and |k| = total, in lexicographic order."""
    if slots == 0:
        if total == 0:
            yield MultiIndex(())
        return
    if slots == 1:
        yield MultiIndex((total,))
        return
    for first in range(total, -1, -1):
        for rest in multi_indices(slots - 1, total - first):
            yield MultiIndex((first,) + rest.entries)


class CoefficientConvention(Enum):
    EXACT = 'exact'
    PAPER = 'paper'

    @staticmethod
    def parse(value: Any) -> 'CoefficientConvention':
        if isinstance(value, CoefficientConvention):
            return value
        try:
            return CoefficientConvention(str(value).lower())
        except ValueError:
            raise EngineError(f"Unbekannte Konvention: {value}")


@dataclass(frozen=True)
class SimplexConstant:
    k: MultiIndex
    value_exact: Fraction
    value_paper: Fraction

    def coefficient(self, conv: CoefficientConvention) -> Fraction:
        """Expansion coefficient D(k) under the chosen convention."""
        if conv is CoefficientConvention.EXACT:
            return self.value_exact / self.k.factorial()
        return Fraction(1, self.k.shifted_factorial())


def iterated_simplex_integral(k: MultiIndex) -> Fraction:
    """
    ∫ Π v_j^{k_j} over 0 <= v_1 <= ... <= v_s <= 1, integrated variable by
    variable on exact polynomial coefficients.
    """
    # polynomial in the current upper variable: {exponent: coefficient}
    poly = {0: Fraction(1)}
    for kj in k.entries:
        poly = {e + kj: c for e, c in poly.items()}
        poly = {e + 1: c / (e + 1) for e, c in poly.items()}
    return sum(poly.values(), Fraction(0))


@lru_cache(maxsize=4096)
def simplex_constant(k: MultiIndex) -> SimplexConstant:
    value_exact = Fraction(1)
    for j, big_k in enumerate(k.partial_sums(), start=1):
        value_exact /= big_k + j
    value_paper = Fraction(k.factorial(), k.shifted_factorial())
    return SimplexConstant(k, value_exact, value_paper)


def expansion_coefficient(k: MultiIndex, conv: CoefficientConvention) -> Fraction:
    return simplex_constant(k).coefficient(conv)


# ---------------------------------------------------------------------------
# Werte und Termtabellen
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CochainValue:
    value: complex
    err: float = 0.0
    exact_part: Optional[CRational] = None

    @staticmethod
    def exact(value: CRational) -> 'CochainValue':
        return CochainValue(complex(value), 0.0, value)

    @staticmethod
    def coerce(value: Any) -> 'CochainValue':
        if isinstance(value, CochainValue):
            return value
        if isinstance(value, CRational):
            return CochainValue.exact(value)
        if isinstance(value, (int, Fraction)):
            return CochainValue.exact(CRational.of(value))
        if isinstance(value, tuple) and len(value) == 2:
            return CochainValue(complex(value[0]), float(value[1]))
        return CochainValue(complex(value))

    def __add__(self, other: 'CochainValue') -> 'CochainValue':
        exact = None
        if self.exact_part is not None and other.exact_part is not None:
            exact = self.exact_part + other.exact_part
        return CochainValue(self.value + other.value, self.err + other.err, exact)

    def scale(self, sign: int) -> 'CochainValue':
        exact = None if self.exact_part is None else self.exact_part * sign
        return CochainValue(self.value * sign, self.err * abs(sign), exact)

    def to_json(self) -> dict:
        return {
            'value': [self.value.real, self.value.imag],
            'err': self.err,
            'exact_part': str(self.exact_part) if self.exact_part is not None else None,
        }


@dataclass(frozen=True)
class TermRecord:
    """One residue term of an anomaly formula (the 1/q factor is included in contribution)."""
    k: MultiIndex
    slot: Optional[int]
    coefficient: Fraction
    residue: CRational
    contribution: CRational

    def to_json(self) -> dict:
        return {
            'k': list(self.k.entries),
            'slot': self.slot,
            'coefficient': str(self.coefficient),
            'residue': str(self.residue),
            'contribution': str(self.contribution),
        }


def product_residue(Q: Weight, pieces: Sequence[Tuple[ClassicalSymbol, int]], power: int) -> CRational:
    """res(B_1^{(k_1)} ... B_m^{(k_m)} Q^{-power}) with every factor floor chosen automatically."""
    q = Q.q
    orders = []
    for sym, k in pieces:
        if sym.is_zero():
            return ZERO
        orders.append(sym.order + k * (q - 1))
    if power:
        orders.append(-power * q)
    if sum(orders) < -1:
        return ZERO
    floors = [int(f) for f in factor_floors(orders, -2)]
    factors = []
    for (sym, k), floor in zip(pieces, floors):
        factor = ad_power(Q, sym, k, floor)
        if factor.is_zero():
            return ZERO
        factors.append(factor)
    if power:
        factors.append(power_neg(Q, power, floors[-1]))
    return wodzicki_residue(compose_chain(factors, -2))


Argument = Union[ClassicalSymbol, Sequence[ClassicalSymbol]]


def as_word(arg: Argument) -> Tuple[ClassicalSymbol, ...]:
    if isinstance(arg, ClassicalSymbol):
        return (arg,)
    return tuple(arg)


def word_product(a: Argument, b: Argument) -> Tuple[ClassicalSymbol, ...]:
    """Formal product of symbol words; the oracle multiplies the letters at matrix level."""
    return as_word(a) + as_word(b)


def resolve_arguments(args: Sequence[Argument]) -> List[ClassicalSymbol]:
    """
    Compose every word into one symbol, certified deep enough for all residue
    terms the formulas can request (|a| + 3 below the word order).
    """
    words = [as_word(a) for a in args]
    if any(not w for w in words):
        raise EngineError("Leeres Wort als Argument")
    if all(len(w) == 1 for w in words):
        return [w[0] for w in words]
    letters = [s for w in words for s in w]
    if any(s.is_zero() for s in letters):
        return [ClassicalSymbol.zero(w[0].rank) if any(s.is_zero() for s in w) else w[0] for w in words]
    total = int(sum(s.order for s in letters))
    resolved = []
    for w in words:
        if len(w) == 1:
            resolved.append(w[0])
            continue
        order = int(sum(s.order for s in w))
        resolved.append(compose_chain(list(w), order - abs(total) - 3))
    return resolved


def _total_order(symbols: Sequence[ClassicalSymbol]) -> Optional[int]:
    if any(s.is_zero() for s in symbols):
        return None
    return int(sum(s.order for s in symbols))


def _finish(terms: List[TermRecord]) -> CRational:
    return rational_sum(t.contribution for t in terms)


# ---------------------------------------------------------------------------
# Gewichtete Spur-Kozyklen
# ---------------------------------------------------------------------------

def correction_terms(Q: Weight, symbols: Sequence[Argument],
                     conv: CoefficientConvention = CoefficientConvention.EXACT,
                     extra_shells: int = 0) -> List[TermRecord]:
    """Residue terms (1/q)(-1)^{|k|}(|k|-1)! D(k) res(A_0 A_1^{(k_1)}...A_n^{(k_n)} Q^{-|k|})."""
    symbols = resolve_arguments(symbols)
    n = len(symbols) - 1
    if n < 0:
        raise EngineError("Mindestens ein Argument erforderlich")
    total_order = _total_order(symbols)
    if n == 0 or total_order is None:
        return []
    inv_q = Fraction(1, Q.q)
    terms = []
    for total in range(1, total_order + 2 + extra_shells):
        sign = -1 if total % 2 else 1
        for k in multi_indices(n, total):
            coeff = sign * math.factorial(total - 1) * expansion_coefficient(k, conv)
            pieces = [(symbols[0], 0)] + list(zip(symbols[1:], k.entries))
            res = product_residue(Q, pieces, total)
            terms.append(TermRecord(k, None, coeff, res, res * (coeff * inv_q)))
    logger.debug(f"correction_sum: {len(terms)} Terme (n={n}, |a|={total_order})")
    return terms


def correction_sum(Q: Weight, symbols: Sequence[Argument],
                   conv: CoefficientConvention = CoefficientConvention.EXACT,
                   extra_shells: int = 0) -> CRational:
    return _finish(correction_terms(Q, symbols, conv, extra_shells))


def mellin_residue(Q: Weight, symbols: Sequence[Argument]) -> CRational:
    """(1/q)·res(A_0 ... A_n), the pole of the Mellin cochain at zero."""
    if not symbols:
        raise EngineError("Mindestens ein Argument erforderlich")
    letters = [s for arg in symbols for s in as_word(arg)]
    return product_residue(Q, [(s, 0) for s in letters], 0) * Fraction(1, Q.q)


def weighted_cochain(Q: Weight, symbols: Sequence[Argument], trace_provider: Any,
                     conv: CoefficientConvention = CoefficientConvention.EXACT) -> CochainValue:
    """
    χ_n^Q(A_0, ..., A_n) = tr^Q(A_0...A_n) + correction_sum.

    ``trace_provider`` needs a ``weighted_trace(Q, factors) -> (value, err)``
    method (the spectral oracle provides one).
    """
    letters = [s for arg in symbols for s in as_word(arg)]
    value, err = trace_provider.weighted_trace(Q, letters)
    correction = correction_sum(Q, symbols, conv)
    return CochainValue(complex(value) + complex(correction), float(err))


def coboundary_terms(Q: Weight, symbols: Sequence[Argument],
                     conv: CoefficientConvention = CoefficientConvention.EXACT,
                     extra_shells: int = 0) -> List[TermRecord]:
    """Terms of b χ_{2p}^Q(A_0, ..., A_{2p+1}) over multi-indices with 2p+1 slots."""
    if len(symbols) < 2 or len(symbols) % 2:
        raise EngineError(f"Korand braucht eine gerade Anzahl >= 2 Argumente, erhalten {len(symbols)}")
    symbols = resolve_arguments(symbols)
    slots = len(symbols) - 1
    p = (slots - 1) // 2
    total_order = _total_order(symbols)
    if total_order is None or total_order + extra_shells < 0:
        return []
    inv_q = Fraction(1, Q.q)
    terms = []
    for total in range(0, total_order + 1 + extra_shells):
        sign = -1 if total % 2 else 1
        for k in multi_indices(slots, total):
            coeff = sign * math.factorial(total) * expansion_coefficient(k, conv)
            for j in range(p + 1):
                bumped = list(k.entries)
                bumped[2 * j] += 1
                pieces = [(symbols[0], 0)] + list(zip(symbols[1:], bumped))
                res = product_residue(Q, pieces, total + 1)
                terms.append(TermRecord(k, 2 * j + 1, coeff, res, res * (coeff * inv_q)))
    logger.debug(f"coboundary_anomaly: {len(terms)} Terme (p={p}, |a|={total_order})")
    return terms


def coboundary_anomaly(Q: Weight, symbols: Sequence[Argument],
                       conv: CoefficientConvention = CoefficientConvention.EXACT,
                       extra_shells: int = 0) -> CRational:
    return _finish(coboundary_terms(Q, symbols, conv, extra_shells))


def hochschild_b(evaluator: Callable[[Sequence[Any]], Any], args: Sequence[Any],
                 product: Callable[[Any, Any], Any] = operator.matmul) -> CochainValue:
    """
    bχ(A_0..A_{n+1}) = Σ_j (-1)^j χ(.., A_j A_{j+1}, ..) + (-1)^{n+1} χ(A_{n+1}A_0, A_1, .., A_n).
    """
    args = list(args)
    if len(args) < 2:
        raise EngineError("Hochschild-Korand braucht mindestens zwei Argumente")
    n = len(args) - 2
    total = CochainValue.exact(ZERO)
    for j in range(n + 1):
        merged = args[:j] + [product(args[j], args[j + 1])] + args[j + 2:]
        total = total + CochainValue.coerce(evaluator(merged)).scale(-1 if j % 2 else 1)
    wrapped = [product(args[-1], args[0])] + args[1:-1]
    total = total + CochainValue.coerce(evaluator(wrapped)).scale(-1 if (n + 1) % 2 else 1)
    return total


# ---------------------------------------------------------------------------
# Gewichtsfamilien
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilySpec:
    """Affine family Q_t = base + t·direction on ``t_range``."""
    base: Weight
    direction: ClassicalSymbol
    eigen_direction: Optional[DirectionLaw] = None
    t_range: Tuple[Fraction, Fraction] = (Fraction(0), Fraction(1))

    def __post_init__(self):
        lo, hi = (to_fraction(v) for v in self.t_range)
        object.__setattr__(self, 't_range', (lo, hi))
        if lo > hi:
            raise EngineError(f"Leeres Intervall: [{lo}, {hi}]")
        if self.direction.order > self.base.q:
            raise EngineError(f"Richtung hat Ordnung {self.direction.order} > q = {self.base.q}")
        if self.base.spectral_model is not None:
            if self.eigen_direction is None:
                raise EngineError("Diagonales Gewicht braucht ein Eigenwertgesetz der Richtung")
            if self.eigen_direction.symbol(self.base.rank) != self.direction:
                raise EngineError("Richtungssymbol passt nicht zum Eigenwertgesetz")
        # leading coefficients are affine in t: positivity at both ends suffices
        self.weight_at(lo)
        self.weight_at(hi)

    def contains(self, t: RationalLike) -> bool:
        t = to_fraction(t)
        return self.t_range[0] <= t <= self.t_range[1]

    def weight_at(self, t: RationalLike) -> Weight:
        return _family_weight(self, to_fraction(t))


@lru_cache(maxsize=256)
def _family_weight(family: FamilySpec, t: Fraction) -> Weight:
    if not (family.t_range[0] <= t <= family.t_range[1]):
        raise OutOfRange(f"t = {t} liegt außerhalb von [{family.t_range[0]}, {family.t_range[1]}]")
    symbol = family.base.symbol + family.direction.scale(t)
    law = None
    if family.base.spectral_model is not None:
        law = family.base.spectral_model.affine(family.eigen_direction, t)
    return Weight(symbol, family.base.q, law)


def family_terms(family: FamilySpec, t: RationalLike, symbols: Sequence[Argument],
                 conv: CoefficientConvention = CoefficientConvention.EXACT,
                 extra_shells: int = 0) -> List[TermRecord]:
    """Terms of d/dt χ_n^{Q_t}(A_0..A_n): Q̇ inserted at every position j = 1..n+1."""
    if not symbols:
        raise EngineError("Mindestens ein Argument erforderlich")
    symbols = resolve_arguments(symbols)
    Qt = family.weight_at(t)
    if family.direction.is_zero():
        return []
    total_order = _total_order(symbols)
    if total_order is None:
        return []
    slots = len(symbols)
    inv_q = Fraction(1, Qt.q)
    terms = []
    for total in range(0, total_order + 2 + extra_shells):
        sign = 1 if total % 2 else -1
        for k in multi_indices(slots, total):
            coeff = sign * math.factorial(total) * expansion_coefficient(k, conv)
            for j in range(1, slots + 1):
                pieces = [(symbols[0], 0)]
                pieces += [(symbols[i], k.entries[i - 1]) for i in range(1, j)]
                pieces.append((family.direction, k.entries[j - 1]))
                pieces += [(symbols[i], k.entries[i]) for i in range(j, slots)]
                res = product_residue(Qt, pieces, total + 1)
                terms.append(TermRecord(k, j, coeff, res, res * (coeff * inv_q)))
    return terms


def family_derivative(family: FamilySpec, t: RationalLike, symbols: Sequence[Argument],
                      conv: CoefficientConvention = CoefficientConvention.EXACT,
                      extra_shells: int = 0) -> CRational:
    return _finish(family_terms(family, t, symbols, conv, extra_shells))


def gauss_legendre_unit(nodes: int, denominator_limit: int = 10 ** 9) -> List[Tuple[Fraction, float]]:
    """Gauss–Legendre nodes mapped to [0, 1], nodes rounded to nearby rationals."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    return [(Fraction(float((xi + 1) / 2)).limit_denominator(denominator_limit), float(wi / 2))
            for xi, wi in zip(x, w)]


def interpolation_difference(family: FamilySpec, symbols: Sequence[Argument], nodes: int = 8,
                             conv: CoefficientConvention = CoefficientConvention.EXACT) -> CochainValue:
    """∫_0^1 d/dt χ_n^{Q_t} dt, error from comparison against twice the node count."""
    if nodes <= 0:
        raise EngineError(f"Knotenzahl muss positiv sein: {nodes}")
    if not (family.contains(0) and family.contains(1)):
        raise OutOfRange("Familie muss auf [0, 1] definiert sein")
    if family.direction.is_zero():
        return CochainValue.exact(ZERO)

    def integrate(count: int) -> complex:
        return sum(weight * complex(family_derivative(family, t, symbols, conv))
                   for t, weight in gauss_legendre_unit(count))

    coarse = integrate(nodes)
    fine = integrate(2 * nodes)
    logger.debug(f"Interpolation: {nodes} Knoten {coarse}, {2 * nodes} Knoten {fine}")
    return CochainValue(fine, abs(fine - coarse) + 1e-15 * max(1.0, abs(fine)))


def richardson_derivative(f: Callable[[float], complex], x: float, h: float,
                          levels: int = 3) -> Tuple[complex, float]:
    """Central differences at h, h/2, ... extrapolated; returns (value, err)."""
    if levels < 1:
        raise EngineError(f"Mindestens eine Richardson-Stufe: {levels}")
    table: List[List[complex]] = []
    for i in range(levels):
        step = h / 2 ** i
        row = [(f(x + step) - f(x - step)) / (2 * step)]
        for j in range(1, i + 1):
            factor = 4 ** j
            row.append((factor * row[j - 1] - table[i - 1][j - 1]) / (factor - 1))
        table.append(row)
    best = table[-1][-1]
    err = abs(best - table[-2][-2]) if levels > 1 else abs(best)
    return best, err


def convention_pair(evaluate: Callable[[CoefficientConvention], CRational]) -> dict:
    """Evaluate under both conventions for side-by-side reporting."""
    exact = evaluate(CoefficientConvention.EXACT)
    paper = evaluate(CoefficientConvention.PAPER)
    return {'value_exact': exact, 'value_paper': paper, 'agree': exact == paper}


__all__ = [
    'EngineError', 'OutOfRange', 'MultiIndex', 'multi_indices', 'CoefficientConvention',
    'SimplexConstant', 'simplex_constant', 'iterated_simplex_integral', 'expansion_coefficient',
    'CochainValue', 'TermRecord', 'Argument', 'as_word', 'word_product', 'resolve_arguments',
    'product_residue', 'correction_terms', 'correction_sum',
    'mellin_residue', 'weighted_cochain', 'coboundary_terms', 'coboundary_anomaly', 'hochschild_b',
    'FamilySpec', 'family_terms', 'family_derivative', 'gauss_legendre_unit',
    'interpolation_difference', 'richardson_derivative', 'convention_pair',
]
