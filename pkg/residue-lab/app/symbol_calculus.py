"""
Symbol Calculus für residue-lab
Klassische Pseudodifferential-Symbole auf dem Kreis: Komposition, Kommutatoren
mit dem Gewicht, Parametrix-Inverse, negative Potenzen und das Wodzicki-Residuum.

Jede Operation berechnet die schwächste Gültigkeitsgrenze (valid_down_to), die
sie garantieren kann, und speichert sie im Ergebnis. Grade <= valid_down_to
sind unbekannt; -inf bedeutet vollständiges Symbol.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from exact_algebra import (CRational, FourierPoly, ZERO, RationalLike,
                           convolve, derivative_x, to_fraction)

logger = logging.getLogger(__name__)

NEG_INF = -math.inf

Order = Union[int, float]
Block = Tuple[Tuple[FourierPoly, ...], ...]


class SymbolError(Exception):
    """Basisklasse für Fehler im Symbolkalkül."""

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class FloorUnreachable(SymbolError):
    """Die Operanden sind nicht tief genug bekannt für die verlangte Untergrenze."""


class InsufficientDepth(SymbolError):
    """Der Grad -1 ist nicht zertifiziert."""


class NotElliptic(SymbolError):
    """Leitterm des Gewichts ist nicht positiv skalar."""


class RankMismatch(SymbolError):
    """Matrix-Ränge der Operanden stimmen nicht überein."""


# ---------------------------------------------------------------------------
# Matrix-Blöcke aus Fourier-Polynomen
# ---------------------------------------------------------------------------

def block_zero(rank: int) -> Block:
    return tuple(tuple(FourierPoly() for _ in range(rank)) for _ in range(rank))


def block_scalar(rank: int, value: Union[CRational, RationalLike, FourierPoly]) -> Block:
    poly = value if isinstance(value, FourierPoly) else FourierPoly.constant(value)
    return tuple(tuple(poly if i == j else FourierPoly() for j in range(rank)) for i in range(rank))


def block_of(entries: Sequence[Sequence[FourierPoly]]) -> Block:
    return tuple(tuple(row) for row in entries)


def block_add(a: Block, b: Block) -> Block:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def block_scale(a: Block, factor: Union[CRational, RationalLike]) -> Block:
    return tuple(tuple(x.scale(factor) for x in row) for row in a)


def block_mul(a: Block, b: Block) -> Block:
    rank = len(a)
    out = []
    for i in range(rank):
        row = []
        for j in range(rank):
            acc = FourierPoly()
            for k in range(rank):
                if not a[i][k].is_zero() and not b[k][j].is_zero():
                    acc = acc + convolve(a[i][k], b[k][j])
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def block_dx(a: Block, times: int = 1) -> Block:
    return tuple(tuple(derivative_x(x, times) for x in row) for row in a)


def block_is_zero(a: Block) -> bool:
    return all(x.is_zero() for row in a for x in row)


def block_trace(a: Block) -> FourierPoly:
    acc = FourierPoly()
    for i in range(len(a)):
        acc = acc + a[i][i]
    return acc


def block_is_constant(a: Block) -> bool:
    return all(x.is_constant() for row in a for x in row)


def block_scalar_value(a: Block) -> Optional[FourierPoly]:
    """Return f when a = f·I, else None."""
    rank = len(a)
    diag = a[0][0]
    for i in range(rank):
        for j in range(rank):
            if i == j and a[i][j] != diag:
                return None
            if i != j and not a[i][j].is_zero():
                return None
    return diag


def block_support(a: Block) -> int:
    return max((x.support_bound for row in a for x in row), default=0)


def generalized_binomial(d: int, alpha: int) -> Fraction:
    """d(d-1)...(d-alpha+1)/alpha! for any integer d."""
    value = Fraction(1)
    for i in range(alpha):
        value = value * (d - i) / (i + 1)
    return value


# ---------------------------------------------------------------------------
# Symbole
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HomTerm:
    """Homogeneous component: plus·ξ^d on ξ>0 and minus·|ξ|^d on ξ<0."""
    degree: int
    plus: Block
    minus: Block

    @property
    def rank(self) -> int:
        return len(self.plus)

    def is_zero(self) -> bool:
        return block_is_zero(self.plus) and block_is_zero(self.minus)

    def derivative_xi(self) -> 'HomTerm':
        # |ξ| = -ξ on the minus branch
        d = self.degree
        return HomTerm(d - 1, block_scale(self.plus, d), block_scale(self.minus, -d))

    def derivative_x(self, times: int = 1) -> 'HomTerm':
        return HomTerm(self.degree, block_dx(self.plus, times), block_dx(self.minus, times))

    def scale(self, factor: Union[CRational, RationalLike]) -> 'HomTerm':
        return HomTerm(self.degree, block_scale(self.plus, factor), block_scale(self.minus, factor))

    def __add__(self, other: 'HomTerm') -> 'HomTerm':
        if other.degree != self.degree:
            raise SymbolError(f"Grade passen nicht: {self.degree} vs {other.degree}")
        return HomTerm(self.degree, block_add(self.plus, other.plus), block_add(self.minus, other.minus))

    def is_x_independent(self) -> bool:
        return block_is_constant(self.plus) and block_is_constant(self.minus)

    def support_bound(self) -> int:
        return max(block_support(self.plus), block_support(self.minus))


@dataclass(frozen=True)
class ClassicalSymbol:
    """
    Truncated polyhomogeneous symbol of rank r.

    ``terms`` holds the nonzero homogeneous components in decreasing degree,
    every degree strictly above ``valid_down_to``.
    """
    rank: int
    terms: Tuple[HomTerm, ...] = ()
    valid_down_to: Order = NEG_INF

    def __post_init__(self):
        if self.rank < 1:
            raise SymbolError(f"Rang muss positiv sein: {self.rank}")
        degrees = [t.degree for t in self.terms]
        if degrees != sorted(set(degrees), reverse=True):
            raise SymbolError("Terme müssen nach fallendem Grad sortiert und eindeutig sein")
        for term in self.terms:
            if term.rank != self.rank:
                raise RankMismatch(f"Term vom Rang {term.rank} in Symbol vom Rang {self.rank}")
            if term.degree <= self.valid_down_to:
                raise SymbolError(f"Grad {term.degree} liegt unter der Gültigkeitsgrenze {self.valid_down_to}")
            if term.is_zero():
                raise SymbolError(f"Nullterm bei Grad {term.degree} gespeichert")

    # -- Konstruktoren -----------------------------------------------------

    @staticmethod
    def from_terms(rank: int, terms: Iterable[HomTerm], valid_down_to: Order = NEG_INF) -> 'ClassicalSymbol':
        """Sum up terms by degree, drop zeros and everything at or below the floor."""
        acc: Dict[int, HomTerm] = {}
        for term in terms:
            if term.degree <= valid_down_to:
                continue
            acc[term.degree] = acc[term.degree] + term if term.degree in acc else term
        kept = tuple(acc[d] for d in sorted(acc, reverse=True) if not acc[d].is_zero())
        return ClassicalSymbol(rank, kept, valid_down_to)

    @staticmethod
    def zero(rank: int = 1) -> 'ClassicalSymbol':
        return ClassicalSymbol(rank)

    @staticmethod
    def identity(rank: int = 1) -> 'ClassicalSymbol':
        return ClassicalSymbol(rank, (HomTerm(0, block_scalar(rank, 1), block_scalar(rank, 1)),))

    @staticmethod
    def scalar_term(degree: int, plus: Union[FourierPoly, CRational, RationalLike],
                    minus: Union[FourierPoly, CRational, RationalLike], rank: int = 1) -> 'ClassicalSymbol':
        return ClassicalSymbol.from_terms(rank, [HomTerm(degree, block_scalar(rank, plus), block_scalar(rank, minus))])

    @staticmethod
    def abs_xi_power(degree: int, rank: int = 1) -> 'ClassicalSymbol':
        """|ξ|^d."""
        return ClassicalSymbol.scalar_term(degree, 1, 1, rank)

    @staticmethod
    def xi_power(degree: int, rank: int = 1) -> 'ClassicalSymbol':
        """ξ^d, i.e. (-1)^d |ξ|^d on the minus branch."""
        return ClassicalSymbol.scalar_term(degree, 1, (-1) ** (degree % 2), rank)

    @staticmethod
    def exponential(freq: int, coeff: Union[CRational, RationalLike] = 1, rank: int = 1) -> 'ClassicalSymbol':
        """Multiplication by coeff·e^{i·freq·x}."""
        poly = FourierPoly.exponential(freq, coeff)
        return ClassicalSymbol.scalar_term(0, poly, poly, rank)

    # -- Eigenschaften -----------------------------------------------------

    @property
    def order(self) -> Order:
        """Highest degree that may be nonzero; -inf for ZERO."""
        if self.terms:
            return self.terms[0].degree
        return self.valid_down_to

    def is_zero(self) -> bool:
        return not self.terms and self.valid_down_to == NEG_INF

    def is_complete(self) -> bool:
        return self.valid_down_to == NEG_INF

    def is_differential(self) -> bool:
        """Complete with only nonnegative degrees (expansions in it terminate)."""
        return self.is_complete() and all(t.degree >= 0 for t in self.terms)

    def is_x_independent(self) -> bool:
        return all(t.is_x_independent() for t in self.terms)

    def is_scalar(self) -> bool:
        return all(block_scalar_value(t.plus) is not None and block_scalar_value(t.minus) is not None
                   for t in self.terms)

    def support_bound(self) -> int:
        return max((t.support_bound() for t in self.terms), default=0)

    def term(self, degree: int) -> HomTerm:
        """Component at ``degree``; raises InsufficientDepth below the floor."""
        if degree <= self.valid_down_to:
            raise InsufficientDepth(f"Grad {degree} ist nicht zertifiziert (valid_down_to = {self.valid_down_to})")
        for t in self.terms:
            if t.degree == degree:
                return t
        return HomTerm(degree, block_zero(self.rank), block_zero(self.rank))

    def degrees(self) -> List[int]:
        return [t.degree for t in self.terms]

    # -- Arithmetik --------------------------------------------------------

    def _check_rank(self, other: 'ClassicalSymbol'):
        if other.rank != self.rank:
            raise RankMismatch(f"Rang {self.rank} vs {other.rank}")

    def __add__(self, other: 'ClassicalSymbol') -> 'ClassicalSymbol':
        self._check_rank(other)
        return ClassicalSymbol.from_terms(self.rank, self.terms + other.terms,
                                          max(self.valid_down_to, other.valid_down_to))

    def __neg__(self) -> 'ClassicalSymbol':
        return self.scale(-1)

    def __sub__(self, other: 'ClassicalSymbol') -> 'ClassicalSymbol':
        return self + (-other)

    def scale(self, factor: Union[CRational, RationalLike]) -> 'ClassicalSymbol':
        factor = CRational.of(factor)
        if factor.is_zero():
            return ClassicalSymbol(self.rank, (), self.valid_down_to)
        return ClassicalSymbol(self.rank, tuple(t.scale(factor) for t in self.terms), self.valid_down_to)

    def derivative_xi(self) -> 'ClassicalSymbol':
        return ClassicalSymbol.from_terms(self.rank, [t.derivative_xi() for t in self.terms],
                                          self.valid_down_to - 1)

    def derivative_x(self, times: int = 1) -> 'ClassicalSymbol':
        return ClassicalSymbol.from_terms(self.rank, [t.derivative_x(times) for t in self.terms],
                                          self.valid_down_to)

    def truncate(self, floor: Order) -> 'ClassicalSymbol':
        """Forget every degree at or below ``floor``."""
        if floor < self.valid_down_to:
            raise FloorUnreachable(f"Untergrenze {floor} liegt unter {self.valid_down_to}")
        return ClassicalSymbol.from_terms(self.rank, self.terms, floor)

    def agrees_with(self, other: 'ClassicalSymbol', floor: Order) -> bool:
        """Exact equality on every degree above ``floor``."""
        return self.truncate(floor).terms == other.truncate(floor).terms

    def __repr__(self):
        if self.is_zero():
            return f"ClassicalSymbol(ZERO, rank={self.rank})"
        return (f"ClassicalSymbol(rank={self.rank}, degrees={self.degrees()}, "
                f"valid_down_to={self.valid_down_to})")


# ---------------------------------------------------------------------------
# Gewichte und Eigenwertgesetze
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenvalueLaw:
    """Diagonal model λ(n) = Σ_i p_i |n|^i of an x-independent weight."""
    coeffs: Tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = tuple(to_fraction(c) for c in self.coeffs)
        object.__setattr__(self, 'coeffs', coeffs)
        if len(coeffs) < 2:
            raise NotElliptic("Eigenwertgesetz braucht mindestens Ordnung 1")
        if coeffs[-1] <= 0:
            raise NotElliptic(f"Leitkoeffizient muss positiv sein: {coeffs[-1]}")
        for n in range(self.crossover_bound + 1):
            if self.value(n) <= 0:
                raise NotElliptic(f"λ({n}) = {self.value(n)} ist nicht positiv")

    @staticmethod
    def laplace_shift() -> 'EigenvalueLaw':
        """λ(n) = 1 + n², the law of 1 - Δ."""
        return EigenvalueLaw((Fraction(1), Fraction(0), Fraction(1)))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1]

    @property
    def crossover_bound(self) -> int:
        """Beyond this |n| the leading term dominates all lower ones."""
        lower = sum(abs(c) for c in self.coeffs[:-1])
        return max(1, math.ceil(lower / self.leading) + 1)

    def value(self, n: int) -> Fraction:
        m = abs(n)
        return sum((c * m ** i for i, c in enumerate(self.coeffs)), Fraction(0))

    def symbol(self, rank: int = 1) -> ClassicalSymbol:
        return ClassicalSymbol.from_terms(rank, [HomTerm(i, block_scalar(rank, c), block_scalar(rank, c))
                                                 for i, c in enumerate(self.coeffs) if c != 0])

    def affine(self, direction: 'DirectionLaw', t: RationalLike) -> 'EigenvalueLaw':
        """λ + t·λ̇ (coefficient lists padded to equal length)."""
        t = to_fraction(t)
        size = max(len(self.coeffs), len(direction.coeffs))
        a = list(self.coeffs) + [Fraction(0)] * (size - len(self.coeffs))
        b = list(direction.coeffs) + [Fraction(0)] * (size - len(direction.coeffs))
        coeffs = [x + t * y for x, y in zip(a, b)]
        while len(coeffs) > 2 and coeffs[-1] == 0:
            coeffs.pop()
        return EigenvalueLaw(tuple(coeffs))


@dataclass(frozen=True)
class DirectionLaw:
    """Diagonal model of a family direction; unlike EigenvalueLaw it may vanish or change sign."""
    coeffs: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, 'coeffs', tuple(to_fraction(c) for c in self.coeffs))

    def value(self, n: int) -> Fraction:
        m = abs(n)
        return sum((c * m ** i for i, c in enumerate(self.coeffs)), Fraction(0))

    def symbol(self, rank: int = 1) -> ClassicalSymbol:
        return ClassicalSymbol.from_terms(rank, [HomTerm(i, block_scalar(rank, c), block_scalar(rank, c))
                                                 for i, c in enumerate(self.coeffs) if c != 0])


@dataclass(frozen=True)
class Weight:
    """Elliptic weight of order q with positive x-independent scalar leading term."""
    symbol: ClassicalSymbol
    order: int
    spectral_model: Optional[EigenvalueLaw] = None

    def __post_init__(self):
        if self.order <= 0:
            raise NotElliptic(f"Ordnung des Gewichts muss positiv sein: {self.order}")
        if self.symbol.order != self.order:
            raise NotElliptic(f"Symbolordnung {self.symbol.order} != Gewichtsordnung {self.order}")
        lead = self.symbol.terms[0]
        for branch, block in (('plus', lead.plus), ('minus', lead.minus)):
            value = block_scalar_value(block)
            if value is None:
                raise NotElliptic(f"Leitterm ({branch}) ist nicht skalar")
            if not value.is_constant():
                raise NotElliptic(f"Leitterm ({branch}) hängt von x ab")
            c = value.mean()
            if not c.is_real() or c.re <= 0:
                raise NotElliptic(f"Leitkoeffizient ({branch}) ist nicht positiv rational: {c}")
        if self.spectral_model is not None:
            if self.spectral_model.symbol(self.symbol.rank) != self.symbol:
                raise NotElliptic("Symbol stimmt nicht mit dem Eigenwertgesetz überein")

    @staticmethod
    def from_law(law: EigenvalueLaw, rank: int = 1) -> 'Weight':
        return Weight(law.symbol(rank), law.order, law)

    @staticmethod
    def laplace_shift(rank: int = 1) -> 'Weight':
        """Q = 1 - Δ with symbol 1 + ξ²."""
        return Weight.from_law(EigenvalueLaw.laplace_shift(), rank)

    @property
    def rank(self) -> int:
        return self.symbol.rank

    @property
    def q(self) -> int:
        return self.order

    def leading_coefficients(self) -> Tuple[Fraction, Fraction]:
        lead = self.symbol.terms[0]
        return (block_scalar_value(lead.plus).mean().re, block_scalar_value(lead.minus).mean().re)


# ---------------------------------------------------------------------------
# Komposition
# ---------------------------------------------------------------------------

def _product_terms(a: ClassicalSymbol, b: ClassicalSymbol, floor: Order) -> List[HomTerm]:
    """All contributions Σ_α (1/α!) ∂_ξ^α a · D_x^α b landing strictly above ``floor``."""
    out: List[HomTerm] = []
    for ta in a.terms:
        for tb in b.terms:
            top = ta.degree + tb.degree
            if top <= floor:
                continue
            if floor == NEG_INF:
                if ta.degree < 0:
                    raise SymbolError("Unendliche Entwicklung ohne Untergrenze")
                alpha_max = ta.degree
            else:
                alpha_max = int(top - floor - 1)
                if ta.degree >= 0:
                    alpha_max = min(alpha_max, ta.degree)
            for alpha in range(alpha_max + 1):
                c = generalized_binomial(ta.degree, alpha)
                if c == 0:
                    continue
                sign = -1 if alpha % 2 else 1
                plus = block_scale(block_mul(ta.plus, block_dx(tb.plus, alpha)), c)
                minus = block_scale(block_mul(ta.minus, block_dx(tb.minus, alpha)), c * sign)
                out.append(HomTerm(top - alpha, plus, minus))
    return out


def _composition_floor(a: ClassicalSymbol, b: ClassicalSymbol) -> Order:
    return max(a.valid_down_to + b.order, a.order + b.valid_down_to)


@lru_cache(maxsize=8192)
def compose(a: ClassicalSymbol, b: ClassicalSymbol, floor: Optional[int] = None) -> ClassicalSymbol:
    """
    Symbol of the operator product Op(a)Op(b).

    Without ``floor`` the weakest certifiable floor is used; a complete result
    is returned whenever a is a differential symbol and b is complete.
    """
    if a.rank != b.rank:
        raise RankMismatch(f"Rang {a.rank} vs {b.rank}")
    if a.is_zero() or b.is_zero():
        return ClassicalSymbol.zero(a.rank)
    certified = _composition_floor(a, b)
    if floor is not None and floor < certified:
        raise FloorUnreachable(f"Untergrenze {floor} nicht erreichbar, zertifizierbar ist {certified}")
    if certified == NEG_INF and a.is_differential():
        return ClassicalSymbol.from_terms(a.rank, _product_terms(a, b, NEG_INF))
    if floor is None:
        if certified == NEG_INF:
            raise SymbolError("Komposition braucht eine explizite Untergrenze")
        floor = certified
    return ClassicalSymbol.from_terms(a.rank, _product_terms(a, b, floor), floor)


def factor_floors(orders: Sequence[Order], floor: int) -> List[Order]:
    """Floor each factor must be certified at so the product is exact above ``floor``."""
    total = sum(orders)
    return [floor - (total - m) for m in orders]


def compose_chain(factors: Sequence[ClassicalSymbol], floor: int) -> ClassicalSymbol:
    """Product of several symbols, certified above ``floor`` (left fold)."""
    if not factors:
        raise SymbolError("Leere Produktkette")
    rank = factors[0].rank
    if any(f.is_zero() for f in factors):
        return ClassicalSymbol.zero(rank)
    orders = [f.order for f in factors]
    total = sum(orders)
    acc = factors[0]
    partial = orders[0]
    for factor, m in zip(factors[1:], orders[1:]):
        partial += m
        acc = compose(acc, factor, int(floor - (total - partial)))
    if len(factors) == 1 and acc.valid_down_to > floor:
        raise FloorUnreachable(f"Faktor nur bis {acc.valid_down_to} bekannt, verlangt {floor}")
    return acc


@lru_cache(maxsize=8192)
def commutator(Q: Weight, b: ClassicalSymbol, floor: Optional[int] = None) -> ClassicalSymbol:
    """
    Symbol of [Q, B].

    The scalar x-independent leading term of Q commutes with everything, so
    the result has order <= ord(B) + q - 1 and is certified down to
    max(floor(Q) + ord(B), q - 1 + floor(B)).
    """
    if b.rank != Q.rank:
        raise RankMismatch(f"Rang {Q.rank} vs {b.rank}")
    if b.is_zero():
        return ClassicalSymbol.zero(b.rank)
    certified = max(Q.symbol.valid_down_to + b.order, (Q.q - 1) + b.valid_down_to)
    if floor is not None and floor < certified:
        raise FloorUnreachable(f"Kommutator-Untergrenze {floor} nicht erreichbar, zertifizierbar ist {certified}")
    if Q.symbol.is_x_independent() and b.is_x_independent() and Q.symbol.is_scalar():
        # the unknown tail of a truncated b may depend on x
        if certified == NEG_INF:
            return ClassicalSymbol.zero(b.rank)
        return ClassicalSymbol(b.rank, (), certified)
    if certified == NEG_INF and b.is_differential() and Q.symbol.is_differential():
        terms = _product_terms(Q.symbol, b, NEG_INF) + [t.scale(-1) for t in _product_terms(b, Q.symbol, NEG_INF)]
        return ClassicalSymbol.from_terms(b.rank, terms)
    if floor is None:
        if certified == NEG_INF:
            raise SymbolError("Kommutator braucht eine explizite Untergrenze")
        floor = certified
    terms = _product_terms(Q.symbol, b, floor) + [t.scale(-1) for t in _product_terms(b, Q.symbol, floor)]
    return ClassicalSymbol.from_terms(b.rank, terms, floor)


def ad_power(Q: Weight, a: ClassicalSymbol, j: int, floor: Optional[int] = None) -> ClassicalSymbol:
    """A^{(j)} = [Q, [Q, ... [Q, A]]] of order <= ord(A) + j(q-1); j = 0 returns A."""
    if j < 0:
        raise SymbolError(f"ad-Potenz muss nichtnegativ sein: {j}")
    if j == 0:
        return a
    if floor is not None and a.valid_down_to > floor - j * (Q.q - 1):
        raise FloorUnreachable(
            f"A ist bis {a.valid_down_to} bekannt, ad^{j} bis {floor} braucht {floor - j * (Q.q - 1)}")
    result = a
    for i in range(1, j + 1):
        step_floor = None if floor is None else floor - (j - i) * (Q.q - 1)
        result = commutator(Q, result, step_floor)
        if result.is_zero():
            break
    return result


@lru_cache(maxsize=1024)
def inverse(Q: Weight, floor: int) -> ClassicalSymbol:
    """Parametrix P with σ(Q)∘P = 1 above ``floor``; leading term 1/c at degree -q."""
    q = Q.q
    if floor >= -q:
        raise FloorUnreachable(f"Untergrenze {floor} liegt nicht unter der Ordnung -{q}")
    if floor < Q.symbol.valid_down_to - 2 * q:
        raise FloorUnreachable(f"Inverse nur bis {Q.symbol.valid_down_to - 2 * q} zertifizierbar")
    rank = Q.rank
    c_plus, c_minus = Q.leading_coefficients()
    known: Dict[int, HomTerm] = {-q: HomTerm(-q, block_scalar(rank, 1 / c_plus), block_scalar(rank, 1 / c_minus))}
    q_terms = Q.symbol.terms
    for degree in range(-q - 1, floor, -1):
        target = degree + q
        rest_plus = block_zero(rank)
        rest_minus = block_zero(rank)
        for tq in q_terms:
            for dp, tp in known.items():
                alpha = tq.degree + dp - target
                if alpha < 0 or (tq.degree == q and alpha == 0):
                    continue
                c = generalized_binomial(tq.degree, alpha)
                if c == 0:
                    continue
                sign = -1 if alpha % 2 else 1
                rest_plus = block_add(rest_plus, block_scale(block_mul(tq.plus, block_dx(tp.plus, alpha)), c))
                rest_minus = block_add(rest_minus,
                                       block_scale(block_mul(tq.minus, block_dx(tp.minus, alpha)), c * sign))
        term = HomTerm(degree, block_scale(rest_plus, -1 / c_plus), block_scale(rest_minus, -1 / c_minus))
        if not term.is_zero():
            known[degree] = term
    logger.debug(f"Parametrix für q={q} bis Grad {floor + 1} berechnet ({len(known)} Terme)")
    return ClassicalSymbol.from_terms(rank, known.values(), floor)


@lru_cache(maxsize=1024)
def power_neg(Q: Weight, k: int, floor: int) -> ClassicalSymbol:
    """Q^{-k} of order -kq, certified above ``floor``."""
    if k <= 0:
        raise SymbolError(f"Potenz muss positiv sein: {k}")
    single = floor + (k - 1) * Q.q
    p = inverse(Q, single)
    if k == 1:
        return p
    return compose_chain([p] * k, floor)


def wodzicki_residue(a: ClassicalSymbol) -> CRational:
    """x-mean of tr(f⁺ + f⁻) at degree -1."""
    if a.order < -1:
        return ZERO
    if a.valid_down_to >= -1:
        raise InsufficientDepth(f"Residuum braucht Grad -1, Symbol bekannt bis {a.valid_down_to}")
    term = a.term(-1)
    return (block_trace(term.plus) + block_trace(term.minus)).mean()
