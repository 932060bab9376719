"""
Spectral Operator Module
Exact banded operators in the Fourier basis of the circle, with lazily
materialized entries and exact asymptotic tail rules for large |n|.
"""

import logging
import threading
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from exact_algebra import CRational, ZERO, RationalLike
from symbol_calculus import ClassicalSymbol, DirectionLaw, EigenvalueLaw, generalized_binomial

logger = logging.getLogger(__name__)

# exponent d -> coefficient of |n|^d
Series = Dict[int, CRational]

DEFAULT_RADIUS = 32


class OracleError(Exception):
    """Base class for errors of the spectral oracle."""

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class RadiusTooSmall(OracleError):
    """Band structure reaches the truncation edge."""


class TailNotRational(OracleError):
    """Operator has no exact tail rule."""


# ---------------------------------------------------------------------------
# Series helpers
# ---------------------------------------------------------------------------

def series_add(a: Series, b: Series, factor: Union[CRational, RationalLike] = 1) -> Series:
    out = dict(a)
    factor = CRational.of(factor)
    for d, c in b.items():
        out[d] = out.get(d, ZERO) + c * factor
    return {d: c for d, c in out.items() if not c.is_zero()}


def series_mul(a: Series, b: Series, depth: int) -> Series:
    """Product keeping exponents > depth."""
    out: Series = {}
    for da, ca in a.items():
        for db, cb in b.items():
            d = da + db
            if d > depth:
                out[d] = out.get(d, ZERO) + ca * cb
    return {d: c for d, c in out.items() if not c.is_zero()}


def series_shift(a: Series, shift: int, depth: int) -> Series:
    """Re-expand Σ c_d (m + shift)^d in powers of m, keeping exponents > depth."""
    if shift == 0:
        return {d: c for d, c in a.items() if d > depth}
    out: Series = {}
    for d, c in a.items():
        i = 0
        while d - i > depth:
            b = generalized_binomial(d, i)
            if b == 0 and d >= 0:
                break
            if b != 0:
                out[d - i] = out.get(d - i, ZERO) + c * (b * Fraction(shift) ** i)
            i += 1
    return {d: c for d, c in out.items() if not c.is_zero()}


def series_value(a: Series, m: int) -> CRational:
    total = ZERO
    for d, c in a.items():
        total = total + c * Fraction(m) ** d
    return total


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

class SpectralOperator:
    """
    Scalar operator on the Fourier basis e^{inx}, n in Z.

    Entries vanish outside the band |m - n| <= bandwidth. For |n| > crossover
    the entry at (n + k, n) equals the tail series of offset k on the branch
    sign(n), evaluated at |n|.
    """

    def __init__(self, bandwidth: int, crossover: int, order: int, radius: int = DEFAULT_RADIUS):
        self.rank = 1
        self.bandwidth = int(bandwidth)
        self.crossover = int(crossover)
        self.order = int(order)
        self.radius = int(radius)
        self._entries: Dict[Tuple[int, int], CRational] = {}
        self._tails: Dict[Tuple[int, int, int], Series] = {}
        self._lock = threading.Lock()

    # subclasses provide _entry and _tail
    def _entry(self, m: int, n: int) -> CRational:
        raise NotImplementedError

    def _tail(self, k: int, sign: int, depth: int) -> Series:
        raise TailNotRational(f"{type(self).__name__} has no tail rule")

    def entry(self, m: int, n: int) -> CRational:
        if abs(m - n) > self.bandwidth:
            return ZERO
        key = (m, n)
        value = self._entries.get(key)
        if value is None:
            value = self._entry(m, n)
            with self._lock:
                self._entries[key] = value
        return value

    def diagonal(self, n: int) -> CRational:
        return self.entry(n, n)

    def tail(self, k: int, sign: int, depth: int) -> Series:
        """Exact series in |n| of the entry (n + k, n) for sign(n) = sign, exponents > depth."""
        if abs(k) > self.bandwidth:
            return {}
        key = (k, 1 if sign > 0 else -1, int(depth))
        series = self._tails.get(key)
        if series is None:
            series = self._tail(k, key[1], key[2])
            with self._lock:
                self._tails[key] = series
        return series

    def matrix(self, radius: Optional[int] = None) -> np.ndarray:
        """Complex matrix on frequencies -N..N, index i = n + N."""
        radius = self.radius if radius is None else radius
        size = 2 * radius + 1
        out = np.zeros((size, size), dtype=complex)
        for n in range(-radius, radius + 1):
            for m in range(max(-radius, n - self.bandwidth), min(radius, n + self.bandwidth) + 1):
                value = self.entry(m, n)
                if not value.is_zero():
                    out[m + radius, n + radius] = complex(value)
        return out

    def with_radius(self, radius: int) -> 'SpectralOperator':
        self.radius = int(radius)
        return self

    def __matmul__(self, other: 'SpectralOperator') -> 'SpectralOperator':
        return ProductOperator(self, other)

    def __add__(self, other: 'SpectralOperator') -> 'SpectralOperator':
        return CombinationOperator([(ONE_C, self), (ONE_C, other)])

    def __sub__(self, other: 'SpectralOperator') -> 'SpectralOperator':
        return CombinationOperator([(ONE_C, self), (-ONE_C, other)])

    def scale(self, factor: Union[CRational, RationalLike]) -> 'SpectralOperator':
        return CombinationOperator([(CRational.of(factor), self)])


ONE_C = CRational.of(1)


class QuantizedOperator(SpectralOperator):
    """Op(a)u = Σ_n a(x, n) û_n e^{inx}, so A_{mn} = â_{m-n}(n)."""

    def __init__(self, symbol: ClassicalSymbol, radius: int = DEFAULT_RADIUS):
        if symbol.rank != 1:
            raise OracleError(f"The oracle is scalar, symbol has rank {symbol.rank}")
        order = int(symbol.order) if symbol.terms else 0
        super().__init__(symbol.support_bound(), 0, order, radius)
        self.symbol = symbol

    def _entry(self, m: int, n: int) -> CRational:
        freq = m - n
        total = ZERO
        for term in self.symbol.terms:
            if n > 0:
                coeff = term.plus[0][0].coefficient(freq)
            elif n < 0:
                coeff = term.minus[0][0].coefficient(freq)
            else:
                coeff = term.plus[0][0].coefficient(freq) if term.degree == 0 else ZERO
            if not coeff.is_zero():
                total = total + coeff * Fraction(abs(n)) ** term.degree
        return total

    def _tail(self, k: int, sign: int, depth: int) -> Series:
        out: Series = {}
        for term in self.symbol.terms:
            if term.degree <= depth:
                continue
            block = term.plus if sign > 0 else term.minus
            coeff = block[0][0].coefficient(k)
            if not coeff.is_zero():
                out[term.degree] = coeff
        return out


def _law_series(coeffs: Sequence[Fraction]) -> Series:
    return {i: CRational.of(c) for i, c in enumerate(coeffs) if c != 0}


class DiagonalLawOperator(SpectralOperator):
    """λ(n)^power for an eigenvalue law (any integer power) or a direction law (power >= 0)."""

    def __init__(self, law: Union[EigenvalueLaw, DirectionLaw], power: int = 1, radius: int = DEFAULT_RADIUS):
        if power < 0 and not isinstance(law, EigenvalueLaw):
            raise OracleError("Negative powers need a positive eigenvalue law")
        degree = len(law.coeffs) - 1
        crossover = law.crossover_bound if isinstance(law, EigenvalueLaw) else 0
        super().__init__(0, crossover, degree * power, radius)
        self.law = law
        self.power = int(power)

    def _entry(self, m: int, n: int) -> CRational:
        if m != n:
            return ZERO
        return CRational.of(self.law.value(n) ** self.power)

    def _tail(self, k: int, sign: int, depth: int) -> Series:
        if k != 0:
            return {}
        base = _law_series(self.law.coeffs)
        if self.power >= 0:
            out: Series = {0: ONE_C}
            for _ in range(self.power):
                out = series_mul(out, base, -10 ** 9)
            return {d: c for d, c in out.items() if d > depth}
        # λ^{-k} = p^{-k} m^{-kq} (1 + u)^{-k}, u = Σ_{i<q} (p_i/p) m^{i-q}
        q = self.law.order
        lead = self.law.leading
        k_pow = -self.power
        u = {i - q: CRational.of(c / lead) for i, c in enumerate(self.law.coeffs[:-1]) if c != 0}
        rel_depth = depth + k_pow * q
        acc: Series = {0: ONE_C}
        u_power: Series = {0: ONE_C}
        j = 1
        while u and j <= max(0, -rel_depth):
            u_power = series_mul(u_power, u, rel_depth)
            if not u_power:
                break
            acc = series_add(acc, u_power, generalized_binomial(-k_pow, j))
            j += 1
        scale = CRational.of(lead ** (-k_pow))
        return {d - k_pow * q: c * scale for d, c in acc.items() if d - k_pow * q > depth}


class ProductOperator(SpectralOperator):
    """Exact matrix product of two banded operators."""

    def __init__(self, left: SpectralOperator, right: SpectralOperator):
        crossover = max(left.crossover + right.bandwidth, right.crossover)
        super().__init__(left.bandwidth + right.bandwidth, crossover, left.order + right.order,
                         max(left.radius, right.radius))
        self.left = left
        self.right = right

    def _entry(self, m: int, n: int) -> CRational:
        total = ZERO
        wl, wr = self.left.bandwidth, self.right.bandwidth
        for j in range(max(-wr, m - n - wl), min(wr, m - n + wl) + 1):
            b = self.right.entry(n + j, n)
            if b.is_zero():
                continue
            a = self.left.entry(m, n + j)
            if not a.is_zero():
                total = total + a * b
        return total

    def _tail(self, k: int, sign: int, depth: int) -> Series:
        out: Series = {}
        wl, wr = self.left.bandwidth, self.right.bandwidth
        for j in range(max(-wr, k - wl), min(wr, k + wl) + 1):
            b = self.right.tail(j, sign, depth - self.left.order)
            if not b:
                continue
            a = self.left.tail(k - j, sign, depth - self.right.order)
            if not a:
                continue
            # column n + j has |n + j| = |n| + sign·j beyond the crossover
            a = series_shift(a, sign * j, depth - self.right.order)
            out = series_add(out, series_mul(a, b, depth))
        return out


class CombinationOperator(SpectralOperator):
    """Σ c_i A_i."""

    def __init__(self, parts: List[Tuple[CRational, SpectralOperator]]):
        super().__init__(max(op.bandwidth for _, op in parts), max(op.crossover for _, op in parts),
                         max(op.order for _, op in parts), max(op.radius for _, op in parts))
        self.parts = parts

    def _entry(self, m: int, n: int) -> CRational:
        total = ZERO
        for c, op in self.parts:
            total = total + op.entry(m, n) * c
        return total

    def _tail(self, k: int, sign: int, depth: int) -> Series:
        out: Series = {}
        for c, op in self.parts:
            out = series_add(out, op.tail(k, sign, depth), c)
        return out


def quantize(symbol: ClassicalSymbol, radius: int = DEFAULT_RADIUS) -> SpectralOperator:
    """Toroidal quantization; degree 0 at n = 0 uses the ξ > 0 branch, other degrees vanish there."""
    return QuantizedOperator(symbol, radius)


def law_operator(law: Union[EigenvalueLaw, DirectionLaw], power: int = 1,
                 radius: int = DEFAULT_RADIUS) -> SpectralOperator:
    return DiagonalLawOperator(law, power, radius)


def commutator_with_law(law: EigenvalueLaw, op: SpectralOperator) -> SpectralOperator:
    """[Q, A] with Q diagonal."""
    q_op = law_operator(law, 1, op.radius)
    return ProductOperator(q_op, op) - ProductOperator(op, q_op)


def ad_operator(law: EigenvalueLaw, op: SpectralOperator, j: int) -> SpectralOperator:
    for _ in range(j):
        op = commutator_with_law(law, op)
    return op


def product_of(ops: Sequence[SpectralOperator]) -> SpectralOperator:
    if not ops:
        raise OracleError("Empty product")
    acc = ops[0]
    for op in ops[1:]:
        acc = ProductOperator(acc, op)
    return acc


def eigenvalues(law: Union[EigenvalueLaw, DirectionLaw], radius: int) -> np.ndarray:
    return np.array([float(law.value(n)) for n in range(-radius, radius + 1)])
