"""
Exact Algebra für residue-lab
Komplexe Rationalzahlen, Fourier-Polynome auf dem Kreis, Laurent-Keime in z
und die Hurwitz-Zeta-Keime, auf denen die Zeta-Regularisierung aufbaut.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

import mpmath

logger = logging.getLogger(__name__)

RationalLike = Union[int, Fraction, str]

# Arbeitsgenauigkeit für mpmath, wird von main/SettingsManager gesetzt
_PRECISION_BITS = 256


class AlgebraError(Exception):
    """Fehler in der exakten Arithmetik."""

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class DomainError(AlgebraError):
    """Argument außerhalb des Definitionsbereichs."""


def set_precision_bits(bits: int):
    """Setze die mpmath-Arbeitsgenauigkeit für Spezialfunktionen."""
    global _PRECISION_BITS
    if bits < 64:
        raise DomainError(f"Präzision zu klein: {bits} bits (mindestens 64)")
    _PRECISION_BITS = int(bits)
    # global, damit workprec-Blöcke in parallelen Aufgaben nichts zurücksetzen
    mpmath.mp.prec = _PRECISION_BITS
    logger.debug(f"mpmath Präzision: {bits} bits")


def get_precision_bits() -> int:
    return _PRECISION_BITS


def to_fraction(value: RationalLike) -> Fraction:
    """Konvertiere int, Fraction oder 'p/q'-String exakt in Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError(f"Kein rationaler Wert: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise DomainError(f"Kein exakter rationaler Wert: {value!r}")


@dataclass(frozen=True)
class CRational:
    """Gaussian rational re + i·im with exact Fraction parts."""
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @staticmethod
    def of(value: Union['CRational', RationalLike]) -> 'CRational':
        if isinstance(value, CRational):
            return value
        return CRational(to_fraction(value), Fraction(0))

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def __add__(self, other):
        other = CRational.of(other)
        return CRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = CRational.of(other)
        return CRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return CRational.of(other) - self

    def __neg__(self):
        return CRational(-self.re, -self.im)

    def __mul__(self, other):
        other = CRational.of(other)
        return CRational(self.re * other.re - self.im * other.im,
                         self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = CRational.of(other)
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("Division durch CRational Null")
        return CRational((self.re * other.re + self.im * other.im) / norm,
                         (self.im * other.re - self.re * other.im) / norm)

    def __rtruediv__(self, other):
        return CRational.of(other) / self

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            raise DomainError("Nur ganzzahlige Potenzen sind exakt")
        if exponent < 0:
            return CRational(Fraction(1)) / (self ** (-exponent))
        result = CRational(Fraction(1))
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, CRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def conjugate(self) -> 'CRational':
        return CRational(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def to_json(self) -> list:
        return [self.re.numerator, self.re.denominator, self.im.numerator, self.im.denominator]

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        return f"{self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i"

    def __repr__(self):
        return f"CRational({self})"


ZERO = CRational()
ONE = CRational(Fraction(1))
I_UNIT = CRational(Fraction(0), Fraction(1))


class FourierPoly:
    """
    Finitely supported Fourier polynomial x -> sum_m c_m e^{imx}.

    Coefficients are exact CRationals, zero coefficients are never stored.
    Instances are immutable; all operations return new objects.
    """

    __slots__ = ('_coeffs', '_bound', '_hash')

    def __init__(self, coeffs: Optional[Mapping[int, Union[CRational, RationalLike]]] = None):
        cleaned: Dict[int, CRational] = {}
        for freq, value in (coeffs or {}).items():
            c = CRational.of(value)
            if not c.is_zero():
                cleaned[int(freq)] = c
        self._coeffs: Tuple[Tuple[int, CRational], ...] = tuple(sorted(cleaned.items()))
        self._bound = max((abs(m) for m, _ in self._coeffs), default=0)
        self._hash = None

    @staticmethod
    def constant(value: Union[CRational, RationalLike]) -> 'FourierPoly':
        return FourierPoly({0: value})

    @staticmethod
    def exponential(freq: int, value: Union[CRational, RationalLike] = 1) -> 'FourierPoly':
        return FourierPoly({freq: value})

    @property
    def coeffs(self) -> Dict[int, CRational]:
        return dict(self._coeffs)

    @property
    def support_bound(self) -> int:
        """Largest |m| with nonzero coefficient (0 for the zero polynomial)."""
        return self._bound

    def items(self) -> Tuple[Tuple[int, CRational], ...]:
        return self._coeffs

    def coefficient(self, freq: int) -> CRational:
        for m, c in self._coeffs:
            if m == freq:
                return c
        return ZERO

    def mean(self) -> CRational:
        """(1/2π)∫ f dx, i.e. the frequency-0 coefficient."""
        return self.coefficient(0)

    def is_zero(self) -> bool:
        return not self._coeffs

    def is_constant(self) -> bool:
        return all(m == 0 for m, _ in self._coeffs)

    def __add__(self, other: 'FourierPoly') -> 'FourierPoly':
        acc = dict(self._coeffs)
        for m, c in other._coeffs:
            acc[m] = acc.get(m, ZERO) + c
        return FourierPoly(acc)

    def __sub__(self, other: 'FourierPoly') -> 'FourierPoly':
        return self + (-other)

    def __neg__(self) -> 'FourierPoly':
        return FourierPoly({m: -c for m, c in self._coeffs})

    def scale(self, factor: Union[CRational, RationalLike]) -> 'FourierPoly':
        factor = CRational.of(factor)
        if factor.is_zero():
            return FourierPoly()
        return FourierPoly({m: c * factor for m, c in self._coeffs})

    def __mul__(self, other: 'FourierPoly') -> 'FourierPoly':
        return convolve(self, other)

    def __eq__(self, other):
        if not isinstance(other, FourierPoly):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._coeffs)
        return self._hash

    def evaluate(self, x: float) -> complex:
        return sum(complex(c) * complex(math.cos(m * x), math.sin(m * x)) for m, c in self._coeffs)

    def __repr__(self):
        if not self._coeffs:
            return "FourierPoly(0)"
        return "FourierPoly(" + " + ".join(f"({c})e^{{i{m}x}}" for m, c in self._coeffs) + ")"


def convolve(f: FourierPoly, g: FourierPoly) -> FourierPoly:
    """Pointwise product of two Fourier polynomials (coefficient convolution)."""
    if f.is_zero() or g.is_zero():
        return FourierPoly()
    acc: Dict[int, CRational] = {}
    for m, a in f.items():
        for n, b in g.items():
            acc[m + n] = acc.get(m + n, ZERO) + a * b
    return FourierPoly(acc)


def derivative_x(f: FourierPoly, times: int = 1) -> FourierPoly:
    """D_x = -i d/dx, so D_x e^{imx} = m e^{imx}."""
    if times == 0:
        return f
    return FourierPoly({m: c * (m ** times) for m, c in f.items()})


# ---------------------------------------------------------------------------
# Laurent-Keime
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LaurentGerm:
    """
    Germ pole/z + const + linear·z at z = 0 with an absolute error bound.

    ``exact_to`` is the highest power of z that is certified; multiplying a
    germ with a pole drops the linear term (it would need the z² coefficient
    of the other factor), which is recorded as exact_to = 0.
    """
    pole: complex = 0j
    const: complex = 0j
    linear: complex = 0j
    err: float = 0.0
    exact_to: int = 1

    def __post_init__(self):
        if self.err < 0:
            raise DomainError(f"Negative Fehlerschranke: {self.err}")

    @staticmethod
    def regular(const: complex, linear: complex = 0j, err: float = 0.0) -> 'LaurentGerm':
        return LaurentGerm(0j, complex(const), complex(linear), err)

    def magnitude(self) -> float:
        return max(abs(self.pole), abs(self.const), abs(self.linear) if self.exact_to >= 1 else 0.0)

    def __add__(self, other: 'LaurentGerm') -> 'LaurentGerm':
        return LaurentGerm(self.pole + other.pole, self.const + other.const,
                           self.linear + other.linear, self.err + other.err,
                           min(self.exact_to, other.exact_to))

    def __sub__(self, other: 'LaurentGerm') -> 'LaurentGerm':
        return self + other.scale(-1)

    def scale(self, factor: complex) -> 'LaurentGerm':
        factor = complex(factor)
        return LaurentGerm(self.pole * factor, self.const * factor, self.linear * factor,
                           self.err * abs(factor), self.exact_to)

    def shift(self, power: int = 1) -> 'LaurentGerm':
        """Multiply by z^power (power >= 0)."""
        if power == 0:
            return self
        if power == 1:
            return LaurentGerm(0j, self.pole, self.const if self.exact_to >= 0 else 0j,
                               self.err, 1 if self.exact_to >= 0 else 0)
        if power == 2:
            return LaurentGerm(0j, 0j, self.pole, self.err, 1)
        return LaurentGerm(0j, 0j, 0j, 0.0, 1)

    def __mul__(self, other: 'LaurentGerm') -> 'LaurentGerm':
        if self.pole != 0 and other.pole != 0:
            raise AlgebraError("Produkt zweier Keime mit Pol hätte Polordnung 2")
        pole = self.pole * other.const + self.const * other.pole
        const = self.pole * other.linear + self.const * other.const + self.linear * other.pole
        linear = self.const * other.linear + self.linear * other.const
        exact_to = min(self.exact_to, other.exact_to)
        if self.pole != 0 or other.pole != 0:
            exact_to = min(exact_to, 0)
        if exact_to < 1:
            linear = 0j
        err = (self.err * (other.magnitude() + other.err)
               + other.err * self.magnitude()) * 3.0
        return LaurentGerm(pole, const, linear, err, exact_to)

    def to_json(self) -> dict:
        return {
            'pole': [self.pole.real, self.pole.imag],
            'const': [self.const.real, self.const.imag],
            'linear': [self.linear.real, self.linear.imag] if self.exact_to >= 1 else None,
            'err': self.err,
        }


_HURWITZ_ERR = 1e-14


def hurwitz_zeta_germ(s0: int, a: RationalLike, scale: int) -> LaurentGerm:
    """
    Germ of z -> ζ_H(s0 + scale·z, a) at z = 0.

    s0 = 1 gives the pole 1/scale, constant -ψ(a) and linear -scale·γ₁(a)
    (generalized Stieltjes constant); otherwise ζ_H(s0, a) and scale·ζ_H'(s0, a).
    """
    a = to_fraction(a)
    if a <= 0:
        raise DomainError(f"Hurwitz-Parameter muss positiv sein: a = {a}")
    if scale <= 0:
        raise DomainError(f"scale muss positiv sein: {scale}")
    return _hurwitz_germ(int(s0), a, int(scale), _PRECISION_BITS)


@lru_cache(maxsize=4096)
def _hurwitz_germ(s0: int, a: Fraction, scale: int, bits: int) -> LaurentGerm:
    with mpmath.workprec(bits):
        am = mpmath.mpf(a.numerator) / a.denominator
        if s0 == 1:
            pole = complex(mpmath.mpf(1) / scale)
            const = complex(-mpmath.digamma(am))
            linear = complex(-scale * mpmath.stieltjes(1, am))
        else:
            pole = 0j
            const = complex(mpmath.zeta(s0, am))
            linear = complex(scale * mpmath.zeta(s0, am, 1))
    err = _HURWITZ_ERR * max(1.0, abs(const), abs(linear))
    return LaurentGerm(pole, const, linear, err)


def mp_log(value: RationalLike) -> float:
    """Natural log of an exact positive rational at working precision."""
    value = to_fraction(value)
    if value <= 0:
        raise DomainError(f"log eines nicht-positiven Werts: {value}")
    with mpmath.workprec(_PRECISION_BITS):
        return float(mpmath.log(mpmath.mpf(value.numerator) / value.denominator))


def rational_sum(values: Iterable[CRational]) -> CRational:
    total = ZERO
    for value in values:
        total = total + value
    return total
