"""
Zeta Trace Module
Germ at z = 0 of Σ_n C_nn λ(n)^{-z}: exact head sum plus a tail expansion in
powers of 1/|n| mapped onto Hurwitz zeta germs, with a remainder estimate.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import mpmath

from exact_algebra import LaurentGerm, get_precision_bits, hurwitz_zeta_germ
from symbol_calculus import ClassicalSymbol, EigenvalueLaw, Weight

from .spectral_operator import (OracleError, Series, SpectralOperator,
                                product_of, quantize, series_value)

logger = logging.getLogger(__name__)

DEFAULT_HEAD_RADIUS = 32
DEFAULT_TAIL_TOL = 1e-13
MAX_DEPTH = 64
MAX_DOUBLINGS = 4


@dataclass(frozen=True)
class ZetaGerm:
    """TR(C Q^{-z}) near z = 0: pole = (1/q)·res, const = weighted trace."""
    germ: LaurentGerm
    err: float
    head_radius: int = 0
    depth: int = 0

    @property
    def pole(self) -> complex:
        return self.germ.pole

    @property
    def const(self) -> complex:
        return self.germ.const

    @property
    def linear(self) -> complex:
        return self.germ.linear

    def to_json(self) -> dict:
        data = self.germ.to_json()
        data.update({'err': self.err, 'head_radius': self.head_radius, 'depth': self.depth})
        return data


def _log_series(coeffs: Sequence, order: int, max_power: int) -> List[mpmath.mpf]:
    """Coefficients ℓ_e of log(1 + u(w)) with u(w) = Σ_{e=1}^{q} (p_{q-e}/p_q) w^e, e <= max_power."""
    lead = coeffs[-1]
    u = [mpmath.mpf(0)] * (max_power + 1)
    for e in range(1, min(order, max_power) + 1):
        c = coeffs[order - e] / lead
        u[e] = mpmath.mpf(c.numerator) / c.denominator
    out = [mpmath.mpf(0)] * (max_power + 1)
    power = [mpmath.mpf(1)] + [mpmath.mpf(0)] * max_power
    for j in range(1, max_power + 1):
        nxt = [mpmath.mpf(0)] * (max_power + 1)
        for a, ca in enumerate(power):
            if ca == 0:
                continue
            for b in range(1, max_power + 1 - a):
                if u[b] != 0:
                    nxt[a + b] += ca * u[b]
        power = nxt
        sign = 1 if j % 2 else -1
        for e in range(max_power + 1):
            out[e] += sign * power[e] / j
    return out


def _exp_factors(law: EigenvalueLaw, max_power: int) -> Tuple[List, List]:
    """w-coefficients of (log p_q + L(w)) and (log p_q + L(w))²/2."""
    lead = law.leading
    f1 = _log_series(law.coeffs, law.order, max_power)
    f1[0] += mpmath.log(mpmath.mpf(lead.numerator) / lead.denominator)
    f2 = [mpmath.mpf(0)] * (max_power + 1)
    for a in range(max_power + 1):
        for b in range(max_power + 1 - a):
            f2[a + b] += f1[a] * f1[b] / 2
    return f1, f2


def _tail_germ(law: EigenvalueLaw, op: SpectralOperator, head: int, depth: int) -> Tuple[LaurentGerm, float]:
    """Tail Σ_{|n| > head} with exponents of |n| above -depth; returns (germ, remainder bound)."""
    q = law.order
    a = head + 1
    germ = LaurentGerm()
    bound = 0.0
    with mpmath.workprec(get_precision_bits()):
        for sign in (1, -1):
            series: Series = op.tail(0, sign, -depth)
            if not series:
                continue
            max_power = max(0, max(series) + depth - 1)
            f1, f2 = _exp_factors(law, max_power)
            for d, c in series.items():
                cc = complex(c)
                for e in range(0, d + depth):
                    s0 = e - d
                    h = hurwitz_zeta_germ(s0, a, q)
                    part = h.scale(1 if e == 0 else 0)
                    part = part - h.shift(1).scale(complex(f1[e]))
                    part = part + h.shift(2).scale(complex(f2[e]))
                    germ = germ + part.scale(cc)
            bound += _remainder_bound(law, op, sign, series, f1, head, depth)
    return germ, bound


def _remainder_bound(law: EigenvalueLaw, op: SpectralOperator, sign: int, series: Series,
                     f1: List, head: int, depth: int) -> float:
    """K·n0^{1-D}/(D-1) with K read off the actual residual at n0 + 1 (plus the log-weighted analogue)."""
    m = head + 1
    q = law.order
    exact = complex(op.diagonal(sign * m))
    approx = complex(series_value(series, m))
    log_m = mpmath.log(m)
    k0 = abs(exact - approx) * float(mpmath.mpf(m) ** depth)
    exact_lin = -exact * float(mpmath.log(mpmath.mpf(law.value(m).numerator) / law.value(m).denominator))
    approx_lin = 0j
    for d, c in series.items():
        for e in range(0, d + depth):
            weight = complex(f1[e]) + (q * float(log_m) if e == 0 else 0.0)
            approx_lin -= complex(c) * weight * float(mpmath.mpf(m) ** (d - e))
    k1 = abs(exact_lin - approx_lin) * float(mpmath.mpf(m) ** depth / log_m)
    n0 = float(head)
    tail0 = n0 ** (1 - depth) / (depth - 1)
    tail1 = n0 ** (1 - depth) * (math.log(n0) / (depth - 1) + 1.0 / (depth - 1) ** 2)
    return 2.0 * (k0 * tail0 + k1 * tail1)


def _head_germ(law: EigenvalueLaw, op: SpectralOperator, head: int) -> LaurentGerm:
    const = 0j
    linear = 0j
    with mpmath.workprec(get_precision_bits()):
        for n in range(-head, head + 1):
            c = op.diagonal(n)
            if c.is_zero():
                continue
            lam = law.value(n)
            cc = complex(c)
            const += cc
            linear -= cc * float(mpmath.log(mpmath.mpf(lam.numerator) / lam.denominator))
    return LaurentGerm(0j, const, linear, 1e-15 * (abs(const) + abs(linear)))


def _germ_at(law: EigenvalueLaw, op: SpectralOperator, head: int, tol: float) -> ZetaGerm:
    head_germ = _head_germ(law, op, head)
    depth = 4
    while True:
        tail, bound = _tail_germ(law, op, head, depth)
        total = head_germ + tail
        if bound <= tol * max(1.0, abs(total.const)) or depth >= MAX_DEPTH:
            break
        depth += 4
    if bound > tol * max(1.0, abs(total.const)):
        logger.debug(f"Tail bound {bound:.3e} at maximal depth {depth}, head radius {head}")
    return ZetaGerm(total, total.err + bound, head, depth)


def zeta_trace_germ(law: EigenvalueLaw, op: SpectralOperator, head_radius: int = DEFAULT_HEAD_RADIUS,
                    tail_tol: float = DEFAULT_TAIL_TOL) -> ZetaGerm:
    """
    Germ of z -> Σ_n C_nn λ(n)^{-z} at zero. The head radius starts at
    max(head_radius, crossover + 1) and doubles until two radii agree.
    """
    if op.rank != 1:
        raise OracleError("The oracle is scalar")
    op.tail(0, 1, 0)  # raises TailNotRational for operators without a tail rule
    head = max(head_radius, op.crossover + 1, law.crossover_bound + 1, 2)
    previous = _germ_at(law, op, head, tail_tol)
    for _ in range(MAX_DOUBLINGS):
        head *= 2
        current = _germ_at(law, op, head, tail_tol)
        delta = abs(current.const - previous.const)
        if delta <= 10 * (current.err + previous.err) + tail_tol:
            return ZetaGerm(current.germ, current.err + delta, current.head_radius, current.depth)
        logger.debug(f"Head radius {head}: change {delta:.3e} still too large")
        previous = current
    logger.warning(f"Zeta germ not stable up to head radius {head}")
    return ZetaGerm(previous.germ, previous.err + delta, previous.head_radius, previous.depth)


def weighted_trace(law: EigenvalueLaw, op: SpectralOperator, head_radius: int = DEFAULT_HEAD_RADIUS,
                   tail_tol: float = DEFAULT_TAIL_TOL) -> Tuple[complex, float]:
    """Finite part tr^Q(C) and its error bound."""
    germ = zeta_trace_germ(law, op, head_radius, tail_tol)
    return germ.const, germ.err


class OracleTraceProvider:
    """Weighted traces of symbol words, multiplied at matrix level after quantization."""

    def __init__(self, head_radius: int = DEFAULT_HEAD_RADIUS, tail_tol: float = DEFAULT_TAIL_TOL,
                 realizations: Optional[Mapping[ClassicalSymbol, SpectralOperator]] = None):
        self.head_radius = head_radius
        self.tail_tol = tail_tol
        # symbols whose exact operator is not Op(symbol), e.g. truncated Q^{-k}
        self.realizations: Dict[ClassicalSymbol, SpectralOperator] = dict(realizations or {})
        self._cache: Dict[Tuple, ZetaGerm] = {}
        self._quantized: Dict[ClassicalSymbol, SpectralOperator] = {}

    def realize(self, symbol: ClassicalSymbol) -> SpectralOperator:
        op = self.realizations.get(symbol)
        if op is None:
            op = self._quantized.get(symbol)
        if op is None:
            op = self._quantized.setdefault(symbol, quantize(symbol))
        return op

    def _law(self, Q: Weight) -> EigenvalueLaw:
        if Q.spectral_model is None:
            raise OracleError("Weight without eigenvalue law, no oracle cross-check possible")
        if Q.rank != 1:
            raise OracleError("The oracle is scalar")
        return Q.spectral_model

    def germ(self, Q: Weight, factors: Sequence[ClassicalSymbol]) -> ZetaGerm:
        law = self._law(Q)
        key = (law, tuple(factors))
        cached = self._cache.get(key)
        if cached is None:
            op = product_of([self.realize(f) for f in factors])
            cached = zeta_trace_germ(law, op, self.head_radius, self.tail_tol)
            self._cache[key] = cached
        return cached

    def weighted_trace(self, Q: Weight, factors: Sequence[ClassicalSymbol]) -> Tuple[complex, float]:
        g = self.germ(Q, factors)
        return g.const, g.err

    def pole(self, Q: Weight, factors: Sequence[ClassicalSymbol]) -> Tuple[complex, float]:
        g = self.germ(Q, factors)
        return g.pole, g.err
