"""
Heat Kernel Module
Heat traces, simplex heat kernels (divided differences of the exponential),
JLO cochains on path sums, and the matrix-level identity checks built on them.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from anomaly_engine import (CoefficientConvention, FamilySpec, expansion_coefficient,
                            multi_indices, richardson_derivative)
from symbol_calculus import DirectionLaw, EigenvalueLaw

from .spectral_operator import (DEFAULT_RADIUS, OracleError, RadiusTooSmall, SpectralOperator,
                                ad_operator, commutator_with_law, eigenvalues, law_operator,
                                product_of)

logger = logging.getLogger(__name__)

QUADRATURE_NODES = 64


@dataclass(frozen=True)
class HeatParams:
    """Heat parameter t > 0 (the ε-scaled weight εQ is the same thing)."""
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise OracleError(f"Heat parameter must be positive, got {self.t}")


def _as_params(t: Any) -> HeatParams:
    return t if isinstance(t, HeatParams) else HeatParams(float(t))


def heat_trace(law: EigenvalueLaw, op: SpectralOperator, t: Any,
               radius: Optional[int] = None) -> Tuple[complex, float]:
    """Σ_{|n|<=N} C_nn e^{-tλ(n)}; the error is the magnitude of the next 2N terms, doubled."""
    t = _as_params(t).t
    radius = op.radius if radius is None else radius
    value = 0j
    for n in range(-radius, radius + 1):
        c = op.diagonal(n)
        if not c.is_zero():
            value += complex(c) * np.exp(-t * float(law.value(n)))
    tail = 0.0
    for m in range(radius + 1, 3 * radius + 1):
        weight = np.exp(-t * float(law.value(m)))
        tail += (abs(complex(op.diagonal(m))) + abs(complex(op.diagonal(-m)))) * weight
    return value, 2.0 * tail + 1e-16 * abs(value)


@lru_cache(maxsize=65536)
def _kernel_sorted(nodes: Tuple[float, ...], t: float) -> float:
    size = len(nodes)
    matrix = np.diag([-t * lam for lam in nodes]) + np.diag(np.ones(size - 1), 1)
    return float(expm(matrix)[0, size - 1].real)


def simplex_heat_kernel(nodes: Sequence[float], t: Any) -> float:
    """
    ∫_{Δ_n} Π_j e^{-t u_j λ_j} du, i.e. the divided difference of s -> e^{s}
    at the points -tλ_j, read off the exponential of the bidiagonal node matrix.
    Repeated nodes are handled by the same formula.
    """
    if len(nodes) == 0:
        raise OracleError("At least one node required")
    t = _as_params(t).t
    return _kernel_sorted(tuple(sorted(float(x) for x in nodes)), t)


def _band_offsets(op: SpectralOperator) -> range:
    return range(-op.bandwidth, op.bandwidth + 1)


def _path_sum(law: EigenvalueLaw, ops: Sequence[SpectralOperator], t: float, radius: int) -> complex:
    """Σ over closed index paths i_0 -> ... -> i_n -> i_0 of Π (A_j)_{i_j i_{j+1}} K(λ(i_0..i_n))."""
    mats = [op.matrix(radius) for op in ops]
    lam = eigenvalues(law, radius)
    n = len(ops) - 1
    total = 0j
    path = [0] * (n + 1)

    def walk(level: int, weight: complex):
        nonlocal total
        i = path[level]
        if level == n:
            closing = mats[n][i + radius, path[0] + radius]
            if closing != 0:
                nodes = tuple(lam[p + radius] for p in path)
                total += weight * closing * simplex_heat_kernel(nodes, t)
            return
        for delta in _band_offsets(ops[level]):
            nxt = i - delta
            if abs(nxt) > radius:
                continue
            entry = mats[level][i + radius, nxt + radius]
            if entry == 0:
                continue
            path[level + 1] = nxt
            walk(level + 1, weight * entry)

    for i0 in range(-radius, radius + 1):
        path[0] = i0
        walk(0, 1.0 + 0j)
    return total


def jlo_value(law: EigenvalueLaw, ops: Sequence[SpectralOperator], t: Any,
              radius: Optional[int] = None, padded_radius: Optional[int] = None) -> Tuple[complex, float]:
    """
    χ̃_n(A_0, ..., A_n)(t) as a closed-path sum. Returns the value at the padded
    radius and the difference to the inner radius as error estimate.
    """
    if not ops:
        raise OracleError("At least one operator required")
    t = _as_params(t).t
    radius = DEFAULT_RADIUS if radius is None else radius
    padded_radius = 2 * radius if padded_radius is None else padded_radius
    if len(ops) == 1:
        value, err = heat_trace(law, ops[0], t, padded_radius)
        inner, _ = heat_trace(law, ops[0], t, radius)
        return value, err + abs(value - inner)
    reach = sum(op.bandwidth for op in ops)
    if reach >= radius:
        raise RadiusTooSmall(f"Summed bandwidth {reach} reaches the radius {radius}")
    inner = _path_sum(law, ops, t, radius)
    outer = _path_sum(law, ops, t, padded_radius)
    return outer, abs(outer - inner) + 1e-14 * max(1.0, abs(outer))


def duhamel_check(law: EigenvalueLaw, op: SpectralOperator, u: float,
                  radius: Optional[int] = None, nodes: int = QUADRATURE_NODES) -> float:
    """max |([A, e^{-uQ}] + u∫_0^1 e^{-u(1-v)Q}[A, Q]e^{-uvQ} dv)_{mn}| with Gauss–Legendre in v."""
    if not u > 0:
        raise OracleError(f"u must be positive, got {u}")
    radius = op.radius if radius is None else radius
    a = op.matrix(radius)
    lam = eigenvalues(law, radius)
    lam_m = lam[:, None]
    lam_n = lam[None, :]
    left = a * (np.exp(-u * lam_n) - np.exp(-u * lam_m))
    comm = a * (lam_n - lam_m)
    x, w = np.polynomial.legendre.leggauss(nodes)
    v_nodes = (x + 1) / 2
    integral = np.zeros_like(a)
    for v, weight in zip(v_nodes, w / 2):
        integral += weight * np.exp(-u * (1 - v) * lam_m) * comm * np.exp(-u * v * lam_n)
    deviation = left + u * integral
    return float(np.max(np.abs(deviation))) if deviation.size else 0.0


@dataclass(frozen=True)
class IdentityCheck:
    lhs: complex
    rhs: complex
    deviation: float
    relative: float
    err: float

    def to_json(self) -> dict:
        return {
            'lhs': [self.lhs.real, self.lhs.imag],
            'rhs': [self.rhs.real, self.rhs.imag],
            'deviation': self.deviation,
            'relative': self.relative,
            'err': self.err,
        }


def _identity(lhs: complex, rhs: complex, err: float) -> IdentityCheck:
    deviation = abs(lhs - rhs)
    scale = max(abs(lhs), abs(rhs))
    relative = deviation / scale if scale > 0 else deviation
    return IdentityCheck(lhs, rhs, deviation, relative, err)


def b_jlo_check(law: EigenvalueLaw, ops: Sequence[SpectralOperator], t: Any, parity: Optional[str] = None,
                radius: Optional[int] = None, padded_radius: Optional[int] = None) -> IdentityCheck:
    """
    b χ̃_n(A_0..A_{n+1}) against t Σ_j χ̃_{n+1}(.., [Q, A_{2j+1}], ..), plus
    χ̃_n(A_{n+1}A_0, A_1, .., A_n) when n is odd.
    """
    ops = list(ops)
    n = len(ops) - 2
    if n < 0:
        raise OracleError("b needs at least two arguments")
    expected = 'even' if n % 2 == 0 else 'odd'
    if parity is not None and parity != expected:
        raise OracleError(f"{len(ops)} arguments give an {expected} cochain, not {parity}")
    t = _as_params(t).t

    def chi(args):
        return jlo_value(law, args, t, radius, padded_radius)

    lhs, err = 0j, 0.0
    for j in range(n + 1):
        merged = ops[:j] + [ops[j] @ ops[j + 1]] + ops[j + 2:]
        value, e = chi(merged)
        lhs += (-1) ** j * value
        err += e
    wrapped = [ops[-1] @ ops[0]] + ops[1:-1]
    value, e = chi(wrapped)
    lhs += (-1) ** (n + 1) * value
    err += e

    rhs = 0j
    for j in range(n // 2 + 1):
        args = list(ops)
        args[2 * j + 1] = commutator_with_law(law, ops[2 * j + 1])
        value, e = chi(args)
        rhs += t * value
        err += t * e
    if n % 2 == 1:
        value, e = chi([ops[-1] @ ops[0]] + ops[1:-1])
        rhs += value
        err += e
    return _identity(lhs, rhs, err)


def basicformula_check(law: EigenvalueLaw, ops: Sequence[SpectralOperator], t_grid: Sequence[float],
                       depth: int, conv: CoefficientConvention = CoefficientConvention.EXACT,
                       radius: Optional[int] = None, padded_radius: Optional[int] = None) -> Dict[str, Any]:
    """
    Compare χ̃_n(t) with Σ_{|k|<=K} (-t)^{|k|} D(k) tr(A_0 A_1^{(k_1)}...A_n^{(k_n)} e^{-tQ})
    on a grid of t and fit the log-log slope of the residual.
    """
    ops = list(ops)
    n = len(ops) - 1
    if n < 0:
        raise OracleError("At least one operator required")
    if depth < 0:
        raise OracleError(f"Depth must be nonnegative, got {depth}")
    products = []
    for total in range(depth + 1):
        for k in multi_indices(n, total):
            factors = [ops[0]] + [ad_operator(law, op, kj) for op, kj in zip(ops[1:], k.entries)]
            products.append((total, expansion_coefficient(k, conv), product_of(factors)))
    rows = []
    for t in t_grid:
        t = _as_params(t).t
        value, err = jlo_value(law, ops, t, radius, padded_radius)
        expansion = 0j
        for total, coeff, product in products:
            trace, trace_err = heat_trace(law, product, t, padded_radius or 2 * (radius or DEFAULT_RADIUS))
            expansion += (-t) ** total * float(coeff) * trace
            err += t ** total * float(abs(coeff)) * trace_err
        rows.append({'t': t, 'jlo': value, 'expansion': expansion, 'residual': abs(value - expansion), 'err': err})
    slope = None
    usable = [r for r in rows if r['residual'] > 0]
    if len(usable) >= 2:
        fit = np.polyfit(np.log([r['t'] for r in usable]), np.log([r['residual'] for r in usable]), 1)
        slope = float(fit[0])
    return {
        'rows': rows,
        'slope': slope,
        'expected_slope': (depth + 1) / law.order,
        'naive_slope': float(depth + 1),
        'convention': conv.value,
    }


def family_jlo_check(family: FamilySpec, ops: Sequence[SpectralOperator], t: Any, x: float, h: float,
                     levels: int = 3, radius: Optional[int] = None,
                     padded_radius: Optional[int] = None) -> IdentityCheck:
    """d/dx χ̃_n(Q_x)(t) against -t Σ_j χ̃_{n+1}(Q_x)(t) with Q̇ inserted at position j."""
    if family.base.spectral_model is None or family.eigen_direction is None:
        raise OracleError("Family needs diagonal base and direction laws")
    t = _as_params(t).t
    base: EigenvalueLaw = family.base.spectral_model
    direction: DirectionLaw = family.eigen_direction
    ops = list(ops)

    def law_at(s: float) -> EigenvalueLaw:
        return base.affine(direction, Fraction(s))

    def chi(s: float) -> complex:
        return jlo_value(law_at(s), ops, t, radius, padded_radius)[0]

    lhs, fd_err = richardson_derivative(chi, x, h, levels)
    q_dot = law_operator(direction, 1, radius or DEFAULT_RADIUS)
    law_x = law_at(x)
    rhs, err = 0j, fd_err
    for j in range(1, len(ops) + 1):
        args = ops[:j] + [q_dot] + ops[j:]
        value, e = jlo_value(law_x, args, t, radius, padded_radius)
        rhs -= t * value
        err += t * e
    return _identity(lhs, rhs, err)

