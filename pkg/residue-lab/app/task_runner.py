"""
Task Runner für residue-lab
Führt die Aufgaben eines Szenarios aus: symbolische Residuenformeln, Orakel-
Kreuzvergleiche und Eigenschaftsprüfungen. Aufgaben laufen parallel im
ThreadPoolExecutor, der Bericht wird in Szenario-Reihenfolge zusammengesetzt.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

import fixture_factory
from anomaly_engine import (CoefficientConvention, EngineError, FamilySpec, TermRecord,
                            as_word, coboundary_terms, convention_pair, correction_sum, correction_terms,
                            coboundary_anomaly, family_derivative, family_terms, hochschild_b,
                            interpolation_difference, iterated_simplex_integral, mellin_residue,
                            multi_indices, resolve_arguments, richardson_derivative, simplex_constant,
                            weighted_cochain, word_product)
from exact_algebra import CRational, ZERO, get_precision_bits, rational_sum, set_precision_bits
from oracle import (OracleError, OracleTraceProvider, b_jlo_check, basicformula_check, duhamel_check,
                    family_jlo_check, heat_trace, jlo_value, law_operator, product_of, quantize,
                    simplex_heat_kernel)
from report_writer import to_jsonable
from scenario_parser import TASK_KINDS, Argument, Scenario, TaskSpec
from settings_manager import DEFAULT_SETTINGS
from symbol_calculus import ClassicalSymbol, EigenvalueLaw, Weight, compose_chain, wodzicki_residue

# Toleranzen vor tol_scale; exakte Prüfungen haben 0
DEFAULT_TOLERANCES: Dict[str, float] = {
    'pole_law': 1e-9,
    'random_pole_law': 1e-9,
    'weighted_trace': 1e-9,
    'trace_class': 1e-9,
    'weighted_cochain': 1e-9,
    'coboundary_check': 1e-7,
    'family_check': 1e-6,
    'interpolation': 1e-6,
    'cochain_cyclicity': 1e-7,
    'heat_trace': 1e-9,
    'simplex_kernel': 1e-12,
    'jlo': 1e-9,
    'jlo_cyclicity': 1e-9,
    'duhamel': 1e-8,
    'b_jlo': 1e-8,
    'basicformula': 0.3,
    'family_jlo': 1e-6,
}


@dataclass
class TaskOutcome:
    value: Any
    err: float = 0.0
    exact_part: Optional[CRational] = None
    deviation: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)
    terms: Optional[List[TermRecord]] = None


def _distance(a: Any, b: Any) -> float:
    if isinstance(a, CRational) and isinstance(b, CRational):
        diff = a - b
        return 0.0 if diff.is_zero() else abs(complex(diff))
    return abs(complex(a) - complex(b))


def _parse_expected(raw: Any) -> Any:
    """'p/q' und ganze Zahlen bleiben exakt, Fließkommazahlen werden komplex."""
    if isinstance(raw, list):
        re, im = raw
        if all(isinstance(v, (int, str)) for v in raw):
            return CRational(Fraction(re), Fraction(im))
        return complex(float(Fraction(re)) if isinstance(re, str) else re,
                       float(Fraction(im)) if isinstance(im, str) else im)
    if isinstance(raw, (int, str)):
        return CRational.of(Fraction(raw))
    return complex(raw)


def _parameter(value: Any) -> Fraction:
    """Familienparameter exakt: 'p/q'-Strings direkt, Fließkommazahlen binär exakt."""
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(value)


class TaskRunner:
    """Führt die Aufgaben eines Szenarios aus."""

    def __init__(self, scenario: Scenario, settings: Optional[Dict[str, Any]] = None):
        self.scenario = scenario
        self.settings = dict(DEFAULT_SETTINGS)
        self.settings.update(settings or {})
        set_precision_bits(int(self.settings['precision_bits']))
        self.provider = OracleTraceProvider(int(self.settings['zeta_head_radius']),
                                            float(self.settings['zeta_tail_tol']),
                                            self._realizations())
        self.handlers: Dict[str, Callable[[TaskSpec], TaskOutcome]] = {
            kind: getattr(self, f'_task_{kind}') for kind in TASK_KINDS
        }

    # -- Auflösung ---------------------------------------------------------

    def _realizations(self) -> Dict[ClassicalSymbol, Any]:
        """Q^k-Operanden haben exakte Diagonalmatrizen statt Op(abgeschnittenes Symbol)."""
        out = {}
        for op in self.scenario.operators.values():
            if op.weight is None or not op.power:
                continue
            law = self.scenario.weight(op.weight).spectral_model
            if law is None or self.scenario.rank != 1:
                continue
            out[op.symbol] = law_operator(law, op.power, int(self.settings['inner_radius']))
        return out

    def _weight(self, task: TaskSpec) -> Weight:
        return self.scenario.weight(task.weight)

    def _law(self, task: TaskSpec) -> EigenvalueLaw:
        Q = self._weight(task)
        if Q.spectral_model is None:
            raise OracleError(f"Gewicht {task.weight} hat kein Eigenwertgesetz, keine Orakelprüfung möglich")
        return Q.spectral_model

    def _family(self, task: TaskSpec) -> FamilySpec:
        return self.scenario.family(task.family).spec

    def _symbols(self, task: TaskSpec) -> List[Any]:
        return [self.scenario.argument(a) for a in task.args]

    def _letters(self, args: Sequence[Argument]) -> List[ClassicalSymbol]:
        return [s for a in args for s in as_word(self.scenario.argument(a))]

    def _operator(self, arg: Argument):
        return product_of([self.provider.realize(op.symbol) for op in self.scenario.letters(arg)])

    def _operators(self, task: TaskSpec) -> list:
        return [self._operator(a) for a in task.args]

    def _convention(self, task: TaskSpec) -> CoefficientConvention:
        raw = task.option('convention', 'exact')
        return CoefficientConvention.EXACT if raw == 'both' else CoefficientConvention.parse(raw)

    def _radii(self, task: TaskSpec) -> Tuple[int, int]:
        radius = int(task.option('radius', self.settings['inner_radius']))
        padded = int(task.option('padded_radius', max(self.settings['padded_radius'], 2 * radius)))
        return radius, padded

    def _rng(self, task: TaskSpec) -> np.random.Generator:
        return fixture_factory.make_rng(int(task.option('seed', self.settings['random_seed'])))

    def tolerance(self, task: TaskSpec) -> float:
        base = task.option('tolerance', DEFAULT_TOLERANCES.get(task.kind, 0.0))
        return float(base) * float(self.settings['tol_scale'])

    def _against_expected(self, task: TaskSpec, value: Any, err: float = 0.0,
                          exact: Optional[CRational] = None, **details) -> TaskOutcome:
        deviation = None
        if 'expected' in task.options:
            expected = _parse_expected(task.options['expected'])
            deviation = _distance(exact if exact is not None else value, expected)
            details['expected'] = expected
        return TaskOutcome(value, err, exact, deviation, details)

    # -- Residuen ----------------------------------------------------------

    def _task_residue(self, task: TaskSpec) -> TaskOutcome:
        symbol = resolve_arguments(self._symbols(task))[0]
        value = wodzicki_residue(symbol)
        return self._against_expected(task, value, exact=value)

    @staticmethod
    def _commutator_residue(a: ClassicalSymbol, b: ClassicalSymbol) -> CRational:
        return wodzicki_residue(compose_chain([a, b], -2) - compose_chain([b, a], -2))

    def _task_commutator_residue(self, task: TaskSpec) -> TaskOutcome:
        a, b = resolve_arguments(self._symbols(task))
        value = self._commutator_residue(a, b)
        return TaskOutcome(value, 0.0, value, _distance(value, ZERO))

    def _task_random_commutator_residue(self, task: TaskSpec) -> TaskOutcome:
        rng = self._rng(task)
        count = int(task.option('count', 200))
        low, high = task.option('orders', [-3, 3])
        pairs = fixture_factory.random_pairs(rng, count, (low, high), int(task.option('support', 3)))
        worst, nonzero = 0.0, 0
        for a, b in pairs:
            value = self._commutator_residue(a, b)
            if not value.is_zero():
                nonzero += 1
                worst = max(worst, abs(complex(value)))
        return TaskOutcome(nonzero, 0.0, None, worst, {'pairs': count, 'nonzero': nonzero})

    def _task_mellin_residue(self, task: TaskSpec) -> TaskOutcome:
        value = mellin_residue(self._weight(task), self._symbols(task))
        return self._against_expected(task, value, exact=value)

    def _task_pole_law(self, task: TaskSpec) -> TaskOutcome:
        Q = self._weight(task)
        symbolic = mellin_residue(Q, self._symbols(task))
        pole, err = self.provider.pole(Q, self._letters(task.args))
        return TaskOutcome(pole, err, symbolic, _distance(pole, symbolic),
                           {'symbolic': symbolic, 'oracle': pole})

    def _task_random_pole_law(self, task: TaskSpec) -> TaskOutcome:
        Q = self._weight(task)
        rng = self._rng(task)
        low, high = task.option('orders', [-3, 1])
        support = int(task.option('support', 3))
        rows, worst, err = [], 0.0, 0.0
        for _ in range(int(task.option('count', 20))):
            order = int(rng.integers(low, high + 1))
            a = fixture_factory.random_symbol(rng, order, support)
            symbolic = mellin_residue(Q, [a])
            pole, e = self.provider.pole(Q, [a])
            deviation = _distance(pole, symbolic)
            worst = max(worst, deviation)
            err += e
            rows.append({'order': order, 'symbolic': symbolic, 'oracle': pole, 'deviation': deviation})
        return TaskOutcome(len(rows), err, None, worst, {'fixtures': rows})

    # -- Gewichtete Spuren und Kozyklen --------------------------------------

    def _task_weighted_trace(self, task: TaskSpec) -> TaskOutcome:
        value, err = self.provider.weighted_trace(self._weight(task), self._letters(task.args))
        return self._against_expected(task, value, err)

    @staticmethod
    def _direct_sum(op) -> complex:
        """Σ_n C_nn als absolut konvergente Reihe (mpmath.nsum mit Extrapolation)."""
        def term(n):
            c = op.diagonal(int(n))
            return mpmath.mpc(mpmath.mpf(c.re.numerator) / c.re.denominator,
                              mpmath.mpf(c.im.numerator) / c.im.denominator)

        with mpmath.workprec(get_precision_bits()):
            total = mpmath.nsum(term, [-mpmath.inf, mpmath.inf])
        return complex(total)

    def _task_trace_class(self, task: TaskSpec) -> TaskOutcome:
        arg = task.args[0]
        letters = self._letters([arg])
        order = sum(s.order for s in letters)
        if order > -2:
            raise EngineError(f"Operator der Ordnung {order} ist nicht spurklasse (Ordnung <= -2 nötig)")
        value, err = self.provider.weighted_trace(self._weight(task), letters)
        reference = self._direct_sum(self._operator(arg))
        return TaskOutcome(value, err, None, _distance(value, reference), {'direct_sum': reference})

    def _both(self, evaluate: Callable[[CoefficientConvention], CRational]) -> Dict[str, Any]:
        pair = convention_pair(evaluate)
        return {'value_exact': pair['value_exact'], 'value_paper': pair['value_paper'],
                'conventions_agree': pair['agree']}

    def _task_correction_sum(self, task: TaskSpec) -> TaskOutcome:
        Q, symbols, conv = self._weight(task), self._symbols(task), self._convention(task)
        terms = correction_terms(Q, symbols, conv)
        value = rational_sum(t.contribution for t in terms)
        details = self._both(lambda c: correction_sum(Q, symbols, c))
        outcome = self._against_expected(task, value, exact=value, **details)
        outcome.terms = terms
        return outcome

    def _task_weighted_cochain(self, task: TaskSpec) -> TaskOutcome:
        Q, symbols, conv = self._weight(task), self._symbols(task), self._convention(task)
        result = weighted_cochain(Q, symbols, self.provider, conv)
        details = self._both(lambda c: correction_sum(Q, symbols, c))
        return self._against_expected(task, result.value, result.err, **details)

    def _task_coboundary_anomaly(self, task: TaskSpec) -> TaskOutcome:
        Q, symbols, conv = self._weight(task), self._symbols(task), self._convention(task)
        shells = int(task.option('extra_shells', 0))
        terms = coboundary_terms(Q, symbols, conv, shells)
        value = rational_sum(t.contribution for t in terms)
        details = self._both(lambda c: coboundary_anomaly(Q, symbols, c, shells))
        outcome = self._against_expected(task, value, exact=value, **details)
        outcome.terms = terms
        return outcome

    def _task_coboundary_check(self, task: TaskSpec) -> TaskOutcome:
        """Residuenformel gegen die direkte Hochschild-Kombination der Orakel-Kozyklen."""
        Q, symbols, conv = self._weight(task), self._symbols(task), self._convention(task)
        formula = coboundary_anomaly(Q, symbols, conv)
        direct = hochschild_b(lambda args: weighted_cochain(Q, args, self.provider, conv),
                              [as_word(s) for s in symbols], product=word_product)
        details = self._both(lambda c: coboundary_anomaly(Q, symbols, c))
        details['formula'] = formula
        return TaskOutcome(direct.value, direct.err, formula, _distance(direct.value, formula), details)

    def _task_random_cocycle(self, task: TaskSpec) -> TaskOutcome:
        """b χ verschwindet exakt für Tupel mit Ordnungssumme <= -1."""
        Q, conv = self._weight(task), self._convention(task)
        rng = self._rng(task)
        low, high = task.option('orders', [-3, 2])
        sizes = task.option('slots', [2, 4])
        shells = int(task.option('extra_shells', 2))
        support = int(task.option('support', 2))
        count = int(task.option('count', 50))
        worst, nonzero, evaluated = 0.0, 0, 0
        for i in range(count):
            size = sizes[i % len(sizes)]
            symbols = fixture_factory.random_tuple(rng, size, (low, high), support, max_sum=-1)
            terms = coboundary_terms(Q, symbols, conv, shells)
            evaluated += len(terms)
            value = rational_sum(t.contribution for t in terms)
            if not value.is_zero():
                nonzero += 1
                worst = max(worst, abs(complex(value)))
        return TaskOutcome(nonzero, 0.0, None, worst,
                           {'tuples': count, 'nonzero': nonzero, 'terms_evaluated': evaluated})

    def _cutoff(self, Q: Weight, symbols: Sequence[Any], conv: CoefficientConvention,
                shells: int) -> Tuple[int, float]:
        base = correction_terms(Q, symbols, conv)
        extended = correction_terms(Q, symbols, conv, shells)
        if extended[:len(base)] != base:
            raise EngineError("Erweiterte Termliste beginnt nicht mit der regulären")
        extra = extended[len(base):]
        worst = max((abs(complex(t.residue)) for t in extra if not t.residue.is_zero()), default=0.0)
        return len(extra), worst

    def _task_cutoff_check(self, task: TaskSpec) -> TaskOutcome:
        shells = int(task.option('extra_shells', 2))
        count, worst = self._cutoff(self._weight(task), self._symbols(task), self._convention(task), shells)
        return TaskOutcome(count, 0.0, None, worst, {'extra_terms': count})

    def _task_random_cutoff(self, task: TaskSpec) -> TaskOutcome:
        Q, conv = self._weight(task), self._convention(task)
        rng = self._rng(task)
        low, high = task.option('orders', [-2, 2])
        sizes = task.option('slots', [1, 2, 3])
        shells = int(task.option('extra_shells', 2))
        support = int(task.option('support', 2))
        total, worst = 0, 0.0
        for i in range(int(task.option('count', 50))):
            symbols = fixture_factory.random_tuple(rng, sizes[i % len(sizes)], (low, high), support)
            count, deviation = self._cutoff(Q, symbols, conv, shells)
            total += count
            worst = max(worst, deviation)
        return TaskOutcome(total, 0.0, None, worst, {'extra_terms': total})

    # -- Familien ------------------------------------------------------------

    def _task_family_derivative(self, task: TaskSpec) -> TaskOutcome:
        family, symbols, conv = self._family(task), self._symbols(task), self._convention(task)
        t = _parameter(task.option('t', '1/2'))
        terms = family_terms(family, t, symbols, conv)
        value = rational_sum(r.contribution for r in terms)
        details = self._both(lambda c: family_derivative(family, t, symbols, c))
        outcome = self._against_expected(task, value, exact=value, **details)
        outcome.terms = terms
        return outcome

    def _family_trace(self, family: FamilySpec, s: float, letters: Sequence[ClassicalSymbol]) -> Tuple[complex, float]:
        if family.base.spectral_model is None or family.eigen_direction is None:
            raise OracleError("Familie ohne Eigenwertgesetze, keine Orakelprüfung möglich")
        law = family.base.spectral_model.affine(family.eigen_direction, Fraction(s))
        return self.provider.weighted_trace(Weight.from_law(law, family.base.rank), letters)

    def _task_family_check(self, task: TaskSpec) -> TaskOutcome:
        """d/dt tr^{Q_t}(A) per Richardson-Extrapolation gegen die Residuenformel."""
        family, conv = self._family(task), self._convention(task)
        t = _parameter(task.option('t', '1/2'))
        letters = self._letters(task.args)
        h = float(task.option('h', float(Fraction(self.settings['richardson_step']))))
        levels = int(task.option('levels', self.settings['richardson_levels']))
        errs: List[float] = []

        def trace_at(s: float) -> complex:
            value, e = self._family_trace(family, s, letters)
            errs.append(e)
            return value

        numeric, fd_err = richardson_derivative(trace_at, float(t), h, levels)
        formula = family_derivative(family, t, self._symbols(task), conv)
        err = fd_err + sum(errs) / h
        return TaskOutcome(numeric, err, formula, _distance(numeric, formula),
                           {'formula': formula, 'richardson_err': fd_err})

    def _task_interpolation(self, task: TaskSpec) -> TaskOutcome:
        family, symbols, conv = self._family(task), self._symbols(task), self._convention(task)
        nodes = int(task.option('nodes', self.settings['gauss_nodes']))
        integral = interpolation_difference(family, symbols, nodes, conv)
        end = weighted_cochain(family.weight_at(1), symbols, self.provider, conv)
        start = weighted_cochain(family.weight_at(0), symbols, self.provider, conv)
        difference = end.value - start.value
        return TaskOutcome(integral.value, integral.err + end.err + start.err, None,
                           _distance(integral.value, difference),
                           {'oracle_difference': difference, 'quadrature_err': integral.err})

    def _task_cochain_cyclicity(self, task: TaskSpec) -> TaskOutcome:
        Q, conv = self._weight(task), self._convention(task)
        a, b = self._symbols(task)
        forward = weighted_cochain(Q, [a, b], self.provider, conv)
        backward = weighted_cochain(Q, [b, a], self.provider, conv)
        return TaskOutcome(forward.value, forward.err + backward.err, None,
                           _distance(forward.value, backward.value), {'swapped': backward.value})

    # -- Wärmeleitungsebene -------------------------------------------------

    def _heat_t(self, task: TaskSpec, default: float = 1.0) -> float:
        return float(_parameter(task.option('t', default)))

    def _task_heat_trace(self, task: TaskSpec) -> TaskOutcome:
        radius, _ = self._radii(task)
        value, err = heat_trace(self._law(task), self._operator(task.args[0]), self._heat_t(task), radius)
        return self._against_expected(task, value, err)

    def _task_simplex_kernel(self, task: TaskSpec) -> TaskOutcome:
        nodes = task.option('nodes')
        if not isinstance(nodes, list):
            raise EngineError("simplex_kernel braucht 'nodes' als Liste von Eigenwerten")
        value = simplex_heat_kernel(nodes, self._heat_t(task))
        return self._against_expected(task, value)

    def _task_jlo(self, task: TaskSpec) -> TaskOutcome:
        radius, padded = self._radii(task)
        value, err = jlo_value(self._law(task), self._operators(task), self._heat_t(task), radius, padded)
        return self._against_expected(task, value, err)

    def _task_jlo_cyclicity(self, task: TaskSpec) -> TaskOutcome:
        law, ops, t = self._law(task), self._operators(task), self._heat_t(task)
        radius, padded = self._radii(task)
        value, err = jlo_value(law, ops, t, radius, padded)
        worst, shifted = 0.0, []
        for r in range(1, len(ops)):
            other, e = jlo_value(law, ops[r:] + ops[:r], t, radius, padded)
            err += e
            shifted.append(other)
            worst = max(worst, abs(other - value))
        return TaskOutcome(value, err, None, worst, {'shifted': shifted})

    def _task_duhamel(self, task: TaskSpec) -> TaskOutcome:
        law, op = self._law(task), self._operator(task.args[0])
        radius, _ = self._radii(task)
        us = task.option('u', [0.3, 1.0])
        us = us if isinstance(us, list) else [us]
        nodes = int(task.option('nodes', self.settings['quadrature_nodes']))
        rows = [{'u': u, 'deviation': duhamel_check(law, op, u, radius, nodes)} for u in us]
        worst = max(r['deviation'] for r in rows)
        return TaskOutcome(worst, 0.0, None, worst, {'rows': rows})

    def _task_b_jlo(self, task: TaskSpec) -> TaskOutcome:
        radius, padded = self._radii(task)
        check = b_jlo_check(self._law(task), self._operators(task), self._heat_t(task, 0.7),
                            task.option('parity'), radius, padded)
        return TaskOutcome(check.lhs, check.err, None, check.relative, check.to_json())

    def _task_basicformula(self, task: TaskSpec) -> TaskOutcome:
        """
        Mit 'expected' wird residual / tr(e^{-tQ}) auf dem ganzen Gitter gegen den
        Wert geprüft, sonst die angepasste Steigung gegen (K+1)/q.
        """
        law, ops = self._law(task), self._operators(task)
        radius, padded = self._radii(task)
        grid = task.option('t_grid', [0.4, 0.2, 0.1, 0.05])
        depth = int(task.option('depth', 0))
        conv = self._convention(task)
        report = basicformula_check(law, ops, grid, depth, conv, radius, padded)
        err = max(row['err'] for row in report['rows'])
        if 'expected' in task.options:
            target = abs(complex(_parse_expected(task.options['expected'])))
            identity = quantize(ClassicalSymbol.identity())
            deviation = 0.0
            for row in report['rows']:
                trace, _ = heat_trace(law, identity, row['t'], padded)
                row['ratio'] = row['residual'] / trace.real
                deviation = max(deviation, abs(row['ratio'] - target))
        elif report['slope'] is None:
            deviation = float('inf')
        else:
            deviation = abs(report['slope'] - report['expected_slope'])
        if task.option('convention') == 'both':
            paper = basicformula_check(law, ops, grid, depth, CoefficientConvention.PAPER, radius, padded)
            report['paper'] = {'rows': paper['rows'], 'slope': paper['slope']}
        return TaskOutcome(report['slope'], err, None, deviation, report)

    def _task_family_jlo(self, task: TaskSpec) -> TaskOutcome:
        radius, padded = self._radii(task)
        family = self._family(task)
        x = float(task.option('x', 0.5))
        h = float(task.option('h', float(Fraction(self.settings['richardson_step']))))
        levels = int(task.option('levels', self.settings['richardson_levels']))
        check = family_jlo_check(family, self._operators(task), self._heat_t(task, 0.7), x, h, levels,
                                 radius, padded)
        return TaskOutcome(check.lhs, check.err, None, check.deviation, check.to_json())

    # -- Konstanten und Algebra ----------------------------------------------

    def _task_simplex_constants(self, task: TaskSpec) -> TaskOutcome:
        max_slots = max(task.option('slots', [4]))
        max_total = int(task.option('max_total', 5))
        checked, mismatches, table, disagreements = 0, 0, [], 0
        for slots in range(1, max_slots + 1):
            for total in range(max_total + 1):
                for k in multi_indices(slots, total):
                    constant = simplex_constant(k)
                    checked += 1
                    if constant.value_exact != iterated_simplex_integral(k):
                        mismatches += 1
                        logging.error(f"Simplex-Konstante falsch für k={k}")
                    if constant.value_exact == constant.value_paper:
                        continue
                    if slots == 1:
                        mismatches += 1
                        continue
                    disagreements += 1
                    if len(table) < 16:
                        table.append({'k': list(k.entries), 'value_exact': constant.value_exact,
                                      'value_paper': constant.value_paper})
        return TaskOutcome(checked, 0.0, None, float(mismatches),
                           {'checked': checked, 'mismatches': mismatches,
                            'disagreements': disagreements, 'table': table})

    def _task_hochschild_nilpotency(self, task: TaskSpec) -> TaskOutcome:
        """b(bφ) = 0 exakt für ganzzahlige multilineare Kozyklen auf 2x2-Matrizen."""
        rng = self._rng(task)
        sizes = task.option('slots', [1, 2, 3])
        worst, nonzero, count = 0.0, 0, int(task.option('count', 12))
        for i in range(count):
            degree = sizes[i % len(sizes)] - 1
            phi = fixture_factory.random_cochain(rng, degree)
            args = fixture_factory.random_matrices(rng, degree + 3)
            value = hochschild_b(lambda inner: hochschild_b(phi, inner, np.matmul), args, np.matmul)
            if value.exact_part is None or not value.exact_part.is_zero():
                nonzero += 1
                worst = max(worst, abs(value.value))
        return TaskOutcome(nonzero, 0.0, None, worst, {'cochains': count, 'nonzero': nonzero})

    # -- Ausführung ----------------------------------------------------------

    def run_task(self, task: TaskSpec) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            'id': task.id,
            'kind': task.kind,
            'args': [a if isinstance(a, str) else list(a) for a in task.args],
            'weight': task.weight,
            'family': task.family,
            'convention': task.option('convention', 'exact'),
        }
        started = time.perf_counter()
        try:
            logging.debug(f"Starte Aufgabe {task.id} ({task.kind})")
            outcome = self.handlers[task.kind](task)
            tolerance = self.tolerance(task)
            passed = None if outcome.deviation is None else bool(outcome.deviation <= tolerance)
            record.update({
                'success': True,
                'value': to_jsonable(outcome.value),
                'exact_part': None if outcome.exact_part is None else str(outcome.exact_part),
                'err': float(outcome.err),
                'deviation': to_jsonable(outcome.deviation),
                'tolerance': tolerance if outcome.deviation is not None else None,
                'passed': passed,
                'details': to_jsonable(outcome.details),
            })
            if task.option('terms') and outcome.terms is not None:
                record['terms'] = [t.to_json() for t in outcome.terms]
            if passed is False:
                logging.warning(f"Aufgabe {task.id} nicht bestanden: Abweichung {outcome.deviation:.3e} "
                                f"> Toleranz {tolerance:.1e}")
        except Exception as e:
            message = getattr(e, 'message', None) or str(e) or type(e).__name__
            logging.error(f"Aufgabe {task.id} ({task.kind}) fehlgeschlagen: {message}")
            record.update({'success': False, 'passed': False, 'error': f"{type(e).__name__}: {message}"})
        record['elapsed_s'] = round(time.perf_counter() - started, 6)
        return record

    def run(self, threads: Optional[int] = None) -> List[Dict[str, Any]]:
        """Alle Aufgaben ausführen; die Reihenfolge der Ergebnisse folgt dem Szenario."""
        threads = max(1, int(threads if threads is not None else self.settings['threads']))
        tasks = list(self.scenario.tasks)
        logging.info(f"Szenario {self.scenario.name}: {len(tasks)} Aufgaben mit {threads} Threads")
        if threads == 1 or len(tasks) <= 1:
            return [self.run_task(t) for t in tasks]
        with ThreadPoolExecutor(max_workers=threads, thread_name_prefix='task') as executor:
            return list(executor.map(self.run_task, tasks))
