"""
Scenario Parser für residue-lab
Liest JSON-Szenarien (Testbett, Gewichte, Operatoren, Familien, Aufgaben),
validiert sie mit voluptuous und löst alle Namen in Symbole und Gewichte auf.
"""

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import voluptuous as vol

from anomaly_engine import EngineError, FamilySpec
from exact_algebra import AlgebraError, CRational, FourierPoly, to_fraction
from symbol_calculus import (ClassicalSymbol, DirectionLaw, EigenvalueLaw, HomTerm,
                             SymbolError, Weight, block_of, compose_chain, power_neg)


class ParseError(Exception):
    """Szenario verletzt das Schema; ``position`` zeigt auf die Stelle."""

    def __init__(self, message: str, position: Optional[str] = None):
        self.message = message
        self.position = position
        super().__init__(f"{position}: {message}" if position else message)


class ResolutionError(Exception):
    """Unbekannter Name in einem Szenario."""

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


# kind -> (min. Argumente, max. Argumente oder None)
TASK_KINDS: Dict[str, Tuple[int, Optional[int]]] = {
    'residue': (1, 1),
    'commutator_residue': (2, 2),
    'random_commutator_residue': (0, 0),
    'mellin_residue': (1, None),
    'pole_law': (1, None),
    'random_pole_law': (0, 0),
    'weighted_trace': (1, 1),
    'trace_class': (1, 1),
    'correction_sum': (1, None),
    'weighted_cochain': (1, None),
    'coboundary_anomaly': (2, None),
    'coboundary_check': (2, None),
    'random_cocycle': (0, 0),
    'cutoff_check': (1, None),
    'random_cutoff': (0, 0),
    'family_derivative': (1, None),
    'family_check': (1, 1),
    'interpolation': (1, None),
    'cochain_cyclicity': (2, 2),
    'heat_trace': (1, 1),
    'simplex_kernel': (0, 0),
    'jlo': (1, None),
    'jlo_cyclicity': (2, None),
    'duhamel': (1, 1),
    'b_jlo': (2, None),
    'basicformula': (1, None),
    'family_jlo': (1, None),
    'simplex_constants': (0, 0),
    'hochschild_nilpotency': (0, 0),
}

EVEN_ARITY = frozenset({'coboundary_anomaly', 'coboundary_check'})
NEEDS_WEIGHT = frozenset({
    'mellin_residue', 'pole_law', 'random_pole_law',
    'weighted_trace', 'trace_class', 'correction_sum', 'weighted_cochain', 'coboundary_anomaly',
    'coboundary_check', 'random_cocycle', 'cutoff_check', 'random_cutoff', 'cochain_cyclicity',
    'heat_trace', 'jlo', 'jlo_cyclicity', 'duhamel', 'b_jlo', 'basicformula',
})
NEEDS_FAMILY = frozenset({'family_derivative', 'family_check', 'interpolation', 'family_jlo'})

DEFAULT_POWER_DEPTH = 12


# ---------------------------------------------------------------------------
# Schema
# ---------------------------------------------------------------------------

def _rational(value: Any) -> Fraction:
    try:
        return to_fraction(value)
    except (AlgebraError, ValueError, ZeroDivisionError):
        raise vol.Invalid(f"kein exakter rationaler Wert: {value!r}")


def _entry(value: Any) -> Tuple[int, ...]:
    """[freq, re_num, re_den] oder [freq, re_num, re_den, im_num, im_den]."""
    if not isinstance(value, list) or len(value) not in (3, 5):
        raise vol.Invalid("Koeffizient braucht 3 oder 5 ganze Zahlen")
    if any(isinstance(v, bool) or not isinstance(v, int) for v in value):
        raise vol.Invalid("Koeffizienteneinträge müssen ganze Zahlen sein")
    if value[2] == 0 or (len(value) == 5 and value[4] == 0):
        raise vol.Invalid("Nenner darf nicht 0 sein")
    return tuple(value) if len(value) == 5 else tuple(value) + (0, 1)


def _positive(value: Any) -> float:
    if isinstance(value, bool):
        raise vol.Invalid("Zahl erwartet")
    number = vol.Coerce(float)(value)
    if not number > 0:
        raise vol.Invalid(f"muss positiv sein: {value}")
    return number


def _expected(value: Any) -> Any:
    if isinstance(value, bool):
        raise vol.Invalid("Erwartungswert darf kein Wahrheitswert sein")
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        _rational(value)
        return value
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float, str)) for v in value):
        return value
    raise vol.Invalid(f"Erwartungswert muss Zahl, 'p/q' oder [re, im] sein: {value!r}")


TERM_SCHEMA = vol.Schema({
    vol.Required('degree'): int,
    vol.Required('plus'): list,
    vol.Required('minus'): list,
}, extra=vol.PREVENT_EXTRA)

OPERAND_SCHEMA = vol.Any(
    [TERM_SCHEMA],
    vol.Schema({vol.Required('terms'): [TERM_SCHEMA]}, extra=vol.PREVENT_EXTRA),
    vol.Schema({
        vol.Required('weight_power'): str,
        vol.Required('power'): int,
        vol.Optional('depth', default=DEFAULT_POWER_DEPTH): vol.All(int, vol.Range(min=1)),
    }, extra=vol.PREVENT_EXTRA),
)

WEIGHT_SCHEMA = vol.Schema({
    vol.Optional('eigenvalue_law'): vol.All([_rational], vol.Length(min=2)),
    vol.Optional('symbol'): [TERM_SCHEMA],
    vol.Optional('order'): vol.All(int, vol.Range(min=1)),
}, extra=vol.PREVENT_EXTRA)

FAMILY_SCHEMA = vol.Schema({
    vol.Required('base'): str,
    vol.Required('direction'): str,
    vol.Optional('direction_law'): [_rational],
    vol.Optional('t_range', default=lambda: ['0', '1']): vol.All([_rational], vol.Length(min=2, max=2)),
}, extra=vol.PREVENT_EXTRA)

ARGUMENT = vol.Any(str, vol.All([str], vol.Length(min=1)))

TASK_SCHEMA = vol.Schema({
    vol.Optional('id'): str,
    vol.Required('kind'): vol.In(sorted(TASK_KINDS)),
    vol.Optional('weight'): str,
    vol.Optional('family'): str,
    vol.Optional('args', default=list): [ARGUMENT],
    vol.Optional('convention'): vol.In(['exact', 'paper', 'both']),
    vol.Optional('tolerance'): _positive,
    vol.Optional('expected'): _expected,
    vol.Optional('terms'): bool,
    vol.Optional('radius'): vol.All(int, vol.Range(min=1)),
    vol.Optional('padded_radius'): vol.All(int, vol.Range(min=1)),
    vol.Optional('head_radius'): vol.All(int, vol.Range(min=2)),
    vol.Optional('t'): vol.Any(_positive, str),
    vol.Optional('t_grid'): vol.All([_positive], vol.Length(min=1)),
    vol.Optional('u'): vol.Any(_positive, vol.All([_positive], vol.Length(min=1))),
    vol.Optional('nodes'): vol.Any(vol.All(int, vol.Range(min=1)), [vol.Coerce(float)]),
    vol.Optional('depth'): vol.All(int, vol.Range(min=0)),
    vol.Optional('parity'): vol.In(['even', 'odd']),
    vol.Optional('x'): vol.Coerce(float),
    vol.Optional('h'): _positive,
    vol.Optional('levels'): vol.All(int, vol.Range(min=1)),
    vol.Optional('count'): vol.All(int, vol.Range(min=1)),
    vol.Optional('seed'): int,
    vol.Optional('orders'): vol.All([int], vol.Length(min=2, max=2)),
    vol.Optional('support'): vol.All(int, vol.Range(min=0)),
    vol.Optional('slots'): vol.All([vol.All(int, vol.Range(min=1))], vol.Length(min=1)),
    vol.Optional('max_total'): vol.All(int, vol.Range(min=0)),
    vol.Optional('extra_shells'): vol.All(int, vol.Range(min=0)),
}, extra=vol.PREVENT_EXTRA)

SCENARIO_SCHEMA = vol.Schema({
    vol.Optional('name', default='scenario'): str,
    vol.Optional('description'): str,
    vol.Optional('testbed', default=lambda: {'dim': 1, 'rank': 1}): vol.Schema({
        vol.Required('dim'): vol.All(int, vol.In([1], msg="nur dim = 1 (Kreis) wird unterstützt")),
        vol.Optional('rank', default=1): vol.All(int, vol.Range(min=1)),
    }, extra=vol.PREVENT_EXTRA),
    vol.Optional('weights', default=dict): {str: WEIGHT_SCHEMA},
    vol.Optional('operators', default=dict): {str: OPERAND_SCHEMA},
    vol.Optional('families', default=dict): {str: FAMILY_SCHEMA},
    vol.Optional('tasks', default=list): [TASK_SCHEMA],
}, extra=vol.PREVENT_EXTRA)


def _format_path(path: Sequence[Any]) -> str:
    out = ''
    for key in path:
        if isinstance(key, int):
            out += f'[{key}]'
        else:
            out += f'.{key}' if out else str(key)
    return out or '<root>'


# ---------------------------------------------------------------------------
# Szenario-Typen
# ---------------------------------------------------------------------------

Argument = Union[str, Tuple[str, ...]]


@dataclass(frozen=True)
class OperandSpec:
    """Benannter Operator: Termliste oder Potenz eines Gewichts (Q^k)."""
    name: str
    symbol: ClassicalSymbol
    weight: Optional[str] = None
    power: Optional[int] = None
    depth: int = DEFAULT_POWER_DEPTH


@dataclass(frozen=True)
class FamilyRef:
    name: str
    base: str
    direction: str
    direction_law: Optional[Tuple[Fraction, ...]]
    t_range: Tuple[Fraction, Fraction]
    spec: FamilySpec = field(compare=False)


@dataclass(frozen=True)
class TaskSpec:
    id: str
    kind: str
    weight: Optional[str] = None
    family: Optional[str] = None
    args: Tuple[Argument, ...] = ()
    options: Dict[str, Any] = field(default_factory=dict)

    def option(self, key: str, default: Any = None) -> Any:
        return self.options.get(key, default)


@dataclass(frozen=True)
class Scenario:
    name: str
    rank: int
    weights: Dict[str, Weight]
    operators: Dict[str, OperandSpec]
    families: Dict[str, FamilyRef]
    tasks: Tuple[TaskSpec, ...]
    description: str = ''

    def weight(self, name: str) -> Weight:
        if name not in self.weights:
            raise ResolutionError(f"Unbekanntes Gewicht: {name}")
        return self.weights[name]

    def operand(self, name: str) -> OperandSpec:
        if name not in self.operators:
            raise ResolutionError(f"Unbekannter Operator: {name}")
        return self.operators[name]

    def family(self, name: str) -> FamilyRef:
        if name not in self.families:
            raise ResolutionError(f"Unbekannte Familie: {name}")
        return self.families[name]

    def argument(self, arg: Argument) -> Union[ClassicalSymbol, Tuple[ClassicalSymbol, ...]]:
        """Symbol eines Arguments; Listen von Namen werden zu formalen Wörtern."""
        if isinstance(arg, str):
            return self.operand(arg).symbol
        return tuple(self.operand(name).symbol for name in arg)

    def letters(self, arg: Argument) -> Tuple[OperandSpec, ...]:
        names = (arg,) if isinstance(arg, str) else arg
        return tuple(self.operand(name) for name in names)


# ---------------------------------------------------------------------------
# Auflösung
# ---------------------------------------------------------------------------

def _poly(entries: Sequence[Any], position: str) -> FourierPoly:
    coeffs: Dict[int, CRational] = {}
    for i, raw in enumerate(entries):
        try:
            freq, re_num, re_den, im_num, im_den = _entry(raw)
        except vol.Invalid as e:
            raise ParseError(e.msg, f"{position}[{i}]")
        value = CRational(Fraction(re_num, re_den), Fraction(im_num, im_den))
        coeffs[freq] = coeffs.get(freq, CRational()) + value
    return FourierPoly(coeffs)


def _block(raw: Sequence[Any], rank: int, position: str):
    if rank == 1:
        return block_of([[_poly(raw, position)]])
    if len(raw) != rank or any(not isinstance(row, list) or len(row) != rank for row in raw):
        raise ParseError(f"Block braucht {rank}x{rank} Einträge", position)
    return block_of([[_poly(cell, f"{position}[{i}][{j}]") for j, cell in enumerate(row)]
                     for i, row in enumerate(raw)])


def parse_symbol(terms: Sequence[Dict[str, Any]], rank: int = 1, position: str = 'symbol') -> ClassicalSymbol:
    """Termliste {degree, plus, minus} -> vollständiges ClassicalSymbol."""
    homs = []
    for i, term in enumerate(terms):
        where = f"{position}[{i}]"
        homs.append(HomTerm(term['degree'],
                            _block(term['plus'], rank, f"{where}.plus"),
                            _block(term['minus'], rank, f"{where}.minus")))
    try:
        return ClassicalSymbol.from_terms(rank, homs)
    except SymbolError as e:
        raise ParseError(e.message, position)


def _weight(name: str, raw: Dict[str, Any], rank: int) -> Weight:
    position = f"weights.{name}"
    try:
        law = None
        if 'eigenvalue_law' in raw:
            law = EigenvalueLaw(tuple(raw['eigenvalue_law']))
        if 'symbol' in raw:
            symbol = parse_symbol(raw['symbol'], rank, f"{position}.symbol")
            order = raw.get('order', law.order if law else None)
            if order is None:
                raise ParseError("Gewicht ohne Eigenwertgesetz braucht 'order'", position)
            return Weight(symbol, order, law)
        if law is None:
            raise ParseError("Gewicht braucht 'eigenvalue_law' oder 'symbol'", position)
        if 'order' in raw and raw['order'] != law.order:
            raise ParseError(f"'order' {raw['order']} passt nicht zum Eigenwertgesetz", position)
        return Weight.from_law(law, rank)
    except SymbolError as e:
        raise ParseError(e.message, position)


def _operand(name: str, raw: Any, rank: int, weights: Dict[str, Weight]) -> OperandSpec:
    position = f"operators.{name}"
    if isinstance(raw, list):
        return OperandSpec(name, parse_symbol(raw, rank, position))
    if 'terms' in raw:
        return OperandSpec(name, parse_symbol(raw['terms'], rank, f"{position}.terms"))
    base = raw['weight_power']
    if base not in weights:
        raise ResolutionError(f"{position}: unbekanntes Gewicht {base}")
    Q = weights[base]
    power, depth = raw['power'], raw['depth']
    try:
        if power == 0:
            symbol = ClassicalSymbol.identity(rank)
        elif power > 0:
            symbol = compose_chain([Q.symbol] * power, power * Q.q - depth)
        else:
            symbol = power_neg(Q, -power, power * Q.q - depth)
    except SymbolError as e:
        raise ParseError(e.message, position)
    return OperandSpec(name, symbol, base, power, depth)


def _family(name: str, raw: Dict[str, Any], weights: Dict[str, Weight],
            operators: Dict[str, OperandSpec]) -> FamilyRef:
    position = f"families.{name}"
    if raw['base'] not in weights:
        raise ResolutionError(f"{position}: unbekanntes Gewicht {raw['base']}")
    if raw['direction'] not in operators:
        raise ResolutionError(f"{position}: unbekannter Operator {raw['direction']}")
    law = tuple(raw['direction_law']) if 'direction_law' in raw else None
    t_range = (raw['t_range'][0], raw['t_range'][1])
    try:
        spec = FamilySpec(weights[raw['base']], operators[raw['direction']].symbol,
                          DirectionLaw(law) if law is not None else None, t_range)
    except (EngineError, SymbolError) as e:
        raise ParseError(e.message, position)
    return FamilyRef(name, raw['base'], raw['direction'], law, t_range, spec)


def _task(index: int, raw: Dict[str, Any], scenario_names: Dict[str, Any]) -> TaskSpec:
    position = f"tasks[{index}]"
    kind = raw['kind']
    low, high = TASK_KINDS[kind]
    args = tuple(a if isinstance(a, str) else tuple(a) for a in raw['args'])
    if len(args) < low or (high is not None and len(args) > high):
        bound = f"{low}" if low == high else f"{low}..{'' if high is None else high}"
        raise ParseError(f"'{kind}' erwartet {bound} Argumente, erhalten {len(args)}", f"{position}.args")
    if kind in EVEN_ARITY and len(args) % 2:
        raise ParseError(f"'{kind}' braucht eine gerade Anzahl Argumente", f"{position}.args")
    for arg in args:
        for name in ((arg,) if isinstance(arg, str) else arg):
            if name not in scenario_names['operators']:
                raise ResolutionError(f"{position}: unbekannter Operator {name}")
    weight = raw.get('weight')
    family = raw.get('family')
    if kind in NEEDS_WEIGHT and weight is None:
        raise ParseError(f"'{kind}' braucht ein Gewicht", f"{position}.weight")
    if kind in NEEDS_FAMILY and family is None:
        raise ParseError(f"'{kind}' braucht eine Familie", f"{position}.family")
    if weight is not None and weight not in scenario_names['weights']:
        raise ResolutionError(f"{position}: unbekanntes Gewicht {weight}")
    if family is not None and family not in scenario_names['families']:
        raise ResolutionError(f"{position}: unbekannte Familie {family}")
    options = {k: v for k, v in raw.items() if k not in ('id', 'kind', 'weight', 'family', 'args')}
    return TaskSpec(raw.get('id', f"task-{index}"), kind, weight, family, args, options)


def parse_dict(data: Any) -> Scenario:
    """Validiere ein bereits geladenes JSON-Dokument und löse alle Namen auf."""
    try:
        doc = SCENARIO_SCHEMA(data)
    except vol.MultipleInvalid as e:
        first = e.errors[0]
        raise ParseError(first.msg, _format_path(first.path))
    rank = doc['testbed']['rank']
    weights = {name: _weight(name, raw, rank) for name, raw in doc['weights'].items()}
    operators = {name: _operand(name, raw, rank, weights) for name, raw in doc['operators'].items()}
    families = {name: _family(name, raw, weights, operators) for name, raw in doc['families'].items()}
    names = {'weights': weights, 'operators': operators, 'families': families}
    tasks = tuple(_task(i, raw, names) for i, raw in enumerate(doc['tasks']))
    ids = [t.id for t in tasks]
    if len(set(ids)) != len(ids):
        duplicate = next(i for i in ids if ids.count(i) > 1)
        raise ParseError(f"Aufgaben-ID doppelt vergeben: {duplicate}", 'tasks')
    logging.debug(f"Szenario {doc['name']}: {len(weights)} Gewichte, {len(operators)} Operatoren, "
                  f"{len(tasks)} Aufgaben")
    return Scenario(doc['name'], rank, weights, operators, families, tasks, doc.get('description', ''))


def parse_text(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"Zeile {e.lineno}, Spalte {e.colno}")
    return parse_dict(data)


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ParseError(f"Datei nicht lesbar: {e}", str(path))
    scenario = parse_text(text)
    logging.info(f"Szenario geladen: {path.name} ({len(scenario.tasks)} Aufgaben)")
    return scenario


# ---------------------------------------------------------------------------
# Serialisierung
# ---------------------------------------------------------------------------

def _poly_entries(poly: FourierPoly) -> List[List[int]]:
    return [[freq, c.re.numerator, c.re.denominator, c.im.numerator, c.im.denominator]
            for freq, c in poly.items()]


def _block_entries(block, rank: int) -> list:
    if rank == 1:
        return _poly_entries(block[0][0])
    return [[_poly_entries(cell) for cell in row] for row in block]


def serialize_symbol(symbol: ClassicalSymbol) -> List[Dict[str, Any]]:
    if not symbol.is_complete():
        raise ParseError(f"Nur vollständige Symbole sind serialisierbar ({symbol})")
    return [{'degree': t.degree,
             'plus': _block_entries(t.plus, symbol.rank),
             'minus': _block_entries(t.minus, symbol.rank)} for t in symbol.terms]


def serialize(scenario: Scenario) -> Dict[str, Any]:
    """Inverse von parse_dict: parse_dict(serialize(s)) == s."""
    weights = {}
    for name, Q in scenario.weights.items():
        if Q.spectral_model is not None:
            weights[name] = {'eigenvalue_law': [str(c) for c in Q.spectral_model.coeffs]}
        else:
            weights[name] = {'symbol': serialize_symbol(Q.symbol), 'order': Q.order}
    operators = {}
    for name, op in scenario.operators.items():
        if op.weight is not None:
            operators[name] = {'weight_power': op.weight, 'power': op.power, 'depth': op.depth}
        else:
            operators[name] = serialize_symbol(op.symbol)
    families = {}
    for name, fam in scenario.families.items():
        entry = {'base': fam.base, 'direction': fam.direction, 't_range': [str(v) for v in fam.t_range]}
        if fam.direction_law is not None:
            entry['direction_law'] = [str(c) for c in fam.direction_law]
        families[name] = entry
    tasks = []
    for task in scenario.tasks:
        entry = {'id': task.id, 'kind': task.kind,
                 'args': [a if isinstance(a, str) else list(a) for a in task.args]}
        if task.weight is not None:
            entry['weight'] = task.weight
        if task.family is not None:
            entry['family'] = task.family
        entry.update(task.options)
        tasks.append(entry)
    data = {
        'name': scenario.name,
        'testbed': {'dim': 1, 'rank': scenario.rank},
        'weights': weights,
        'operators': operators,
        'families': families,
        'tasks': tasks,
    }
    if scenario.description:
        data['description'] = scenario.description
    return data
