"""
Report Writer für residue-lab
Baut den Bericht eines Szenario-Laufs und schreibt ihn als JSON und CSV.
"""

import csv
import json
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from exact_algebra import CRational

REPORT_VERSION = "1.0.0"

CSV_FIELDS = ['id', 'kind', 'args', 'weight', 'family', 'convention', 'success', 'passed',
              'value_re', 'value_im', 'exact_part', 'err', 'deviation', 'tolerance',
              'value_exact', 'value_paper', 'error', 'elapsed_s']

# Felder, die zwischen zwei Läufen abweichen dürfen
TIMING_FIELDS = ('elapsed_s', 'started_at', 'finished_at', 'threads')


def to_jsonable(value: Any) -> Any:
    """Komplexe Zahlen als [re, im], exakte Werte als 'p/q'-Strings."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, (CRational, Fraction)):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [to_jsonable(value.real), to_jsonable(value.imag)]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, 'to_json'):
        return to_jsonable(value.to_json())
    return str(value)


def summarize(records: List[Dict[str, Any]]) -> Dict[str, int]:
    errors = sum(1 for r in records if not r.get('success', False))
    passed = sum(1 for r in records if r.get('passed') is True)
    failed = sum(1 for r in records if r.get('success', False) and r.get('passed') is False)
    unchecked = sum(1 for r in records if r.get('success', False) and r.get('passed') is None)
    return {
        'total': len(records),
        'passed': passed,
        'failed': failed,
        'errors': errors,
        'unchecked': unchecked,
    }


def failure_count(report: Dict[str, Any]) -> int:
    summary = report['summary']
    return summary['failed'] + summary['errors']


def build_report(scenario_name: str, records: List[Dict[str, Any]], settings: Dict[str, Any],
                 timing: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    report = {
        'scenario': scenario_name,
        'version': REPORT_VERSION,
        'settings': to_jsonable(settings),
        'tasks': records,
        'summary': summarize(records),
    }
    if timing:
        report['timing'] = to_jsonable(timing)
    return report


def strip_timing(data: Any) -> Any:
    """Bericht ohne Zeitfelder, für Determinismus-Vergleiche."""
    if isinstance(data, dict):
        return {k: strip_timing(v) for k, v in data.items() if k not in TIMING_FIELDS and k != 'timing'}
    if isinstance(data, list):
        return [strip_timing(v) for v in data]
    return data


def write_json(report: Dict[str, Any], path: Union[str, Path]) -> bool:
    try:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', encoding='utf-8') as f:
            json.dump(report, f, indent=2, sort_keys=False)
        logging.info(f"JSON-Bericht gespeichert: {path}")
        return True
    except OSError as e:
        logging.error(f"Fehler beim Speichern des JSON-Berichts: {e}")
        return False


def _csv_row(record: Dict[str, Any]) -> Dict[str, Any]:
    value = record.get('value')
    re, im = ('', '')
    if isinstance(value, list) and len(value) == 2:
        re, im = value
    elif value is not None:
        re = value
    details = record.get('details') or {}
    return {
        'id': record.get('id'),
        'kind': record.get('kind'),
        'args': json.dumps(record.get('args', [])),
        'weight': record.get('weight') or '',
        'family': record.get('family') or '',
        'convention': record.get('convention') or '',
        'success': record.get('success'),
        'passed': '' if record.get('passed') is None else record.get('passed'),
        'value_re': re,
        'value_im': im,
        'exact_part': record.get('exact_part') or '',
        'err': record.get('err', ''),
        'deviation': '' if record.get('deviation') is None else record.get('deviation'),
        'tolerance': '' if record.get('tolerance') is None else record.get('tolerance'),
        'value_exact': details.get('value_exact', ''),
        'value_paper': details.get('value_paper', ''),
        'error': record.get('error', ''),
        'elapsed_s': record.get('elapsed_s', ''),
    }


def write_csv(report: Dict[str, Any], path: Union[str, Path]) -> bool:
    """Eine Zeile pro Aufgabe; Termtabellen und Detailzeilen bleiben im JSON."""
    try:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', encoding='utf-8', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=CSV_FIELDS, extrasaction='ignore', lineterminator='\n')
            writer.writeheader()
            for record in report['tasks']:
                writer.writerow(_csv_row(record))
        logging.info(f"CSV-Bericht gespeichert: {path}")
        return True
    except OSError as e:
        logging.error(f"Fehler beim Speichern des CSV-Berichts: {e}")
        return False
