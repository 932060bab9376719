"""
Suite Manager für residue-lab
Verwaltet die mitgelieferten Prüf-Suiten (builtin_scenarios) und führt
Szenarien mit Bericht aus.
"""

import logging
import time
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import report_writer
from scenario_parser import ParseError, ResolutionError, Scenario, load_scenario
from task_runner import TaskRunner

BUILTIN_DIR = Path(__file__).parent / "builtin_scenarios"

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_USAGE = 2

# Sammel-Suite über alle Einzel-Suiten
ALL_SUITES = 'paper-core'


class SuiteManager:
    """Manager für Prüf-Suiten und Szenario-Läufe."""

    def __init__(self, settings: Optional[Dict[str, Any]] = None, scenario_dir: Optional[Path] = None):
        self.settings = dict(settings or {})
        self.scenario_dir = Path(scenario_dir) if scenario_dir else BUILTIN_DIR
        self._suites: Dict[str, Path] = {}
        self.load_suites()

    def load_suites(self):
        """Suite-Name ist der Dateiname ohne .json."""
        self._suites = {}
        if not self.scenario_dir.exists():
            logging.warning(f"Suite-Verzeichnis fehlt: {self.scenario_dir}")
            return
        for path in sorted(self.scenario_dir.glob("*.json")):
            self._suites[path.stem] = path
        logging.debug(f"{len(self._suites)} Suiten gefunden in {self.scenario_dir}")

    def has_suite(self, name: str) -> bool:
        return name in self._suites or (name == ALL_SUITES and bool(self._suites))

    def suite_paths(self, name: str) -> List[Path]:
        if name == ALL_SUITES:
            return [path for suite, path in self._suites.items() if suite != ALL_SUITES]
        if name not in self._suites:
            raise KeyError(name)
        return [self._suites[name]]

    def list_suites(self) -> List[Dict[str, Any]]:
        """Name, Beschreibung und Aufgabenzahl jeder Suite."""
        suites = []
        for name, path in self._suites.items():
            try:
                scenario = load_scenario(path)
                suites.append({'name': name, 'description': scenario.description,
                               'tasks': len(scenario.tasks), 'file': str(path)})
            except (ParseError, ResolutionError) as e:
                suites.append({'name': name, 'description': '', 'tasks': 0, 'file': str(path),
                               'error': e.message})
        if self._suites:
            total = sum(s['tasks'] for s in suites)
            suites.append({'name': ALL_SUITES, 'description': 'Alle Suiten zusammen',
                           'tasks': total, 'file': None})
        return suites

    def _run_settings(self, threads: Optional[int], tol_scale: Optional[float]) -> Dict[str, Any]:
        settings = dict(self.settings)
        if threads is not None:
            settings['threads'] = threads
        if tol_scale is not None:
            settings['tol_scale'] = tol_scale
        return settings

    def run_scenario(self, scenario: Scenario, threads: Optional[int] = None,
                     tol_scale: Optional[float] = None, terms: bool = False) -> Dict[str, Any]:
        """Alle Aufgaben ausführen und den Bericht zusammensetzen."""
        settings = self._run_settings(threads, tol_scale)
        if terms:
            scenario = _with_terms(scenario)
        runner = TaskRunner(scenario, settings)
        started_at = datetime.now(timezone.utc).isoformat()
        started = time.perf_counter()
        records = runner.run()
        timing = {
            'started_at': started_at,
            'finished_at': datetime.now(timezone.utc).isoformat(),
            'elapsed_s': round(time.perf_counter() - started, 3),
            'threads': runner.settings['threads'],
        }
        report = report_writer.build_report(scenario.name, records, runner.settings, timing)
        summary = report['summary']
        logging.info(f"Szenario {scenario.name}: {summary['passed']}/{summary['total']} bestanden, "
                     f"{summary['failed']} fehlgeschlagen, {summary['errors']} Fehler")
        return report

    def run_suite(self, name: str, threads: Optional[int] = None,
                  tol_scale: Optional[float] = None) -> Dict[str, Any]:
        """Suite ausführen; bei mehreren Dateien werden die Berichte aneinandergehängt."""
        reports = [self.run_scenario(load_scenario(path), threads, tol_scale) for path in self.suite_paths(name)]
        if len(reports) == 1:
            return reports[0]
        records = [dict(record, scenario=report['scenario']) for report in reports for record in report['tasks']]
        timing = {'elapsed_s': round(sum(r.get('timing', {}).get('elapsed_s', 0.0) for r in reports), 3)}
        settings = reports[0]['settings'] if reports else self._run_settings(threads, tol_scale)
        return report_writer.build_report(name, records, settings, timing)

    def verify(self, name: str, tol_scale: Optional[float] = None, threads: Optional[int] = None,
               report_path: Optional[str] = None) -> int:
        """Exit-Code: 0 alles bestanden, 1 bei Fehlschlägen, 2 bei unbekannter Suite oder Parse-Fehler."""
        if not self.has_suite(name):
            known = ', '.join(sorted(self._suites) + [ALL_SUITES])
            logging.error(f"Unbekannte Suite: {name} (verfügbar: {known})")
            return EXIT_USAGE
        try:
            report = self.run_suite(name, threads, tol_scale)
        except (ParseError, ResolutionError) as e:
            logging.error(f"Suite {name} nicht lesbar: {e}")
            return EXIT_USAGE
        if report_path:
            report_writer.write_json(report, report_path)
        failures = report_writer.failure_count(report)
        for record in report['tasks']:
            if record.get('passed') is False:
                logging.warning(f"  {record['id']}: {record.get('error') or 'Toleranz überschritten'}")
        if failures:
            logging.error(f"Suite {name}: {failures} Aufgaben nicht bestanden")
            return EXIT_FAILURES
        logging.info(f"Suite {name}: alle {report['summary']['total']} Aufgaben bestanden")
        return EXIT_OK


def _with_terms(scenario: Scenario) -> Scenario:
    """Kopie des Szenarios, in der jede Aufgabe ihre Termtabelle ausgibt."""
    tasks = tuple(replace(task, options=dict(task.options, terms=True)) for task in scenario.tasks)
    return replace(scenario, tasks=tasks)
