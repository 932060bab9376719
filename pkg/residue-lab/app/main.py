#!/usr/bin/env python3
"""
residue-lab
Hauptanwendung: Szenarien auswerten, Prüf-Suiten verifizieren, Suiten auflisten
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

import report_writer
from scenario_parser import ParseError, ResolutionError, load_scenario
from settings_manager import SettingsManager
from suite_manager import EXIT_FAILURES, EXIT_OK, EXIT_USAGE, SuiteManager


class ResidueLabApp:
    """Hauptklasse für residue-lab."""

    def __init__(self, settings_path: Optional[str] = None):
        """Initialisiere die Anwendung."""
        self.setup_logging()
        self.settings_manager = SettingsManager(settings_path)
        self.config = self.load_config()
        self.suite_manager = SuiteManager(self.config)
        logging.debug("residue-lab initialisiert")

    def setup_logging(self):
        """Konfiguriere Logging."""
        log_level = os.getenv('LOG_LEVEL', 'info').upper()

        logging.basicConfig(
            level=getattr(logging, log_level, logging.INFO),
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            handlers=[logging.StreamHandler(sys.stdout)]
        )

    def load_config(self) -> Dict[str, Any]:
        """Gespeicherte Einstellungen, überlagert von Environment Variables."""
        config = self.settings_manager.get_all_settings()
        logging.getLogger().setLevel(config['log_level'].upper())
        logging.debug(f"Einstellungen: {config}")
        return config

    def evaluate(self, path: str, report: Optional[str] = None, csv_path: Optional[str] = None,
                 terms: bool = False, threads: Optional[int] = None, tol_scale: Optional[float] = None) -> int:
        """Ein Szenario auswerten; Exit-Code wie bei verify."""
        try:
            scenario = load_scenario(path)
        except (ParseError, ResolutionError) as e:
            logging.error(f"Szenario {path} ungültig: {e}")
            return EXIT_USAGE
        result = self.suite_manager.run_scenario(scenario, threads, tol_scale, terms)
        if report and not report_writer.write_json(result, report):
            return EXIT_USAGE
        if csv_path and not report_writer.write_csv(result, csv_path):
            return EXIT_USAGE
        if not report:
            self.print_summary(result)
        return EXIT_FAILURES if report_writer.failure_count(result) else EXIT_OK

    def print_summary(self, result: Dict[str, Any]):
        for record in result['tasks']:
            status = {True: 'OK', False: 'FAIL', None: '--'}[record.get('passed')]
            if not record.get('success'):
                status = 'ERROR'
            value = record.get('exact_part') or record.get('value') or record.get('error')
            print(f"{status:5} {record['id']:40} {value}")
        summary = result['summary']
        print(f"{summary['passed']}/{summary['total']} bestanden, {summary['failed']} fehlgeschlagen, "
              f"{summary['errors']} Fehler")

    def list_suites(self) -> int:
        suites = self.suite_manager.list_suites()
        if not suites:
            logging.error("Keine Suiten gefunden")
            return EXIT_USAGE
        for suite in suites:
            note = f" [{suite['error']}]" if suite.get('error') else ''
            print(f"{suite['name']:16} {suite['tasks']:3} Aufgaben  {suite['description']}{note}")
        return EXIT_OK

    def verify(self, suite: str, tol_scale: Optional[float] = None, threads: Optional[int] = None,
               report: Optional[str] = None) -> int:
        logging.info(f"Verifiziere Suite {suite}...")
        return self.suite_manager.verify(suite, tol_scale, threads, report)


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"muss >= 1 sein: {value}")
    return number


def _positive_float(value: str) -> float:
    number = float(value)
    if not number > 0:
        raise argparse.ArgumentTypeError(f"muss positiv sein: {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='residue-lab',
                                     description='Residuen, gewichtete Spuren und ihre Anomalien auf dem Kreis')
    parser.add_argument('--settings', help='Pfad zur Einstellungsdatei (sonst RES_LAB_SETTINGS)')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('eval', help='Szenario auswerten')
    run.add_argument('scenario')
    run.add_argument('--report', help='JSON-Bericht schreiben')
    run.add_argument('--csv', help='CSV-Bericht schreiben')
    run.add_argument('--terms', action='store_true', help='Termtabellen der Anomalieformeln ausgeben')
    run.add_argument('--threads', type=_positive_int)
    run.add_argument('--tol-scale', type=_positive_float)

    verify = commands.add_parser('verify', help='Mitgelieferte Suite prüfen')
    verify.add_argument('suite')
    verify.add_argument('--tol-scale', type=_positive_float)
    verify.add_argument('--threads', type=_positive_int)
    verify.add_argument('--report', help='JSON-Bericht schreiben')

    commands.add_parser('list-suites', help='Mitgelieferte Suiten auflisten')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse beendet mit 2 bei Bedienfehlern, mit 0 bei --help
        return int(e.code or 0)
    app = ResidueLabApp(args.settings)
    if args.command == 'eval':
        return app.evaluate(args.scenario, args.report, args.csv, args.terms, args.threads, args.tol_scale)
    if args.command == 'verify':
        return app.verify(args.suite, args.tol_scale, args.threads, args.report)
    return app.list_suites()


if __name__ == "__main__":
    sys.exit(main())
