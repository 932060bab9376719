import copy
import json

import pytest

from report_writer import strip_timing
from scenario_parser import parse_dict
from suite_manager import (ALL_SUITES, BUILTIN_DIR, EXIT_FAILURES, EXIT_OK, EXIT_USAGE, SuiteManager)


@pytest.fixture
def suite_dir(tmp_path, scenario_doc):
    good = copy.deepcopy(scenario_doc)
    good["name"] = "good"
    good["tasks"] = [
        {"id": "res", "kind": "residue", "args": [["absD", "Qinv"]], "expected": "2"},
        {"id": "cob", "kind": "coboundary_anomaly", "weight": "Q", "args": ["U", "Vabs"], "expected": -1},
        {"id": "fam", "kind": "family_derivative", "family": "F", "args": ["I"], "expected": -1},
    ]
    bad = copy.deepcopy(good)
    bad["name"] = "bad"
    bad["tasks"] = [{"id": "res", "kind": "residue", "args": [["absD", "Qinv"]], "expected": "3"}]
    (tmp_path / "good.json").write_text(json.dumps(good))
    (tmp_path / "bad.json").write_text(json.dumps(bad))
    return tmp_path


def test_list_suites(suite_dir):
    suites = {s["name"]: s for s in SuiteManager(scenario_dir=suite_dir).list_suites()}
    assert set(suites) == {"good", "bad", ALL_SUITES}
    assert suites["good"]["tasks"] == 3
    assert suites[ALL_SUITES]["tasks"] == 4


def test_unparsable_suite_is_listed_and_rejected(suite_dir):
    (suite_dir / "broken.json").write_text('{"tasks": [{"kind": "nope"}]}')
    manager = SuiteManager(scenario_dir=suite_dir)
    broken = next(s for s in manager.list_suites() if s["name"] == "broken")
    assert broken["error"]
    assert manager.verify("broken") == EXIT_USAGE


def test_verify_exit_codes(suite_dir, tmp_path):
    manager = SuiteManager(scenario_dir=suite_dir)
    assert manager.verify("missing") == EXIT_USAGE
    assert manager.verify("good") == EXIT_OK
    report_path = tmp_path / "bad-report.json"
    assert manager.verify("bad", report_path=str(report_path)) == EXIT_FAILURES
    assert json.loads(report_path.read_text())["summary"]["failed"] == 1
    assert manager.verify(ALL_SUITES) == EXIT_FAILURES


def test_tol_scale_and_threads_reach_the_report(suite_dir):
    report = SuiteManager(scenario_dir=suite_dir).run_suite("good", threads=2, tol_scale=4.0)
    assert report["settings"]["tol_scale"] == 4.0
    assert report["timing"]["threads"] == 2


def test_combined_suite_tags_records(suite_dir):
    report = SuiteManager(scenario_dir=suite_dir).run_suite(ALL_SUITES)
    assert {r["scenario"] for r in report["tasks"]} == {"good", "bad"}
    assert report["summary"]["total"] == 4


def test_reports_do_not_depend_on_thread_count(scenario_doc):
    doc = copy.deepcopy(scenario_doc)
    doc["tasks"] = [
        {"id": "res", "kind": "residue", "args": [["absD", "Qinv"]]},
        {"id": "cob", "kind": "coboundary_anomaly", "weight": "Q", "args": ["U", "Vabs"], "terms": True},
        {"id": "rnd", "kind": "random_commutator_residue", "count": 10},
        {"id": "nil", "kind": "hochschild_nilpotency", "count": 4},
    ]
    scenario = parse_dict(doc)
    manager = SuiteManager()
    serial = strip_timing(manager.run_scenario(scenario, threads=1))
    parallel = strip_timing(manager.run_scenario(scenario, threads=3))
    assert serial == parallel


def test_terms_flag_adds_term_tables(scenario_doc):
    doc = copy.deepcopy(scenario_doc)
    doc["tasks"] = [{"id": "cob", "kind": "coboundary_anomaly", "weight": "Q", "args": ["U", "Vabs"]}]
    report = SuiteManager().run_scenario(parse_dict(doc), terms=True)
    assert report["tasks"][0]["terms"]


def test_builtin_suites_are_listed():
    names = {s["name"] for s in SuiteManager().list_suites()}
    assert names == {"anomaly", "constants", "exact-residue", "family", "jlo", "weighted-trace", ALL_SUITES}
    assert BUILTIN_DIR.is_dir()


@pytest.mark.slow
def test_builtin_exact_residue_suite_passes():
    assert SuiteManager().verify("exact-residue") == EXIT_OK
