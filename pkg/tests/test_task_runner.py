import copy
import math
from fractions import Fraction

import pytest

from exact_algebra import CRational
from scenario_parser import parse_dict
from task_runner import DEFAULT_TOLERANCES, TaskRunner, _parse_expected


def _runner(doc, *tasks, **settings):
    doc = copy.deepcopy(doc)
    doc["tasks"] = [dict(task, id=task.get("id", f"t{i}")) for i, task in enumerate(tasks)]
    return TaskRunner(parse_dict(doc), settings)


def _single(doc, **task):
    return _runner(doc, task).run(threads=1)[0]


def test_residue_of_composed_word(scenario_doc):
    record = _single(scenario_doc, kind="residue", args=[["absD", "Qinv"]], expected="2")
    assert record["success"]
    assert record["passed"] is True
    assert record["exact_part"] == "2"
    assert record["deviation"] == 0.0


def test_residue_of_differential_operator_is_zero(scenario_doc):
    record = _single(scenario_doc, kind="residue", args=["absD"], expected=0)
    assert record["passed"] is True
    assert record["value"] == "0"


def test_commutator_residue_vanishes(scenario_doc):
    record = _single(scenario_doc, kind="commutator_residue", args=["U", "Vabs"])
    assert record["passed"] is True
    assert record["tolerance"] == 0.0


def test_weighted_trace_against_zeta_value(scenario_doc):
    record = _single(scenario_doc, kind="weighted_trace", weight="Q", args=["absD"],
                     expected="-7/6", tolerance=1e-7)
    assert record["passed"] is True
    assert record["value"][0] == pytest.approx(-7 / 6, abs=1e-9)


def test_trace_class_rejects_high_order(scenario_doc):
    record = _single(scenario_doc, kind="trace_class", weight="Q", args=["absD"])
    assert record["success"] is False
    assert record["passed"] is False
    assert record["error"].startswith("EngineError")
    assert "elapsed_s" in record


def test_trace_class_word_matches_direct_sum(scenario_doc):
    record = _single(scenario_doc, kind="trace_class", weight="Q", args=[["I", "Qinv"]], tolerance=1e-7)
    assert record["passed"] is True
    assert record["details"]["direct_sum"][0] == pytest.approx(math.pi / math.tanh(math.pi), abs=1e-7)
    assert record["value"][0] == pytest.approx(math.pi / math.tanh(math.pi), abs=1e-9)


def test_simplex_kernel_needs_nodes(scenario_doc):
    record = _single(scenario_doc, kind="simplex_kernel")
    assert record["success"] is False
    assert record["error"].startswith("EngineError")


def test_simplex_kernel_value(scenario_doc):
    record = _single(scenario_doc, kind="simplex_kernel", nodes=[1, 2], t="1",
                     expected=0.23254415793482963)
    assert record["passed"] is True


def test_simplex_constants_and_nilpotency(scenario_doc):
    runner = _runner(scenario_doc,
                     {"kind": "simplex_constants", "slots": [3], "max_total": 3},
                     {"kind": "hochschild_nilpotency", "count": 6})
    constants, nilpotency = runner.run(threads=1)
    assert constants["passed"] is True
    assert constants["details"]["mismatches"] == 0
    assert constants["details"]["disagreements"] > 0
    assert nilpotency["passed"] is True
    assert nilpotency["details"]["nonzero"] == 0


def test_tolerance_scale(scenario_doc):
    runner = _runner(scenario_doc, {"kind": "weighted_trace", "weight": "Q", "args": ["I"]}, tol_scale=2.0)
    task = runner.scenario.tasks[0]
    assert runner.tolerance(task) == pytest.approx(2 * DEFAULT_TOLERANCES["weighted_trace"])


def test_coboundary_anomaly_with_term_table(scenario_doc):
    record = _single(scenario_doc, kind="coboundary_anomaly", weight="Q", args=["U", "Vabs"],
                     convention="both", terms=True, expected="-1")
    assert record["passed"] is True
    assert record["value"] == "-1"
    assert record["details"]["value_exact"] == record["details"]["value_paper"] == "-1"
    assert record["details"]["conventions_agree"] is True
    assert [t["contribution"] for t in record["terms"] if t["contribution"] != "0"] == ["1", "-2"]


def test_terms_are_omitted_unless_requested(scenario_doc):
    record = _single(scenario_doc, kind="coboundary_anomaly", weight="Q", args=["U", "Vabs"])
    assert "terms" not in record


def test_family_derivative(scenario_doc):
    record = _single(scenario_doc, kind="family_derivative", family="F", args=["I"], t="1/3", expected=-1)
    assert record["passed"] is True


def test_mellin_residue(scenario_doc):
    record = _single(scenario_doc, kind="mellin_residue", weight="Q", args=[["absD", "Qinv"]], expected=1)
    assert record["passed"] is True


@pytest.mark.parametrize("raw, expected", [
    ("3/4", CRational.of(Fraction(3, 4))),
    (2, CRational.of(2)),
    (0.5, 0.5 + 0j),
    ([1, "1/2"], CRational(Fraction(1), Fraction(1, 2))),
    ([0.25, -1], 0.25 - 1j),
])
def test_parse_expected(raw, expected):
    assert _parse_expected(raw) == expected


def test_results_follow_scenario_order(scenario_doc):
    tasks = [{"id": f"r{i}", "kind": "residue", "args": ["absD"]} for i in range(6)]
    records = _runner(scenario_doc, *tasks).run(threads=3)
    assert [r["id"] for r in records] == [f"r{i}" for i in range(6)]


def test_random_fixture_tasks(scenario_doc):
    runner = _runner(scenario_doc,
                     {"kind": "random_commutator_residue", "count": 20, "seed": 5},
                     {"kind": "cutoff_check", "weight": "Q", "args": ["U", "Vabs"], "extra_shells": 2})
    commutators, cutoff = runner.run(threads=2)
    assert commutators["passed"] is True
    assert commutators["details"]["pairs"] == 20
    assert cutoff["passed"] is True
    assert cutoff["value"] > 0
