import csv
import json
from fractions import Fraction

import numpy as np

import report_writer
from exact_algebra import CRational


def _records():
    return [
        {"id": "a", "kind": "residue", "args": ["absD"], "success": True, "passed": True,
         "value": "2", "exact_part": "2", "err": 0.0, "deviation": 0.0, "tolerance": 0.0,
         "details": {}, "elapsed_s": 0.01},
        {"id": "b", "kind": "weighted_trace", "args": ["I"], "success": True, "passed": False,
         "value": [0.5, -0.25], "err": 1e-12, "deviation": 0.1, "tolerance": 1e-9,
         "details": {"value_exact": "1/2", "value_paper": "1"}, "elapsed_s": 0.02},
        {"id": "c", "kind": "jlo", "args": ["I"], "success": False, "passed": False,
         "error": "RadiusTooSmall: r", "elapsed_s": 0.0},
        {"id": "d", "kind": "heat_trace", "args": ["I"], "success": True, "passed": None,
         "value": [0.6, 0.0], "elapsed_s": 0.0},
    ]


def test_to_jsonable():
    assert report_writer.to_jsonable(1.5 - 2j) == [1.5, -2.0]
    assert report_writer.to_jsonable(CRational(Fraction(1, 3), Fraction(-1))) == "1/3-1i"
    assert report_writer.to_jsonable(Fraction(-7, 6)) == "-7/6"
    assert report_writer.to_jsonable(float("nan")) == "nan"
    assert report_writer.to_jsonable(np.int64(3)) == 3
    assert report_writer.to_jsonable({"x": (np.float64(0.5), None)}) == {"x": [0.5, None]}


def test_summary_counts():
    summary = report_writer.summarize(_records())
    assert summary == {"total": 4, "passed": 1, "failed": 1, "errors": 1, "unchecked": 1}
    report = report_writer.build_report("unit", _records(), {"threads": 1}, {"elapsed_s": 0.1})
    assert report_writer.failure_count(report) == 2
    assert report["timing"] == {"elapsed_s": 0.1}


def test_strip_timing_removes_volatile_fields():
    report = report_writer.build_report("unit", _records(), {"threads": 4}, {"elapsed_s": 0.1})
    stripped = report_writer.strip_timing(report)
    assert "timing" not in stripped
    assert "threads" not in stripped["settings"]
    assert all("elapsed_s" not in r for r in stripped["tasks"])


def test_write_json(tmp_path):
    report = report_writer.build_report("unit", _records(), {})
    path = tmp_path / "out" / "report.json"
    assert report_writer.write_json(report, path)
    assert json.loads(path.read_text(encoding="utf-8"))["summary"]["total"] == 4


def test_write_csv(tmp_path):
    report = report_writer.build_report("unit", _records(), {})
    path = tmp_path / "report.csv"
    assert report_writer.write_csv(report, path)
    with path.open(encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == report_writer.CSV_FIELDS
    assert [r["id"] for r in rows] == ["a", "b", "c", "d"]
    assert rows[1]["value_re"] == "0.5" and rows[1]["value_im"] == "-0.25"
    assert rows[1]["value_paper"] == "1"
    assert rows[2]["error"].startswith("RadiusTooSmall")
    assert rows[3]["passed"] == ""


def test_write_failure_is_reported(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert not report_writer.write_json({"tasks": []}, blocker / "report.json")
