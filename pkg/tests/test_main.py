import copy
import csv
import json

import pytest

import main


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for env in ("RES_LAB_THREADS", "RES_LAB_PRECISION_BITS", "LOG_LEVEL", "RES_LAB_SETTINGS"):
        monkeypatch.delenv(env, raising=False)


@pytest.fixture
def settings_args(tmp_path):
    return ["--settings", str(tmp_path / "settings.json")]


@pytest.fixture
def scenario_file(tmp_path, scenario_doc):
    doc = copy.deepcopy(scenario_doc)
    doc["tasks"] = [
        {"id": "res", "kind": "residue", "args": [["absD", "Qinv"]], "expected": "2"},
        {"id": "cob", "kind": "coboundary_anomaly", "weight": "Q", "args": ["U", "Vabs"],
         "convention": "both", "expected": -1},
    ]
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc))
    return path


def test_list_suites(settings_args, capsys):
    assert main.main(settings_args + ["list-suites"]) == 0
    assert "exact-residue" in capsys.readouterr().out


def test_eval_prints_summary(settings_args, scenario_file, capsys):
    assert main.main(settings_args + ["eval", str(scenario_file)]) == 0
    out = capsys.readouterr().out
    assert "2/2 bestanden" in out


def test_eval_writes_reports(settings_args, scenario_file, tmp_path):
    report, table = tmp_path / "r.json", tmp_path / "r.csv"
    code = main.main(settings_args + ["eval", str(scenario_file), "--report", str(report),
                                      "--csv", str(table), "--terms", "--threads", "2"])
    assert code == 0
    data = json.loads(report.read_text())
    assert data["summary"]["passed"] == 2
    assert data["tasks"][1]["terms"]
    with table.open() as f:
        rows = list(csv.DictReader(f))
    assert rows[1]["value_exact"] == rows[1]["value_paper"] == "-1"


def test_eval_reports_failures(settings_args, scenario_file):
    doc = json.loads(scenario_file.read_text())
    doc["tasks"][0]["expected"] = "5"
    scenario_file.write_text(json.dumps(doc))
    assert main.main(settings_args + ["eval", str(scenario_file)]) == 1


def test_eval_of_empty_scenario(settings_args, tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("{}")
    assert main.main(settings_args + ["eval", str(path)]) == 0


@pytest.mark.parametrize("argv", [
    ["verify", "nope"],
    ["eval", "does-not-exist.json"],
    ["frobnicate"],
    ["eval", "x.json", "--threads", "0"],
])
def test_usage_errors(settings_args, argv):
    assert main.main(settings_args + argv) == 2


def test_help(capsys):
    assert main.main(["--help"]) == 0
    assert "residue-lab" in capsys.readouterr().out
