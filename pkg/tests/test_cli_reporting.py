import csv
import json

import numpy as np
import pytest

from dampwave.cli import main
from dampwave.reporting import write_csv, write_summary
from dampwave.scenarios import Check


def test_list_plain_and_json(capsys):
    assert main(["list"]) == 0
    assert "identities" in capsys.readouterr().out
    assert main(["list", "--json"]) == 0
    entries = json.loads(capsys.readouterr().out)
    assert {"name", "anchor", "modules"} <= set(entries[0])


def _cfg(tmp_path, text):
    p = tmp_path / "c.yaml"
    p.write_text(text)
    return str(p)


def test_unknown_scenario_exit_code(tmp_path, capsys):
    assert main(["run", _cfg(tmp_path, "scenario: nope\n")]) == 2
    assert "known scenarios" in capsys.readouterr().err


@pytest.mark.parametrize(
    "text",
    ["scenario: identities\nbogus: 1\n", "scenario: identities\nparams:\n  nope: 1\n", "params: {}\n", "scenario: [\n"],
)
def test_bad_config_exit_code(tmp_path, text):
    assert main(["run", _cfg(tmp_path, text)]) == 2


def test_missing_config(tmp_path):
    assert main(["run", str(tmp_path / "absent.yaml")]) == 2


def test_run_identities_writes_outputs_and_is_reproducible(tmp_path, capsys):
    cfg = _cfg(tmp_path, "scenario: identities\n")
    assert main(["run", cfg, "--out", str(tmp_path / "a")]) == 0
    out = capsys.readouterr().out
    assert "PASS cauchy_integral" in out
    assert main(["run", cfg, "--out", str(tmp_path / "b"), "--parallel", "2"]) == 0
    a, b = tmp_path / "a" / "identities", tmp_path / "b" / "identities"
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
    assert (a / "identities.csv").read_bytes() == (b / "identities.csv").read_bytes()
    summary = json.loads((a / "summary.json").read_text())
    assert summary["passed"] and summary["scenario"] == "identities"
    assert summary["config_echo"]["seed"] == 1
    assert {"id", "paper_ref", "value", "threshold", "pass", "gated"} == set(summary["checks"][0])
    assert (a / "run.log").read_text().startswith("INFO dampwave")


def test_seed_override_recorded(tmp_path, capsys):
    cfg = _cfg(tmp_path, "scenario: identities\n")
    assert main(["run", cfg, "--out", str(tmp_path), "--seed", "9"]) == 0
    summary = json.loads((tmp_path / "identities" / "summary.json").read_text())
    assert summary["seed"] == 9 and summary["config_echo"]["seed"] == 9


def test_failing_checks_exit_one(tmp_path, capsys):
    cfg = _cfg(tmp_path, "scenario: identities\nparams:\n  instances: -1\n")
    assert main(["run", cfg, "--out", str(tmp_path)]) == 1
    assert "FAIL scenario_error" in capsys.readouterr().out


def test_write_csv_round_trip(tmp_path):
    p = write_csv(tmp_path / "x.csv", {"t": np.array([1.0, 2.0]), "v": np.array([0.1, np.nan])}, "sup=3")
    lines = p.read_text().splitlines()
    assert lines[-1] == "# sup=3"
    rows = list(csv.reader(lines[:-1]))
    assert rows[0] == ["t", "v"] and float(rows[1][1]) == 0.1 and rows[2][1] == "nan"
    with pytest.raises(ValueError):
        write_csv(tmp_path / "y.csv", {"a": [1], "b": [1, 2]})


def test_summary_handles_nonfinite_and_numpy(tmp_path):
    chk = Check("c", "claim", float("inf"), "finite", False)
    p = write_summary(tmp_path / "s.json", "x", {"a": np.arange(2), "z": 1 + 2j}, [chk], {"flag": np.bool_(True)})
    d = json.loads(p.read_text())
    assert d["checks"][0]["value"] == "inf"
    assert d["config_echo"] == {"a": [0, 1], "z": {"re": 1.0, "im": 2.0}}
    assert d["flag"] is True and d["schema_version"] == 1
