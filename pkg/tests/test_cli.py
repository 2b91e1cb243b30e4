import json
import subprocess
import sys

import pytest

from cyborgnav.cli import main
from cyborgnav.logs import read_trial_log
from cyborgnav.markers import marker_csv_text, marker_rows_for_record
from cyborgnav.metrics import CSV_COLUMNS

SMALL = {"trial": {"timeout": 30.0, "seed": 4},
         "sweep": {"n_beetles": 1, "n_trials": 2, "k_p": [0.25, 0.75], "t_update": [1.0]}}


@pytest.fixture
def config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(SMALL))
    return str(p)


def test_simulate_deterministic(config, tmp_path, monkeypatch):
    monkeypatch.delenv("CYBORGNAV_SEED", raising=False)
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(["simulate", "--config", config, "--seed", "7", "--out", str(a)]) == 0
    assert main(["simulate", "--config", config, "--seed", "7", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert main(["simulate", "--config", config, "--seed", "8", "--out", str(b)]) == 0
    assert a.read_bytes() != b.read_bytes()


def test_seed_from_environment(config, tmp_path, monkeypatch):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    monkeypatch.setenv("CYBORGNAV_SEED", "7")
    assert main(["simulate", "--config", config, "--out", str(a)]) == 0
    monkeypatch.delenv("CYBORGNAV_SEED")
    assert main(["simulate", "--config", config, "--seed", "7", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_to_stdout(config, capsys):
    assert main(["simulate", "--config", config]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert json.loads(lines[-1])["type"] == "outcome"


def test_sweep_analyze_report(config, tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", config, "--out", str(out)]) == 0
    logs = sorted(out.glob("*.jsonl"))
    assert len(logs) == 1 * 2 * 2
    summary = (out / "summary.csv").read_text()
    assert summary.splitlines()[0].split(",") == list(CSV_COLUMNS)

    csv_path = tmp_path / "s.csv"
    assert main(["analyze", "--logs", str(out), "--config", config, "--out", str(csv_path)]) == 0
    assert csv_path.read_text() == summary

    rep = tmp_path / "report"
    assert main(["report", "--logs", str(out), "--config", config, "--out", str(rep)]) == 0
    assert (rep / "summary.csv").read_text() == summary
    assert (rep / "frequency_histograms.svg").exists()


def test_ingest(config, tmp_path):
    trial = tmp_path / "t.jsonl"
    assert main(["simulate", "--config", config, "--out", str(trial)]) == 0
    rec = read_trial_log(trial)
    csv_path = tmp_path / "m.csv"
    csv_path.write_text(marker_csv_text(marker_rows_for_record(rec)))
    out = tmp_path / "ingested.jsonl"
    assert main(["ingest", "--logs", str(csv_path), "--config", config, "--out", str(out)]) == 0
    back = read_trial_log(out)
    assert back.n_frames == rec.n_frames
    assert back.outcome == rec.outcome


@pytest.mark.parametrize("argv", [
    [],
    ["fly"],
    ["simulate", "--bogus"],
    ["simulate", "--seed", "-1"],
    ["sweep"],
])
def test_usage_errors(argv):
    assert main(argv) == 1


def test_invalid_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"controller": {"k_p": 0}}))
    assert main(["simulate", "--config", str(p)]) == 1
    p.write_text("[")
    assert main(["simulate", "--config", str(p)]) == 1


def test_malformed_logs(tmp_path):
    d = tmp_path / "logs"
    d.mkdir()
    (d / "tu1.00_kp0.50_b00_t00.jsonl").write_text("{}\n")
    assert main(["analyze", "--logs", str(d)]) == 1
    bad = tmp_path / "m.csv"
    bad.write_text("frame,time_s\n0,0.0\n")
    assert main(["ingest", "--logs", str(bad)]) == 1


def test_missing_files(tmp_path):
    assert main(["analyze", "--logs", str(tmp_path / "none")]) == 2
    assert main(["simulate", "--config", str(tmp_path / "none.json")]) == 2
    assert main(["ingest", "--logs", str(tmp_path / "none.csv")]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "cyborgnav", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "simulate" in res.stdout
