import json

import numpy as np
import pytest

from cyborgnav.errors import LogFormatError
from cyborgnav.logs import (
    parse_sweep_log_name,
    parse_trial_log,
    read_sweep_logs,
    read_trial_log,
    record_to_jsonl,
    summary_csv,
    sweep_log_name,
    write_sweep_logs,
    write_trial_log,
)
from cyborgnav.metrics import CSV_COLUMNS, summarize_sweep
from cyborgnav.trial import TrialConfig, flag_exclusions, run_sweep, run_trial


@pytest.fixture(scope="module")
def record():
    return flag_exclusions(run_trial(TrialConfig(seed=8, dropout_rate=0.1, timeout=40.0)))


def test_round_trip_exact(record, tmp_path):
    p = tmp_path / "trial.jsonl"
    write_trial_log(record, p)
    back = read_trial_log(p)
    for name in ("t", "x", "y", "heading", "tracked"):
        assert np.array_equal(getattr(back, name), getattr(record, name))
    assert [(s.channel, s.frequency, s.duration, s.timestamp) for s in back.stimuli] == \
        [(s.channel, s.frequency, s.duration, s.timestamp) for s in record.stimuli]
    assert (back.outcome, back.excluded) == (record.outcome, record.excluded)
    assert record_to_jsonl(back) == p.read_text()


def test_line_structure(record):
    lines = [json.loads(line) for line in record_to_jsonl(record).splitlines()]
    assert lines[-1]["type"] == "outcome"
    assert sum(1 for o in lines if o["type"] == "outcome") == 1
    times = [o["t"] for o in lines[:-1]]
    assert times == sorted(times)
    assert {o["type"] for o in lines} == {"frame", "stim", "outcome"}
    frame = next(o for o in lines if o["type"] == "frame")
    assert set(frame) == {"type", "t", "x", "y", "heading", "tracked"}
    stim = next(o for o in lines if o["type"] == "stim")
    assert set(stim) == {"type", "t", "channel", "freq_hz", "dur_ms"}


FRAME = '{"type":"frame","t":0.0,"x":0.0,"y":0.0,"heading":0.0,"tracked":true}'
OUTCOME = '{"type":"outcome","reason":"success","excluded":null}'


@pytest.mark.parametrize("lines, match", [
    ([FRAME], "no outcome"),
    ([OUTCOME], "no frames"),
    ([FRAME, OUTCOME, FRAME], "after the outcome"),
    (["{oops", OUTCOME], "invalid JSON"),
    ([FRAME, FRAME, OUTCOME], "increase"),
    (['{"type":"frame","t":0.0,"x":0.0,"y":0.0,"heading":0.0}', OUTCOME], "missing field"),
    (['{"type":"frame","t":"0","x":0.0,"y":0.0,"heading":0.0,"tracked":true}', OUTCOME], "number"),
    ([FRAME, '{"type":"stim","t":0.0,"channel":"tail","freq_hz":20,"dur_ms":400}', OUTCOME], "channel"),
    ([FRAME, '{"type":"outcome","reason":"won","excluded":null}'], "unknown outcome"),
    ([FRAME, '{"type":"note"}', OUTCOME], "unknown line type"),
])
def test_malformed(lines, match):
    with pytest.raises(LogFormatError, match=match):
        parse_trial_log(lines)


def test_sweep_directory(tmp_path):
    entries = run_sweep(TrialConfig(timeout=20.0), n_beetles=1, n_trials=2, seed=4)
    paths = write_sweep_logs(entries, tmp_path / "logs")
    assert len(paths) == 18
    assert parse_sweep_log_name(sweep_log_name(entries[0])) == \
        (entries[0].t_update, entries[0].k_p, entries[0].beetle, entries[0].trial)
    back = read_sweep_logs(tmp_path / "logs")
    assert len(back) == 18
    rows_a, _ = summarize_sweep(entries)
    rows_b, _ = summarize_sweep(back)
    assert summary_csv(rows_a) == summary_csv(rows_b)


def test_sweep_directory_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_sweep_logs(tmp_path / "nope")
    (tmp_path / "empty").mkdir()
    with pytest.raises(LogFormatError, match="no trial logs"):
        read_sweep_logs(tmp_path / "empty")
    with pytest.raises(LogFormatError):
        parse_sweep_log_name("trial.jsonl")


def test_summary_csv_columns():
    entries = run_sweep(TrialConfig(timeout=20.0), n_beetles=1, n_trials=1, seed=4)
    rows, _ = summarize_sweep(entries)
    lines = summary_csv(rows).splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert len(lines) == 10
