"""Trial logs (JSONL) and sweep summaries (CSV).

A trial log holds one JSON object per line, in time order::

    {"type":"frame","t":0.0,"x":...,"y":...,"heading":...,"tracked":true}
    {"type":"stim","t":1.0,"channel":"left_antenna","freq_hz":22.5,"dur_ms":400.0}
    {"type":"outcome","reason":"success","excluded":null}

A stimulus issued at frame time ``t`` follows that frame. Floats are written
with ``repr`` so reading a log back reproduces the record exactly. Sweep logs
are named ``tu<t_update>_kp<k_p>_b<beetle>_t<trial>.jsonl``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import re
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .controller import CHANNELS, StimulusCommand
from .errors import LogFormatError
from .metrics import CSV_COLUMNS, MetricsRow
from .trial import OUTCOMES, SweepEntry, TrialRecord

__all__ = [
    "EXCLUSION_REASONS",
    "record_to_jsonl",
    "write_trial_log",
    "parse_trial_log",
    "read_trial_log",
    "sweep_log_name",
    "parse_sweep_log_name",
    "write_sweep_logs",
    "read_sweep_logs",
    "summary_csv",
    "write_summary_csv",
]

EXCLUSION_REASONS = ("unilateral_runs", "miss_tracking")
_NAME_RE = re.compile(r"^tu(?P<tu>[0-9.]+)_kp(?P<kp>[0-9.]+)_b(?P<b>\d+)_t(?P<t>\d+)\.jsonl$")


def _num(v: float) -> str:
    v = float(v)
    if not math.isfinite(v):
        raise LogFormatError("non-finite value in trial record")
    return repr(v)


def record_to_jsonl(record: TrialRecord) -> str:
    """Serialize ``record`` to the JSONL log text."""
    t = record.t.tolist()
    x = record.x.tolist()
    y = record.y.tolist()
    h = record.heading.tolist()
    seen = record.tracked.tolist()
    stims = sorted(record.stimuli, key=lambda s: s.timestamp)
    lines = []
    j = 0
    for i in range(len(t)):
        lines.append('{"type":"frame","t":%s,"x":%s,"y":%s,"heading":%s,"tracked":%s}'
                     % (_num(t[i]), _num(x[i]), _num(y[i]), _num(h[i]),
                        "true" if seen[i] else "false"))
        next_t = t[i + 1] if i + 1 < len(t) else math.inf
        while j < len(stims) and stims[j].timestamp < next_t:
            s = stims[j]
            lines.append('{"type":"stim","t":%s,"channel":%s,"freq_hz":%s,"dur_ms":%s}'
                         % (_num(s.timestamp), json.dumps(s.channel), _num(s.frequency),
                            _num(s.duration)))
            j += 1
    lines.append(json.dumps({"type": "outcome", "reason": record.outcome,
                             "excluded": record.excluded}, separators=(",", ":")))
    return "\n".join(lines) + "\n"


def write_trial_log(record: TrialRecord, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(record_to_jsonl(record))


def _field(obj: dict, key: str, kind, lineno: int):
    if key not in obj:
        raise LogFormatError(f"line {lineno}: missing field {key!r}")
    value = obj[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise LogFormatError(f"line {lineno}: field {key!r} must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise LogFormatError(f"line {lineno}: field {key!r} has the wrong type")
    return value


def parse_trial_log(lines: Iterable[str]) -> TrialRecord:
    """Rebuild a :class:`TrialRecord` from log lines.

    Raises:
        LogFormatError: on bad JSON, unknown line types, missing fields,
            times going backwards, or a missing or misplaced outcome line.
    """
    t, x, y, h, tracked = [], [], [], [], []
    stimuli: list[StimulusCommand] = []
    outcome = None
    last_t = -math.inf
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        if outcome is not None:
            raise LogFormatError(f"line {lineno}: data after the outcome line")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LogFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(obj, dict):
            raise LogFormatError(f"line {lineno}: expected a JSON object")
        kind = obj.get("type")
        if kind == "frame":
            ti = _field(obj, "t", float, lineno)
            if ti <= last_t and t:
                raise LogFormatError(f"line {lineno}: frame times must increase")
            t.append(ti)
            x.append(_field(obj, "x", float, lineno))
            y.append(_field(obj, "y", float, lineno))
            h.append(_field(obj, "heading", float, lineno))
            tracked.append(_field(obj, "tracked", bool, lineno))
            last_t = ti
        elif kind == "stim":
            ts = _field(obj, "t", float, lineno)
            if ts < last_t:
                raise LogFormatError(f"line {lineno}: stimulus out of time order")
            channel = _field(obj, "channel", str, lineno)
            if channel not in CHANNELS:
                raise LogFormatError(f"line {lineno}: unknown channel {channel!r}")
            stimuli.append(StimulusCommand(channel, _field(obj, "freq_hz", float, lineno),
                                           _field(obj, "dur_ms", float, lineno), timestamp=ts))
            last_t = ts
        elif kind == "outcome":
            reason = _field(obj, "reason", str, lineno)
            if reason not in OUTCOMES:
                raise LogFormatError(f"line {lineno}: unknown outcome {reason!r}")
            excluded = obj.get("excluded", None)
            if excluded is not None and excluded not in EXCLUSION_REASONS:
                raise LogFormatError(f"line {lineno}: unknown exclusion {excluded!r}")
            outcome = (reason, excluded)
        else:
            raise LogFormatError(f"line {lineno}: unknown line type {kind!r}")
    if outcome is None:
        raise LogFormatError("trial log has no outcome line")
    if not t:
        raise LogFormatError("trial log has no frames")
    return TrialRecord(
        t=np.array(t), x=np.array(x), y=np.array(y), heading=np.array(h),
        tracked=np.array(tracked, dtype=bool), stimuli=stimuli,
        outcome=outcome[0], excluded=outcome[1],
    )


def read_trial_log(path: str | os.PathLike) -> TrialRecord:
    with open(path, encoding="utf-8") as fh:
        return parse_trial_log(fh)


# --------------------------------------------------------------------------
# sweep directories


def sweep_log_name(entry: SweepEntry) -> str:
    return f"tu{entry.t_update:.2f}_kp{entry.k_p:.2f}_b{entry.beetle:02d}_t{entry.trial:02d}.jsonl"


def parse_sweep_log_name(name: str) -> tuple[float, float, int, int]:
    """(t_update, k_p, beetle, trial) encoded in a sweep log file name."""
    m = _NAME_RE.match(name)
    if m is None:
        raise LogFormatError(f"not a sweep log name: {name!r}")
    return float(m["tu"]), float(m["kp"]), int(m["b"]), int(m["t"])


def write_sweep_logs(entries: Sequence[SweepEntry], directory: str | os.PathLike) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for e in entries:
        p = directory / sweep_log_name(e)
        write_trial_log(e.record, p)
        paths.append(p)
    return paths


def read_sweep_logs(directory: str | os.PathLike) -> list[SweepEntry]:
    """Load every sweep log in ``directory``, ordered by file name.

    Raises:
        LogFormatError: if the directory holds no sweep logs or one is malformed.
        OSError: if the directory cannot be read.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"log directory not found: {directory}")
    entries = []
    for p in sorted(directory.glob("*.jsonl")):
        tu, kp, b, i = parse_sweep_log_name(p.name)
        try:
            record = read_trial_log(p)
        except LogFormatError as exc:
            raise LogFormatError(f"{p.name}: {exc}") from None
        entries.append(SweepEntry(b, kp, tu, i, record))
    if not entries:
        raise LogFormatError(f"no trial logs in {directory}")
    return entries


# --------------------------------------------------------------------------
# summary CSV


def summary_csv(rows: Sequence[MetricsRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row.csv_values()])
    return buf.getvalue()


def write_summary_csv(rows: Sequence[MetricsRow], path: str | os.PathLike) -> None:
    Path(path).write_text(summary_csv(rows), encoding="utf-8")
