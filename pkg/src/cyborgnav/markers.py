"""Motion-capture marker CSV ingestion.

Expected layout, one row per frame::

    frame,time_s,m1_x_mm,m1_y_mm,m1_z_mm,m2_x_mm,m2_y_mm,m2_z_mm,m3_x_mm,m3_y_mm,m3_z_mm

A blank cell marks a miss-tracked marker. The body position is the planar
centroid of the three markers and the heading points from the midpoint of the
two rear markers to the front marker.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import LogFormatError
from .geometry import ArenaSpec, PathSpec
from .trial import TrialRecord, flag_exclusions

__all__ = ["MARKER_HEADER", "MarkerTrack", "ingest_markers", "read_marker_csv",
           "marker_rows_for_record", "marker_csv_text", "track_to_record"]

MARKER_HEADER = ("frame", "time_s") + tuple(
    f"m{i}_{axis}_mm" for i in (1, 2, 3) for axis in "xyz")


@dataclass
class MarkerTrack:
    frame: np.ndarray
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    heading: np.ndarray
    tracked: np.ndarray

    @property
    def frame_rate(self) -> float:
        """Frame rate inferred from the median time step."""
        if self.t.size < 2:
            return float("nan")
        return float(1.0 / np.median(np.diff(self.t)))


def _marker_columns(header: list[str]) -> list[tuple[int, int, int]]:
    cols = {name.strip().lower(): i for i, name in enumerate(header)}
    out = []
    for m in (1, 2, 3):
        idx = []
        for axis in "xyz":
            hit = cols.get(f"m{m}_{axis}_mm", cols.get(f"m{m}_{axis}"))
            if hit is None:
                raise LogFormatError("malformed marker file: expected three x/y/z marker columns")
            idx.append(hit)
        out.append(tuple(idx))
    return out


def _cell(row: list[str], i: int) -> float | None:
    if i >= len(row) or not row[i].strip():
        return None
    try:
        return float(row[i])
    except ValueError:
        raise LogFormatError(f"malformed marker file: bad number {row[i]!r}") from None


def ingest_markers(rows: Iterable[list[str]], front: int = 1) -> MarkerTrack:
    """Reconstruct planar poses from marker rows (header first).

    Frames with any blank marker cell are untracked and carry the previous
    tracked pose; frames before the first tracked one take its pose.

    Raises:
        LogFormatError: "malformed marker file" for missing columns or bad
            cells, "bad timeline" when time does not strictly increase.
    """
    if front not in (1, 2, 3):
        raise ValueError("front must be 1, 2 or 3")
    it = iter(rows)
    try:
        header = next(it)
    except StopIteration:
        raise LogFormatError("malformed marker file: empty") from None
    cols = {name.strip().lower(): i for i, name in enumerate(header)}
    if "time_s" not in cols and "time" not in cols:
        raise LogFormatError("malformed marker file: no time column")
    ti = cols.get("time_s", cols.get("time"))
    fi = cols.get("frame")
    markers = _marker_columns(header)
    rear = [m for m in (1, 2, 3) if m != front]

    frame, t, x, y, h, seen = [], [], [], [], [], []
    for n, row in enumerate(it):
        if not any(c.strip() for c in row):
            continue
        time = _cell(row, ti)
        if time is None:
            raise LogFormatError("bad timeline: missing time value")
        if t and not time > t[-1]:
            raise LogFormatError("bad timeline: time must strictly increase")
        idx = _cell(row, fi) if fi is not None else None
        pts = []
        for cx, cy, _ in markers:
            px, py = _cell(row, cx), _cell(row, cy)
            pts.append(None if px is None or py is None else (px, py))
        frame.append(int(idx) if idx is not None else n)
        t.append(time)
        if any(p is None for p in pts):
            seen.append(False)
            x.append(math.nan)
            y.append(math.nan)
            h.append(math.nan)
            continue
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        fx, fy = pts[front - 1]
        mx = 0.5 * (pts[rear[0] - 1][0] + pts[rear[1] - 1][0])
        my = 0.5 * (pts[rear[0] - 1][1] + pts[rear[1] - 1][1])
        seen.append(True)
        x.append((xs[0] + xs[1] + xs[2]) / 3.0)
        y.append((ys[0] + ys[1] + ys[2]) / 3.0)
        h.append(math.degrees(math.atan2(fy - my, fx - mx)))
    if not t:
        raise LogFormatError("malformed marker file: no frames")
    if not any(seen):
        raise LogFormatError("malformed marker file: no tracked frame")

    x, y, h = np.array(x), np.array(y), np.array(h)
    seen = np.array(seen, dtype=bool)
    # carry the last tracked pose forward; leading gaps take the first tracked pose
    idx = np.where(seen, np.arange(seen.size), -1)
    idx = np.maximum.accumulate(idx)
    idx[idx < 0] = int(np.argmax(seen))
    return MarkerTrack(np.array(frame), np.array(t), x[idx], y[idx], h[idx], seen)


def read_marker_csv(path: str | os.PathLike, front: int = 1) -> MarkerTrack:
    with open(path, newline="", encoding="utf-8") as fh:
        return ingest_markers(csv.reader(fh), front)


def track_to_record(track: MarkerTrack, path: PathSpec | None = None,
                    arena: ArenaSpec | None = None) -> TrialRecord:
    """Turn a marker track into a trial record with a geometric outcome.

    The destination is the path end farther from the first pose. The outcome
    is success if the last pose lies inside the destination circle, otherwise
    out_of_bounds if it lies outside the arena, otherwise timeout.
    """
    path = path or PathSpec()
    arena = arena or ArenaSpec()
    x0, y0 = track.x[0], track.y[0]
    ends = [path.destination(1), path.destination(-1)]
    dest = max(ends, key=lambda p: math.hypot(p[0] - x0, p[1] - y0))
    xe, ye = track.x[-1], track.y[-1]
    if math.hypot(xe - dest[0], ye - dest[1]) <= path.endpoint_radius:
        outcome = "success"
    elif not arena.contains(path, xe, ye):
        outcome = "out_of_bounds"
    else:
        outcome = "timeout"
    direction = "forward" if dest == ends[0] else "reversed"
    record = TrialRecord(t=track.t - track.t[0], x=track.x.copy(), y=track.y.copy(),
                         heading=track.heading.copy(), tracked=track.tracked.copy(),
                         stimuli=[], outcome=outcome, config_ref={"direction": direction})
    return flag_exclusions(record)


def marker_rows_for_record(record: TrialRecord, front: int = 1,
                           arm: float = 10.0, half_width: float = 5.0) -> list[list[str]]:
    """Synthetic marker rows whose reconstruction is ``record``'s poses.

    The front marker sits ``arm`` ahead of the rear midpoint, the rear pair
    ``half_width`` to either side, shifted so the centroid is the body point.
    Untracked frames are written blank.
    """
    rows = [list(MARKER_HEADER)]
    rear = [m for m in (1, 2, 3) if m != front]
    for i in range(record.n_frames):
        row = [str(i), repr(float(record.t[i]))]
        if not record.tracked[i]:
            rows.append(row + [""] * 9)
            continue
        a = math.radians(float(record.heading[i]))
        c, s = math.cos(a), math.sin(a)
        # body frame: front (2/3 arm, 0), rear (-arm/3, +-half_width)
        local = {front: (2 * arm / 3, 0.0), rear[0]: (-arm / 3, half_width),
                 rear[1]: (-arm / 3, -half_width)}
        for m in (1, 2, 3):
            u, v = local[m]
            px = float(record.x[i]) + c * u - s * v
            py = float(record.y[i]) + s * u + c * v
            row += [repr(px), repr(py), "0.0"]
        rows.append(row)
    return rows


def marker_csv_text(rows: list[list[str]]) -> str:
    return "\n".join(",".join(r) for r in rows) + "\n"
