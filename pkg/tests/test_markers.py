import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cyborgnav.errors import LogFormatError
from cyborgnav.markers import (
    MARKER_HEADER,
    ingest_markers,
    marker_csv_text,
    marker_rows_for_record,
    read_marker_csv,
    track_to_record,
)
from cyborgnav.trial import TrialConfig, run_trial

HEADER = list(MARKER_HEADER)


def row(i, pts, t=None):
    cells = [str(i), repr(i * 0.01 if t is None else t)]
    for p in pts:
        cells += ["", "", ""] if p is None else [repr(p[0]), repr(p[1]), "5.0"]
    return cells


def test_centroid_and_axis():
    track = ingest_markers([HEADER, row(0, [(0, 0), (-10, 5), (-10, -5)])])
    assert track.x[0] == pytest.approx(-20 / 3)
    assert track.y[0] == pytest.approx(0.0)
    assert track.heading[0] == pytest.approx(0.0)


def test_rotated_rig():
    track = ingest_markers([HEADER, row(0, [(0, 0), (-5, -10), (5, -10)])])
    assert track.heading[0] == pytest.approx(90.0)


@given(st.floats(-180, 180), st.floats(-500, 500), st.floats(-500, 500))
def test_rotation_equivariance(angle, ox, oy):
    a = math.radians(angle)
    c, s = math.cos(a), math.sin(a)
    local = [(0, 0), (-10, 5), (-10, -5)]
    pts = [(ox + c * u - s * v, oy + s * u + c * v) for u, v in local]
    track = ingest_markers([HEADER, row(0, pts)])
    diff = (track.heading[0] - angle + 180.0) % 360.0 - 180.0
    assert abs(diff) < 1e-7


def test_front_marker_choice():
    rows = [HEADER, row(0, [(-10, 5), (0, 0), (-10, -5)])]
    assert ingest_markers(rows, front=2).heading[0] == pytest.approx(0.0)


def test_blank_cells_carry_pose_forward():
    rows = [HEADER, row(0, [None, (0, 0), (1, 1)]),
            row(1, [(0, 0), (-10, 5), (-10, -5)]),
            row(2, [(0, 0), None, (-10, -5)])]
    track = ingest_markers(rows)
    assert list(track.tracked) == [False, True, False]
    assert np.all(track.x == track.x[1])
    assert track.frame_rate == pytest.approx(100.0)


def test_errors():
    with pytest.raises(LogFormatError, match="malformed marker file"):
        ingest_markers([["frame", "time_s", "m1_x_mm", "m1_y_mm", "m1_z_mm"], ["0", "0", "1", "1", "1"]])
    with pytest.raises(LogFormatError, match="bad timeline"):
        ingest_markers([HEADER, row(0, [(0, 0)] * 3, t=0.1), row(1, [(0, 0)] * 3, t=0.05)])
    with pytest.raises(LogFormatError, match="malformed marker file"):
        ingest_markers([HEADER, ["0", "0.0", "x"] + [""] * 8])


@pytest.fixture(scope="module")
def record():
    return run_trial(TrialConfig(seed=5, dropout_rate=0.25, timeout=60.0))


def test_round_trip_through_csv(record, tmp_path):
    p = tmp_path / "markers.csv"
    p.write_text(marker_csv_text(marker_rows_for_record(record)))
    track = read_marker_csv(p)
    assert np.array_equal(track.tracked, record.tracked)
    np.testing.assert_allclose(track.x, record.x, atol=1e-9)
    np.testing.assert_allclose(track.y, record.y, atol=1e-9)
    d = (track.heading - record.heading + 180.0) % 360.0 - 180.0
    assert np.abs(d).max() < 1e-7


def test_quarter_blank_is_excluded(record):
    track = ingest_markers(marker_rows_for_record(record))
    assert np.mean(~track.tracked) > 0.2
    rec = track_to_record(track)
    assert rec.excluded == "miss_tracking"
    assert rec.outcome == record.outcome


def test_geometric_outcome():
    rows = [HEADER] + [row(i, [(10 * i, 0), (10 * i - 10, 5), (10 * i - 10, -5)]) for i in range(90)]
    rec = track_to_record(ingest_markers(rows))
    assert rec.outcome == "success"
    assert rec.config_ref["direction"] == "forward"
