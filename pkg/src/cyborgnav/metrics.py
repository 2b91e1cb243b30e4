"""Analysis pipeline: smoothing, navigation metrics, response reconstruction.

Location data is smoothed with a centred 0.1-s moving average before any
metric is computed. Time series (distance to path, instantaneous speed) are
sampled every 0.5 s.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._accel import njit
from .errors import MetricUndefinedError
from .geometry import PathSpec, _project, arc_length, area_between
from .plant import BIN_EDGES
from .stats import one_way_anova
from .trial import TrialRecord

__all__ = [
    "SMOOTHING_WINDOW",
    "SAMPLE_PERIOD",
    "moving_average",
    "smoothed_xy",
    "tracking_error",
    "navigation_time",
    "control_effort",
    "distance_to_path_series",
    "instantaneous_speed_series",
    "turn_samples",
    "frequency_bin",
    "summarize_turns",
    "reconstruct_turn_response",
    "thrust_boost_samples",
    "attenuation_report",
    "MetricsRow",
    "FrequencyHistogram",
    "summarize_sweep",
    "anova_by_update",
]

SMOOTHING_WINDOW = 0.1
SAMPLE_PERIOD = 0.5
SPEED_WINDOW = 0.1
# onset to onset + 400 ms stimulus + 100 ms settle
TURN_MEASURE_WINDOW = 0.5
OUTLIER_SIGMA = 2.7
# bin boundaries between the integer-Hz bins 10-16, 17-24, 25-32, 33-40
_BIN_SPLITS = np.array([16.5, 24.5, 32.5])
_TIME_EPS = 1e-9


@njit
def _window_mean(t, v, half, eps):
    n = t.shape[0]
    out = np.empty(n)
    lo = 0
    hi = 0
    for i in range(n):
        # shrink the window symmetrically near the ends so linear motion is preserved
        h = min(half, t[i] - t[0], t[n - 1] - t[i]) + eps
        while t[lo] < t[i] - h:
            lo += 1
        while lo > 0 and t[lo - 1] >= t[i] - h:
            lo -= 1
        hi = max(hi, lo)
        while hi < n and t[hi] <= t[i] + h:
            hi += 1
        while hi > lo + 1 and t[hi - 1] > t[i] + h:
            hi -= 1
        acc = 0.0
        for j in range(lo, hi):
            acc += v[j]
        out[i] = acc / (hi - lo)
    return out


def moving_average(t, values, window: float = SMOOTHING_WINDOW) -> np.ndarray:
    """Centred moving average over ``window`` seconds.

    Each output sample is the plain mean of the inputs whose timestamps lie
    within ``h`` of its own, where ``h`` is ``window / 2`` shrunk near the ends
    to the distance to the nearer end of the series.
    """
    t = np.ascontiguousarray(t, dtype=float)
    values = np.ascontiguousarray(values, dtype=float)
    if t.size == 0:
        return np.empty(0)
    if t.shape != values.shape:
        raise ValueError("t and values must have the same length")
    if np.any(np.diff(t) < 0):
        raise ValueError("series must be time-ordered")
    return _window_mean(t, values, 0.5 * window, _TIME_EPS)


def smoothed_xy(record: TrialRecord, window: float = SMOOTHING_WINDOW) -> np.ndarray:
    return np.column_stack([moving_average(record.t, record.x, window),
                            moving_average(record.t, record.y, window)])


def _require_success(record: TrialRecord) -> None:
    if record.outcome != "success":
        raise MetricUndefinedError("metric undefined for failed trial")


def tracking_error(record: TrialRecord, path: PathSpec) -> float:
    """Area between the smoothed trajectory and the path, per unit path length (mm)."""
    _require_success(record)
    return area_between(smoothed_xy(record), path) / arc_length(path)


def navigation_time(record: TrialRecord) -> float:
    _require_success(record)
    return float(record.t[-1])


def control_effort(record: TrialRecord) -> int:
    _require_success(record)
    return len(record.stimuli)


def _tick_indices(t: np.ndarray, period: float) -> np.ndarray:
    ticks = np.arange(t[0], t[-1] + _TIME_EPS, period)
    return np.searchsorted(t, ticks - _TIME_EPS)


def distance_to_path_series(record: TrialRecord, path: PathSpec,
                            period: float = SAMPLE_PERIOD) -> tuple[np.ndarray, np.ndarray]:
    """(tick times, distance to path) of the smoothed trajectory every ``period`` s."""
    if record.n_frames < 2 or record.t[-1] - record.t[0] < 1.0 - _TIME_EPS:
        return np.empty(0), np.empty(0)
    xy = smoothed_xy(record)
    idx = _tick_indices(record.t, period)
    dist = np.array([_project(path.amplitude, path.wavelength, path.x_start, path.x_end,
                              xy[i, 0], xy[i, 1])[2] for i in idx])
    return record.t[idx], dist


@njit
def _window_speed(t, x, y, idx, half):
    n = t.shape[0]
    out = np.empty(idx.shape[0])
    for m in range(idx.shape[0]):
        i = idx[m]
        lo = i
        while lo > 0 and t[lo - 1] >= t[i] - half:
            lo -= 1
        hi = i
        while hi < n - 1 and t[hi + 1] <= t[i] + half:
            hi += 1
        dist = 0.0
        for j in range(lo, hi):
            dist += math.sqrt((x[j + 1] - x[j]) ** 2 + (y[j + 1] - y[j]) ** 2)
        span = t[hi] - t[lo]
        out[m] = dist / span if span > 0 else 0.0
    return out


def instantaneous_speed_series(record: TrialRecord, period: float = SAMPLE_PERIOD,
                               window: float = SPEED_WINDOW) -> tuple[np.ndarray, np.ndarray]:
    """(tick times, mean speed over the centred ``window``) every ``period`` s."""
    if record.n_frames < 2 or record.t[-1] - record.t[0] < 1.0 - _TIME_EPS:
        return np.empty(0), np.empty(0)
    xy = smoothed_xy(record)
    idx = _tick_indices(record.t, period)
    speed = _window_speed(record.t, np.ascontiguousarray(xy[:, 0]), np.ascontiguousarray(xy[:, 1]),
                          idx.astype(np.int64), 0.5 * window + _TIME_EPS)
    return record.t[idx], speed


# --------------------------------------------------------------------------
# stimulus responses


def frequency_bin(f) -> np.ndarray | int:
    """Index of the frequency bin (0..3) of ``f`` in Hz."""
    return np.searchsorted(_BIN_SPLITS, f, side="right")


def _onset_index(record: TrialRecord, timestamp: float) -> int:
    return int(np.searchsorted(record.t, timestamp - _TIME_EPS))


def turn_samples(records: Iterable[TrialRecord],
                 window: float = TURN_MEASURE_WINDOW) -> dict[str, np.ndarray]:
    """Induced heading change of every antenna stimulus with a complete window.

    Returns arrays ``frequency``, ``side`` (0 = left antenna, 1 = right) and
    ``angle`` (deg, left turns positive).
    """
    freqs, sides, angles = [], [], []
    for rec in records:
        if not rec.stimuli:
            continue
        for s in rec.stimuli:
            if s.channel == "elytra_both":
                continue
            k0 = _onset_index(rec, s.timestamp)
            k1 = _onset_index(rec, s.timestamp + window)
            if k1 >= rec.n_frames or k0 >= rec.n_frames:
                continue
            steps = np.diff(rec.heading[k0:k1 + 1])
            steps = (steps + 180.0) % 360.0 - 180.0
            freqs.append(s.frequency)
            sides.append(0 if s.channel == "left_antenna" else 1)
            angles.append(float(steps.sum()))
    return {"frequency": np.array(freqs, dtype=float),
            "side": np.array(sides, dtype=int),
            "angle": np.array(angles, dtype=float)}


@dataclass(frozen=True)
class TurnStats:
    mean: float
    sd: float
    n: int
    n_removed: int


def remove_outliers(values, mean: float | None = None, sd: float | None = None,
                    k: float = OUTLIER_SIGMA) -> np.ndarray:
    """Drop values outside ``mean +/- k*sd`` (statistics computed once unless given)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return values
    mean = values.mean() if mean is None else mean
    if sd is None:
        sd = values.std(ddof=1) if values.size > 1 else 0.0
    keep = np.abs(values - mean) <= k * sd
    return values[keep]


def summarize_turns(samples: dict[str, np.ndarray]) -> dict[tuple[int, str], TurnStats]:
    """Per (frequency bin, antenna side) mean and sd after single-pass outlier removal.

    Empty bins are absent from the result.
    """
    bins = frequency_bin(samples["frequency"])
    out = {}
    for b in range(len(BIN_EDGES)):
        for side_code, side in ((0, "left"), (1, "right")):
            vals = samples["angle"][(bins == b) & (samples["side"] == side_code)]
            if vals.size == 0:
                continue
            kept = remove_outliers(vals)
            sd = float(kept.std(ddof=1)) if kept.size > 1 else 0.0
            out[(b, side)] = TurnStats(float(kept.mean()), sd, int(kept.size), int(vals.size - kept.size))
    return out


def reconstruct_turn_response(records: Iterable[TrialRecord]) -> dict[tuple[int, str], TurnStats]:
    """Turn statistics per frequency bin and side, reconstructed from trial logs."""
    return summarize_turns(turn_samples(records))


def thrust_boost_samples(record: TrialRecord) -> np.ndarray:
    """Forward speed gained by each elytra stimulus.

    Mean speed over 100-200 ms after onset minus mean speed over the 100 ms
    before onset. Stimuli lacking either window are skipped (NaN is not used).
    """
    out = []
    t, x, y = record.t, record.x, record.y

    def mean_speed(a, b):
        i, j = _onset_index(record, a), _onset_index(record, b)
        if i < 0 or j >= record.n_frames or j <= i:
            return None
        d = np.hypot(np.diff(x[i:j + 1]), np.diff(y[i:j + 1])).sum()
        return d / (t[j] - t[i])

    for s in record.stimuli:
        if s.channel != "elytra_both" or s.timestamp < 0.1 - _TIME_EPS:
            continue
        before = mean_speed(s.timestamp - 0.1, s.timestamp)
        after = mean_speed(s.timestamp + 0.1, s.timestamp + 0.2)
        if before is None or after is None:
            continue
        out.append(after - before)
    return np.array(out)


@dataclass
class AttenuationReport:
    first_success_rate: float
    last_success_rate: float
    first_turn_magnitude: float
    last_turn_magnitude: float
    thrust_group_means: list[float]
    thrust_group_sds: list[float]
    n_first: int = 0
    n_last: int = 0

    @property
    def success_drop(self) -> float:
        """Percentage points lost between the first and last four trials."""
        return self.first_success_rate - self.last_success_rate


def attenuation_report(sessions: Sequence[Sequence[TrialRecord]], group_size: int = 20,
                       n_edge: int = 4) -> AttenuationReport:
    """Compare early and late trials of 12-trial sessions.

    Success rates (%) over non-excluded trials 1-4 vs 9-12, mean induced turn
    magnitude in the same two groups, and thrust boosts averaged over
    consecutive groups of ``group_size`` elytra stimuli within a session.
    """
    first, last = [], []
    first_recs, last_recs = [], []
    groups: dict[int, list[float]] = defaultdict(list)
    for session in sessions:
        n = len(session)
        count = 0
        for i, rec in enumerate(session):
            boosts = thrust_boost_samples(rec)
            for b in boosts:
                groups[count // group_size].append(float(b))
                count += 1
            if rec.excluded:
                continue
            if i < n_edge:
                first.append(rec.success)
                first_recs.append(rec)
            elif i >= n - n_edge:
                last.append(rec.success)
                last_recs.append(rec)

    def magnitude(recs):
        a = turn_samples(recs)["angle"]
        return float(np.abs(a).mean()) if a.size else float("nan")

    full = [g for g in sorted(groups) if len(groups[g]) > 0]
    return AttenuationReport(
        first_success_rate=100.0 * float(np.mean(first)) if first else float("nan"),
        last_success_rate=100.0 * float(np.mean(last)) if last else float("nan"),
        first_turn_magnitude=magnitude(first_recs),
        last_turn_magnitude=magnitude(last_recs),
        thrust_group_means=[float(np.mean(groups[g])) for g in full],
        thrust_group_sds=[float(np.std(groups[g], ddof=1)) if len(groups[g]) > 1 else 0.0 for g in full],
        n_first=len(first),
        n_last=len(last),
    )


# --------------------------------------------------------------------------
# sweep summary


CSV_COLUMNS = (
    "t_update_s", "kp", "success_rate_pct",
    "tracking_error_mm_mean", "tracking_error_mm_sd",
    "nav_time_s_mean", "nav_time_s_sd",
    "effort_mean", "effort_sd",
    "dist_mm_mean", "dist_mm_sd",
    "speed_mms_mean", "speed_mms_sd",
)


@dataclass
class MetricsRow:
    t_update: float
    k_p: float
    n_trials: int
    n_success: int
    success_rate: float
    tracking_error: tuple[float, float]
    navigation_time: tuple[float, float]
    control_effort: tuple[float, float]
    distance_to_path: tuple[float, float]
    linear_speed: tuple[float, float]
    tracking_errors: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)

    def csv_values(self) -> list:
        return [self.t_update, self.k_p, self.success_rate,
                *self.tracking_error, *self.navigation_time, *self.control_effort,
                *self.distance_to_path, *self.linear_speed]


@dataclass
class FrequencyHistogram:
    k_p: float
    edges: np.ndarray
    counts: np.ndarray
    median: float


def _mean_sd(values) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return (float("nan"), float("nan"))
    sd = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return (float(values.mean()), sd)


def _entries_by_combo(dataset) -> dict[tuple[float, float], list[TrialRecord]]:
    combos: dict[tuple[float, float], list[TrialRecord]] = defaultdict(list)
    for e in dataset:
        combos[(float(e.t_update), float(e.k_p))].append(e.record)
    return combos


def summarize_sweep(dataset, path: PathSpec | None = None, successes_only_series: bool = False,
                    bin_width: float = 2.5) -> tuple[list[MetricsRow], list[FrequencyHistogram]]:
    """Per-(t_update, k_p) metric table and per-k_p stimulation-frequency histograms.

    Excluded trials are dropped. Tracking error, time and effort use successful
    trials; distance and speed pool the 0.5-s samples of all remaining trials
    (or successes only when ``successes_only_series`` is set).
    """
    path = path or PathSpec()
    rows = []
    freqs: dict[float, list[float]] = defaultdict(list)
    for (tu, kp), records in sorted(_entries_by_combo(dataset).items()):
        kept = [r for r in records if not r.excluded]
        wins = [r for r in kept if r.success]
        errors = np.array([tracking_error(r, path) for r in wins])
        dist, speed = [], []
        for r in kept:
            for s in r.stimuli:
                if s.channel != "elytra_both":
                    freqs[kp].append(s.frequency)
            if successes_only_series and not r.success:
                continue
            dist.append(distance_to_path_series(r, path)[1])
            speed.append(instantaneous_speed_series(r)[1])
        rows.append(MetricsRow(
            t_update=tu, k_p=kp, n_trials=len(kept), n_success=len(wins),
            success_rate=100.0 * len(wins) / len(kept) if kept else float("nan"),
            tracking_error=_mean_sd(errors),
            navigation_time=_mean_sd([r.t[-1] for r in wins]),
            control_effort=_mean_sd([len(r.stimuli) for r in wins]),
            distance_to_path=_mean_sd(np.concatenate(dist) if dist else []),
            linear_speed=_mean_sd(np.concatenate(speed) if speed else []),
            tracking_errors=errors,
        ))
    edges = np.arange(10.0, 40.0 + bin_width / 2, bin_width)
    hists = []
    for kp in sorted(freqs):
        values = np.array(freqs[kp])
        counts, _ = np.histogram(values, bins=edges)
        hists.append(FrequencyHistogram(kp, edges, counts, float(np.median(values))))
    return rows, hists


def anova_by_update(rows: Sequence[MetricsRow]) -> dict[float, object]:
    """One-way ANOVA of tracking error across k_p for each update interval."""
    out = {}
    by_update: dict[float, list[np.ndarray]] = defaultdict(list)
    for r in rows:
        if r.tracking_errors.size >= 2:
            by_update[r.t_update].append(r.tracking_errors)
    for tu, groups in sorted(by_update.items()):
        if len(groups) >= 2:
            out[tu] = one_way_anova(groups)
    return out
