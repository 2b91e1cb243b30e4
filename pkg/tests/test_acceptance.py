"""Acceptance suite: one test per criterion, each reporting a single pass/fail line."""

import dataclasses
import math
import time
from pathlib import Path

import numpy as np
import pytest

from cyborgnav.cli import main
from cyborgnav.geometry import PathSpec, area_between, carrot_target, path_point, project_onto_path
from cyborgnav.metrics import (
    distance_to_path_series,
    instantaneous_speed_series,
    moving_average,
    reconstruct_turn_response,
    summarize_sweep,
    tracking_error,
)
from cyborgnav.plant import BIN_CENTERS, BeetleParams, TurnResponseTable
from cyborgnav.stats import one_way_anova, pooled_t_test, welch_t_test
from cyborgnav.trial import TrialConfig, run_open_loop, run_sweep, run_trial

from oracles import brute_moving_average, distance_series, grid_area, refined_projection, speed_series

SPEC = PathSpec()
SEEDS = (1, 2, 3, 4, 5)
KPS = (0.25, 0.5, 0.75)
T_UPDATES = (1.0, 1.5, 2.0)
# measured success rates (%) per (k_p, t_update)
REFERENCE_SUCCESS = {
    (0.25, 1.0): 84, (0.5, 1.0): 94, (0.75, 1.0): 76,
    (0.25, 1.5): 63, (0.5, 1.5): 65, (0.75, 1.5): 81,
    (0.25, 2.0): 50, (0.5, 2.0): 50, (0.75, 2.0): 75,
}
# Welch test on the reference samples, frozen from an independent statistics routine
WELCH_A = [4.1, 5.3, 6.2, 5.8, 4.9, 7.1, 6.6, 5.0]
WELCH_B = [6.9, 7.4, 8.8, 6.1, 9.0, 7.7, 8.3, 7.9, 8.5, 6.8]
WELCH_P = 0.0003564995565147539

RESULTS: list[str] = []


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
    RESULTS.append(line)
    print(line)


@dataclasses.dataclass
class SweepSummary:
    success: dict
    error: dict
    drop: float
    medians: list
    runtime: float


def _summarize(seeds, params: BeetleParams) -> SweepSummary:
    wins = {k: [] for k in REFERENCE_SUCCESS}
    errors = {k: [] for k in REFERENCE_SUCCESS}
    early, late, medians = [], [], []
    start = time.perf_counter()
    for seed in seeds:
        entries = run_sweep(TrialConfig(beetle=params), n_beetles=19, kps=KPS, t_updates=T_UPDATES,
                            seed=seed, n_trials=12)
        for e in entries:
            rec = e.record
            if rec.excluded:
                continue
            key = (e.k_p, e.t_update)
            wins[key].append(rec.success)
            if rec.success:
                errors[key].append(tracking_error(rec, SPEC))
            if e.trial < 4:
                early.append(rec.success)
            elif e.trial >= 8:
                late.append(rec.success)
        _, hists = summarize_sweep(entries, SPEC)
        medians.append([h.median for h in hists])
    runtime = (time.perf_counter() - start) / len(seeds)
    return SweepSummary(
        success={k: 100.0 * np.mean(v) for k, v in wins.items()},
        error={k: float(np.mean(v)) for k, v in errors.items()},
        drop=100.0 * (np.mean(early) - np.mean(late)),
        medians=medians,
        runtime=runtime * len(seeds),
    )


@pytest.fixture(scope="module")
def calibrated():
    return _summarize(SEEDS, BeetleParams())


@pytest.fixture(scope="module")
def unattenuated():
    return _summarize(SEEDS, BeetleParams(attenuation_rate=0.0))


def test_turn_table_round_trip():
    params = BeetleParams(attenuation_rate=0.0)
    table = TurnResponseTable()
    start = time.perf_counter()
    records = [run_open_loop(params, [(f"{side}_antenna", f)] * 10_000, seed=i)
               for i, (f, side) in enumerate((f, s) for f in BIN_CENTERS for s in ("left", "right"))]
    stats = reconstruct_turn_response(records)
    runtime = time.perf_counter() - start
    worst_z = worst_sd = 0.0
    for (b, side), s in stats.items():
        mean = getattr(table, f"{side}_mean")[b]
        sd = getattr(table, f"{side}_sd")[b]
        worst_z = max(worst_z, abs(s.mean - mean) / (s.sd / math.sqrt(s.n)))
        worst_sd = max(worst_sd, abs(s.sd / sd - 1.0))
    ok = len(stats) == 8 and worst_z < 3.0 and worst_sd < 0.10 and runtime < 10.0
    report(1, ok, f"worst mean offset {worst_z:.2f} SE, worst sd error {100 * worst_sd:.1f}%, "
                  f"{runtime:.1f} s")
    assert ok


def test_sweep_trend(calibrated):
    s, e = calibrated.success, calibrated.error
    best = s[(0.5, 1.0)]
    a = best >= 85.0 and all(best >= v for v in s.values())
    b = e[(0.5, 1.0)] < e[(0.25, 1.0)] and e[(0.5, 1.0)] < e[(0.75, 1.0)]
    c = s[(0.75, 1.5)] > s[(0.25, 1.5)] and s[(0.75, 1.5)] > s[(0.5, 1.5)]
    off = {k: s[k] - REFERENCE_SUCCESS[k] for k in s}
    within = all(abs(v) <= 10.0 for v in off.values())
    fast = calibrated.runtime < 300.0
    rates = " ".join(f"{kp}/{tu}:{s[(kp, tu)]:.0f}" for tu in T_UPDATES for kp in KPS)
    errs = " ".join(f"{kp}:{e[(kp, 1.0)]:.1f}" for kp in KPS)
    report(2, a and b and c and within and fast,
           f"(a) {a} (b) {b} (c) {c} rates within 10 pp {within} runtime {calibrated.runtime:.0f} s | "
           f"success {rates} | error at 1.0 s {errs}")
    assert a, "success at (0.5, 1.0) is not the maximum or is below 85%"
    assert b, "tracking error at (0.5, 1.0) is not the minimum at t_update 1.0"
    assert c, "success at (0.75, 1.5) is not the maximum at t_update 1.5"
    assert within, f"success offsets from the measured rates: {off}"
    assert fast


def test_frequency_medians_increase_with_gain(calibrated, unattenuated):
    medians = calibrated.medians + unattenuated.medians
    ok = all(m[0] < m[1] < m[2] for m in medians)
    report(3, ok, "per-gain medians " + "; ".join(" < ".join(f"{v:.1f}" for v in m) for m in medians))
    assert ok


def test_attenuation_drop(calibrated, unattenuated):
    ok = 15.0 <= calibrated.drop <= 30.0 and abs(unattenuated.drop) <= 5.0
    report(4, ok, f"first-4 minus last-4 success {calibrated.drop:.1f} pp calibrated, "
                  f"{unattenuated.drop:.1f} pp without attenuation")
    assert ok


def test_geometry_oracles():
    rng = np.random.default_rng(2024)
    points = np.column_stack([rng.uniform(-175, 1025, 10_000), rng.uniform(-300, 300, 10_000)])
    proj_err = max(abs(project_onto_path(SPEC, p)[1] - refined_projection(p)[1]) for p in points)

    area_err = 0.0
    xs = np.linspace(0.0, 850.0, 8501)
    for _ in range(100):
        amp = rng.uniform(1.0, 80.0) * rng.choice([-1.0, 1.0])
        m = int(rng.integers(1, 7))

        def traj(x):
            return SPEC.y(x) + amp * np.sin(m * np.pi * x / 850.0)

        got = area_between(np.column_stack([xs, traj(xs)]), SPEC)
        ref = grid_area(traj, SPEC.y, 0.0, 850.0, step=0.1)
        area_err = max(area_err, abs(got / ref - 1.0))

    carrot_err = 0.0
    for x, look in zip(rng.uniform(0, 850, 1000), rng.uniform(5, 200, 1000)):
        tx, ty = carrot_target(SPEC, path_point(SPEC, x), look)
        carrot_err = max(carrot_err, abs(ty - path_point(SPEC, tx)[1]))

    ok = proj_err < 1e-6 and area_err < 5e-3 and carrot_err < 1e-6
    report(5, ok, f"projection {proj_err:.1e} mm, area {100 * area_err:.3f}%, carrot {carrot_err:.1e} mm")
    assert ok


def test_pipeline_exactness():
    rec = next(r for r in (run_trial(TrialConfig(seed=s)) for s in range(50)) if r.success)
    n = 1201
    t, x, y = rec.t[:n], rec.x[:n], rec.y[:n]
    exact = np.array_equal(moving_average(t, x), brute_moving_average(list(t), list(x)))

    short = dataclasses.replace(rec, t=t, x=x, y=y, heading=rec.heading[:n], tracked=rec.tracked[:n])
    d = distance_to_path_series(short, SPEC)[1]
    v = instantaneous_speed_series(short)[1]
    d_err = float(np.max(np.abs(d - distance_series(list(t), list(x), list(y)))))
    v_err = float(np.max(np.abs(v - speed_series(list(t), list(x), list(y)))))

    rng = np.random.default_rng(7)
    f_err = 0.0
    for _ in range(200):
        a = rng.normal(10, 3, rng.integers(3, 30))
        b = rng.normal(12, 4, rng.integers(3, 30))
        f_err = max(f_err, abs(one_way_anova([a, b]).F - pooled_t_test(a, b).t ** 2))
    p_err = abs(welch_t_test(WELCH_A, WELCH_B).p - WELCH_P)

    ok = exact and d_err < 1e-6 and v_err < 1e-9 and f_err < 1e-9 and p_err < 1e-3
    report(6, ok, f"moving average bit-exact {exact}, distance {d_err:.1e} mm, speed {v_err:.1e} mm/s, "
                  f"F - t^2 {f_err:.1e}, Welch p {p_err:.1e}")
    assert ok


def test_sweep_determinism(tmp_path):
    config = tmp_path / "config.json"
    config.write_text('{"sweep": {"n_beetles": 2, "n_trials": 2}}', encoding="utf-8")
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert main(["sweep", "--config", str(config), "--seed", "11", "--out", str(out)]) == 0
        outputs.append({p.relative_to(out): p.read_bytes() for p in sorted(Path(out).rglob("*"))
                        if p.is_file()})
    ok = outputs[0] == outputs[1] and any(str(p).endswith(".jsonl") for p in outputs[0]) \
        and any(str(p).endswith(".csv") for p in outputs[0])
    report(7, ok, f"{len(outputs[0])} files byte-identical across two runs")
    assert ok
