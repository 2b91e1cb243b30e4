"""Closed-loop navigation trials, sessions and the gain/update-interval sweep.

One trial: the beetle starts in the origin circle heading along the path and
is driven by the controller every ``t_update`` seconds until it enters the
destination circle, leaves the arena, or runs out of time. The frame loop runs
in :func:`_trial_kernel`, which numba compiles unless disabled.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._accel import njit
from .controller import CH_ELYTRA, CHANNELS, ControllerConfig, StimulusCommand, _decide, command_for
from .errors import ConfigError, GeometryError, PlantError
from .geometry import ArenaSpec, PathSpec, Pose2D, _carrot, _heading_error, _project
from .plant import (
    BIN_CENTERS,
    P_THRUST,
    P_THRUST_SD,
    P_KAPPA,
    P_GMIN,
    _antenna_dose,
    _antenna_gain,
    _habituate,
    S_H,
    S_X,
    S_Y,
    BeetleParams,
    _advance,
    _attenuation,
    _start_thrust,
    _start_turn,
    _thrust_boost,
    _turn_mean_sd,
    initial_state,
)

__all__ = [
    "OUTCOMES",
    "TrialConfig",
    "TrialRecord",
    "run_trial",
    "flag_exclusions",
    "run_session",
    "run_sweep",
    "run_open_loop",
    "SweepEntry",
    "KP_GRID",
    "T_UPDATE_GRID",
]

OUTCOMES = ("success", "out_of_bounds", "timeout")
OUT_SUCCESS, OUT_BOUNDS, OUT_TIMEOUT = 0, 1, 2
KP_GRID = (0.25, 0.50, 0.75)
T_UPDATE_GRID = (1.0, 1.5, 2.0)
UNILATERAL_RUN_LIMIT = 15
MISS_TRACKING_LIMIT = 0.20


@dataclass(frozen=True)
class TrialConfig:
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    beetle: BeetleParams = field(default_factory=BeetleParams)
    path: PathSpec = field(default_factory=PathSpec)
    arena: ArenaSpec = field(default_factory=ArenaSpec)
    lookahead: float = 80.0
    arrival_radius: float = 40.0
    timeout: float = 300.0
    frame_dt: float = 0.01
    seed: int = 0
    direction: str = "forward"
    dropout_rate: float = 0.0
    heading_jitter: float = 30.0
    heading_offset: float = 0.0
    plant_noise: bool = True

    def validate(self) -> None:
        if not self.timeout > 0:
            raise ConfigError("timeout must be positive")
        if not 0 < self.frame_dt <= 0.02:
            raise ConfigError("frame_dt must lie in (0, 0.02]")
        if not 0 <= self.dropout_rate < 1:
            raise ConfigError("dropout_rate must lie in [0, 1)")
        if self.direction not in ("forward", "reversed"):
            raise ConfigError("direction must be 'forward' or 'reversed'")
        if not self.lookahead > 0 or not self.arrival_radius > 0:
            raise ConfigError("lookahead and arrival_radius must be positive")
        if self.heading_jitter < 0:
            raise ConfigError("heading_jitter must be non-negative")
        if self.controller.t_update < self.frame_dt:
            raise ConfigError("t_update must be at least one frame")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    @property
    def sign(self) -> int:
        return 1 if self.direction == "forward" else -1

    def replace(self, **changes) -> "TrialConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class TrialRecord:
    """Everything logged for one trial; the input of all analysis.

    Frame arrays share one index. Untracked frames carry the last tracked pose.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    heading: np.ndarray
    tracked: np.ndarray
    stimuli: list[StimulusCommand]
    outcome: str
    excluded: str | None = None
    config_ref: dict = field(default_factory=dict)

    @property
    def n_frames(self) -> int:
        return len(self.t)

    @property
    def success(self) -> bool:
        return self.outcome == "success"

    def xy(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def poses(self) -> list[Pose2D]:
        return [Pose2D(float(a), float(b), float(c)) for a, b, c in zip(self.x, self.y, self.heading)]


@dataclass(frozen=True)
class SweepEntry:
    beetle: int
    k_p: float
    t_update: float
    trial: int
    record: TrialRecord


# --------------------------------------------------------------------------
# frame loop


@njit
def _trial_kernel(amp, lam, x0, x1, dest_x, dest_y, radius, bounds, sign,
                  lookahead, arrival,
                  k_p, threshold, f_min, f_max, upd_frames, ant_dur, ely_dur,
                  p, means, sds, centers, s, n_ant, n_ely,
                  frame_dt, max_frames, frame_z, stim_z, drop_u, dropout,
                  frames, tracked, stims):
    n_stim = 0
    has_target = False
    tx = 0.0
    ty = 0.0
    lx = s[S_X]
    ly = s[S_Y]
    lh = s[S_H]
    outcome = -1
    k = 0
    while True:
        x = s[S_X]
        y = s[S_Y]
        h = s[S_H]
        seen = True
        if dropout > 0.0 and drop_u[k] < dropout:
            seen = False
        dx = x - dest_x
        dy = y - dest_y
        if dx * dx + dy * dy <= radius * radius:
            outcome = OUT_SUCCESS
        elif x < bounds[0] or x > bounds[1] or y < bounds[2] or y > bounds[3]:
            outcome = OUT_BOUNDS
        elif k == max_frames - 1:
            outcome = OUT_TIMEOUT
        if outcome >= 0:
            # the terminating event is always observed
            seen = True
        if seen:
            lx = x
            ly = y
            lh = h
        frames[k, 0] = k * frame_dt
        frames[k, 1] = lx
        frames[k, 2] = ly
        frames[k, 3] = lh
        tracked[k] = seen
        if outcome >= 0:
            break

        if seen and k % upd_frames == 0:
            fx, fy, _ = _project(amp, lam, x0, x1, x, y)
            regen = not has_target
            if has_target:
                ddx = x - tx
                ddy = y - ty
                if ddx * ddx + ddy * ddy < arrival * arrival:
                    regen = True
                elif sign * (fx - tx) > 0.0:
                    regen = True
            if regen:
                tx, ty, _ = _carrot(amp, lam, x0, x1, fx, fy, lookahead, sign)
                has_target = True
            if (x - tx) ** 2 + (y - ty) ** 2 > 1e-18:
                theta = _heading_error(x, y, h, tx, ty)
                channel, f = _decide(k_p, threshold, f_min, f_max, theta)
                z = stim_z[n_stim]
                if channel == CH_ELYTRA:
                    g = _attenuation(p[P_KAPPA], p[P_GMIN], n_ely)
                    boost = _thrust_boost(p[P_THRUST] * g, p[P_THRUST_SD] * p[P_THRUST], z)
                    _start_thrust(s, p, boost, ely_dur)
                    n_ely += 1
                else:
                    g = _antenna_gain(s, p, n_ant)
                    mean, sd = _turn_mean_sd(means, sds, centers, f, channel)
                    angle = mean * g + sd * z
                    _start_turn(s, p, angle, ant_dur, f, g)
                    _habituate(s, p, f)
                    n_ant += _antenna_dose(p, f)
                stims[n_stim, 0] = k * frame_dt
                stims[n_stim, 1] = channel
                stims[n_stim, 2] = f
                n_stim += 1

        _advance(s, p, frame_dt, frame_z[k, 0], frame_z[k, 1])
        k += 1
    return k + 1, n_stim, outcome, n_ant, n_ely


def _simulate(config: TrialConfig, n_ant: float = 0.0, n_ely: int = 0) -> tuple[TrialRecord, float, int]:
    """Run one trial starting from the given attenuation counters."""
    try:
        config.validate()
    except (GeometryError, PlantError) as exc:
        raise ConfigError(str(exc)) from exc
    ctrl, path, params = config.controller, config.path, config.beetle
    sign = config.sign
    upd_frames = int(round(ctrl.t_update / config.frame_dt))
    max_frames = int(round(config.timeout / config.frame_dt)) + 1
    max_stim = max_frames // upd_frames + 2

    rng = np.random.default_rng(np.random.SeedSequence(int(config.seed)))
    jitter = rng.uniform(-config.heading_jitter, config.heading_jitter) if config.heading_jitter > 0 else 0.0
    if config.plant_noise:
        frame_z = rng.standard_normal((max_frames, 2))
        stim_z = rng.standard_normal(max_stim)
    else:
        frame_z = np.zeros((max_frames, 2))
        stim_z = np.zeros(max_stim)
    drop_u = rng.random(max_frames) if config.dropout_rate > 0 else np.ones(1)

    ox, oy = path.origin(sign)
    dest_x, dest_y = path.destination(sign)
    heading0 = path.tangent_heading(ox, sign) + config.heading_offset + jitter
    state = initial_state(Pose2D(ox, oy, heading0), params)
    s = state.vector(params)
    means, sds = params.turn_table.as_arrays()

    frames = np.empty((max_frames, 4))
    tracked = np.empty(max_frames, dtype=np.bool_)
    stims = np.empty((max_stim, 3))
    n_frames, n_stim, outcome, n_ant, n_ely = _trial_kernel(
        path.amplitude, path.wavelength, path.x_start, path.x_end, dest_x, dest_y,
        path.endpoint_radius, np.array(config.arena.bounds(path)), sign,
        config.lookahead, config.arrival_radius,
        ctrl.k_p, ctrl.theta_threshold, ctrl.f_min, ctrl.f_max, upd_frames,
        ctrl.antenna_duration / 1000.0, ctrl.elytra_duration / 1000.0,
        params.vector(), means, sds, BIN_CENTERS, s, float(n_ant), int(n_ely),
        config.frame_dt, max_frames, frame_z, stim_z, drop_u, float(config.dropout_rate),
        frames, tracked, stims,
    )
    stimuli = [command_for(ctrl, int(c), float(f), float(t)) for t, c, f in stims[:n_stim]]
    record = TrialRecord(
        t=frames[:n_frames, 0].copy(),
        x=frames[:n_frames, 1].copy(),
        y=frames[:n_frames, 2].copy(),
        heading=frames[:n_frames, 3].copy(),
        tracked=tracked[:n_frames].copy(),
        stimuli=stimuli,
        outcome=OUTCOMES[outcome],
        config_ref={
            "seed": int(config.seed),
            "k_p": ctrl.k_p,
            "t_update": ctrl.t_update,
            "direction": config.direction,
        },
    )
    return record, float(n_ant), int(n_ely)


def run_trial(config: TrialConfig) -> TrialRecord:
    """Simulate one navigation trial with a fresh (unattenuated) beetle."""
    record, _, _ = _simulate(config)
    return record


# --------------------------------------------------------------------------
# open-loop stimulation


@njit
def _open_loop_kernel(p, means, sds, centers, s, channels, freqs, z, frame_z,
                      every, ant_dur, ely_dur, frame_dt, frames):
    n_ant = 0.0
    n_ely = 0
    n = channels.shape[0]
    n_frames = frames.shape[0]
    for k in range(n_frames):
        frames[k, 0] = k * frame_dt
        frames[k, 1] = s[S_X]
        frames[k, 2] = s[S_Y]
        frames[k, 3] = s[S_H]
        if k == n_frames - 1:
            break
        i = k // every
        if k % every == 0 and i < n:
            channel = channels[i]
            if channel == CH_ELYTRA:
                g = _attenuation(p[P_KAPPA], p[P_GMIN], n_ely)
                boost = _thrust_boost(p[P_THRUST] * g, p[P_THRUST_SD] * p[P_THRUST], z[i])
                _start_thrust(s, p, boost, ely_dur)
                n_ely += 1
            else:
                f = freqs[i]
                g = _antenna_gain(s, p, n_ant)
                mean, sd = _turn_mean_sd(means, sds, centers, f, channel)
                _start_turn(s, p, mean * g + sd * z[i], ant_dur, f, g)
                _habituate(s, p, f)
                n_ant += _antenna_dose(p, f)
        _advance(s, p, frame_dt, frame_z[k, 0], frame_z[k, 1])


def run_open_loop(params: BeetleParams, schedule: Sequence[tuple[str, float]],
                  interval: float = 0.6, seed: int = 0, plant_noise: bool = False,
                  controller: ControllerConfig | None = None, frame_dt: float = 0.01) -> TrialRecord:
    """Deliver a fixed stimulus schedule to a free beetle, one every ``interval`` s.

    ``schedule`` lists (channel, frequency) pairs. There is no arena or
    destination, so the record's outcome is always ``"timeout"``. With
    ``plant_noise`` off only the response draws are random, which makes the
    per-stimulus heading change equal the drawn turn angle.
    """
    ctrl = controller or ControllerConfig()
    every = int(round(interval / frame_dt))
    if every * frame_dt + 1e-12 < max(ctrl.antenna_duration, ctrl.elytra_duration) / 1000.0:
        raise ConfigError("interval shorter than the stimulus response")
    try:
        codes = np.array([CHANNELS.index(ch) for ch, _ in schedule], dtype=np.int64)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    freqs = np.array([f for _, f in schedule], dtype=np.float64)
    antenna = codes != CH_ELYTRA
    if np.any((freqs[antenna] < ctrl.f_min) | (freqs[antenna] > ctrl.f_max)):
        raise PlantError("frequency out of range")
    n_frames = len(schedule) * every + 1
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    z = rng.standard_normal(len(schedule))
    frame_z = rng.standard_normal((n_frames, 2)) if plant_noise else np.zeros((n_frames, 2))
    state = initial_state(Pose2D(0.0, 0.0, 0.0), params)
    s = state.vector(params)
    means, sds = params.turn_table.as_arrays()
    frames = np.empty((n_frames, 4))
    _open_loop_kernel(params.vector(), means, sds, BIN_CENTERS, s, codes, freqs, z, frame_z,
                      every, ctrl.antenna_duration / 1000.0, ctrl.elytra_duration / 1000.0,
                      frame_dt, frames)
    stimuli = [command_for(ctrl, int(c), float(f), i * every * frame_dt)
               for i, (c, f) in enumerate(zip(codes, freqs))]
    return TrialRecord(t=frames[:, 0].copy(), x=frames[:, 1].copy(), y=frames[:, 2].copy(),
                       heading=frames[:, 3].copy(), tracked=np.ones(n_frames, dtype=bool),
                       stimuli=stimuli, outcome="timeout",
                       config_ref={"seed": int(seed), "mode": "open_loop"})


# --------------------------------------------------------------------------
# exclusion rules


def longest_unilateral_run(channels: Iterable[str]) -> int:
    """Longest run of consecutive same-side antenna stimuli; thrust breaks a run."""
    best = run = 0
    prev = None
    for ch in channels:
        if ch == "elytra_both":
            prev, run = None, 0
            continue
        run = run + 1 if ch == prev else 1
        prev = ch
        best = max(best, run)
    return best


def flag_exclusions(record: TrialRecord) -> TrialRecord:
    """Copy of ``record`` with the exclusion flag set from the record alone.

    Unilateral runs (>= 15 same-side antenna stimuli in a row) take precedence
    over miss-tracking (> 20 % of frames untracked).
    """
    excluded = None
    if longest_unilateral_run(s.channel for s in record.stimuli) >= UNILATERAL_RUN_LIMIT:
        excluded = "unilateral_runs"
    elif record.n_frames and np.count_nonzero(~record.tracked) > MISS_TRACKING_LIMIT * record.n_frames:
        excluded = "miss_tracking"
    return dataclasses.replace(record, excluded=excluded)


# --------------------------------------------------------------------------
# sessions and sweeps


def derive_seed(master: int, *key: int) -> int:
    """Deterministic 64-bit child seed of ``master`` for the index path ``key``."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_session(base: TrialConfig, n_trials: int = 12) -> list[TrialRecord]:
    """Run ``n_trials`` consecutive trials on one beetle.

    Directions alternate starting with forward, attenuation counters carry over
    between trials and every trial seed is derived from ``base.seed``.
    """
    if n_trials < 1:
        raise ConfigError("n_trials must be at least 1")
    records = []
    n_ant, n_ely = 0.0, 0
    for i in range(n_trials):
        cfg = base.replace(seed=derive_seed(base.seed, i),
                           direction="forward" if i % 2 == 0 else "reversed")
        record, n_ant, n_ely = _simulate(cfg, n_ant, n_ely)
        record.config_ref["trial"] = i
        records.append(flag_exclusions(record))
    return records


def _session_job(args):
    base, n_trials = args
    return run_session(base, n_trials)


def run_sweep(base: TrialConfig, n_beetles: int = 19, kps: Sequence[float] = KP_GRID,
              t_updates: Sequence[float] = T_UPDATE_GRID, seed: int | None = None,
              n_trials: int = 12, workers: int = 1) -> list[SweepEntry]:
    """Simulate every beetle over every (k_p, t_update) pair.

    Each beetle visits the combinations in its own seeded random order and runs
    a full ``n_trials`` session per combination. Output order (beetle, visit
    order, trial) and content do not depend on ``workers``.
    """
    if n_beetles < 1:
        raise ConfigError("n_beetles must be at least 1")
    master = base.seed if seed is None else int(seed)
    combos = [(kp, tu) for tu in t_updates for kp in kps]
    jobs = []
    for b in range(n_beetles):
        order = np.random.default_rng(derive_seed(master, b)).permutation(len(combos))
        for ci in order:
            kp, tu = combos[int(ci)]
            ctrl = dataclasses.replace(base.controller, k_p=kp, t_update=tu)
            cfg = base.replace(controller=ctrl, seed=derive_seed(master, b, int(ci)))
            jobs.append((b, kp, tu, cfg))

    args = [(cfg, n_trials) for _, _, _, cfg in jobs]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            sessions = list(pool.map(_session_job, args, chunksize=4))
    else:
        sessions = [_session_job(a) for a in args]

    out = []
    for (b, kp, tu, _), records in zip(jobs, sessions):
        for i, rec in enumerate(records):
            rec.config_ref["beetle"] = b
            out.append(SweepEntry(b, kp, tu, i, rec))
    return out
