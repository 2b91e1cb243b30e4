"""Stochastic beetle plant.

Unicycle kinematics driven by trapezoidal stimulus responses:

* antenna stimulus -> contralateral turn whose angle follows the frequency-graded
  turn table, plus a small forward escape run;
* elytra stimulus -> transient forward thrust;
* between responses the walker relaxes to a free-walking speed with heading
  diffusion.

Responses weaken linearly with the number of stimuli already received on the
same channel class, down to a floor. Antenna stimuli can optionally count in
proportion to ``(f / 25 Hz) ** dose_exponent`` so that high-frequency trains,
which deliver more charge, wear the response down faster.

The numeric core works on a flat float64 state vector so that the trial loop in
:mod:`cyborgnav.trial` can run it under numba; the dataclass API below wraps the
same kernels.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from ._accel import njit
from .errors import PlantError
from .geometry import Pose2D, _wrap_deg

__all__ = [
    "LEFT",
    "RIGHT",
    "BIN_EDGES",
    "BIN_CENTERS",
    "TurnResponseTable",
    "BeetleParams",
    "ActiveResponse",
    "BeetleState",
    "sample_turn_angle",
    "apply_antenna_stimulus",
    "apply_elytra_stimulus",
    "attenuation_gain",
    "step",
]

LEFT = "left"
RIGHT = "right"

# frequency bins (Hz) of the turn table and the centres used for interpolation
BIN_EDGES = ((10, 16), (17, 24), (25, 32), (33, 40))
BIN_CENTERS = np.array([13.0, 20.5, 28.5, 36.5])
F_MIN, F_MAX = 10.0, 40.0

# measured induced turning angles (deg); left antenna -> right (negative) turns
TABLE_LEFT_MEAN = (-13.55, -17.23, -20.12, -27.04)
TABLE_LEFT_SD = (7.25, 9.88, 9.95, 13.84)
TABLE_RIGHT_MEAN = (15.01, 17.60, 24.11, 28.50)
TABLE_RIGHT_SD = (10.46, 13.56, 15.51, 17.34)

# flat state vector layout
(S_X, S_Y, S_H, S_V, S_W, S_T, S_KIND, S_TON, S_TEND, S_PLATEAU, S_BOOST, S_VON, S_RAMP,
 S_HAB) = range(14)
STATE_SIZE = 14
KIND_NONE, KIND_TURN, KIND_THRUST = 0, 1, 2

# flat parameter vector layout
(P_RAMP, P_SPEED_MEAN, P_RELAX, P_SPEED_NOISE, P_HEAD_NOISE, P_ESCAPE,
 P_THRUST, P_THRUST_SD, P_KAPPA, P_GMIN, P_DOSE_EXP, P_HAB_GAIN, P_HAB_TAU) = range(13)
PARAM_SIZE = 13
# antenna stimuli at this frequency count as exactly one stimulus toward attenuation
DOSE_REFERENCE_HZ = 25.0


@dataclass(frozen=True)
class TurnResponseTable:
    """Mean and sd of the induced turn (deg) per frequency bin.

    Row order follows :data:`BIN_EDGES`.
    """

    left_mean: tuple[float, ...] = TABLE_LEFT_MEAN
    left_sd: tuple[float, ...] = TABLE_LEFT_SD
    right_mean: tuple[float, ...] = TABLE_RIGHT_MEAN
    right_sd: tuple[float, ...] = TABLE_RIGHT_SD

    def __post_init__(self):
        for name in ("left_mean", "left_sd", "right_mean", "right_sd"):
            values = tuple(float(v) for v in getattr(self, name))
            if len(values) != 4:
                raise PlantError(f"{name} needs one value per frequency bin")
            object.__setattr__(self, name, values)
        if not all(v < 0 for v in self.left_mean) or not all(v > 0 for v in self.right_mean):
            raise PlantError("left-antenna means must be negative and right-antenna means positive")
        for means in (self.left_mean, self.right_mean):
            mags = np.abs(means)
            if not np.all(np.diff(mags) > 0):
                raise PlantError("turn magnitude must increase with frequency bin")
        if min(self.left_sd + self.right_sd) < 0:
            raise PlantError("standard deviations must be non-negative")

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(means, sds) as ``(2, 4)`` arrays, row 0 = left antenna, row 1 = right."""
        means = np.array([self.left_mean, self.right_mean], dtype=np.float64)
        sds = np.array([self.left_sd, self.right_sd], dtype=np.float64)
        return means, sds

    def mean(self, f: float, side: str) -> float:
        means, _ = self.as_arrays()
        return float(np.interp(f, BIN_CENTERS, means[_side_index(side)]))

    def sd(self, f: float, side: str) -> float:
        _, sds = self.as_arrays()
        return float(np.interp(f, BIN_CENTERS, sds[_side_index(side)]))


@dataclass(frozen=True)
class BeetleParams:
    """Calibrated plant parameters (mm, s, deg)."""

    turn_table: TurnResponseTable = field(default_factory=TurnResponseTable)
    thrust_gain: float = 33.075
    thrust_sd_fraction: float = 0.25
    ramp_time: float = 0.1
    free_speed_mean: float = 7.593
    free_speed_relaxation: float = 1.805
    free_speed_noise: float = 7.32
    free_heading_noise: float = 26.236
    escape_run_gain: float = 0.551
    attenuation_rate: float = 0.0008
    attenuation_floor: float = 0.4
    dose_exponent: float = 1.435
    habituation_gain: float = 0.0
    habituation_recovery: float = 2.0

    def __post_init__(self):
        if isinstance(self.turn_table, dict):
            object.__setattr__(self, "turn_table", TurnResponseTable(**self.turn_table))
        rates = (self.thrust_sd_fraction, self.ramp_time, self.free_speed_mean,
                 self.free_speed_relaxation, self.free_speed_noise, self.free_heading_noise,
                 self.escape_run_gain, self.attenuation_rate, self.dose_exponent,
                 self.habituation_gain)
        if any(not (math.isfinite(r) and r >= 0) for r in rates):
            raise PlantError("plant rates must be finite and non-negative")
        if not self.thrust_gain > 0:
            raise PlantError("thrust_gain must be positive")
        if not 0 < self.attenuation_floor <= 1:
            raise PlantError("attenuation_floor must lie in (0, 1]")
        if not self.habituation_recovery > 0:
            raise PlantError("habituation_recovery must be positive")

    def vector(self) -> np.ndarray:
        p = np.empty(PARAM_SIZE, dtype=np.float64)
        p[P_RAMP] = self.ramp_time
        p[P_SPEED_MEAN] = self.free_speed_mean
        p[P_RELAX] = self.free_speed_relaxation
        p[P_SPEED_NOISE] = self.free_speed_noise
        p[P_HEAD_NOISE] = self.free_heading_noise
        p[P_ESCAPE] = self.escape_run_gain
        p[P_THRUST] = self.thrust_gain
        p[P_THRUST_SD] = self.thrust_sd_fraction
        p[P_KAPPA] = self.attenuation_rate
        p[P_GMIN] = self.attenuation_floor
        p[P_DOSE_EXP] = self.dose_exponent
        p[P_HAB_GAIN] = self.habituation_gain
        p[P_HAB_TAU] = self.habituation_recovery
        return p

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "BeetleParams":
        data = dict(data)
        if "turn_table" in data and isinstance(data["turn_table"], dict):
            data["turn_table"] = TurnResponseTable(**data["turn_table"])
        return cls(**data)


@dataclass(frozen=True)
class ActiveResponse:
    kind: str  # "turn" or "thrust"
    start_time: float
    end_time: float
    turn_angle: float = 0.0
    speed_boost: float = 0.0


@dataclass
class BeetleState:
    pose: Pose2D
    linear_speed: float = 0.0
    angular_speed: float = 0.0
    time: float = 0.0
    active_response: ActiveResponse | None = None
    antenna_stim_count: int = 0
    elytra_stim_count: int = 0
    consecutive_unilateral: tuple[str | None, int] = (None, 0)
    # frequency-weighted antenna count; equals antenna_stim_count when dose_exponent is 0
    antenna_dose: float = 0.0
    # speed at response onset, needed to rebuild the speed profile
    onset_speed: float = 0.0
    # short-term habituation level; decays between stimuli
    habituation: float = 0.0

    def vector(self, params: BeetleParams) -> np.ndarray:
        s = np.zeros(STATE_SIZE, dtype=np.float64)
        s[S_X], s[S_Y], s[S_H] = self.pose.x, self.pose.y, self.pose.heading
        s[S_V], s[S_W], s[S_T] = self.linear_speed, self.angular_speed, self.time
        s[S_RAMP] = params.ramp_time
        s[S_HAB] = self.habituation
        r = self.active_response
        if r is not None:
            s[S_KIND] = KIND_TURN if r.kind == "turn" else KIND_THRUST
            s[S_TON], s[S_TEND] = r.start_time, r.end_time
            s[S_BOOST] = r.speed_boost
            s[S_VON] = self.onset_speed
            if r.kind == "turn":
                s[S_PLATEAU] = _plateau_rate(r.turn_angle, r.end_time - r.start_time, params.ramp_time)
        return s

    def with_vector(self, s: np.ndarray, **changes) -> "BeetleState":
        kind = int(s[S_KIND])
        response = None
        if kind == KIND_TURN:
            angle = self.active_response.turn_angle if self.active_response else 0.0
            angle = changes.pop("turn_angle", angle)
            response = ActiveResponse("turn", s[S_TON], s[S_TEND], angle, s[S_BOOST])
        elif kind == KIND_THRUST:
            response = ActiveResponse("thrust", s[S_TON], s[S_TEND], 0.0, s[S_BOOST])
        changes.pop("turn_angle", None)
        return dataclasses.replace(
            self,
            pose=Pose2D(float(s[S_X]), float(s[S_Y]), float(s[S_H])),
            linear_speed=float(s[S_V]),
            angular_speed=float(s[S_W]),
            time=float(s[S_T]),
            active_response=response,
            onset_speed=float(s[S_VON]),
            habituation=float(s[S_HAB]),
            **changes,
        )


def _side_index(side: str) -> int:
    if side in (LEFT, "left_antenna"):
        return 0
    if side in (RIGHT, "right_antenna"):
        return 1
    raise PlantError(f"unknown antenna side {side!r}")


# --------------------------------------------------------------------------
# kernels


@njit
def _plateau_rate(angle, duration, ramp):
    """Plateau angular speed of a trapezoid (ramp up, hold) integrating to ``angle``."""
    if ramp > duration:
        ramp = duration
    return angle / (duration - 0.5 * ramp)


@njit
def _trapezoid_integral(plateau, ramp, duration, a, b):
    """Integral of the ramp-and-hold profile between local times a < b (clipped to [0, duration])."""
    if a < 0.0:
        a = 0.0
    if b > duration:
        b = duration
    if b <= a:
        return 0.0
    total = 0.0
    if ramp > 0.0:
        ra = min(a, ramp)
        rb = min(b, ramp)
        if rb > ra:
            total += plateau * (rb * rb - ra * ra) / (2.0 * ramp)
    ha = max(a, ramp)
    if b > ha:
        total += plateau * (b - ha)
    return total


@njit
def _ramp_fraction(tau, ramp):
    if ramp <= 0.0:
        return 1.0
    if tau >= ramp:
        return 1.0
    if tau <= 0.0:
        return 0.0
    return tau / ramp


@njit
def _attenuation(kappa, gmin, n):
    g = 1.0 - kappa * n
    return g if g > gmin else gmin


@njit
def _antenna_dose(p, f):
    if p[P_DOSE_EXP] == 0.0:
        return 1.0
    return (f / DOSE_REFERENCE_HZ) ** p[P_DOSE_EXP]


@njit
def _antenna_gain(s, p, n_dose):
    """Cumulative attenuation times the short-term habituation factor."""
    return _attenuation(p[P_KAPPA], p[P_GMIN], n_dose) / (1.0 + s[S_HAB])


@njit
def _habituate(s, p, f):
    s[S_HAB] += p[P_HAB_GAIN] * _antenna_dose(p, f)


@njit
def _turn_mean_sd(means, sds, centers, f, side):
    return np.interp(f, centers, means[side]), np.interp(f, centers, sds[side])


@njit
def _start_turn(s, p, angle, duration, f, gain):
    s[S_KIND] = KIND_TURN
    s[S_TON] = s[S_T]
    s[S_TEND] = s[S_T] + duration
    s[S_PLATEAU] = _plateau_rate(angle, duration, p[P_RAMP])
    s[S_BOOST] = p[P_ESCAPE] * f * gain
    s[S_VON] = s[S_V]
    s[S_RAMP] = p[P_RAMP]


@njit
def _start_thrust(s, p, boost, duration):
    s[S_KIND] = KIND_THRUST
    s[S_TON] = s[S_T]
    s[S_TEND] = s[S_T] + duration
    s[S_PLATEAU] = 0.0
    s[S_BOOST] = boost
    s[S_VON] = s[S_V]
    s[S_RAMP] = p[P_RAMP]


@njit
def _advance(s, p, dt, zh, zv):
    """One unicycle step of length dt; zh, zv are standard normal draws."""
    t = s[S_T]
    kind = int(s[S_KIND])
    if kind != KIND_NONE and t >= s[S_TEND] - 1e-12:
        s[S_KIND] = KIND_NONE
        kind = KIND_NONE

    h = s[S_H]
    v = s[S_V]
    rad = math.radians(h)
    s[S_X] += v * math.cos(rad) * dt
    s[S_Y] += v * math.sin(rad) * dt

    if kind == KIND_NONE:
        dh = p[P_HEAD_NOISE] * math.sqrt(dt) * zh
        v_new = v + p[P_RELAX] * (p[P_SPEED_MEAN] - v) * dt + p[P_SPEED_NOISE] * math.sqrt(dt) * zv
    else:
        a = t - s[S_TON]
        b = a + dt
        duration = s[S_TEND] - s[S_TON]
        ramp = s[S_RAMP]
        if kind == KIND_TURN:
            dh = _trapezoid_integral(s[S_PLATEAU], ramp, duration, a, b)
        else:
            dh = 0.0
        v_new = s[S_VON] + s[S_BOOST] * _ramp_fraction(min(b, duration), ramp)
    if v_new < 0.0:
        v_new = 0.0
    if s[S_HAB] != 0.0:
        s[S_HAB] *= math.exp(-dt / p[P_HAB_TAU])
    s[S_H] = _wrap_deg(h + dh)
    s[S_W] = dh / dt
    s[S_V] = v_new
    s[S_T] = t + dt


# --------------------------------------------------------------------------
# public operations


def attenuation_gain(params: BeetleParams, n_stimuli: int) -> float:
    """Response gain after ``n_stimuli`` earlier stimuli on the same channel class."""
    if n_stimuli < 0:
        raise PlantError("stimulus count must be non-negative")
    return _attenuation(params.attenuation_rate, params.attenuation_floor, n_stimuli)


def sample_turn_angle(params: BeetleParams, f: float, side: str, rng=None, gain: float = 1.0) -> float:
    """Draw an induced turn angle (deg, left turns positive) for an antenna stimulus.

    ``side`` is the stimulated antenna. With ``rng=None`` the mean response is
    returned (zero-noise mode).
    """
    if not F_MIN <= f <= F_MAX:
        raise PlantError("frequency out of range")
    means, sds = params.turn_table.as_arrays()
    mean, sd = _turn_mean_sd(means, sds, BIN_CENTERS, float(f), _side_index(side))
    z = 0.0 if rng is None else rng.standard_normal()
    return float(mean * gain + sd * z)


def _channel_side(channel: str) -> str:
    if channel == "left_antenna":
        return LEFT
    if channel == "right_antenna":
        return RIGHT
    raise PlantError(f"{channel!r} is not an antenna channel")


def apply_antenna_stimulus(state: BeetleState, params: BeetleParams, command, rng=None) -> BeetleState:
    """Start the turn response to an antenna stimulus; returns the new state."""
    side = _channel_side(command.channel)
    p = params.vector()
    s = state.vector(params)
    gain = _antenna_gain(s, p, state.antenna_dose)
    angle = sample_turn_angle(params, command.frequency, side, rng, gain)
    _start_turn(s, p, angle, command.duration / 1000.0, float(command.frequency), gain)
    _habituate(s, p, float(command.frequency))
    prev_side, run = state.consecutive_unilateral
    run = run + 1 if prev_side == side else 1
    return state.with_vector(
        s,
        turn_angle=angle,
        antenna_stim_count=state.antenna_stim_count + 1,
        antenna_dose=state.antenna_dose + _antenna_dose(p, float(command.frequency)),
        consecutive_unilateral=(side, run),
    )


def apply_elytra_stimulus(state: BeetleState, params: BeetleParams, command, rng=None) -> BeetleState:
    """Start the forward thrust response to a bilateral elytra stimulus."""
    if command.channel != "elytra_both":
        raise PlantError(f"{command.channel!r} is not the elytra channel")
    gain = attenuation_gain(params, state.elytra_stim_count)
    z = 0.0 if rng is None else rng.standard_normal()
    boost = thrust_boost(params, gain, z)
    s = state.vector(params)
    _start_thrust(s, params.vector(), boost, command.duration / 1000.0)
    return state.with_vector(
        s,
        elytra_stim_count=state.elytra_stim_count + 1,
        consecutive_unilateral=(None, 0),
    )


@njit
def _thrust_boost(gain_mm_s, sd_mm_s, z):
    b = gain_mm_s + sd_mm_s * z
    return b if b > 0.0 else 0.0


def thrust_boost(params: BeetleParams, gain: float, z: float) -> float:
    """Forward speed increment for gain ``gain`` and standard normal draw ``z``."""
    return _thrust_boost(params.thrust_gain * gain, params.thrust_sd_fraction * params.thrust_gain, z)


def step(state: BeetleState, params: BeetleParams, dt: float, rng=None) -> BeetleState:
    """Advance the plant by ``dt`` seconds; ``rng=None`` disables free-walk noise."""
    if not dt > 0:
        raise PlantError("invalid timestep")
    if dt > 0.02:
        raise PlantError("invalid timestep: dt must not exceed 0.02 s")
    if rng is None:
        zh = zv = 0.0
    else:
        zh, zv = rng.standard_normal(2)
    s = state.vector(params)
    _advance(s, params.vector(), float(dt), float(zh), float(zv))
    return state.with_vector(s)


def initial_state(pose: Pose2D, params: BeetleParams) -> BeetleState:
    """Fresh beetle walking at the free-walking mean speed."""
    return BeetleState(pose=pose, linear_speed=params.free_speed_mean)
