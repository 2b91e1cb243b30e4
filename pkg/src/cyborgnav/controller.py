"""Steering/thrust feedback controller.

At each update the heading error to the current carrot target decides between
an antenna (steering) stimulus and an elytra (thrust) stimulus. Steering uses a
proportional frequency law, ``f = clamp(k_p * |theta|, f_min, f_max)`` with
``theta`` in degrees. The exact law of the original system is not published;
this one reproduces the reported frequency skew (low gains pile up at f_min,
high gains at f_max, 0.5 spreads across the band).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from ._accel import njit
from .errors import ConfigError
from .geometry import Pose2D, heading_error

__all__ = [
    "CHANNELS",
    "ControllerConfig",
    "StimulusCommand",
    "steering_frequency",
    "decide",
]

CHANNELS = ("left_antenna", "right_antenna", "elytra_both")
CH_LEFT, CH_RIGHT, CH_ELYTRA = 0, 1, 2


@dataclass(frozen=True)
class ControllerConfig:
    k_p: float = 0.5
    t_update: float = 1.0
    theta_threshold: float = 25.0
    f_min: float = 10.0
    f_max: float = 40.0
    antenna_duration: float = 400.0
    antenna_pulse_width: float = 2.0
    elytra_frequency: float = 20.0
    elytra_duration: float = 200.0
    elytra_duty: float = 50.0
    amplitude: float = 2.5

    def __post_init__(self):
        if not self.f_min < self.f_max:
            raise ConfigError("f_min must be below f_max")
        if not self.theta_threshold > 0:
            raise ConfigError("theta_threshold must be positive")
        if not self.t_update > 0:
            raise ConfigError("t_update must be positive")
        if not self.k_p > 0:
            raise ConfigError("k_p must be positive")
        if not (self.antenna_duration > 0 and self.elytra_duration > 0):
            raise ConfigError("stimulus durations must be positive")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class StimulusCommand:
    """One stimulus event. Durations and pulse widths in ms, amplitude in V."""

    channel: str
    frequency: float
    duration: float
    amplitude: float = 2.5
    pulse_width: float | None = None
    duty: float | None = None
    timestamp: float = 0.0

    @property
    def is_antenna(self) -> bool:
        return self.channel != "elytra_both"


@njit
def _steering_frequency(k_p, theta, f_min, f_max):
    f = k_p * abs(theta)
    if f < f_min:
        return f_min
    if f > f_max:
        return f_max
    return f


@njit
def _decide(k_p, threshold, f_min, f_max, theta):
    """(channel code, frequency) for heading error ``theta``; frequency 0 for thrust."""
    if abs(theta) > threshold:
        channel = CH_RIGHT if theta > 0 else CH_LEFT
        return channel, _steering_frequency(k_p, theta, f_min, f_max)
    return CH_ELYTRA, 0.0


def steering_frequency(config: ControllerConfig, theta: float) -> float:
    """Antenna stimulation frequency (Hz) for heading error ``theta`` (deg)."""
    return _steering_frequency(config.k_p, float(theta), config.f_min, config.f_max)


def command_for(config: ControllerConfig, channel: int, frequency: float, now: float) -> StimulusCommand:
    if channel == CH_ELYTRA:
        return StimulusCommand("elytra_both", config.elytra_frequency, config.elytra_duration,
                               config.amplitude, duty=config.elytra_duty, timestamp=now)
    return StimulusCommand(CHANNELS[channel], frequency, config.antenna_duration,
                           config.amplitude, pulse_width=config.antenna_pulse_width, timestamp=now)


def decide(config: ControllerConfig, pose: Pose2D, target, now: float = 0.0) -> StimulusCommand:
    """Navigation command for the current pose and carrot target.

    A left turn (positive error) is produced by stimulating the right antenna
    and vice versa. Errors at or below the threshold give a thrust command.
    """
    theta = heading_error(pose, target)
    channel, f = _decide(config.k_p, config.theta_threshold, config.f_min, config.f_max, theta)
    return command_for(config, channel, f, now)
