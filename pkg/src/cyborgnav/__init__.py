"""Closed-loop navigation simulator for an insect-machine hybrid walker.

A stochastic beetle plant is steered along a sine path by a proportional
heading controller that picks antenna or elytra stimuli; the package runs
trials and gain sweeps, logs them, and computes the tracking metrics.
"""

from .controller import ControllerConfig, StimulusCommand, decide, steering_frequency
from .errors import CyborgNavError
from .geometry import (
    ArenaSpec,
    PathSpec,
    Pose2D,
    arc_length,
    area_between,
    carrot_target,
    heading_error,
    path_point,
    project_onto_path,
)
from .metrics import moving_average, reconstruct_turn_response, summarize_sweep, tracking_error
from .plant import BeetleParams, BeetleState, TurnResponseTable
from .trial import TrialConfig, TrialRecord, run_open_loop, run_sweep, run_trial

__version__ = "0.1.0"

__all__ = [
    "ArenaSpec",
    "BeetleParams",
    "BeetleState",
    "ControllerConfig",
    "CyborgNavError",
    "PathSpec",
    "Pose2D",
    "StimulusCommand",
    "TrialConfig",
    "TrialRecord",
    "TurnResponseTable",
    "arc_length",
    "area_between",
    "carrot_target",
    "decide",
    "heading_error",
    "moving_average",
    "path_point",
    "project_onto_path",
    "reconstruct_turn_response",
    "run_open_loop",
    "run_sweep",
    "run_trial",
    "steering_frequency",
    "summarize_sweep",
    "tracking_error",
]
