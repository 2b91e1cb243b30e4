import pytest
from hypothesis import given
from hypothesis import strategies as st

from cyborgnav.controller import ControllerConfig, decide, steering_frequency
from cyborgnav.errors import ConfigError
from cyborgnav.geometry import Pose2D


def cfg(**kw):
    return ControllerConfig(**kw)


@pytest.mark.parametrize("k_p, theta, f", [
    (0.5, 60.0, 30.0),
    (0.75, 170.0, 40.0),
    (0.25, 30.0, 10.0),
    (0.5, -60.0, 30.0),
])
def test_steering_frequency(k_p, theta, f):
    assert steering_frequency(cfg(k_p=k_p), theta) == pytest.approx(f)


@given(st.sampled_from([0.25, 0.5, 0.75]), st.floats(-180, 180))
def test_frequency_clamped_and_even(k_p, theta):
    c = cfg(k_p=k_p)
    f = steering_frequency(c, theta)
    assert 10.0 <= f <= 40.0
    assert f == steering_frequency(c, -theta)


@given(st.floats(0, 180), st.floats(0, 180))
def test_frequency_monotone_in_error(a, b):
    c = cfg(k_p=0.5)
    lo, hi = sorted((a, b))
    assert steering_frequency(c, lo) <= steering_frequency(c, hi)


def pose_with_error(theta):
    # target at bearing 0 from the origin; heading -theta gives error +theta
    return Pose2D(0.0, 0.0, -theta), (100.0, 0.0)


def test_small_error_gives_thrust():
    pose, target = pose_with_error(10.0)
    cmd = decide(cfg(), pose, target, now=3.0)
    assert cmd.channel == "elytra_both"
    assert (cmd.frequency, cmd.duration, cmd.duty, cmd.timestamp) == (20.0, 200.0, 50.0, 3.0)
    assert not cmd.is_antenna


def test_left_error_stimulates_right_antenna():
    pose, target = pose_with_error(60.0)
    cmd = decide(cfg(k_p=0.5), pose, target)
    assert cmd.channel == "right_antenna"
    assert cmd.frequency == pytest.approx(30.0)
    assert cmd.duration == 400.0
    assert cmd.pulse_width == 2.0
    assert cmd.amplitude == 2.5


def test_right_error_stimulates_left_antenna():
    pose, target = pose_with_error(-90.0)
    cmd = decide(cfg(k_p=0.25), pose, target)
    assert cmd.channel == "left_antenna"
    assert cmd.frequency == pytest.approx(22.5)


def test_threshold_is_strict():
    pose, target = pose_with_error(25.0)
    assert decide(cfg(), pose, target).channel == "elytra_both"


@pytest.mark.parametrize("kw", [dict(f_min=40.0), dict(theta_threshold=0.0), dict(t_update=0.0),
                                dict(k_p=0.0), dict(antenna_duration=0.0)])
def test_invalid_config(kw):
    with pytest.raises(ConfigError):
        cfg(**kw)
