"""JSON run configuration.

A config file is one JSON object with the sections ``path``, ``arena``,
``beetle``, ``controller``, ``trial``, ``sweep`` and ``markers``. Every section
and key is optional; missing keys take the documented defaults and unknown keys
are rejected. :func:`config_to_dict` writes every key explicitly so that
``parse -> dump -> parse`` returns an equal document.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from .controller import ControllerConfig
from .errors import ConfigError, CyborgNavError
from .geometry import ArenaSpec, PathSpec
from .plant import BeetleParams, TurnResponseTable
from .trial import KP_GRID, T_UPDATE_GRID, TrialConfig

__all__ = [
    "SweepConfig",
    "MarkerConfig",
    "RunConfig",
    "SEED_ENV",
    "parse_config",
    "config_to_dict",
    "load_config",
    "dump_config",
    "resolve_seed",
]

SEED_ENV = "CYBORGNAV_SEED"
SECTIONS = ("path", "arena", "beetle", "controller", "trial", "sweep", "markers")
_TRIAL_KEYS = ("lookahead", "arrival_radius", "timeout", "frame_dt", "seed", "direction",
               "dropout_rate", "heading_jitter", "heading_offset", "plant_noise")


@dataclass(frozen=True)
class SweepConfig:
    n_beetles: int = 19
    n_trials: int = 12
    k_p: tuple[float, ...] = KP_GRID
    t_update: tuple[float, ...] = T_UPDATE_GRID
    workers: int = 1

    def __post_init__(self):
        if self.n_beetles < 1 or self.n_trials < 1 or self.workers < 1:
            raise ConfigError("sweep counts must be at least 1")
        if not self.k_p or not self.t_update:
            raise ConfigError("sweep grids must not be empty")


@dataclass(frozen=True)
class MarkerConfig:
    """Rig layout for marker ingestion; markers are numbered 1-3 in the CSV."""

    front: int = 1
    frame_rate: float = 100.0

    def __post_init__(self):
        if self.front not in (1, 2, 3):
            raise ConfigError("markers.front must be 1, 2 or 3")
        if not self.frame_rate > 0:
            raise ConfigError("markers.frame_rate must be positive")


@dataclass(frozen=True)
class RunConfig:
    trial: TrialConfig = field(default_factory=TrialConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    markers: MarkerConfig = field(default_factory=MarkerConfig)

    @property
    def seed(self) -> int:
        return int(self.trial.seed)

    def with_seed(self, seed: int) -> "RunConfig":
        return dataclasses.replace(self, trial=self.trial.replace(seed=int(seed)))


# --------------------------------------------------------------------------
# validation helpers


def _number(section: str, key: str, value, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number")
    if integer:
        if isinstance(value, float):
            if not value.is_integer():
                raise ConfigError(f"{section}.{key} must be an integer")
            value = int(value)
        return value
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be finite")
    return value


def _number_list(section: str, key: str, value, length: int | None = None) -> tuple[float, ...]:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"{section}.{key} must be a list of numbers")
    if length is not None and len(value) != length:
        raise ConfigError(f"{section}.{key} must have {length} entries")
    return tuple(_number(section, key, v) for v in value)


def _check_keys(section: str, data, allowed) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be a JSON object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(unknown)}")
    return data


def _scalar_section(section: str, data: dict, cls, skip=()) -> dict:
    """Coerce the scalar fields of dataclass ``cls`` according to their defaults."""
    defaults = {f.name: f.default for f in dataclasses.fields(cls)
                if f.default is not dataclasses.MISSING}
    out = {}
    for key, value in data.items():
        if key in skip:
            continue
        default = defaults.get(key)
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"{section}.{key} must be true or false")
            out[key] = value
        elif isinstance(default, str):
            if not isinstance(value, str):
                raise ConfigError(f"{section}.{key} must be a string")
            out[key] = value
        elif isinstance(default, int):
            out[key] = _number(section, key, value, integer=True)
        else:
            out[key] = _number(section, key, value)
    return out


def _field_names(cls) -> list[str]:
    return [f.name for f in dataclasses.fields(cls)]


# --------------------------------------------------------------------------
# parse / dump


def _parse_beetle(data: dict) -> BeetleParams:
    _check_keys("beetle", data, _field_names(BeetleParams))
    kwargs = _scalar_section("beetle", data, BeetleParams, skip=("turn_table",))
    if "turn_table" in data:
        table = _check_keys("beetle.turn_table", data["turn_table"], _field_names(TurnResponseTable))
        kwargs["turn_table"] = TurnResponseTable(
            **{k: _number_list("beetle.turn_table", k, v, 4) for k, v in table.items()})
    return BeetleParams(**kwargs)


def _parse_arena(data: dict) -> ArenaSpec:
    _check_keys("arena", data, _field_names(ArenaSpec))
    kwargs = _scalar_section("arena", data, ArenaSpec, skip=("center",))
    if data.get("center") is not None:
        kwargs["center"] = _number_list("arena", "center", data["center"], 2)
    return ArenaSpec(**kwargs)


def _parse_sweep(data: dict) -> SweepConfig:
    _check_keys("sweep", data, _field_names(SweepConfig))
    kwargs = _scalar_section("sweep", data, SweepConfig, skip=("k_p", "t_update"))
    for key in ("k_p", "t_update"):
        if key in data:
            kwargs[key] = _number_list("sweep", key, data[key])
    return SweepConfig(**kwargs)


def parse_config(data: dict) -> RunConfig:
    """Validate a decoded JSON document and build the run configuration.

    Raises:
        ConfigError: on unknown sections or keys, wrong types or values that
            fail the component validators.
    """
    data = _check_keys("config", data, SECTIONS)
    try:
        path = PathSpec(**_scalar_section(
            "path", _check_keys("path", data.get("path", {}), _field_names(PathSpec)), PathSpec))
        arena = _parse_arena(data.get("arena", {}))
        beetle = _parse_beetle(data.get("beetle", {}))
        controller = ControllerConfig(**_scalar_section(
            "controller", _check_keys("controller", data.get("controller", {}),
                                      _field_names(ControllerConfig)), ControllerConfig))
        trial_kw = _scalar_section(
            "trial", _check_keys("trial", data.get("trial", {}), _TRIAL_KEYS), TrialConfig)
        trial = TrialConfig(controller=controller, beetle=beetle, path=path, arena=arena, **trial_kw)
        trial.validate()
        sweep = _parse_sweep(data.get("sweep", {}))
        markers = MarkerConfig(**_scalar_section(
            "markers", _check_keys("markers", data.get("markers", {}), _field_names(MarkerConfig)),
            MarkerConfig))
    except ConfigError:
        raise
    except (CyborgNavError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(trial=trial, sweep=sweep, markers=markers)


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def config_to_dict(config: RunConfig) -> dict:
    """Full JSON-ready document with every key written out."""
    trial = config.trial
    return {
        "path": _plain(dataclasses.asdict(trial.path)),
        "arena": _plain(dataclasses.asdict(trial.arena)),
        "beetle": _plain(trial.beetle.to_dict()),
        "controller": _plain(trial.controller.to_dict()),
        "trial": {k: getattr(trial, k) for k in _TRIAL_KEYS},
        "sweep": _plain(dataclasses.asdict(config.sweep)),
        "markers": dataclasses.asdict(config.markers),
    }


def load_config(path: str | os.PathLike | None) -> RunConfig:
    """Read a config file; ``None`` gives the defaults.

    Raises:
        OSError: when the file cannot be read.
        ConfigError: when it is not valid JSON or fails validation.
    """
    if path is None:
        return RunConfig()
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return parse_config(data)


def dump_config(config: RunConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2) + "\n"


def resolve_seed(config: RunConfig, cli_seed: int | None = None, environ=None) -> RunConfig:
    """Apply seed overrides: ``--seed`` beats ``CYBORGNAV_SEED`` beats the file."""
    environ = os.environ if environ is None else environ
    if cli_seed is not None:
        return config.with_seed(cli_seed)
    raw = environ.get(SEED_ENV)
    if raw is not None and raw.strip():
        try:
            seed = int(raw.strip())
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None
        if not 0 <= seed < 2**64:
            raise ConfigError(f"{SEED_ENV} must be a 64-bit unsigned integer")
        return config.with_seed(seed)
    return config
