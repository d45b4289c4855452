"""Run configuration: defaults, JSON loading, validation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .gates import ChannelParams
from .protocol import InputState

MAX_SEED = 2**64 - 1

#: Verification thresholds; a config may override any subset by name.
DEFAULT_TOLERANCES: Mapping[str, float] = {
    "unitarity": 1e-12,
    "branch": 1e-12,
    "post_state": 1e-10,
    "product": 1e-12,
    "total_probability": 1e-11,
    "correction_fidelity": 1e-10,
    "factored": 1e-9,
    "flatten": 1e-9,
    "deferred": 1e-10,
}


class ConfigError(Exception):
    """Invalid configuration input; the CLI maps this to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    input: InputState
    channel: ChannelParams
    trials: int = 20000
    seed: int = 42
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed <= MAX_SEED:
            raise ConfigError(f"seed must be an integer in [0, 2^64), got {self.seed!r}")
        object.__setattr__(self, "tolerances", _check_tolerances(self.tolerances))

    def tolerance(self, name: str) -> float:
        """The override for ``name`` if given, else the package default."""
        if name not in DEFAULT_TOLERANCES:
            raise KeyError(f"unknown tolerance {name!r}")
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])


def _check_tolerances(raw: Any) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"tolerances must be an object, got {raw!r}")
    unknown = set(raw) - set(DEFAULT_TOLERANCES)
    if unknown:
        raise ConfigError(
            f"unknown tolerance names: {sorted(unknown)}; known: {sorted(DEFAULT_TOLERANCES)}"
        )
    for name, value in raw.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"tolerance {name!r} must be a number, got {value!r}")
        if not math.isfinite(value) or value <= 0.0:
            raise ConfigError(f"tolerance {name!r} must be positive and finite, got {value!r}")
    return {k: float(v) for k, v in raw.items()}


def default_config() -> RunConfig:
    return RunConfig(
        input=InputState(0.5, 0.5, 0.5, 0.5),
        channel=ChannelParams(0.3, 0.4, 0.5, math.sqrt(0.5)),
    )


def _coerce_complex(entry: Any, where: str) -> complex:
    if isinstance(entry, bool):
        raise ConfigError(f"{where}: booleans are not amplitudes")
    if isinstance(entry, (int, float)):
        return complex(entry)
    if isinstance(entry, (list, tuple)) and len(entry) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry
    ):
        return complex(entry[0], entry[1])
    raise ConfigError(f"{where}: expected a number or a [re, im] pair, got {entry!r}")


def _parse_input(raw: Any, renormalize: bool) -> InputState:
    if not isinstance(raw, (list, tuple)) or len(raw) != 4:
        raise ConfigError(f"input must list 4 amplitudes, got {raw!r}")
    amps = np.array([_coerce_complex(e, f"input[{i}]") for i, e in enumerate(raw)])
    norm = float(np.linalg.norm(amps))
    if renormalize:
        if norm == 0.0:
            raise ConfigError("input amplitudes are all zero")
        amps = amps / norm
    try:
        return InputState(*amps)
    except ValueError as exc:
        raise ConfigError(f"input: {exc}") from exc


def _parse_channel(raw: Any, renormalize: bool) -> ChannelParams:
    if not isinstance(raw, (list, tuple)) or len(raw) != 4:
        raise ConfigError(f"channel must list 4 real coefficients, got {raw!r}")
    vals = []
    for i, e in enumerate(raw):
        if isinstance(e, bool) or not isinstance(e, (int, float)):
            raise ConfigError(f"channel[{i}]: expected a real number, got {e!r}")
        vals.append(float(e))
    if renormalize:
        norm = math.sqrt(sum(v * v for v in vals))
        if norm == 0.0:
            raise ConfigError("channel coefficients are all zero")
        vals = [v / norm for v in vals]
    try:
        return ChannelParams(*vals)
    except ValueError as exc:
        raise ConfigError(f"channel: {exc}") from exc


def config_from_dict(data: Any, renormalize: bool = False) -> RunConfig:
    """Build a RunConfig from parsed JSON, starting from the defaults.

    Recognised keys: ``input`` (4 amplitudes, each a number or [re, im]
    pair), ``channel`` (4 real coefficients), ``trials``, ``seed``, and
    ``tolerances`` (an object overriding named verification thresholds; see
    ``DEFAULT_TOLERANCES``).  Unknown keys are rejected.  With ``renormalize``
    the input and channel vectors are scaled to unit norm instead of being
    rejected when slightly off.
    """
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a JSON object, got {type(data).__name__}")
    unknown = set(data) - {"input", "channel", "trials", "seed", "tolerances"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = default_config()
    if "input" in data:
        cfg = replace(cfg, input=_parse_input(data["input"], renormalize))
    if "channel" in data:
        cfg = replace(cfg, channel=_parse_channel(data["channel"], renormalize))
    if "trials" in data:
        trials = data["trials"]
        if isinstance(trials, bool) or not isinstance(trials, int):
            raise ConfigError(f"trials must be an integer, got {trials!r}")
        cfg = replace(cfg, trials=trials)
    if "seed" in data:
        seed = data["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError(f"seed must be an integer, got {seed!r}")
        cfg = replace(cfg, seed=seed)
    if "tolerances" in data:
        cfg = replace(cfg, tolerances=data["tolerances"])
    return cfg


def load_config(path: str | Path, renormalize: bool = False) -> RunConfig:
    """Load a JSON config file; any problem raises ConfigError."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data, renormalize=renormalize)


def config_to_dict(cfg: RunConfig) -> dict:
    """JSON-ready form of a config (inverse of :func:`config_from_dict`)."""
    out = {
        "input": [[v.real, v.imag] for v in cfg.input.as_tuple()],
        "channel": list(cfg.channel.as_tuple()),
        "trials": cfg.trials,
        "seed": cfg.seed,
    }
    if cfg.tolerances:
        out["tolerances"] = dict(sorted(cfg.tolerances.items()))
    return out
