"""Run configuration: YAML file merged with command-line flags.

Flags always win over file values, which win over built-in defaults. The file
is a nested mapping; the flat RunConfig below is what the rest of the code
consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Union

import yaml

from .mesh import BACKEND_NAMES
from .routing import RoutingMode

DELAYS_OFF = "off"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    manifest: Optional[str] = None
    backend: str = "scripted"
    mode: str = RoutingMode.NATIVE.value
    baseline_mode: str = RoutingMode.TEXT_BOTTLENECK.value
    theta: Optional[float] = None
    seed: Optional[int] = None
    out: Optional[str] = None
    simulated_delays: str = DELAYS_OFF  # a profile name, or "off"
    parallel_subtasks: bool = True

    def validate(self) -> "RunConfig":
        from .agents import DELAY_PROFILES

        if self.backend not in BACKEND_NAMES:
            raise ConfigError(
                f"backend must be one of {BACKEND_NAMES}, not {self.backend!r}")
        for label, value in (("mode", self.mode), ("baseline_mode", self.baseline_mode)):
            try:
                RoutingMode(value)
            except ValueError:
                raise ConfigError(
                    f"{label} must be one of "
                    f"{[m.value for m in RoutingMode]}, not {value!r}") from None
        if RoutingMode(self.mode) is RoutingMode.ADAPTIVE and self.theta is None:
            raise ConfigError("adaptive mode requires --theta")
        if self.theta is not None and not isinstance(self.theta, (int, float)):
            raise ConfigError("theta must be a number")
        if self.simulated_delays != DELAYS_OFF and \
                self.simulated_delays not in DELAY_PROFILES:
            raise ConfigError(
                f"simulated_delays must be {DELAYS_OFF!r} or one of "
                f"{sorted(DELAY_PROFILES)}, not {self.simulated_delays!r}")
        if not isinstance(self.parallel_subtasks, bool):
            raise ConfigError("parallel_subtasks must be a boolean")
        return self

    def delay_profile(self) -> Optional[dict]:
        from .agents import DELAY_PROFILES

        if self.simulated_delays == DELAYS_OFF:
            return None
        return DELAY_PROFILES[self.simulated_delays]


# Where each RunConfig field lives in the config file.
_FILE_KEYS = {
    "manifest": ("benchmark", "manifest"),
    "backend": ("experiment", "backend"),
    "mode": ("router", "mode"),
    "baseline_mode": ("router", "baseline_mode"),
    "theta": ("router", "theta"),
    "seed": ("experiment", "seed"),
    "out": ("experiment", "out"),
    "simulated_delays": ("orchestrator", "simulated_delays"),
    "parallel_subtasks": ("orchestrator", "parallel_subtasks"),
}


def read_config_file(path: Union[str, Path]) -> dict:
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file is not valid YAML: {exc}") from exc
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError("config file must be a YAML mapping")
    return raw


def _dig(tree: dict, keys: tuple[str, ...]):
    node = tree
    for key in keys:
        if not isinstance(node, dict) or key not in node:
            return None
        node = node[key]
    return node


def build_config(file_path: Optional[Union[str, Path]] = None,
                 **flags) -> RunConfig:
    """Defaults, overlaid with file values, overlaid with explicit flags.

    Flags passed as None count as "not given" and never shadow file values.
    """
    config = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    if file_path is not None:
        tree = read_config_file(file_path)
        for name, keys in _FILE_KEYS.items():
            value = _dig(tree, keys)
            if value is not None:
                setattr(config, name, value)
    for name, value in flags.items():
        if name not in known:
            raise ConfigError(f"unknown config field {name!r}")
        if value is not None:
            setattr(config, name, value)
    return config.validate()
