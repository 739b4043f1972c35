"""Key-value configuration files for lattice experiments.

Example::

    # su2 Gribov scan
    group = su2
    N = 128, 256
    seed = 42
    t_max = 8
    steps = 32

Unknown keys are rejected so typos do not silently fall back to defaults.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .core import BOUNDARIES, MIN_SITES
from .groups import GROUPS


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeSettings:
    group: str = "su2"
    N: tuple = (128,)
    seed: int = 42
    boundary: str = "free"
    t: float = 0.25           # equivariance: size of the gauge transformation
    kappa: float = 0.5        # strength of the field-dependent transformation
    t_max: float = 8.0
    steps: int = 32
    eps: float = 1e-2
    trials: int = 100
    tolerance: float = 1e-8
    cutoff: float = 1e-10
    halving_band: float = 0.2
    absolute_bound: float = 1e-3
    stability_band: float = 0.3
    crossing_agreement: float = 0.05
    floor_factor: float = 10.0
    fraction: float = 0.95

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ConfigError(f"unknown group {self.group!r}")
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"unknown boundary {self.boundary!r}")
        if not self.N or any(n < MIN_SITES for n in self.N):
            raise ConfigError(f"every N must be at least {MIN_SITES}")
        if self.steps <= 0 or self.trials <= 0:
            raise ConfigError("steps and trials must be positive")

    def with_overrides(self, **kw) -> "LatticeSettings":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


_TYPES = {f.name: f.type for f in fields(LatticeSettings)}


def _convert(key: str, raw: str):
    kind = _TYPES[key]
    try:
        if key == "N":
            return tuple(int(x) for x in raw.replace(",", " ").split())
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_settings(text: str, base: Optional[LatticeSettings] = None) -> LatticeSettings:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    values = {}
    for key, raw in parser["run"].items():
        if key not in _TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = _convert(key, raw)
    return replace(base or LatticeSettings(), **values)


def load_settings(path, base: Optional[LatticeSettings] = None) -> LatticeSettings:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_settings(text, base)
