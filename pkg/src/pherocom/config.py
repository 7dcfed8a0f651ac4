"""Simulation configuration and its flat ``key = value`` file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .pheromone import DepositionParams
from .policy import STRATEGY_NAMES, StrategyParams
from .robot import CycleParams, Radii
from .vibit import CostModel

MODES = ("decentralized", "centralized")


class ConfigError(ValueError):
    """Raised for unknown keys, bad values or violated constraints."""


@dataclass(frozen=True)
class SimConfig:
    environment: str = "e1"
    robots: int = 3
    steps: int = 10_000
    beta: float = 0.005
    psi_max: float = 100.0
    alpha: float = 0.5
    delta: float = 0.1
    eta: float = 2.0
    mu: float = 0.3
    nu: float = 0.3
    r_v: float = 2.0
    r_d: float = 2.0
    r_t: float = 6.0
    strategy: str = "heterogeneous"
    g_d: int = 1
    mode: str = "decentralized"
    seed: int = 0
    header_bytes: int = 12
    per_cell_bytes: int = 8
    deposit_falloff: str = "distance"

    def __post_init__(self) -> None:
        if self.robots < 1:
            raise ConfigError("robots must be at least 1")
        if self.steps < 0:
            raise ConfigError("steps must be non-negative")
        if not 0 < self.beta <= 1:
            raise ConfigError("beta must lie in (0, 1]")
        if self.g_d < 1:
            raise ConfigError("g_d must be at least 1")
        if self.strategy not in STRATEGY_NAMES:
            raise ConfigError(f"strategy must be one of {', '.join(STRATEGY_NAMES)}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}")
        if self.header_bytes < 0 or self.per_cell_bytes < 0:
            raise ConfigError("byte costs must be non-negative")
        try:
            self.radii, self.deposition, self.strategy_params
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def radii(self) -> Radii:
        return Radii(self.r_v, self.r_d, self.r_t)

    @property
    def deposition(self) -> DepositionParams:
        return DepositionParams(self.psi_max, self.alpha, self.delta, self.eta,
                                self.deposit_falloff)

    @property
    def strategy_params(self) -> StrategyParams:
        return StrategyParams(self.mu, self.nu)

    @property
    def cost(self) -> CostModel:
        return CostModel(self.header_bytes, self.per_cell_bytes)

    def cycle_params(self) -> CycleParams:
        return CycleParams(self.beta, self.deposition, self.strategy_params, self.g_d,
                           self.steps, self.cost)

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def with_overrides(self, overrides: Mapping[str, str]) -> "SimConfig":
        return self.replace(**{k: _coerce(k, v) for k, v in overrides.items()})

    def to_text(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)}\n"
                       for f in dataclasses.fields(self))


_FIELDS = {f.name: f for f in dataclasses.fields(SimConfig)}


def _coerce(key: str, raw: str):
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    kind = _FIELDS[key].type
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return raw.lower() if key in ("strategy", "mode", "deposit_falloff") else raw


def parse_config(text: str, base_dir: str | Path | None = None) -> SimConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    A relative ``environment`` path is resolved against ``base_dir``.
    """
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key = key.strip()
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    fields = {k: _coerce(k, v) for k, v in values.items()}
    env = fields.get("environment")
    if env is not None and base_dir is not None and _looks_like_path(env):
        path = Path(env)
        if not path.is_absolute():
            fields["environment"] = str(Path(base_dir) / path)
    try:
        return SimConfig(**fields)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _looks_like_path(name: str) -> bool:
    return "/" in name or name.endswith(".map")


def load_config(path: str | Path) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, path.parent)
