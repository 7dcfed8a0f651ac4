"""Virtual pheromone maps: deposition, evaporation and max-merge."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .grid import Cell

DEFAULT_PSI_MAX = 100.0


@dataclass(frozen=True)
class DepositionParams:
    psi_max: float = DEFAULT_PSI_MAX
    alpha: float = 0.5
    delta: float = 0.1
    eta: float = 2.0
    falloff: str = "distance"

    def __post_init__(self) -> None:
        if not self.psi_max > 0:
            raise ValueError("psi_max must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.falloff not in ("distance", "flat"):
            raise ValueError("falloff must be 'distance' or 'flat'")


def deposit_factor(params: DepositionParams, r: float) -> float:
    """Fraction of the remaining headroom deposited at distance ``r``."""
    if params.falloff == "flat":
        return params.alpha
    return params.alpha * (params.delta * math.e) ** (params.eta * r / math.pi)


def deposit_amount(psi_ij: float, params: DepositionParams, r: float) -> float:
    """Pheromone a robot adds to a cell holding ``psi_ij`` at distance ``r``."""
    if psi_ij > params.psi_max:
        raise ValueError(f"concentration {psi_ij} exceeds psi_max {params.psi_max}")
    return (params.psi_max - psi_ij) * deposit_factor(params, r)


class PheromoneMap:
    """Concentration grid over an environment; walls stay at zero."""

    __slots__ = ("values", "free", "psi_max")

    def __init__(self, free: np.ndarray, psi_max: float = DEFAULT_PSI_MAX,
                 values: np.ndarray | None = None):
        self.free = free
        self.psi_max = float(psi_max)
        if values is None:
            values = np.zeros(free.shape, dtype=np.float64)
        self.values = values

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __getitem__(self, cell: Cell) -> float:
        return float(self.values[cell])

    def copy(self) -> "PheromoneMap":
        return PheromoneMap(self.free, self.psi_max, self.values.copy())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PheromoneMap):
            return NotImplemented
        return self.psi_max == other.psi_max and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"PheromoneMap(shape={self.shape}, total={self.values.sum():.4g})"


def step_update(pmap: PheromoneMap, beta: float,
                deposits: Iterable[tuple[Cell, float]]) -> PheromoneMap:
    """One evaporation step plus the summed deposits, clamped to [0, psi_max].

    Deposits are accumulated in the order given.
    """
    if not 0 < beta <= 1:
        raise ValueError(f"evaporation rate must lie in (0, 1], got {beta}")
    psi = pmap.values
    out = psi - beta * psi
    for cell, amount in deposits:
        if amount < 0:
            raise ValueError("deposits must be non-negative")
        if not pmap.free[cell]:
            raise ValueError(f"deposit on wall cell {cell}")
        out[cell] += amount
    np.clip(out, 0.0, pmap.psi_max, out=out)
    return PheromoneMap(pmap.free, pmap.psi_max, out)


def merge_cell(local: float, received: float) -> float:
    """Keep the higher concentration; under evaporation it is the fresher one."""
    return received if received > local else local
