"""Target selection: candidate cells on the vision ring and the five choice strategies."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .grid import Cell, Environment, cells_on_circumference, line_clear
from .pheromone import DEFAULT_PSI_MAX, PheromoneMap


class StrategyKind(enum.Enum):
    RANDOM = "random"
    DETERMINISTIC = "deterministic"
    SIMPLE = "simple"
    ELITIST = "elitist"
    INERTIAL = "inertial"

    @property
    def code(self) -> int:
        return _CODES[self]

    @property
    def stochastic(self) -> bool:
        return self is not StrategyKind.DETERMINISTIC


_CODES = {kind: i for i, kind in enumerate(StrategyKind)}

STRATEGY_NAMES = tuple(k.value for k in StrategyKind) + ("heterogeneous",)


@dataclass(frozen=True)
class StrategyParams:
    mu: float = 0.3
    nu: float = 0.3
    epsilon: float = 1e-6

    def __post_init__(self) -> None:
        if not 0 < self.mu <= 1:
            raise ValueError("mu must lie in (0, 1]")
        if not 0 < self.nu <= 1:
            raise ValueError("nu must lie in (0, 1]")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class Candidate:
    cell: Cell
    psi: float
    bearing: float


def assign_strategies(name: str, n_robots: int) -> list[StrategyKind]:
    """Per-robot strategies; ``heterogeneous`` gives the first ceil(2N/3) robots inertial."""
    if name == "heterogeneous":
        n_inertial = -(-2 * n_robots // 3)
        return [StrategyKind.INERTIAL if i < n_inertial else StrategyKind.DETERMINISTIC
                for i in range(n_robots)]
    try:
        kind = StrategyKind(name)
    except ValueError:
        raise ValueError(f"unknown strategy {name!r}; expected one of {STRATEGY_NAMES}") from None
    return [kind] * n_robots


def wrap_angle(theta: float) -> float:
    """Wrap into (-pi, pi]."""
    while theta > math.pi:
        theta -= 2.0 * math.pi
    while theta <= -math.pi:
        theta += 2.0 * math.pi
    return theta


def direction(a: Cell, b: Cell) -> float:
    return math.atan2(b[0] - a[0], b[1] - a[1])


def candidate_cells(env: Environment, pos: Cell, r_v: float) -> list[Cell]:
    """Reachable ring cells, falling back to the unit ring, then to staying put."""
    ring = [c for c in cells_on_circumference(env, pos, r_v) if line_clear(env, pos, c)]
    if not ring and r_v != 1:
        ring = [c for c in cells_on_circumference(env, pos, 1) if line_clear(env, pos, c)]
    return ring or [pos]


def candidate_set(env: Environment, pmap: PheromoneMap, pos: Cell, heading: float,
                  r_v: float) -> list[Candidate]:
    out = []
    for cell in candidate_cells(env, pos, r_v):
        bearing = 0.0 if cell == pos else wrap_angle(direction(pos, cell) - heading)
        out.append(Candidate(cell, pmap[cell], bearing))
    return out


def elite_count(mu: float, n: int) -> int:
    # The tolerance keeps products like 0.3 * 10 from rounding up past 3.
    return min(n, max(1, math.ceil(mu * n - 1e-9)))


def strategy_weights(kind: StrategyKind, params: StrategyParams,
                     candidates: list[Candidate], psi_max: float = DEFAULT_PSI_MAX) -> list[float]:
    """Unnormalised selection weights for the stochastic strategies."""
    n = len(candidates)
    if kind is StrategyKind.RANDOM:
        return [1.0] * n
    if kind is StrategyKind.DETERMINISTIC:
        raise ValueError("the deterministic strategy has no weights")
    weights = [(psi_max - c.psi) + params.epsilon for c in candidates]
    if kind is StrategyKind.SIMPLE:
        return weights
    k = elite_count(params.mu, n)
    for i, ci in enumerate(candidates):
        rank = sum(1 for j, cj in enumerate(candidates)
                   if cj.psi < ci.psi or (cj.psi == ci.psi and j < i))
        if rank < k:
            weights[i] *= 2.0
    if kind is StrategyKind.INERTIAL:
        forward = min(range(n), key=lambda i: abs(candidates[i].bearing))
        weights[forward] *= 1.0 + params.nu * n
    return weights


def _deterministic_index(candidates: list[Candidate]) -> int:
    best = 0
    for i in range(1, len(candidates)):
        c, b = candidates[i], candidates[best]
        if c.psi < b.psi or (c.psi == b.psi and abs(c.bearing) < abs(b.bearing)):
            best = i
    return best


def choose_index(kind: StrategyKind, params: StrategyParams, candidates: list[Candidate],
                 rng: np.random.Generator, psi_max: float = DEFAULT_PSI_MAX) -> int:
    if not candidates:
        raise ValueError("no candidates to choose from")
    if kind is StrategyKind.DETERMINISTIC:
        return _deterministic_index(candidates)
    u = rng.random()
    n = len(candidates)
    if kind is StrategyKind.RANDOM:
        return min(int(u * n), n - 1)
    weights = strategy_weights(kind, params, candidates, psi_max)
    total = 0.0
    for w in weights:
        total += w
    target = u * total
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if target < acc:
            return i
    return n - 1


def choose_target(kind: StrategyKind, params: StrategyParams, candidates: list[Candidate],
                  rng: np.random.Generator, psi_max: float = DEFAULT_PSI_MAX) -> Cell:
    """Pick the next target cell.

    Stochastic strategies draw exactly one uniform from ``rng``; the
    deterministic strategy draws nothing.
    """
    return candidates[choose_index(kind, params, candidates, rng, psi_max)].cell
