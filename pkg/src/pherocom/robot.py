"""Per-robot state machine.

Main cycle: detection, choice, deposition, evaporation, movement. After
moving, a robot broadcasts every ``g_d`` local steps and then drains its
inbox. The final state is reached after ``steps`` completed cycles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Cell, Environment, cells_within, travel_path
from .pheromone import DepositionParams, PheromoneMap, deposit_amount, step_update
from .policy import StrategyKind, StrategyParams, candidate_set, choose_target, direction
from .vibit import (BroadcastMedium, CommCounters, CostModel, Message, PeerHistory,
                    aggregate, build_message)


@dataclass(frozen=True)
class Radii:
    r_v: float = 2.0
    r_d: float = 2.0
    r_t: float = 6.0

    def __post_init__(self) -> None:
        if self.r_v < 1:
            raise ValueError("vision radius must be at least 1")
        if self.r_d < self.r_v:
            raise ValueError("deposition radius must cover the vision radius")
        if self.r_t < 0:
            raise ValueError("transmission radius must be non-negative")


@dataclass(frozen=True)
class CycleParams:
    beta: float = 0.005
    deposition: DepositionParams = DepositionParams()
    strategy: StrategyParams = StrategyParams()
    g_d: int = 1
    steps: int = 10_000
    cost: CostModel = CostModel()


@dataclass
class Robot:
    id: int
    pos: Cell
    heading: float
    strategy: StrategyKind
    map: PheromoneMap
    radii: Radii
    rng: np.random.Generator = field(repr=False)
    timestep: int = 0
    history: PeerHistory = field(default_factory=PeerHistory)
    inbox: list[Message] = field(default_factory=list, repr=False)
    counters: CommCounters = field(default_factory=CommCounters)


@dataclass
class CycleEvents:
    """What one main cycle produced, for the metrics layer."""

    robot_id: int
    path: list[Cell]
    message: Message | None = None
    recipients: list[int] = field(default_factory=list)


def should_terminate(robot: Robot, steps: int) -> bool:
    return robot.timestep >= steps


def deposits_for(env: Environment, pmap: PheromoneMap, pos: Cell, r_d: float,
                 params: DepositionParams) -> list[tuple[Cell, float]]:
    return [(cell, deposit_amount(pmap[cell], params, d))
            for cell, d in cells_within(env, pos, r_d)]


def move(robot: Robot, target: Cell) -> list[Cell]:
    path = travel_path(robot.pos, target)
    if target != robot.pos:
        robot.heading = direction(robot.pos, target)
        robot.pos = target
    return path


def fsm_cycle(robot: Robot, env: Environment, medium: BroadcastMedium,
              params: CycleParams) -> CycleEvents:
    if should_terminate(robot, params.steps):
        raise RuntimeError(f"robot {robot.id} is in its final state")
    psi_max = robot.map.psi_max
    candidates = candidate_set(env, robot.map, robot.pos, robot.heading, robot.radii.r_v)
    target = choose_target(robot.strategy, params.strategy, candidates, robot.rng, psi_max)
    deposits = deposits_for(env, robot.map, robot.pos, robot.radii.r_d, params.deposition)
    robot.map = step_update(robot.map, params.beta, deposits)
    events = CycleEvents(robot.id, move(robot, target))

    if robot.timestep % params.g_d == 0:
        message = build_message(robot, env)
        events.message = message
        events.recipients = medium.broadcast(message, robot.pos, robot.radii.r_t,
                                             robot.counters, params.steps)
    for message in robot.inbox:
        aggregate(robot, message, params.cost)
    robot.inbox.clear()
    robot.timestep += 1
    return events
