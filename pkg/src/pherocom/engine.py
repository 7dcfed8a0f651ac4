"""Run orchestration: decentralized and centralized modes, seeding and sweeps.

Decentralized runs activate one robot at a time, drawn uniformly from the
robots still below the step limit, so local clocks drift apart. The
centralized baseline keeps one shared map and moves all robots in a fixed
order each global step. Later robots see the deposits of earlier ones, and
the map evaporates once per step.

Two interchangeable backends execute a run: ``"kernel"`` (compiled loops,
the default) and ``"reference"`` (the object-level state machine). They
consume the same random streams and produce identical results.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import SimConfig
from .grid import Cell, Environment, disc_offsets, travel_path
from .maps import resolve_environment
from .metrics import TaskPointTracker, cellsteps_record, new_cellsteps, snapshot_heatmap
from .pheromone import PheromoneMap, deposit_factor, step_update
from .policy import StrategyKind, assign_strategies, candidate_cells, candidate_set, \
    choose_target, direction
from .robot import Robot, deposits_for, fsm_cycle, move, should_terminate
from .vibit import BroadcastMedium, CommCounters, LogEntry, payload_size

ELITE_TOLERANCE = 1e-9


@dataclass
class Heatmap:
    step: int
    robot: int  # -1 for the shared centralized map
    values: np.ndarray


@dataclass
class RunResult:
    config: SimConfig
    taskpoints: int
    taskpoint_events: list[int]
    comm: CommCounters
    robot_comm: list[CommCounters]
    cellsteps: np.ndarray
    heatmaps: list[Heatmap]
    final_maps: list[np.ndarray]
    positions: list[Cell]
    timesteps: list[int]
    histories: list[dict[int, int]]
    events: int
    free: np.ndarray = field(repr=False)
    comm_log: list[LogEntry] | None = None

    def digest(self) -> str:
        """Hash over every recorded quantity; equal digests mean identical runs."""
        h = hashlib.sha256()
        h.update(repr((self.taskpoints, self.taskpoint_events, self.comm.as_dict(),
                       [c.as_dict() for c in self.robot_comm], self.positions,
                       self.timesteps, [sorted(x.items()) for x in self.histories],
                       self.events)).encode())
        h.update(self.cellsteps.tobytes())
        for hm in self.heatmaps:
            h.update(repr((hm.step, hm.robot)).encode())
            h.update(hm.values.tobytes())
        for m in self.final_maps:
            h.update(m.tobytes())
        if self.comm_log is not None:
            h.update(repr(self.comm_log).encode())
        return h.hexdigest()


@dataclass(frozen=True)
class Geometry:
    """Flattened per-cell candidate rings and travel paths for one (map, r_v)."""

    cand_ptr: np.ndarray
    cand_cell: np.ndarray
    cand_angle: np.ndarray
    path_ptr: np.ndarray
    path_cell: np.ndarray


_GEOMETRY_CACHE: dict[tuple, Geometry] = {}


def geometry(env: Environment, r_v: float) -> Geometry:
    key = (env.shape, env.free.tobytes(), float(r_v))
    cached = _GEOMETRY_CACHE.get(key)
    if cached is not None:
        return cached
    width = env.width
    n_cells = env.height * width
    cand_ptr = np.zeros(n_cells + 1, dtype=np.int64)
    cands: list[int] = []
    angles: list[float] = []
    path_ptr = [0]
    paths: list[int] = []
    for flat in range(n_cells):
        cell = divmod(flat, width)
        if env.free[cell]:
            for target in candidate_cells(env, cell, r_v):
                cands.append(target[0] * width + target[1])
                angles.append(direction(cell, target) if target != cell else 0.0)
                paths.extend(r * width + c for r, c in travel_path(cell, target))
                path_ptr.append(len(paths))
        cand_ptr[flat + 1] = len(cands)
    geo = Geometry(cand_ptr, np.array(cands, dtype=np.int64), np.array(angles),
                   np.array(path_ptr, dtype=np.int64), np.array(paths, dtype=np.int64))
    if len(_GEOMETRY_CACHE) > 16:
        _GEOMETRY_CACHE.clear()
    _GEOMETRY_CACHE[key] = geo
    return geo


@dataclass
class Start:
    strategies: list[StrategyKind]
    positions: list[Cell]
    headings: list[float]
    scheduler: np.random.Generator
    robot_rngs: list[np.random.Generator]


def initial_state(config: SimConfig, env: Environment) -> Start:
    """Seeded placement on distinct free cells, headings and independent streams."""
    streams = np.random.SeedSequence(config.seed).spawn(config.robots + 2)
    placement = np.random.Generator(np.random.PCG64(streams[0]))
    scheduler = np.random.Generator(np.random.PCG64(streams[1]))
    robot_rngs = [np.random.Generator(np.random.PCG64(s)) for s in streams[2:]]
    free = env.free_cells()
    if config.robots > len(free):
        raise ValueError(f"{config.robots} robots do not fit on {len(free)} free cells")
    picks = placement.choice(len(free), size=config.robots, replace=False)
    headings = placement.uniform(-math.pi, math.pi, size=config.robots)
    return Start(assign_strategies(config.strategy, config.robots),
                 [free[i] for i in picks.tolist()], headings.tolist(), scheduler, robot_rngs)


def _snapshot_steps(steps: int, snapshot_every: int | None) -> list[int]:
    marks = set()
    if snapshot_every:
        marks.update(range(snapshot_every, steps + 1, snapshot_every))
    marks.add(steps)
    return sorted(marks)


def run(config: SimConfig, env: Environment | None = None, backend: str = "kernel",
        snapshot_every: int | None = None, comm_log: bool = False) -> RunResult:
    """Execute one replica. Identical config and seed give an identical result."""
    if env is None:
        env = resolve_environment(config.environment)
    if backend == "kernel":
        from . import _kernel_backend
        return _kernel_backend.run(config, env, snapshot_every, comm_log)
    if backend != "reference":
        raise ValueError(f"unknown backend {backend!r}")
    if config.mode == "centralized":
        return _run_reference_centralized(config, env, snapshot_every)
    return _run_reference_decentralized(config, env, snapshot_every, comm_log)


def _rooms_on(env: Environment, path: Sequence[Cell], end: Cell) -> set[int]:
    rooms = {int(env.room_index[c]) for c in path}
    rooms.add(int(env.room_index[end]))
    rooms.discard(-1)
    return rooms


def _occupied(env: Environment, positions: Sequence[Cell]) -> set[int]:
    rooms = {int(env.room_index[p]) for p in positions}
    rooms.discard(-1)
    return rooms


def _run_reference_decentralized(config: SimConfig, env: Environment,
                                 snapshot_every: int | None, comm_log: bool) -> RunResult:
    start = initial_state(config, env)
    params = config.cycle_params()
    robots = [Robot(i, start.positions[i], start.headings[i], start.strategies[i],
                    PheromoneMap(env.free, config.psi_max), config.radii, start.robot_rngs[i])
              for i in range(config.robots)]
    medium = BroadcastMedium(robots, config.cost, log=comm_log)
    tracker = TaskPointTracker(env.n_rooms)
    cellsteps = new_cellsteps(env.shape)
    marks = set(_snapshot_steps(config.steps, snapshot_every))
    heatmaps: list[Heatmap] = []
    active = [r for r in robots if not should_terminate(r, config.steps)]
    events = 0
    while active:
        j = min(int(start.scheduler.random() * len(active)), len(active) - 1)
        robot = active[j]
        events += 1
        medium.step = events
        cycle = fsm_cycle(robot, env, medium, params)
        cellsteps_record(cellsteps, cycle.path, env.free)
        tracker.update(_rooms_on(env, cycle.path, robot.pos),
                       _occupied(env, [r.pos for r in robots]), events)
        if robot.timestep in marks:
            step, values = snapshot_heatmap(robot.map.values, robot.timestep)
            heatmaps.append(Heatmap(step, robot.id, values))
        if should_terminate(robot, config.steps):
            active.pop(j)
    heatmaps.sort(key=lambda h: (h.robot, h.step))
    return _result(config, env, tracker, robots, cellsteps, heatmaps, events, medium.log)


def _run_reference_centralized(config: SimConfig, env: Environment,
                               snapshot_every: int | None) -> RunResult:
    start = initial_state(config, env)
    params = config.cycle_params()
    shared = PheromoneMap(env.free, config.psi_max)
    robots = [Robot(i, start.positions[i], start.headings[i], start.strategies[i],
                    shared, config.radii, start.robot_rngs[i])
              for i in range(config.robots)]
    tracker = TaskPointTracker(env.n_rooms)
    cellsteps = new_cellsteps(env.shape)
    marks = set(_snapshot_steps(config.steps, snapshot_every))
    heatmaps: list[Heatmap] = []
    download = payload_size(int(env.free.sum()), config.cost)
    for step in range(config.steps):
        deposits = []
        visits: set[int] = set()
        live = shared.copy()
        for robot in robots:
            candidates = candidate_set(env, live, robot.pos, robot.heading, config.r_v)
            target = choose_target(robot.strategy, params.strategy, candidates, robot.rng,
                                   config.psi_max)
            mine = deposits_for(env, live, robot.pos, config.r_d, params.deposition)
            for cell, amount in mine:
                live.values[cell] = min(live.values[cell] + amount, config.psi_max)
            deposits.extend(mine)
            path = move(robot, target)
            cellsteps_record(cellsteps, path, env.free)
            visits |= _rooms_on(env, path, robot.pos)
            robot.counters.transmissions += 2
            robot.counters.bytes_disseminated += payload_size(len(mine), config.cost) + download
        shared = step_update(shared, config.beta, deposits)
        for robot in robots:
            robot.map = shared
            robot.timestep = step + 1
        tracker.update(visits, _occupied(env, [r.pos for r in robots]), step + 1)
        if step + 1 in marks:
            heatmaps.append(Heatmap(step + 1, -1, shared.values.copy()))
    return _result(config, env, tracker, robots, cellsteps, heatmaps, config.steps, None,
                   shared_map=shared)


def _result(config, env, tracker, robots, cellsteps, heatmaps, events, log,
            shared_map=None) -> RunResult:
    total = CommCounters()
    for r in robots:
        total += r.counters
    if shared_map is not None:
        final_maps = [shared_map.values.copy()]
    else:
        final_maps = [r.map.values.copy() for r in robots]
    return RunResult(
        config=config, taskpoints=tracker.count, taskpoint_events=list(tracker.event_steps),
        comm=total, robot_comm=[r.counters for r in robots], cellsteps=cellsteps,
        heatmaps=heatmaps, final_maps=final_maps,
        positions=[tuple(int(x) for x in r.pos) for r in robots],
        timesteps=[r.timestep for r in robots],
        histories=[dict(sorted(r.history.last.items())) for r in robots],
        events=events, free=env.free, comm_log=log)


def deposit_offsets(config: SimConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    offs = disc_offsets(config.r_d)
    params = config.deposition
    return (np.array([o[0] for o in offs], dtype=np.int64),
            np.array([o[1] for o in offs], dtype=np.int64),
            np.array([deposit_factor(params, o[2]) for o in offs]))


# Sweeps ---------------------------------------------------------------------

@dataclass
class SweepRow:
    r_t: float
    seeds: int
    mean_tp: float
    sd_tp: float
    mean_tx: float
    mean_bytes: float
    taskpoints: list[int]


def _run_scalars(config: SimConfig) -> tuple[float, int, int, int]:
    result = run(config)
    return config.r_t, result.taskpoints, result.comm.transmissions, \
        result.comm.bytes_disseminated


def run_many(configs: Sequence[SimConfig], workers: int = 1) -> list[tuple]:
    """Scalar outcomes for each config, in input order regardless of completion."""
    if workers <= 1:
        return [_run_scalars(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_scalars, configs))


def batch(template: SimConfig, radii: Sequence[float], seeds: Sequence[int],
          workers: int = 1) -> list[SweepRow]:
    """Mean and standard deviation of task-points and traffic per transmission radius."""
    if not seeds:
        raise ValueError("at least one seed is required")
    configs = [template.replace(r_t=float(r), seed=int(s)) for r in radii for s in seeds]
    outcomes = run_many(configs, workers)
    rows = []
    for i, r in enumerate(radii):
        chunk = outcomes[i * len(seeds):(i + 1) * len(seeds)]
        tps = np.array([o[1] for o in chunk], dtype=float)
        rows.append(SweepRow(
            r_t=float(r), seeds=len(seeds), mean_tp=float(tps.mean()),
            sd_tp=float(tps.std(ddof=1)) if len(tps) > 1 else 0.0,
            mean_tx=float(np.mean([o[2] for o in chunk])),
            mean_bytes=float(np.mean([o[3] for o in chunk])),
            taskpoints=[int(o[1]) for o in chunk]))
    return rows


def default_workers() -> int:
    return max(1, min(os.cpu_count() or 1, 8))
