"""Prepare flat arrays for :mod:`pherocom.kernel` and rebuild a RunResult."""

from __future__ import annotations

import numpy as np

from . import kernel
from .config import SimConfig
from .engine import ELITE_TOLERANCE, Heatmap, RunResult, _snapshot_steps, deposit_offsets, \
    geometry, initial_state
from .grid import Environment, disc_offsets
from .vibit import CommCounters, LogEntry, payload_size


def _counters(row: np.ndarray) -> CommCounters:
    return CommCounters(int(row[kernel.TX]), int(row[kernel.BYTES_OUT]),
                        int(row[kernel.BYTES_IN]), int(row[kernel.ACCEPTED]),
                        int(row[kernel.REJECTED]))


def run(config: SimConfig, env: Environment, snapshot_every: int | None,
        comm_log: bool) -> RunResult:
    start = initial_state(config, env)
    geo = geometry(env, config.r_v)
    height, width = env.shape
    n_cells = height * width
    n = config.robots
    steps = config.steps
    free = np.ascontiguousarray(env.free.ravel())
    room_flat = np.ascontiguousarray(env.room_index.ravel().astype(np.int64))
    dep_dr, dep_dc, dep_factor = deposit_offsets(config)
    kinds = np.array([s.code for s in start.strategies], dtype=np.int64)
    pos = np.array([r * width + c for r, c in start.positions], dtype=np.int64)
    heading = np.array(start.headings, dtype=np.float64)
    # One uniform per stochastic choice, drawn up front from each robot's stream.
    robot_u = np.zeros((n, max(steps, 1)))
    for k, kind in enumerate(start.strategies):
        if kind.stochastic and steps > 0:
            robot_u[k] = start.robot_rngs[k].random(steps)
    counters = np.zeros((n, 5), dtype=np.int64)
    cellsteps = np.zeros(n_cells, dtype=np.int64)
    timestep = np.zeros(n, dtype=np.int64)
    tp_state = np.zeros(3, dtype=np.int64)
    snap_steps = np.array(_snapshot_steps(steps, snapshot_every), dtype=np.int64)
    sp = config.strategy_params

    if config.mode == "centralized":
        tp_events = np.zeros(steps + 1, dtype=np.int64)
        shared = np.zeros(n_cells)
        snaps = np.zeros((1, len(snap_steps), n_cells))
        kernel.run_centralized(
            width, height, free, room_flat, env.n_rooms,
            geo.cand_ptr, geo.cand_cell, geo.cand_angle, geo.path_ptr, geo.path_cell,
            dep_dr, dep_dc, dep_factor, kinds, pos, heading, robot_u,
            steps, config.beta, config.psi_max, sp.mu, sp.nu, sp.epsilon, ELITE_TOLERANCE,
            config.header_bytes, config.per_cell_bytes,
            payload_size(int(env.free.sum()), config.cost),
            shared, counters, cellsteps, timestep, tp_events, tp_state, snap_steps, snaps)
        final_maps = [shared.reshape(height, width).copy()]
        heatmaps = [Heatmap(int(s), -1, snaps[0, i].reshape(height, width).copy())
                    for i, s in enumerate(snap_steps) if s > 0]
        histories: list[dict[int, int]] = [{} for _ in range(n)]
        events = steps
        log = None
    else:
        tx_offs = disc_offsets(config.r_t)
        tx_dr = np.array([o[0] for o in tx_offs], dtype=np.int64)
        tx_dc = np.array([o[1] for o in tx_offs], dtype=np.int64)
        sched_u = start.scheduler.random(n * steps) if steps > 0 else np.zeros(1)
        tp_events = np.zeros(n * steps + 1, dtype=np.int64)
        maps = np.zeros((n, n_cells))
        history = np.full((n, n), -1, dtype=np.int64)
        snaps = np.zeros((n, len(snap_steps), n_cells))
        n_tx = n * (-(-steps // config.g_d)) if comm_log else 0
        log_int = np.zeros((n_tx, 7), dtype=np.int64)
        log_rec = np.zeros(n_tx * max(n - 1, 0), dtype=np.int64)
        n_log, _ = kernel.run_decentralized(
            width, height, free, room_flat, env.n_rooms,
            geo.cand_ptr, geo.cand_cell, geo.cand_angle, geo.path_ptr, geo.path_cell,
            dep_dr, dep_dc, dep_factor, tx_dr, tx_dc, config.r_t * config.r_t,
            kinds, pos, heading, robot_u, sched_u,
            steps, config.beta, config.psi_max, sp.mu, sp.nu, sp.epsilon, ELITE_TOLERANCE,
            config.g_d, config.header_bytes, config.per_cell_bytes,
            maps, history, counters, cellsteps, timestep, tp_events, tp_state,
            snap_steps, snaps, comm_log, log_int, log_rec)
        final_maps = [maps[k].reshape(height, width).copy() for k in range(n)]
        heatmaps = [Heatmap(int(s), k, snaps[k, i].reshape(height, width).copy())
                    for k in range(n) for i, s in enumerate(snap_steps) if s > 0]
        histories = [{int(q): int(history[k, q]) for q in range(n) if history[k, q] >= 0}
                     for k in range(n)]
        events = n * steps
        log = None
        if comm_log:
            log = [LogEntry(int(row[0]), int(row[1]), int(row[2]),
                            tuple(int(x) for x in log_rec[row[5]:row[6]]),
                            int(row[3]), int(row[4]))
                   for row in log_int[:n_log]]

    robot_comm = [_counters(counters[k]) for k in range(n)]
    total = CommCounters()
    for c in robot_comm:
        total += c
    count = int(tp_state[1])
    return RunResult(
        config=config, taskpoints=count, taskpoint_events=tp_events[:count].tolist(),
        comm=total, robot_comm=robot_comm, cellsteps=cellsteps.reshape(height, width),
        heatmaps=heatmaps, final_maps=final_maps,
        positions=[divmod(int(p), width) for p in pos], timesteps=timestep.tolist(),
        histories=histories, events=events, free=env.free, comm_log=log)
