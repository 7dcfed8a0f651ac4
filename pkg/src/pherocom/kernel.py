"""Compiled run loops over flattened lookup tables.

These loops mirror the object-level state machine in :mod:`pherocom.robot`
step for step and must produce bit-identical results; the engine tests
hold them to that. Geometry (candidate rings, travel paths, disc offsets)
and the deposition factor per offset are precomputed in Python and passed
in, so the loops only do table lookups and IEEE arithmetic.

Received payloads are folded into a per-robot pending grid at delivery
time and merged at the receiver's next drain. Because freshness depends
only on (sender, timestep) and max is associative, this equals processing
an inbox of messages in arrival order.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

RANDOM, DETERMINISTIC, SIMPLE, ELITIST, INERTIAL = 0, 1, 2, 3, 4
TX, BYTES_OUT, BYTES_IN, ACCEPTED, REJECTED = 0, 1, 2, 3, 4

TWO_PI = 2.0 * math.pi


@njit(cache=True)
def _wrap(theta):
    while theta > math.pi:
        theta -= TWO_PI
    while theta <= -math.pi:
        theta += TWO_PI
    return theta


@njit(cache=True)
def _choose(kind, u, cand_cell, cand_angle, c0, c1, pos, heading, m,
            psi_max, mu_k_tol, mu, nu, eps, weights, bearings, psis):
    n = c1 - c0
    for i in range(n):
        cell = cand_cell[c0 + i]
        psis[i] = m[cell]
        if cell == pos:
            bearings[i] = 0.0
        else:
            bearings[i] = _wrap(cand_angle[c0 + i] - heading)
    if kind == DETERMINISTIC:
        best = 0
        for i in range(1, n):
            if psis[i] < psis[best] or (psis[i] == psis[best]
                                        and abs(bearings[i]) < abs(bearings[best])):
                best = i
        return best
    if kind == RANDOM:
        idx = int(u * n)
        return idx if idx < n else n - 1
    for i in range(n):
        weights[i] = (psi_max - psis[i]) + eps
    if kind != SIMPLE:
        k = int(math.ceil(mu * n - mu_k_tol))
        if k < 1:
            k = 1
        if k > n:
            k = n
        for i in range(n):
            rank = 0
            for j in range(n):
                if psis[j] < psis[i] or (psis[j] == psis[i] and j < i):
                    rank += 1
            if rank < k:
                weights[i] *= 2.0
        if kind == INERTIAL:
            fwd = 0
            for i in range(1, n):
                if abs(bearings[i]) < abs(bearings[fwd]):
                    fwd = i
            weights[fwd] *= 1.0 + nu * n
    total = 0.0
    for i in range(n):
        total += weights[i]
    target = u * total
    acc = 0.0
    for i in range(n):
        acc += weights[i]
        if target < acc:
            return i
    return n - 1


@njit(cache=True)
def _deposit(m, pos, width, height, free, dep_dr, dep_dc, dep_factor, psi_max,
             dep_cells, dep_vals, n_dep):
    pr = pos // width
    pc = pos - pr * width
    for o in range(dep_dr.shape[0]):
        r = pr + dep_dr[o]
        c = pc + dep_dc[o]
        if r < 0 or r >= height or c < 0 or c >= width:
            continue
        cell = r * width + c
        if not free[cell]:
            continue
        dep_cells[n_dep] = cell
        dep_vals[n_dep] = (psi_max - m[cell]) * dep_factor[o]
        n_dep += 1
    return n_dep


@njit(cache=True)
def _evaporate_and_add(m, beta, psi_max, dep_cells, dep_vals, n_dep):
    for i in range(m.shape[0]):
        v = m[i]
        m[i] = v - beta * v
    for j in range(n_dep):
        m[dep_cells[j]] += dep_vals[j]
    for j in range(n_dep):
        cell = dep_cells[j]
        v = m[cell]
        if v < 0.0:
            m[cell] = 0.0
        elif v > psi_max:
            m[cell] = psi_max


@njit(cache=True)
def _mark_occupied(room_flat, positions, visited, tp_state):
    # tp_state holds [rooms visited this round, task-points, reseed pending].
    for q in range(positions.shape[0]):
        room = room_flat[positions[q]]
        if room >= 0 and not visited[room]:
            visited[room] = True
            tp_state[0] += 1
    tp_state[2] = 0


@njit(cache=True)
def _mark_path(room_flat, path_cell, p0, p1, target, visited, tp_state):
    for i in range(p0, p1):
        room = room_flat[path_cell[i]]
        if room >= 0 and not visited[room]:
            visited[room] = True
            tp_state[0] += 1
    room = room_flat[target]
    if room >= 0 and not visited[room]:
        visited[room] = True
        tp_state[0] += 1


@njit(cache=True)
def _close_event(visited, tp_state, tp_events, event):
    if tp_state[0] == visited.shape[0]:
        tp_events[tp_state[1]] = event
        tp_state[1] += 1
        visited[:] = False
        tp_state[0] = 0
        tp_state[2] = 1


@njit(cache=True)
def run_decentralized(width, height, free, room_flat, n_rooms,
                      cand_ptr, cand_cell, cand_angle, path_ptr, path_cell,
                      dep_dr, dep_dc, dep_factor, tx_dr, tx_dc, r_t2,
                      kinds, pos, heading, robot_u, sched_u,
                      steps, beta, psi_max, mu, nu, eps, mu_k_tol, g_d,
                      header_bytes, per_cell_bytes,
                      maps, history, counters, cellsteps, timestep,
                      tp_events, tp_state, snap_steps, snaps,
                      log_on, log_int, log_rec):
    n_robots = pos.shape[0]
    n_cells = free.shape[0]
    max_c = 1
    for p in range(n_cells):
        if cand_ptr[p + 1] - cand_ptr[p] > max_c:
            max_c = cand_ptr[p + 1] - cand_ptr[p]
    weights = np.empty(max_c)
    bearings = np.empty(max_c)
    psis = np.empty(max_c)
    dep_cells = np.empty(dep_dr.shape[0], dtype=np.int64)
    dep_vals = np.empty(dep_dr.shape[0])
    pay_cells = np.empty(tx_dr.shape[0], dtype=np.int64)
    pay_vals = np.empty(tx_dr.shape[0])
    pending = np.zeros((n_robots, n_cells))
    has_pending = np.zeros(n_robots, dtype=np.bool_)
    visited = np.zeros(n_rooms, dtype=np.bool_)
    active = np.arange(n_robots)
    n_active = n_robots
    n_log = 0
    n_rec = 0
    n_snap = snap_steps.shape[0]

    if steps <= 0:
        return n_log, n_rec
    for draw in range(n_robots * steps):
        j = int(sched_u[draw] * n_active)
        if j >= n_active:
            j = n_active - 1
        k = active[j]
        event = draw + 1
        t = timestep[k]
        m = maps[k]
        p = pos[k]

        # Detection and choice.
        c0 = cand_ptr[p]
        c1 = cand_ptr[p + 1]
        idx = _choose(kinds[k], robot_u[k, t], cand_cell, cand_angle, c0, c1, p,
                      heading[k], m, psi_max, mu_k_tol, mu, nu, eps,
                      weights, bearings, psis)
        ci = c0 + idx
        target = cand_cell[ci]

        # Deposition and evaporation.
        n_dep = _deposit(m, p, width, height, free, dep_dr, dep_dc, dep_factor,
                         psi_max, dep_cells, dep_vals, 0)
        _evaporate_and_add(m, beta, psi_max, dep_cells, dep_vals, n_dep)

        # Movement.
        p0 = path_ptr[ci]
        p1 = path_ptr[ci + 1]
        for i in range(p0, p1):
            cellsteps[path_cell[i]] += 1
        if target != p:
            heading[k] = cand_angle[ci]
            pos[k] = target
        if tp_state[2] == 1:
            _mark_occupied(room_flat, pos, visited, tp_state)
        _mark_path(room_flat, path_cell, p0, p1, target, visited, tp_state)
        _close_event(visited, tp_state, tp_events, event)

        # Dissemination.
        if t % g_d == 0:
            pr = target // width
            pc = target - pr * width
            n_pay = 0
            for o in range(tx_dr.shape[0]):
                r = pr + tx_dr[o]
                c = pc + tx_dc[o]
                if r < 0 or r >= height or c < 0 or c >= width:
                    continue
                cell = r * width + c
                if free[cell] and m[cell] > 0:
                    pay_cells[n_pay] = cell
                    pay_vals[n_pay] = m[cell]
                    n_pay += 1
            size = header_bytes + per_cell_bytes * n_pay
            counters[k, TX] += 1
            counters[k, BYTES_OUT] += size
            if log_on:
                log_int[n_log, 0] = event
                log_int[n_log, 1] = k
                log_int[n_log, 2] = t
                log_int[n_log, 3] = n_pay
                log_int[n_log, 4] = size
                log_int[n_log, 5] = n_rec
            for q in range(n_robots):
                if q == k or timestep[q] >= steps:
                    continue
                dr = pr - pos[q] // width
                dc = pc - (pos[q] - (pos[q] // width) * width)
                if dr * dr + dc * dc > r_t2:
                    continue
                if log_on:
                    log_rec[n_rec] = q
                    n_rec += 1
                if history[q, k] < t:
                    history[q, k] = t
                    counters[q, ACCEPTED] += 1
                    counters[q, BYTES_IN] += size
                    pend = pending[q]
                    for i in range(n_pay):
                        if pay_vals[i] > pend[pay_cells[i]]:
                            pend[pay_cells[i]] = pay_vals[i]
                    has_pending[q] = True
                else:
                    counters[q, REJECTED] += 1
            if log_on:
                log_int[n_log, 6] = n_rec
                n_log += 1

        # Aggregation.
        if has_pending[k]:
            pend = pending[k]
            for i in range(n_cells):
                if pend[i] > m[i]:
                    m[i] = pend[i]
                pend[i] = 0.0
            has_pending[k] = False

        timestep[k] = t + 1
        for s in range(n_snap):
            if snap_steps[s] == t + 1:
                snaps[k, s, :] = m
        if t + 1 >= steps:
            for i in range(j, n_active - 1):
                active[i] = active[i + 1]
            n_active -= 1
    return n_log, n_rec


@njit(cache=True)
def run_centralized(width, height, free, room_flat, n_rooms,
                    cand_ptr, cand_cell, cand_angle, path_ptr, path_cell,
                    dep_dr, dep_dc, dep_factor,
                    kinds, pos, heading, robot_u,
                    steps, beta, psi_max, mu, nu, eps, mu_k_tol,
                    upload_header, per_cell_bytes, download_bytes,
                    shared, counters, cellsteps, timestep,
                    tp_events, tp_state, snap_steps, snaps):
    n_robots = pos.shape[0]
    n_cells = free.shape[0]
    max_c = 1
    for p in range(n_cells):
        if cand_ptr[p + 1] - cand_ptr[p] > max_c:
            max_c = cand_ptr[p + 1] - cand_ptr[p]
    weights = np.empty(max_c)
    bearings = np.empty(max_c)
    psis = np.empty(max_c)
    dep_cells = np.empty(dep_dr.shape[0] * n_robots, dtype=np.int64)
    dep_vals = np.empty(dep_dr.shape[0] * n_robots)
    visited = np.zeros(n_rooms, dtype=np.bool_)
    n_snap = snap_steps.shape[0]
    # Robots act in order on a live view holding earlier deposits of the same
    # step; the stored map takes one evaporation plus all deposits per step.
    live = shared.copy()

    for step in range(steps):
        n_dep = 0
        for k in range(n_robots):
            p = pos[k]
            c0 = cand_ptr[p]
            c1 = cand_ptr[p + 1]
            idx = _choose(kinds[k], robot_u[k, step], cand_cell, cand_angle, c0, c1, p,
                          heading[k], live, psi_max, mu_k_tol, mu, nu, eps,
                          weights, bearings, psis)
            ci = c0 + idx
            target = cand_cell[ci]
            before = n_dep
            n_dep = _deposit(live, p, width, height, free, dep_dr, dep_dc, dep_factor,
                             psi_max, dep_cells, dep_vals, n_dep)
            for j in range(before, n_dep):
                v = live[dep_cells[j]] + dep_vals[j]
                live[dep_cells[j]] = psi_max if v > psi_max else v
            p0 = path_ptr[ci]
            p1 = path_ptr[ci + 1]
            for i in range(p0, p1):
                cellsteps[path_cell[i]] += 1
            if target != p:
                heading[k] = cand_angle[ci]
                pos[k] = target
            _mark_path(room_flat, path_cell, p0, p1, target, visited, tp_state)
            counters[k, TX] += 2
            counters[k, BYTES_OUT] += (upload_header + per_cell_bytes * (n_dep - before)
                                       + download_bytes)
        _evaporate_and_add(shared, beta, psi_max, dep_cells, dep_vals, n_dep)
        live[:] = shared
        for k in range(n_robots):
            timestep[k] = step + 1

        # One task-point event per global step, over every robot's visits.
        if tp_state[2] == 1:
            _mark_occupied(room_flat, pos, visited, tp_state)
        _close_event(visited, tp_state, tp_events, step + 1)
        for s in range(n_snap):
            if snap_steps[s] == step + 1:
                snaps[0, s, :] = shared
    return 0
