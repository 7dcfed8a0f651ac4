import math

import numpy as np
import pytest

from conftest import open_env, random_env
from pherocom.grid import cells_on_circumference, parse_map
from pherocom.pheromone import PheromoneMap
from pherocom.policy import StrategyKind
from pherocom.robot import CycleParams, Radii, Robot, fsm_cycle, should_terminate
from pherocom.vibit import BroadcastMedium, aggregate

PARAMS = CycleParams(steps=10_000)


def make(env, k, pos, kind=StrategyKind.INERTIAL, radii=Radii(), seed=None):
    return Robot(k, pos, 0.0, kind, PheromoneMap(env.free), radii,
                 np.random.default_rng(k if seed is None else seed))


def hand_deposit(shape, pos, r_d, psi, beta=0.005):
    """Eq. 1 + Eq. 2 evaluated directly with numpy on an open grid."""
    rows, cols = np.indices(shape)
    d = np.hypot(rows - pos[0], cols - pos[1])
    factor = 0.5 * (0.1 * math.e) ** (2.0 * d / math.pi)
    delta = np.where(d <= r_d, (100.0 - psi) * factor, 0.0)
    return np.clip(psi - beta * psi + delta, 0, 100)


def test_single_cycle_deposits_and_moves():
    env = open_env(11, 11)
    r = make(env, 0, (5, 5))
    events = fsm_cycle(r, env, BroadcastMedium([r]), PARAMS)
    assert r.timestep == 1
    assert r.pos in cells_on_circumference(env, (5, 5), r.radii.r_v)
    assert all(r.map[(5 + dr, 5 + dc)] > 0 for dr in (-1, 0, 1) for dc in (-1, 0, 1))
    assert events.path[-1] == r.pos and (5, 5) not in events.path
    psi = np.zeros(env.shape)
    expected = np.where(env.free, hand_deposit(env.shape, (5, 5), 2.0, psi), 0.0)
    assert np.allclose(r.map.values, expected, rtol=1e-12, atol=0)


def test_walled_in_robot_stays_but_deposits():
    env = parse_map("#####\n#A#A#\n#####")
    r = make(env, 0, (1, 1))
    events = fsm_cycle(r, env, BroadcastMedium([r]), PARAMS)
    assert r.pos == (1, 1) and r.timestep == 1 and events.path == []
    assert r.map[(1, 1)] == pytest.approx(50.0)
    # The deposition disc is not occluded by walls.
    assert r.map[(1, 3)] == pytest.approx(50.0 * (0.1 * math.e) ** (4 / math.pi))


def test_two_robots_share_transmitted_cells():
    env = open_env(15, 15)
    a = make(env, 0, (7, 5), StrategyKind.DETERMINISTIC)
    b = make(env, 1, (7, 9), StrategyKind.DETERMINISTIC)
    medium = BroadcastMedium([a, b])
    a_start, b_start = a.pos, b.pos
    fsm_cycle(a, env, medium, PARAMS)
    a_pos = a.pos
    fsm_cycle(b, env, medium, PARAMS)

    zero = np.zeros(env.shape)
    a1 = np.where(env.free, hand_deposit(env.shape, a_start, 2.0, zero), 0.0)
    b1 = np.where(env.free, hand_deposit(env.shape, b_start, 2.0, zero), 0.0)
    rows, cols = np.indices(env.shape)
    sent_by_a = (np.hypot(rows - a_pos[0], cols - a_pos[1]) <= 6) & (a1 > 0)
    sent_by_b = (np.hypot(rows - b.pos[0], cols - b.pos[1]) <= 6) & (b1 > 0)
    assert np.allclose(b.map.values, np.where(sent_by_a, np.maximum(a1, b1), b1), atol=1e-12)
    # A hears B's broadcast and merges it at its next drain.
    assert len(a.inbox) == 1
    aggregate(a, a.inbox.pop())
    assert np.allclose(a.map.values, np.where(sent_by_b, np.maximum(a1, b1), a1), atol=1e-12)


@pytest.mark.parametrize("t, steps, done", [(9_999, 10_000, False), (10_000, 10_000, True),
                                            (0, 0, True)])
def test_should_terminate(t, steps, done):
    env = open_env()
    r = make(env, 0, (4, 4))
    r.timestep = t
    assert should_terminate(r, steps) is done


def test_final_state_refuses_cycles():
    env = open_env()
    r = make(env, 0, (4, 4))
    r.timestep = 5
    with pytest.raises(RuntimeError):
        fsm_cycle(r, env, BroadcastMedium([r]), CycleParams(steps=5))


def test_dissemination_period():
    env = open_env(12, 12)
    r = make(env, 0, (5, 5))
    medium = BroadcastMedium([r])
    params = CycleParams(g_d=3, steps=100)
    sent = [fsm_cycle(r, env, medium, params).message is not None for _ in range(9)]
    assert sent == [True, False, False] * 3
    assert r.counters.transmissions == 3


@pytest.mark.parametrize("seed", range(8))
def test_robots_never_enter_walls(seed):
    rng = np.random.default_rng(seed)
    env = random_env(rng, 14, 16, 0.3)
    free = env.free_cells()
    kinds = list(StrategyKind)
    robots = [make(env, k, free[rng.integers(len(free))], kinds[k % 5],
                   Radii(float(rng.choice([1, 2, 3])), 3.0, 4.0), seed=seed * 10 + k)
              for k in range(3)]
    medium = BroadcastMedium(robots)
    params = CycleParams(steps=300)
    for _ in range(300):
        for r in robots:
            events = fsm_cycle(r, env, medium, params)
            assert env.is_free(r.pos)
            assert all(env.is_free(c) for c in events.path)


def test_solo_map_replays_from_trajectory():
    env = open_env(12, 14)
    r = make(env, 0, (6, 6), StrategyKind.INERTIAL, Radii(2, 2, 0))
    other = make(env, 1, (6, 7))
    medium = BroadcastMedium([r, other])
    positions = []
    for _ in range(60):
        positions.append(r.pos)
        fsm_cycle(r, env, medium, PARAMS)
    psi = np.zeros(env.shape)
    for pos in positions:
        psi = np.where(env.free, hand_deposit(env.shape, pos, 2.0, psi), 0.0)
    assert np.allclose(r.map.values, psi, rtol=1e-10, atol=1e-12)
    assert r.counters.aggregations_accepted == 0


def test_radii_validation():
    with pytest.raises(ValueError):
        Radii(r_v=0.5)
    with pytest.raises(ValueError):
        Radii(r_v=3, r_d=2)
    with pytest.raises(ValueError):
        Radii(r_t=-1)
