import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pherocom.pheromone import (DepositionParams, PheromoneMap, deposit_amount,
                                merge_cell, step_update)

mpmath.mp.dps = 40


def oracle_delta(psi, psi_max, alpha, delta, eta, r):
    psi, psi_max, alpha, delta, eta, r = map(mpmath.mpf, (psi, psi_max, alpha, delta, eta, r))
    return (psi_max - psi) * alpha * (delta * mpmath.e) ** (eta * r / mpmath.pi)


def test_saturated_cell_gets_nothing():
    assert deposit_amount(100.0, DepositionParams(), 1.3) == 0.0


def test_zero_distance_deposit_is_alpha_share():
    assert deposit_amount(20.0, DepositionParams(), 0.0) == pytest.approx(40.0, abs=1e-12)


def test_deposit_at_pi():
    value = deposit_amount(0.0, DepositionParams(), math.pi)
    assert value == pytest.approx(3.694528, abs=5e-7)
    assert value == pytest.approx(float(oracle_delta(0, 100, 0.5, 0.1, 2, mpmath.pi)),
                                  rel=1e-12)


def test_flat_falloff_ignores_distance():
    params = DepositionParams(falloff="flat")
    assert deposit_amount(10.0, params, 0.0) == deposit_amount(10.0, params, 5.0) == 45.0


def test_overfull_cell_rejected():
    with pytest.raises(ValueError):
        deposit_amount(100.5, DepositionParams(), 0.0)


@pytest.mark.parametrize("kwargs", [dict(psi_max=0), dict(alpha=0), dict(alpha=1.5),
                                    dict(delta=0), dict(eta=0), dict(falloff="cubic")])
def test_bad_deposition_params(kwargs):
    with pytest.raises(ValueError):
        DepositionParams(**kwargs)


def test_deposit_non_increasing_in_distance_and_concentration():
    params = DepositionParams()
    rs = np.linspace(0, 20, 201)
    psis = np.linspace(0, 100, 101)
    by_r = [deposit_amount(37.0, params, r) for r in rs]
    by_psi = [deposit_amount(p, params, 1.0) for p in psis]
    assert all(a >= b for a, b in zip(by_r, by_r[1:]))
    assert all(a >= b for a, b in zip(by_psi, by_psi[1:]))


def _map(values):
    values = np.asarray(values, dtype=float)
    return PheromoneMap(np.ones(values.shape, dtype=bool), 100.0, values.copy())


def test_step_update_examples():
    assert step_update(_map([[100.0]]), 0.005, [])[(0, 0)] == pytest.approx(99.5)
    assert (step_update(_map([[3.0, 70.0]]), 1.0, []).values == 0).all()
    clamped = step_update(_map([[99.5]]), 0.005, [((0, 0), 40.0)])
    assert clamped[(0, 0)] == 100.0


def test_step_update_sums_overlapping_deposits():
    out = step_update(_map([[10.0, 0.0]]), 0.5, [((0, 0), 1.0), ((0, 0), 2.0), ((0, 1), 4.0)])
    assert out.values.tolist() == [[8.0, 4.0]]


def test_step_update_leaves_input_untouched():
    pmap = _map([[50.0]])
    step_update(pmap, 0.1, [((0, 0), 5.0)])
    assert pmap[(0, 0)] == 50.0


def test_step_update_errors():
    free = np.array([[True, False]])
    pmap = PheromoneMap(free)
    with pytest.raises(ValueError):
        step_update(pmap, 0.0, [])
    with pytest.raises(ValueError):
        step_update(pmap, 1.5, [])
    with pytest.raises(ValueError):
        step_update(pmap, 0.1, [((0, 1), 1.0)])
    with pytest.raises(ValueError):
        step_update(pmap, 0.1, [((0, 0), -1.0)])


def test_decay_matches_closed_form():
    rng = np.random.default_rng(5)
    start = rng.uniform(0, 100, size=(6, 6))
    pmap = _map(start)
    beta = 0.005
    for k in range(1, 401):
        nxt = step_update(pmap, beta, [])
        assert (nxt.values <= pmap.values).all()
        pmap = nxt
    expected = start * (1 - beta) ** 400
    assert np.allclose(pmap.values, expected, rtol=0, atol=1e-9)


def test_equation_oracle_random_tuples():
    rng = np.random.default_rng(11)
    for _ in range(2000):
        psi_max = rng.uniform(1, 500)
        psi = rng.uniform(0, psi_max)
        alpha, delta = rng.uniform(0.01, 1), rng.uniform(0.01, 1)
        eta, r = rng.uniform(0.1, 5), rng.uniform(0, 15)
        got = deposit_amount(psi, DepositionParams(psi_max, alpha, delta, eta), r)
        want = oracle_delta(psi, psi_max, alpha, delta, eta, r)
        assert abs(got - float(want)) <= 1e-9 * max(abs(float(want)), 1e-300)


def test_merge_examples():
    assert merge_cell(10, 20) == 20
    assert merge_cell(10, 10) == 10
    assert merge_cell(20, 5) == 20


values = st.floats(0, 100, allow_nan=False)


@settings(max_examples=2000, deadline=None)
@given(a=values, b=values, c=values)
def test_merge_is_a_semilattice(a, b, c):
    assert merge_cell(a, a) == a
    assert merge_cell(a, b) == merge_cell(b, a)
    assert merge_cell(merge_cell(a, b), c) == merge_cell(a, merge_cell(b, c))
