"""Infection front propagation and the walker/front comparison."""

import numpy as np
import pytest

from rwdre.infection import compare_walker_front, run_infection
from rwdre.params import (
    ExplicitTrajectory,
    ModelParams,
    NoSeedInfectionError,
    Overrides,
)

EMPTY = ModelParams(rho=0.0, p_circ=0.75, p_bullet=0.25, q0=0.0, seed=42)


def staged(*trajectories):
    return Overrides(trajectories=trajectories)


def test_front_follows_a_lone_infected_particle():
    # one particle starts infected at the origin and drifts left forever
    drift = ExplicitTrajectory(0, tuple(range(0, -7, -1)))
    front, state = run_infection(EMPTY, 6, staged(drift))
    assert front.positions.tolist() == [0, -1, -2, -3, -4, -5, -6]
    assert state.infected == {(0, -1)}


def test_contact_passes_the_infection():
    # A sits at the origin (infected at time 0); B approaches from -2,
    # touches A at time 2, and carries the infection leftward:
    #   front = 0 until the contact, then follows B
    A = ExplicitTrajectory(0, (0,) * 7)
    B = ExplicitTrajectory(0, (-2, -1, 0, -1, -2, -3, -4))
    front, state = run_infection(EMPTY, 6, staged(A, B))
    assert front.positions.tolist() == [0, 0, 0, -1, -2, -3, -4]
    assert state.infected == {(0, -1), (-2, -2)}


def test_every_even_nonnegative_site_seeds():
    # the initial infected set is every particle on an even site >= 0,
    # not just the leftmost one
    A = ExplicitTrajectory(0, (0,) * 5)
    far = ExplicitTrajectory(0, (10, 9, 10, 9, 10))
    front, state = run_infection(EMPTY, 4, staged(A, far))
    assert front.positions.tolist() == [0] * 5
    assert state.infected == {(0, -1), (10, -2)}


def test_untouched_odd_starters_stay_healthy():
    A = ExplicitTrajectory(0, (0,) * 5)
    bystander = ExplicitTrajectory(0, (9, 10, 9, 10, 9))
    front, state = run_infection(EMPTY, 4, staged(A, bystander))
    assert front.positions.tolist() == [0] * 5
    assert state.infected == {(0, -1)}


def test_seed_requires_an_even_nonnegative_start():
    with pytest.raises(NoSeedInfectionError):
        run_infection(EMPTY, 3)  # nothing to infect at all
    with pytest.raises(NoSeedInfectionError):
        # B starts at -2: present, but not a seed candidate
        run_infection(EMPTY, 3, staged(ExplicitTrajectory(0, (-2, -1, 0, 1))))
    with pytest.raises(NoSeedInfectionError):
        run_infection(EMPTY, 3, Overrides(extra={3: 2}))  # odd site only


def test_front_moves_at_most_one_site_per_step():
    p = ModelParams(rho=1.0, p_circ=0.75, p_bullet=0.25, q0=0.5, seed=13)
    front, _ = run_infection(p, 150)
    assert np.all(np.abs(np.diff(front.positions)) <= 1)
    assert front.horizon == 150
    assert front.rows()[0] == (0, front.position(0))


def test_front_ignores_the_window_margin():
    p = ModelParams(rho=1.0, p_circ=0.75, p_bullet=0.25, q0=0.5, seed=13)
    a, _ = run_infection(p, 100, window_margin=0)
    b, _ = run_infection(p, 100, window_margin=47)
    assert np.array_equal(a.positions, b.positions)


def test_walker_front_comparison_under_the_guarantee():
    # blocking regime: p_bullet = 0, q0 = 0 keeps the walker behind the front
    p = ModelParams(rho=1.0, p_circ=0.9, p_bullet=0.0, q0=0.0, seed=31)
    rep = compare_walker_front(p, 300)
    assert rep.guarantees_apply
    assert rep.parity_ok
    assert rep.violations == []
    assert rep.ok
    assert np.all(rep.walker.positions <= rep.front.positions)
    d = rep.to_dict()
    assert d["violations"] == []
    assert d["guarantees_apply"] is True


def test_walker_front_comparison_flags_out_of_regime_runs():
    p = ModelParams(rho=1.0, p_circ=0.9, p_bullet=0.5, q0=0.5, seed=31)
    rep = compare_walker_front(p, 100)
    assert not rep.guarantees_apply  # order may break; only bookkeeping applies
    assert rep.walker.steps == 100
    assert rep.front.horizon == 100
