"""Exact finite-horizon laws, checked against hand-derived values and each other.

Two independent exact routes exist: the joint-chain DP over
(walker, particle configuration) states and the conditional path expansion
with product vacancy weights.  They share no code beyond the parameter
container, so their agreement is a real check and is kept that way.
"""

from fractions import Fraction

import numpy as np
import pytest

from rwdre import oracle
from rwdre.params import ModelParams, StateSpaceError, config_from_pairs, empty_config

EMPTY = ModelParams(rho=0.0, p_circ=0.75, p_bullet=0.25, q0=0.0, seed=0)


def test_two_step_law_no_particles():
    # by hand with p = 3/4: P(2) = p^2, P(0) = 2p(1-p), P(-2) = (1-p)^2
    pmf = oracle.exact_walker_pmf(EMPTY, 2, empty_config())
    assert pmf.as_dict() == pytest.approx({2: 0.5625, 0: 0.375, -2: 0.0625})
    assert pmf.mass_defect == 0.0


def test_one_step_law_occupied_origin():
    # a particle sits on the start site, so the first step uses p_bullet
    p = ModelParams(rho=0.0, p_circ=0.9, p_bullet=0.3, q0=0.5, seed=0)
    pmf = oracle.exact_walker_pmf(p, 1, config_from_pairs([(0, 1)]))
    assert pmf.as_dict() == pytest.approx({1: 0.3, -1: 0.7})


def test_two_step_law_one_particle():
    # particle at 2, p_circ = 0.7, p_bullet = 0.2, q0 = 0.5.  First step is
    # free: P(X_1 = 1) = 0.7.  Given X_1 = 1 the particle blocks site 1 with
    # probability a = (1 - q0)/2 = 0.25, so
    #   P(2) = 0.7 (a 0.2 + (1-a) 0.7) = 0.4025
    #   P(-2) = 0.3^2 = 0.09,  P(0) = the rest = 0.5075
    p = ModelParams(rho=0.0, p_circ=0.7, p_bullet=0.2, q0=0.5, seed=0)
    pmf = oracle.exact_walker_pmf(p, 2, config_from_pairs([(2, 1)]))
    assert pmf.as_dict() == pytest.approx({2: 0.4025, 0: 0.5075, -2: 0.09})


def test_one_step_law_poisson():
    # P(X_1 = 1) = e^{-rho} p_circ + (1 - e^{-rho}) p_bullet
    p = ModelParams(rho=0.5, p_circ=0.8, p_bullet=0.3, q0=0.5, seed=0)
    pmf = oracle.exact_pmf_poisson(p, 1)
    vac = np.exp(-0.5)
    assert pmf.prob(1) == pytest.approx(vac * 0.8 + (1 - vac) * 0.3, abs=1e-12)
    assert pmf.prob(1) + pmf.prob(-1) == pytest.approx(1.0, abs=1e-9)


CROSS_CASES = [
    (ModelParams(0.0, 0.7, 0.3, 0.5, seed=0), 3, [(1, 1)]),
    (ModelParams(0.0, 0.85, 0.15, 0.0, seed=0), 4, [(-1, 1), (2, 1)]),
    (ModelParams(0.0, 0.6, 0.5, 0.5, seed=0), 4, [(0, 2)]),
    (ModelParams(0.0, 0.9, 0.0, 0.25, seed=0), 5, [(1, 1), (3, 1), (4, 1)]),
]


@pytest.mark.parametrize("params,n,pairs", CROSS_CASES)
def test_exact_routes_agree(params, n, pairs):
    ov = config_from_pairs(pairs)
    a = oracle.exact_walker_pmf(params, n, ov)
    b = oracle.exact_pmf_poisson(params, n, overrides=ov)
    assert a.method != b.method
    assert oracle.tv_distance(a.as_dict(), b.as_dict()) < 1e-12


def test_rational_arithmetic_is_exact():
    p = ModelParams(rho=0.0, p_circ=0.75, p_bullet=0.25, q0=0.5, seed=0)
    pmf = oracle.exact_walker_pmf(p, 3, config_from_pairs([(1, 1)]), rational=True)
    total = sum(Fraction(x).limit_denominator() for x in pmf.probs)
    assert sum(pmf.probs) == pytest.approx(1.0, abs=1e-15)
    assert total == 1


def test_support_is_sorted_with_step_parity():
    pmf = oracle.exact_walker_pmf(EMPTY, 5, empty_config())
    assert np.all(np.diff(pmf.support) > 0)
    assert np.all((pmf.support + 5) % 2 == 0)
    assert pmf.prob(5) == pytest.approx(0.75**5)
    assert pmf.prob(99) == 0.0


def test_rows_match_dict():
    pmf = oracle.exact_pmf_poisson(
        ModelParams(rho=0.3, p_circ=0.8, p_bullet=0.4, q0=0.5, seed=0), 3
    )
    assert dict(pmf.rows()) == pmf.as_dict()
    assert pmf.mass_defect <= 1e-9


def test_state_space_guards():
    big = config_from_pairs([(0, 1), (1, 1), (2, 1), (3, 1)])
    with pytest.raises(StateSpaceError):
        oracle.exact_walker_pmf(EMPTY, 2, big)
    with pytest.raises(StateSpaceError):
        oracle.exact_walker_pmf(EMPTY, 11, empty_config())
    with pytest.raises(StateSpaceError):
        oracle.exact_pmf_poisson(EMPTY, 6)


def test_tv_distance():
    assert oracle.tv_distance({0: 1.0}, {0: 1.0}) == 0.0
    assert oracle.tv_distance({0: 1.0}, {2: 1.0}) == 1.0
    assert oracle.tv_distance({0: 0.5, 2: 0.5}, {0: 0.25, 2: 0.75}) == pytest.approx(0.25)
    a = {0: 0.3, 1: 0.7}
    b = {0: 0.6, 1: 0.4}
    assert oracle.tv_distance(a, b) == oracle.tv_distance(b, a)


def test_empirical_pmf():
    samples = np.array([1, 1, -1, 3, 3, 3, 1, -1])
    pmf = oracle.empirical_pmf(samples)
    assert pmf == {1: 0.375, -1: 0.25, 3: 0.375}
    assert all(isinstance(k, int) for k in pmf)


def test_monte_carlo_agrees_with_the_exact_law():
    from rwdre import engines
    from rwdre import randomness as rnd

    p = ModelParams(rho=0.0, p_circ=0.7, p_bullet=0.3, q0=0.5, seed=321)
    ov = config_from_pairs([(1, 1)])
    exact = oracle.exact_walker_pmf(p, 4, ov)
    seeds = engines.replica_seeds(p.seed, rnd.REPLICA, 40_000)
    ends = engines.batch_paths_config(p, seeds, 4, ov)
    assert oracle.tv_distance(exact.as_dict(), oracle.empirical_pmf(ends)) < 0.01


def test_monte_carlo_agrees_with_the_poisson_law():
    # pinned against a one-off 1e6-sample run of the same seeds: tv = 0.00067
    from rwdre import engines
    from rwdre import randomness as rnd
    from rwdre.walker import run_walker

    p = ModelParams(rho=0.2, p_circ=0.8, p_bullet=0.3, q0=0.0, seed=2468)
    exact = oracle.exact_pmf_poisson(p, 4)
    assert exact.as_dict()[4] == pytest.approx(0.2854959444287115)
    assert exact.as_dict()[-4] == pytest.approx(0.016560149764007014)
    seeds = engines.replica_seeds(p.seed, rnd.REPLICA, 40_000)
    ends = np.array([run_walker(p.with_seed(int(s)), 4).endpoint() for s in seeds])
    assert oracle.tv_distance(exact.as_dict(), oracle.empirical_pmf(ends)) < 0.012
