"""Invariant suites at reduced scale (the acceptance tests run them in full)."""

import pytest

from rwdre import verify
from rwdre.params import ConfigError, ModelParams

MIXED = ModelParams(rho=0.5, p_circ=0.7, p_bullet=0.4, q0=0.5, seed=0)
ORDERED = ModelParams(rho=0.5, p_circ=0.8, p_bullet=0.3, q0=0.5, seed=0)


def test_start_monotonicity_small():
    res = verify.start_monotonicity_suite(MIXED, seeds=30, steps=80)
    assert res.ok
    assert res.checked == 30 * 3  # consecutive pairs of four starts
    assert res.violations == 0


def test_start_monotonicity_rejects_mixed_parity():
    with pytest.raises(ConfigError):
        verify.start_monotonicity_suite(MIXED, seeds=5, steps=10, starts=(0, 1))


def test_environment_monotonicity_small():
    res = verify.environment_monotonicity_suite(
        ORDERED, seeds=30, steps=80, extra={0: 1, 2: 1}
    )
    assert res.ok and res.checked == 30


def test_environment_monotonicity_needs_ordered_rates():
    bad = ModelParams(rho=0.5, p_circ=0.4, p_bullet=0.7, q0=0.5, seed=0)
    with pytest.raises(ConfigError):
        verify.environment_monotonicity_suite(bad, seeds=5, steps=10, extra={0: 1})


def test_ghost_domination_small():
    res = verify.ghost_domination_suite(ORDERED, seeds=30, horizon=80)
    assert res.violations == 0
    assert 0 < res.checked <= 30  # only order-applicable realizations count


def test_infection_domination_small():
    p = ModelParams(rho=1.0, p_circ=0.9, p_bullet=0.0, q0=0.0, seed=0)
    res = verify.infection_domination_suite(p, seeds=25, horizon=120)
    assert res.ok and res.checked == 25


def test_infection_domination_guards_regime():
    with pytest.raises(ConfigError):
        verify.infection_domination_suite(MIXED, seeds=5, horizon=50)


def test_oracle_agreement_small():
    res = verify.oracle_agreement_suite(2024, mc_samples=20_000)
    assert res.ok
    assert res.checked >= 3


def test_run_all_quick_summary():
    suites = verify.run_all(11, quick=True)
    assert [s.name for s in suites] == [
        "start-monotonicity",
        "environment-monotonicity",
        "ghost-domination",
        "infection-domination",
        "oracle-agreement",
    ]
    assert all(s.ok for s in suites)
    assert all(s.to_dict()["violations"] == 0 for s in suites)
