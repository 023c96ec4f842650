import pytest

from rwdre.params import (
    NO_OVERRIDES,
    ConfigError,
    ExplicitTrajectory,
    ModelParams,
    Overrides,
    config_from_pairs,
    empty_config,
)


def make(**kw):
    base = dict(rho=0.5, p_circ=0.8, p_bullet=0.3, q0=0.5, seed=0)
    base.update(kw)
    return ModelParams(**base)


@pytest.mark.parametrize(
    "field,value",
    [
        ("rho", -0.1),
        ("p_circ", -0.01),
        ("p_circ", 1.5),
        ("p_bullet", 2.0),
        ("p_bullet", -1e-9),
        ("q0", 1.0001),
        ("q0", -0.5),
    ],
)
def test_rejects_out_of_range(field, value):
    with pytest.raises(ConfigError):
        make(**{field: value})


def test_drifts():
    p = make(p_circ=0.8, p_bullet=0.3)
    assert p.v_circ == pytest.approx(0.6)
    assert p.v_bullet == pytest.approx(-0.4)


def test_with_seed_changes_only_the_seed():
    p = make(seed=1)
    q = p.with_seed(99)
    assert q.seed == 99
    assert (q.rho, q.p_circ, q.p_bullet, q.q0) == (p.rho, p.p_circ, p.p_bullet, p.q0)


def test_to_dict_round_trips():
    p = make()
    assert ModelParams(**p.to_dict()) == p


def test_params_are_frozen():
    p = make()
    with pytest.raises(AttributeError):
        p.rho = 1.0


def test_trajectory_needs_positions():
    with pytest.raises(ConfigError):
        ExplicitTrajectory(0, ())


def test_trajectory_rejects_jumps():
    with pytest.raises(ConfigError):
        ExplicitTrajectory(0, (0, 2))


def test_trajectory_clamps_outside_range():
    tr = ExplicitTrajectory(3, (5, 6, 6, 7))
    assert tr.position(3) == 5
    assert tr.position(6) == 7
    assert tr.position(-100) == 5   # frozen at the left endpoint
    assert tr.position(100) == 7    # frozen at the right endpoint


def test_overrides_reject_negative_counts():
    with pytest.raises(ConfigError):
        Overrides(config={0: -1})
    with pytest.raises(ConfigError):
        Overrides(extra={2: -3})


def test_overrides_reject_bad_uniforms():
    with pytest.raises(ConfigError):
        Overrides(uniforms={(0, 0): 1.0})
    Overrides(uniforms={(0, 0): 0.0})  # closed on the left


def test_no_overrides_is_inert():
    assert NO_OVERRIDES.config is None
    assert NO_OVERRIDES.extra == {}
    assert NO_OVERRIDES.trajectories == ()
    assert NO_OVERRIDES.uniforms is None


def test_empty_config_replaces_with_nothing():
    ov = empty_config()
    assert ov.config == {}


def test_config_from_pairs_accumulates():
    ov = config_from_pairs([(0, 1), (2, 1), (0, 2)])
    assert ov.config == {0: 3, 2: 1}
