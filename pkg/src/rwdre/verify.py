"""Exact-coupling invariant suites.

Each suite replays a batch of seeds and counts violations of an order
relation that should hold path by path: walkers started further right
stay ahead, extra particles never push the walker right, the ghost
stays below while it agrees with its walker, the infection front stays
above the blocked walker, and the two exact oracles agree with each
other and with simulation.  Zero violations is the only passing score.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import randomness as rnd
from .engines import batch_paths_config
from .infection import compare_walker_front
from .oracle import empirical_pmf, exact_pmf_poisson, exact_walker_pmf, tv_distance
from .params import ConfigError, ModelParams, Overrides
from .walker import coupling_report, run_walker

# suite ids for child-seed derivation (REPLICA stream, offset past estimators)
_START, _ENV, _GHOST, _INFECTION, _ORACLE = range(101, 106)

_DETAIL_CAP = 8


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    violations: int = 0
    detail: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def note(self, msg: str) -> None:
        self.violations += 1
        if len(self.detail) < _DETAIL_CAP:
            self.detail.append(msg)

    def to_dict(self) -> dict:
        return {"name": self.name, "checked": self.checked,
                "violations": self.violations, "ok": self.ok,
                "detail": list(self.detail)}


def _children(master: int, suite: int, count: int) -> np.ndarray:
    return rnd.hash_words_vec(master, rnd.REPLICA, suite,
                              np.arange(count, dtype=np.int64))


def start_monotonicity_suite(params: ModelParams, seeds: int, steps: int,
                             starts=(-4, -2, 0, 2)) -> SuiteResult:
    """Walkers from same-parity starts, one realization: order is preserved."""
    starts = sorted(int(x) for x in starts)
    if len({x % 2 for x in starts}) != 1:
        raise ConfigError("starts must share a parity for the order coupling")
    res = SuiteResult("start-monotonicity")
    for r, child in enumerate(_children(params.seed, _START, seeds)):
        p = params.with_seed(int(child))
        paths = [run_walker(p, steps, start=(x, 0)).positions for x in starts]
        for lo, hi, a, b in zip(paths, paths[1:], starts, starts[1:]):
            res.checked += 1
            bad = np.flatnonzero(lo > hi)
            if bad.size:
                res.note(f"seed[{r}]: start {a} above start {b} at t={bad[0]}")
    return res


def environment_monotonicity_suite(params: ModelParams, seeds: int, steps: int,
                                   extra: dict[int, int]) -> SuiteResult:
    """Superposing ``extra`` particles never moves the walker right.

    Needs p_bullet <= p_circ; the shared keyed streams make the base
    particles follow identical trajectories in both runs.
    """
    if params.p_bullet > params.p_circ:
        raise ConfigError("environment monotonicity needs p_bullet <= p_circ")
    if not extra or any(c < 0 for c in extra.values()):
        raise ConfigError("extra must add at least one particle")
    ov = Overrides(extra=dict(extra))
    res = SuiteResult("environment-monotonicity")
    for r, child in enumerate(_children(params.seed, _ENV, seeds)):
        p = params.with_seed(int(child))
        base = run_walker(p, steps).positions
        dense = run_walker(p, steps, overrides=ov).positions
        res.checked += 1
        bad = np.flatnonzero(dense > base)
        if bad.size:
            res.note(f"seed[{r}]: denser environment ahead at t={bad[0]}")
    return res


def ghost_domination_suite(params: ModelParams, seeds: int, horizon: int,
                           anchor: tuple[int, int] = (-2, 10)) -> SuiteResult:
    """While the anchored walker sticks to its ghost, the origin walker
    (started ahead, same parity) stays above the ghost."""
    res = SuiteResult("ghost-domination")
    for r, child in enumerate(_children(params.seed, _GHOST, seeds)):
        rep = coupling_report(params.with_seed(int(child)), anchor, horizon)
        if not rep.domination_applicable:
            continue
        res.checked += 1
        if rep.domination_ok is False:
            res.note(f"seed[{r}]: ghost above the origin walker on G")
    return res


def infection_domination_suite(params: ModelParams, seeds: int,
                               horizon: int) -> SuiteResult:
    """Blocked walker stays at or below the front, with even gaps throughout."""
    if params.p_bullet != 0.0 or params.q0 != 0.0:
        raise ConfigError("front domination holds for p_bullet = 0, q0 = 0")
    res = SuiteResult("infection-domination")
    for r, child in enumerate(_children(params.seed, _INFECTION, seeds)):
        rep = compare_walker_front(params.with_seed(int(child)), horizon)
        res.checked += 1
        if rep.violations:
            res.note(f"seed[{r}]: walker above front at t={rep.violations[0]}")
        if not rep.parity_ok:
            res.note(f"seed[{r}]: odd walker-front gap")
    return res


# (params, steps, configuration) cases for the two exact routes
_ORACLE_CASES = (
    (ModelParams(0.0, 0.7, 0.3, 0.5, seed=0), 3, {1: 1}),
    (ModelParams(0.0, 0.85, 0.15, 0.0, seed=0), 4, {-1: 1, 2: 1}),
    (ModelParams(0.0, 0.6, 0.5, 0.5, seed=0), 2, {0: 2}),
)


def oracle_agreement_suite(master_seed: int, mc_samples: int = 100_000,
                           tolerance: float = 0.01) -> SuiteResult:
    """Exact transition law two ways, then against straight simulation.

    The dynamic-programming law and the path-expansion law must agree to
    rounding; the Monte Carlo law must agree within ``tolerance`` in
    total variation.
    """
    res = SuiteResult("oracle-agreement")
    for params, n, config in _ORACLE_CASES:
        ov = Overrides(config=config)
        dp = exact_walker_pmf(params, n, ov)
        pe = exact_pmf_poisson(params, n, overrides=ov)
        res.checked += 1
        tv = tv_distance(dp.as_dict(), pe.as_dict())
        if tv > 1e-12:
            res.note(f"exact routes disagree (tv={tv:.3g}) at n={n}, {config}")
    params, n, config = _ORACLE_CASES[0]
    ov = Overrides(config=config)
    seeds = _children(master_seed, _ORACLE, mc_samples)
    ends = batch_paths_config(params, seeds, n, ov)
    res.checked += 1
    tv = tv_distance(exact_walker_pmf(params, n, ov).as_dict(), empirical_pmf(ends))
    if tv > tolerance:
        res.note(f"simulation off the exact law (tv={tv:.4f})")
    return res


def run_all(master_seed: int = 2024, *, quick: bool = False) -> list[SuiteResult]:
    """The whole invariant battery; ``quick`` trades seeds for speed."""
    seeds = 50 if quick else 500
    steps = 120 if quick else 300
    horizon = 120 if quick else 500
    mixed = ModelParams(0.5, 0.7, 0.4, 0.5, seed=master_seed)
    ordered = ModelParams(0.5, 0.8, 0.3, 0.5, seed=master_seed)
    blocked = ModelParams(1.0, 0.9, 0.0, 0.0, seed=master_seed)
    extra = {-2: 1, -1: 1, 0: 1, 1: 1, 2: 1}
    return [
        start_monotonicity_suite(mixed, seeds, steps),
        environment_monotonicity_suite(ordered, seeds, steps, extra),
        ghost_domination_suite(ordered, seeds, horizon),
        infection_domination_suite(blocked, seeds, 200 if quick else horizon),
        oracle_agreement_suite(master_seed, 20_000 if quick else 100_000),
    ]
