"""Statistical estimators over replica batches.

Every estimator derives its replica seeds as keyed(master, REPLICA,
estimator-tag, r), so results depend only on the parameters and never on
execution order or worker count.  Point estimates carry confidence
intervals: normal-approximation for means, Wilson score for frequencies,
and a ratio delta-method interval for the regenerative speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from . import randomness as rnd
from .engines import batch_backtrack_empty, batch_paths_config, batch_paths_empty
from .infection import compare_walker_front
from .params import NO_OVERRIDES, ConfigError, ModelParams, Overrides
from .regeneration import as_fraction, chained_regenerations
from .walker import coupling_report, run_walker

# Second key word after the REPLICA stream tag: which estimator is drawing.
SPEED = 1
BACKTRACK = 2
CLT = 3
ESCAPE = 4
REGENERATIVE = 5
WALKER_FRONT = 6


def estimator_seeds(master_seed: int, estimator: int, replicas: int) -> np.ndarray:
    """Child seeds for an estimator: replica r <- keyed(master, REPLICA, tag, r)."""
    idx = np.arange(replicas, dtype=np.int64)
    return rnd.hash_words_vec(master_seed, rnd.REPLICA, estimator, idx)


# ---------------------------------------------------------------------------
# Intervals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConfidenceInterval:
    level: float
    lo: float
    hi: float

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def to_dict(self) -> dict:
        return {"level": self.level, "lo": self.lo, "hi": self.hi}


def _check_level(confidence: float) -> float:
    if not 0.0 < confidence < 1.0:
        raise ConfigError(f"confidence must be in (0, 1), got {confidence}")
    return confidence


def normal_interval(mean: float, std_error: float, confidence: float) -> ConfidenceInterval:
    """mean +- z * se with the two-sided normal quantile."""
    z = stats.norm.ppf(0.5 * (1.0 + _check_level(confidence)))
    return ConfidenceInterval(confidence, mean - z * std_error, mean + z * std_error)


def wilson_interval(hits: int, trials: int, confidence: float) -> ConfidenceInterval:
    """Wilson score interval for a binomial frequency (well-behaved at 0 and 1)."""
    res = stats.binomtest(hits, trials)
    ci = res.proportion_ci(confidence_level=_check_level(confidence), method="wilson")
    return ConfidenceInterval(confidence, float(ci.low), float(ci.high))


# ---------------------------------------------------------------------------
# Speed
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpeedEstimate:
    """Walker speed with a confidence interval.

    method is "replica-mean" (mean of X_n/n over independent replicas)
    or "regenerative" (ratio of pooled inter-regeneration increments).
    """

    v_hat: float
    ci: ConfidenceInterval
    n: int
    replicas: int
    method: str
    std_error: float

    def to_dict(self) -> dict:
        return {"v_hat": self.v_hat, "ci": self.ci.to_dict(), "n": self.n,
                "replicas": self.replicas, "method": self.method,
                "std_error": self.std_error}


def _mean_estimate(samples: np.ndarray, n: int, confidence: float,
                   method: str) -> SpeedEstimate:
    m = float(np.mean(samples))
    se = float(np.std(samples, ddof=1) / math.sqrt(samples.size)) \
        if samples.size > 1 else 0.0
    return SpeedEstimate(m, normal_interval(m, se, confidence), n,
                         int(samples.size), method, se)


def _endpoint_batch(params: ModelParams, seeds: np.ndarray, steps: int,
                    overrides: Overrides, checkpoints=None) -> np.ndarray:
    """Replica endpoints, vectorized where an engine covers the environment."""
    if overrides.config is not None:
        return batch_paths_config(params, seeds, steps, overrides, checkpoints)
    if params.rho == 0.0 and overrides is NO_OVERRIDES:
        return batch_paths_empty(params, seeds, steps, checkpoints)
    # general environment: one exact scalar walker per replica
    cps = None if checkpoints is None else list(checkpoints)
    shape = (seeds.size,) if cps is None else (seeds.size, len(cps))
    out = np.empty(shape, dtype=np.int64)
    for r, s in enumerate(np.asarray(seeds, dtype=np.uint64)):
        path = run_walker(params.with_seed(int(s)), steps, overrides=overrides)
        if cps is None:
            out[r] = path.endpoint()
        else:
            out[r] = [path.position(c) for c in cps]
    return out


def estimate_speed(params: ModelParams, n: int, replicas: int,
                   confidence: float = 0.95, *,
                   overrides: Overrides = NO_OVERRIDES) -> SpeedEstimate:
    """Replica-mean estimate of X_n / n with a normal-approximation interval."""
    if n < 1 or replicas < 1:
        raise ConfigError("n and replicas must be >= 1")
    seeds = estimator_seeds(params.seed, SPEED, replicas)
    ends = _endpoint_batch(params, seeds, n, overrides)
    return _mean_estimate(ends / n, n, confidence, "replica-mean")


# ---------------------------------------------------------------------------
# Backtracking frequency
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BacktrackEstimate:
    """Frequency of the walker falling depth L behind the line v_star * n.

    Counts replicas with sign(v) * X_n < |v| * n - L for some n <= horizon.
    The horizon truncation only loses events, so p_hat estimates a lower
    bound of the any-n probability.
    """

    v_star: Fraction
    depth: int
    horizon: int
    replicas: int
    hits: int
    p_hat: float
    ci: ConfidenceInterval

    def to_dict(self) -> dict:
        return {"v_star": str(self.v_star), "depth": self.depth,
                "horizon": self.horizon, "replicas": self.replicas,
                "hits": self.hits, "p_hat": self.p_hat,
                "ci": self.ci.to_dict(), "bound_direction": "lower"}


@dataclass(frozen=True)
class BacktrackProfile:
    """Backtracking estimates across depths on one shared replica batch."""

    depths: tuple[int, ...]
    estimates: tuple[BacktrackEstimate, ...]
    indicators: np.ndarray  # (replicas, len(depths)) bool

    def pathwise_nested(self) -> bool:
        """Every replica counted at a deeper L is counted at every shallower one."""
        ind = self.indicators
        return bool(np.all(ind[:, 1:] <= ind[:, :-1]))


def _backtrack_indicators(params: ModelParams, seeds: np.ndarray, horizon: int,
                          v: Fraction, depths: tuple[int, ...],
                          overrides: Overrides) -> np.ndarray:
    if params.rho == 0.0 and overrides is NO_OVERRIDES:
        return batch_backtrack_empty(params, seeds, horizon, v, depths)
    sign = 1 if v > 0 else -1
    num, den = abs(v).numerator, abs(v).denominator
    out = np.empty((seeds.size, len(depths)), dtype=bool)
    for r, s in enumerate(np.asarray(seeds, dtype=np.uint64)):
        path = run_walker(params.with_seed(int(s)), horizon, overrides=overrides)
        ts = np.arange(horizon + 1, dtype=np.int64)
        gap = int(np.max(num * ts - den * sign * path.positions))
        out[r] = [gap > den * d for d in depths]
    return out


def backtrack_profile(params: ModelParams, v_star, depths, horizon: int,
                      replicas: int, confidence: float = 0.95, *,
                      overrides: Overrides = NO_OVERRIDES) -> BacktrackProfile:
    """Backtracking frequencies for several depths on the same paths.

    Sharing the batch makes the depth columns nested replica by replica,
    which is the event inclusion the estimates should inherit.
    """
    v = as_fraction(v_star)
    if v == 0:
        raise ConfigError("v_star must be nonzero")
    depths = tuple(int(d) for d in depths)
    if not depths or any(d < 0 for d in depths):
        raise ConfigError("depths must be non-negative")
    if sorted(depths) != list(depths):
        raise ConfigError("depths must be sorted ascending")
    if horizon < 1 or replicas < 1:
        raise ConfigError("horizon and replicas must be >= 1")
    seeds = estimator_seeds(params.seed, BACKTRACK, replicas)
    ind = _backtrack_indicators(params, seeds, horizon, v, depths, overrides)
    ests = []
    for j, d in enumerate(depths):
        hits = int(np.count_nonzero(ind[:, j]))
        ests.append(BacktrackEstimate(v, d, horizon, replicas, hits,
                                      hits / replicas,
                                      wilson_interval(hits, replicas, confidence)))
    return BacktrackProfile(depths, tuple(ests), ind)


def estimate_backtrack(params: ModelParams, v_star, depth: int, horizon: int,
                       replicas: int, confidence: float = 0.95, *,
                       overrides: Overrides = NO_OVERRIDES) -> BacktrackEstimate:
    """Monte Carlo frequency of the depth-L backtracking event up to ``horizon``."""
    prof = backtrack_profile(params, v_star, (depth,), horizon, replicas,
                             confidence, overrides=overrides)
    return prof.estimates[0]


# ---------------------------------------------------------------------------
# CLT diagnostic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CltReport:
    """Variance growth and normality of the endpoint law along an n grid.

    For each n: Var(X_n)/n, and the Kolmogorov-Smirnov distance between
    (X_n - n*v_reference) / sqrt(Var(X_n)) and a standard normal.
    """

    n_grid: tuple[int, ...]
    replicas: int
    v_reference: float
    variance_ratio: tuple[float, ...]
    ks_distance: tuple[float, ...]

    def rows(self):
        return list(zip(self.n_grid, self.variance_ratio, self.ks_distance))

    def to_dict(self) -> dict:
        return {"n_grid": list(self.n_grid), "replicas": self.replicas,
                "v_reference": self.v_reference,
                "variance_ratio": list(self.variance_ratio),
                "ks_distance": list(self.ks_distance)}


def clt_diagnostic(params: ModelParams, n_grid, replicas: int,
                   v_reference: float, *,
                   overrides: Overrides = NO_OVERRIDES) -> CltReport:
    grid = tuple(int(n) for n in n_grid)
    if not grid or any(n < 1 for n in grid):
        raise ConfigError("n_grid must hold positive step counts")
    if sorted(grid) != list(grid):
        raise ConfigError("n_grid must be sorted ascending")
    if replicas < 100:
        raise ConfigError("the diagnostic needs at least 100 replicas")
    seeds = estimator_seeds(params.seed, CLT, replicas)
    ends = _endpoint_batch(params, seeds, grid[-1], overrides, checkpoints=grid)
    ratios, dists = [], []
    for j, n in enumerate(grid):
        var = float(np.var(ends[:, j], ddof=1))
        ratios.append(var / n)
        if var > 0.0:
            z = (ends[:, j] - n * v_reference) / math.sqrt(var)
            dists.append(float(stats.kstest(z, "norm").statistic))
        else:
            dists.append(math.nan)
    return CltReport(grid, replicas, v_reference, tuple(ratios), tuple(dists))


# ---------------------------------------------------------------------------
# Escape probability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EscapeEstimate:
    """Frequency of the walker/ghost pair escaping ballistically from 0.

    The event is G (walker sticks to the ghost) and Lambda (the ghost
    stays above the half-drift line) over the horizon, under a fixed
    finite configuration.
    """

    config: tuple[tuple[int, int], ...]
    horizon: int
    replicas: int
    hits: int
    p_hat: float
    ci: ConfidenceInterval
    g_rate: float
    lambda_rate: float

    def to_dict(self) -> dict:
        return {"config": [list(p) for p in self.config],
                "horizon": self.horizon, "replicas": self.replicas,
                "hits": self.hits, "p_hat": self.p_hat,
                "ci": self.ci.to_dict(), "g_rate": self.g_rate,
                "lambda_rate": self.lambda_rate}


def escape_probability(params: ModelParams, config: dict[int, int], horizon: int,
                       replicas: int = 400,
                       confidence: float = 0.95) -> EscapeEstimate:
    """Monte Carlo frequency of G and Lambda holding jointly at the origin.

    ``config`` fixes the whole initial configuration (the Poisson field is
    not drawn).  The origin must be vacant, matching the hypothesis under
    which the joint event has positive probability.
    """
    if int(config.get(0, 0)) != 0:
        raise ConfigError("escape estimate needs a vacant origin")
    if any(c < 0 for c in config.values()):
        raise ConfigError("negative particle count in config")
    if horizon < 1 or replicas < 1:
        raise ConfigError("horizon and replicas must be >= 1")
    ov = Overrides(config={int(z): int(c) for z, c in config.items()})
    seeds = estimator_seeds(params.seed, ESCAPE, replicas)
    hits = g_hits = lam_hits = 0
    for s in seeds:
        rep = coupling_report(params.with_seed(int(s)), (0, 0), horizon, ov)
        g_hits += rep.g_holds
        lam_hits += rep.lambda_holds
        hits += rep.g_holds and rep.lambda_holds
    cfg = tuple(sorted((int(z), int(c)) for z, c in config.items() if c))
    return EscapeEstimate(cfg, horizon, replicas, hits, hits / replicas,
                          wilson_interval(hits, replicas, confidence),
                          g_hits / replicas, lam_hits / replicas)


# ---------------------------------------------------------------------------
# Regenerative estimates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurvivalTable:
    """Empirical survival of the regeneration waiting time on a doubling grid.

    Computed from completed waits only; each replica additionally leaves
    one right-censored tail (from its last regeneration to the horizon),
    counted in ``n_censored`` but not tabulated.
    """

    horizon: int
    n_complete: int
    n_censored: int
    ts: tuple[int, ...]
    survival: tuple[float, ...]

    @property
    def censored_fraction(self) -> float:
        total = self.n_complete + self.n_censored
        return self.n_censored / total if total else 0.0

    def rows(self):
        return list(zip(self.ts, self.survival))

    def to_dict(self) -> dict:
        return {"horizon": self.horizon, "n_complete": self.n_complete,
                "n_censored": self.n_censored,
                "censored_fraction": self.censored_fraction,
                "rows": [[t, s] for t, s in self.rows()]}


def _survival_table(waits: np.ndarray, n_censored: int, horizon: int) -> SurvivalTable:
    ts = []
    t = 1
    while t <= horizon:
        ts.append(t)
        t *= 2
    if waits.size:
        surv = [float(np.count_nonzero(waits > t)) / waits.size for t in ts]
    else:
        ts, surv = [], []
    return SurvivalTable(horizon, int(waits.size), n_censored,
                         tuple(ts), tuple(surv))


@dataclass(frozen=True)
class RegenerativeReport:
    """Pooled regeneration cycles across replicas and the estimates they carry.

    ``sufficient`` is False when fewer than ten completed cycles were
    found; ``speed`` is None in that case.  ``replica_slices`` marks each
    replica's [start, stop) range inside the pooled increment arrays so
    diagnostics can stay within renewal chains.
    """

    v_star: Fraction
    horizon: int
    post_window: int
    target_count: int
    replicas: int
    cycles: int
    sufficient: bool
    speed: SpeedEstimate | None
    dx: np.ndarray
    dt: np.ndarray
    replica_slices: tuple[tuple[int, int], ...]
    first_taus: tuple[int | None, ...]
    survival: SurvivalTable

    def to_dict(self) -> dict:
        return {"v_star": str(self.v_star), "horizon": self.horizon,
                "post_window": self.post_window,
                "target_count": self.target_count, "replicas": self.replicas,
                "cycles": self.cycles, "sufficient": self.sufficient,
                "speed": None if self.speed is None else self.speed.to_dict(),
                "first_taus": list(self.first_taus),
                "survival": self.survival.to_dict()}


MIN_CYCLES = 10


def regenerative_estimates(params: ModelParams, v_star, horizon: int,
                           target_count: int, *,
                           post_window: int | None = None,
                           w_past: int | None = None,
                           confidence: float = 0.95,
                           max_replicas: int = 64) -> RegenerativeReport:
    """Chain regenerations over replicas until ``target_count`` cycles pool up.

    Replicas are consumed in seed order, so the pooled arrays are
    reproducible.  The speed is the ratio sum(dx)/sum(dt) over completed
    cycles with a delta-method interval; the waiting-time survival table
    pools every completed wait (including each replica's first).
    """
    if params.p_bullet <= 0.0:
        raise ConfigError("regenerative estimates need p_bullet > 0")
    if target_count < 1:
        raise ConfigError("target_count must be >= 1")
    v = as_fraction(v_star)
    post = horizon // 8 if post_window is None else post_window
    if post < 1 or post > horizon:
        raise ConfigError("post_window must be in [1, horizon]")
    dxs, dts, slices, waits = [], [], [], []
    first_taus: list[int | None] = []
    pooled = 0
    n_censored = 0
    replicas = 0
    while replicas < max_replicas:
        child = rnd.derive_seed(params.seed, rnd.REPLICA, REGENERATIVE, replicas)
        chain = chained_regenerations(params.with_seed(child), v, horizon, post,
                                      w_past=w_past)
        replicas += 1
        n_censored += 1  # the tail beyond the last regeneration is open
        if chain.count == 0:
            first_taus.append(None)
            continue
        first_taus.append(int(chain.taus[0]))
        waits.append(np.concatenate([chain.taus[:1], np.diff(chain.taus)]))
        dx, dt = chain.increments()
        slices.append((pooled, pooled + dx.size))
        pooled += dx.size
        dxs.append(dx)
        dts.append(dt)
        if pooled >= target_count:
            break
    dx = np.concatenate(dxs) if dxs else np.array([], dtype=np.int64)
    dt = np.concatenate(dts) if dts else np.array([], dtype=np.int64)
    wait_arr = np.concatenate(waits) if waits else np.array([], dtype=np.int64)
    sufficient = dx.size >= MIN_CYCLES
    speed = None
    if sufficient:
        v_hat = float(dx.sum() / dt.sum())
        resid = dx - v_hat * dt
        se = float(np.std(resid, ddof=1) / (math.sqrt(dx.size) * np.mean(dt)))
        speed = SpeedEstimate(v_hat, normal_interval(v_hat, se, confidence),
                              horizon, replicas, "regenerative", se)
    return RegenerativeReport(v, horizon, post, target_count, replicas,
                              int(dx.size), sufficient, speed, dx, dt,
                              tuple(slices), tuple(first_taus),
                              _survival_table(wait_arr, n_censored, horizon))


def lag1_autocorrelation(values: np.ndarray, slices) -> float:
    """Pooled lag-1 autocorrelation using only pairs inside one replica."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        return math.nan
    c = v - v.mean()
    num = den = 0.0
    for lo, hi in slices:
        seg = c[lo:hi]
        num += float(np.sum(seg[:-1] * seg[1:]))
        den += float(np.sum(seg * seg))
    return num / den if den else math.nan


def split_half_ks(values: np.ndarray) -> tuple[float, float]:
    """Two-sample KS between the first and second halves of a pooled sample."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 4:
        return math.nan, math.nan
    res = stats.ks_2samp(v[: v.size // 2], v[v.size // 2:], method="asymp")
    return float(res.statistic), float(res.pvalue)


# ---------------------------------------------------------------------------
# Walker vs infection front
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WalkerFrontReport:
    """Speeds of the walker and the infection front on shared realizations."""

    horizon: int
    replicas: int
    walker: SpeedEstimate
    front: SpeedEstimate
    domination_violations: int
    parity_ok: bool
    guarantees_apply: bool

    def to_dict(self) -> dict:
        return {"horizon": self.horizon, "replicas": self.replicas,
                "walker": self.walker.to_dict(), "front": self.front.to_dict(),
                "domination_violations": self.domination_violations,
                "parity_ok": self.parity_ok,
                "guarantees_apply": self.guarantees_apply}


def walker_front_speeds(params: ModelParams, horizon: int, replicas: int,
                        confidence: float = 0.95, *,
                        seed_cap: int = 10000) -> WalkerFrontReport:
    """Estimate both speeds replica by replica, checking domination pathwise."""
    if horizon < 1 or replicas < 1:
        raise ConfigError("horizon and replicas must be >= 1")
    seeds = estimator_seeds(params.seed, WALKER_FRONT, replicas)
    w_ends = np.empty(replicas, dtype=np.int64)
    f_ends = np.empty(replicas, dtype=np.int64)
    violations = 0
    parity_ok = True
    guarantees = True
    for r, s in enumerate(seeds):
        rep = compare_walker_front(params.with_seed(int(s)), horizon,
                                   seed_cap=seed_cap)
        w_ends[r] = rep.walker.endpoint()
        f_ends[r] = rep.front.endpoint()
        violations += len(rep.violations)
        parity_ok = parity_ok and rep.parity_ok
        guarantees = guarantees and rep.guarantees_apply
    walker = _mean_estimate(w_ends / horizon, horizon, confidence, "replica-mean")
    front = _mean_estimate(f_ends / horizon, horizon, confidence, "replica-mean")
    return WalkerFrontReport(horizon, replicas, walker, front,
                             violations, parity_ok, guarantees)
