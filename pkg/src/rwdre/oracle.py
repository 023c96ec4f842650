"""Exact finite-horizon laws of the walker.

Two independent exact routes:

* ``exact_walker_pmf`` — brute-force dynamic programming over the joint
  chain (walker position, multiset of particle positions) for a small
  injected configuration.  Guarded state space; optionally in exact
  rational arithmetic.

* ``exact_pmf_poisson`` — the walker's law under the Poisson environment,
  in closed form.  Each walker path's probability is a product of factors
  affine in the indicators {site empty}; expanding the product over
  subsets of time steps turns the environment expectation into vacancy
  probabilities of finite space-time point sets, which for a Poisson
  cloud of independent walks is exp(-rho * sum_z P(walk from z hits the
  set)).  No truncation: the returned mass defect is exactly zero.

The two routes share no code beyond the step kernel constants, which is
what makes their agreement on fixed configurations a meaningful check
(the path-expansion route also accepts a fixed configuration, where the
vacancy probability is a finite product instead of an exponential).

Sampling convention note: these are *laws*, not simulations — nothing
here touches the keyed PRF, so oracle values depend only on
(rho, p_circ, p_bullet, q0, n), never on the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .params import ConfigError, ModelParams, Overrides, StateSpaceError

MAX_ORACLE_PARTICLES = 3
MAX_ORACLE_STEPS = 10
MAX_POISSON_ORACLE_STEPS = 5


@dataclass
class ExactPmf:
    """An exact finite-horizon law of the walker endpoint X_n.

    support is sorted, all of one parity (that of n); probabilities sum to
    1 - mass_defect up to float rounding.
    """

    n: int
    support: np.ndarray
    probs: np.ndarray
    mass_defect: float
    method: str

    def prob(self, x: int) -> float:
        hit = np.flatnonzero(self.support == x)
        return float(self.probs[hit[0]]) if hit.size else 0.0

    def as_dict(self) -> dict[int, float]:
        return {int(x): float(p) for x, p in zip(self.support, self.probs)}

    def rows(self):
        """(x, probability) pairs."""
        return [(int(x), float(p)) for x, p in zip(self.support, self.probs)]


def tv_distance(a: Mapping[int, float], b: Mapping[int, float]) -> float:
    """Total-variation distance between two pmfs given as {x: prob}."""
    keys = set(a) | set(b)
    return 0.5 * math.fsum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


def empirical_pmf(samples: np.ndarray) -> dict[int, float]:
    xs, counts = np.unique(np.asarray(samples), return_counts=True)
    total = counts.sum()
    return {int(x): c / total for x, c in zip(xs, counts)}


def _config_particle_list(overrides: Overrides | None) -> list[int]:
    if overrides is None or overrides.config is None:
        raise ConfigError("exact_walker_pmf needs an injected configuration "
                          "(use exact_pmf_poisson for the Poisson environment)")
    if overrides.extra or overrides.trajectories or overrides.uniforms:
        raise ConfigError("oracle supports config-only overrides")
    out: list[int] = []
    for z in sorted(overrides.config):
        out.extend([int(z)] * int(overrides.config[z]))
    return out


def exact_walker_pmf(params: ModelParams, n: int, overrides: Overrides,
                     rational: bool = False,
                     max_particles: int = MAX_ORACLE_PARTICLES,
                     max_steps: int = MAX_ORACLE_STEPS) -> ExactPmf:
    """Exact law of X_n over a fixed configuration, by joint-chain DP.

    State = (walker position, sorted tuple of particle positions); each
    transition enumerates the walker branch and every combination of
    particle moves.  ``rational=True`` switches to Fraction arithmetic on
    the exact rational values of the float parameters.
    """
    particles = _config_particle_list(overrides)
    K = len(particles)
    if K > max_particles:
        raise StateSpaceError(
            f"{K} particles exceeds the joint-chain guard of {max_particles} "
            f"(state space grows like (2n+1)^(K+1))")
    if not (0 <= n <= max_steps):
        raise StateSpaceError(f"n={n} outside the guarded range [0, {max_steps}]")

    if rational:
        p_circ = Fraction(params.p_circ)
        p_bullet = Fraction(params.p_bullet)
        q0 = Fraction(params.q0)
        one = Fraction(1)
    else:
        p_circ, p_bullet, q0, one = params.p_circ, params.p_bullet, params.q0, 1.0
    half = (one - q0) / 2
    moves = [(d, pr) for d, pr in ((-1, half), (0, q0), (1, half)) if pr > 0]

    states: dict[tuple[int, tuple[int, ...]], object] = {(0, tuple(sorted(particles))): one}
    for t in range(n):
        nxt: dict[tuple[int, tuple[int, ...]], object] = {}
        for (x, cfg), pr in states.items():
            p_right = p_bullet if x in cfg else p_circ
            for dx, pw in ((1, p_right), (-1, one - p_right)):
                if pw == 0:
                    continue
                base = pr * pw
                for new_cfg, pm in _particle_moves(cfg, moves, one):
                    key = (x + dx, new_cfg)
                    nxt[key] = nxt.get(key, 0) + base * pm
        states = nxt

    pmf: dict[int, object] = {}
    for (x, _), pr in states.items():
        pmf[x] = pmf.get(x, 0) + pr
    support = np.array(sorted(pmf), dtype=np.int64)
    probs = np.array([float(pmf[int(x)]) for x in support])
    return ExactPmf(n, support, probs, 0.0, "joint-chain-dp")


def _particle_moves(cfg: tuple[int, ...], moves, one):
    """All joint particle moves from sorted cfg: (sorted new cfg, probability)."""
    stack = [((), one)]
    for z in cfg:
        stack = [(partial + (z + d,), pr * pm)
                 for partial, pr in stack for d, pm in moves]
    out: dict[tuple[int, ...], object] = {}
    for positions, pr in stack:
        key = tuple(sorted(positions))
        out[key] = out.get(key, 0) + pr
    return list(out.items())


# ---------------------------------------------------------------------------
# Closed-form law under the Poisson environment (or a fixed configuration)
# ---------------------------------------------------------------------------


def _lazy_kernel_row(q0: float) -> tuple[float, float, float]:
    half = (1.0 - q0) / 2.0
    return half, q0, half


def _avoid_probability(z: int, targets: list[tuple[int, int]], q0: float) -> float:
    """P(a lazy walk from z misses every (site, time) in targets).

    targets times are distinct and >= 0.  Forward DP on the particle's
    position distribution, zeroing the mass sitting on each target at its
    time.
    """
    t_max = max(t for _, t in targets)
    by_time = {t: x for x, t in targets}
    left, stay, right = _lazy_kernel_row(q0)
    # position distribution over offsets -t..t from z
    dist = {z: 1.0}
    if 0 in by_time and by_time[0] == z:
        return 0.0
    for t in range(1, t_max + 1):
        nxt: dict[int, float] = {}
        for s, pr in dist.items():
            nxt[s - 1] = nxt.get(s - 1, 0.0) + pr * left
            nxt[s + 1] = nxt.get(s + 1, 0.0) + pr * right
            if stay:
                nxt[s] = nxt.get(s, 0.0) + pr * stay
        if t in by_time:
            nxt.pop(by_time[t], None)
        dist = nxt
    return math.fsum(dist.values())


def _vacancy_log_weight_poisson(rho: float, targets: list[tuple[int, int]],
                                q0: float) -> float:
    """P(every target vacant) under the Poisson cloud: exp(-rho * sum_z hit_z)."""
    if not targets:
        return 1.0
    t_max = max(t for _, t in targets)
    xs = [x for x, _ in targets]
    z_lo, z_hi = min(xs) - t_max, max(xs) + t_max
    total_hit = math.fsum(1.0 - _avoid_probability(z, targets, q0)
                          for z in range(z_lo, z_hi + 1))
    return math.exp(-rho * total_hit)


def _vacancy_weight_config(particles: list[int], targets: list[tuple[int, int]],
                           q0: float) -> float:
    if not targets:
        return 1.0
    return math.prod(_avoid_probability(z, targets, q0) for z in particles)


def exact_pmf_poisson(params: ModelParams, n: int, tail_tol: float = 1e-9,
                      overrides: Overrides | None = None,
                      max_steps: int = MAX_POISSON_ORACLE_STEPS) -> ExactPmf:
    """Exact law of X_n under the Poisson(rho) environment.

    Computed by expanding each walker path's probability over the subsets
    of steps required to see an empty site, and evaluating the vacancy
    probability of each resulting space-time point set in closed form.
    The expansion is exact — no Poisson truncation — so the certified
    mass defect is 0.0 <= tail_tol.  With ``overrides.config`` the same
    expansion runs against the fixed configuration instead (used as an
    independent cross-check of the joint-chain DP).
    """
    if not (0 <= n <= max_steps):
        raise StateSpaceError(
            f"n={n} outside the guarded range [0, {max_steps}] "
            f"(cost grows like 4^n)")
    if tail_tol < 0:
        raise ConfigError("tail_tol must be >= 0")
    fixed = None
    if overrides is not None and overrides.config is not None:
        fixed = _config_particle_list(overrides)

    b_plus = params.p_circ - params.p_bullet
    pmf: dict[int, list[float]] = {}
    for mask in range(1 << n):
        signs = [1 if (mask >> t) & 1 else -1 for t in range(n)]
        xs = [0]
        for s in signs:
            xs.append(xs[-1] + s)
        # per-step affine factors  P(step | env) = a_t + b_t * 1{empty}
        a = [params.p_bullet if s == 1 else 1.0 - params.p_bullet for s in signs]
        b = [b_plus if s == 1 else -b_plus for s in signs]
        total = 0.0
        for sub in range(1 << n):
            w = 1.0
            targets = []
            for t in range(n):
                if (sub >> t) & 1:
                    w *= b[t]
                    targets.append((xs[t], t))
                else:
                    w *= a[t]
            if w == 0.0:
                continue
            if fixed is None:
                w *= _vacancy_log_weight_poisson(params.rho, targets, params.q0)
            else:
                w *= _vacancy_weight_config(fixed, targets, params.q0)
            total += w
        pmf.setdefault(xs[-1], []).append(total)

    support = np.array(sorted(pmf), dtype=np.int64)
    probs = np.array([math.fsum(pmf[int(x)]) for x in support])
    return ExactPmf(n, support, probs, 0.0, "path-expansion")
