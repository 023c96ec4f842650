"""Environment core: initial counts, particle trajectories, exact windows.

The environment is a countable family of particles.  Site z holds
``N(z, 0)`` particles at time 0 (i.i.d. Poisson(rho), or an injected
configuration); particle ``(z, i)`` (1-based i) runs a two-sided lazy
simple random walk whose forward and backward legs are independent.
``N(x, t)`` counts particles at site x at time t.

Because trajectories move by at most one site per step, the occupancy
inside a finite box is determined exactly by the particles started within
a horizontal margin of the box equal to the largest |time| in the box.
``build_window`` materializes exactly that, so nothing downstream ever
approximates occupancy.

All randomness is drawn through the keyed PRF in :mod:`rwdre.randomness`;
a particle's step at a given time is addressable without generating any
other step, which is what lets the sweeps here run forward or backward.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import randomness as rnd
from .params import ConfigError, ModelParams, Overrides, NO_OVERRIDES

# Hard cap for the Poisson inverse-CDF loop; counts beyond this are clamped.
# The residual probability at the cap is far below the 2^-53 resolution of
# the driving uniforms for any rho this package is used with.
_POISSON_KMAX_SLACK = 60.0


def _poisson_kmax(rho: float) -> int:
    return int(np.ceil(rho + 12.0 * np.sqrt(rho + 1.0) + _POISSON_KMAX_SLACK))


def initial_counts(params: ModelParams, z_lo: int, z_hi: int,
                   overrides: Overrides = NO_OVERRIDES) -> np.ndarray:
    """Initial particle counts on the sites z_lo..z_hi inclusive.

    One uniform per site, inverted through the Poisson CDF by direct
    summation of the pmf recurrence.  With ``overrides.config`` the Poisson
    draw is replaced by the injected counts; ``overrides.extra`` is added on
    top of either.
    """
    if z_hi < z_lo:
        raise ConfigError(f"empty site range [{z_lo}, {z_hi}]")
    sites = np.arange(z_lo, z_hi + 1, dtype=np.int64)
    if overrides.config is not None:
        counts = np.zeros(sites.size, dtype=np.int64)
        for z, c in overrides.config.items():
            if z_lo <= z <= z_hi:
                counts[z - z_lo] = int(c)
    elif params.rho == 0.0:
        counts = np.zeros(sites.size, dtype=np.int64)
    else:
        u = rnd.uniform_from_words_vec(params.seed, rnd.INITIAL_COUNTS, sites)
        counts = _poisson_from_uniform(u, params.rho)
    for z, c in overrides.extra.items():
        if z_lo <= z <= z_hi:
            counts[z - z_lo] += int(c)
    return counts


def _poisson_from_uniform(u: np.ndarray, rho: float) -> np.ndarray:
    """Inverse-CDF Poisson: smallest k with u < P(N <= k)."""
    counts = np.zeros(u.shape, dtype=np.int64)
    pmf = np.full(u.shape, np.exp(-rho))
    cdf = pmf.copy()
    k = 0
    kmax = _poisson_kmax(rho)
    unsettled = u >= cdf
    while unsettled.any():
        k += 1
        if k > kmax:
            counts[unsettled] = kmax  # sub-2^-53 tail, clamp deterministically
            break
        pmf = pmf * (rho / k)
        cdf = cdf + pmf
        counts[unsettled] = k
        unsettled = u >= cdf
    return counts


# ---------------------------------------------------------------------------
# Particle steps and positions
# ---------------------------------------------------------------------------


def lazy_steps_from_uniforms(u: np.ndarray, q0: float) -> np.ndarray:
    """Map uniforms to lazy-walk steps: stay band first, then right, then left.

    u < q0            -> 0
    q0 <= u < q0+h    -> +1   (h = (1-q0)/2)
    otherwise         -> -1
    """
    half = q0 + (1.0 - q0) / 2.0
    return np.where(u < q0, 0, np.where(u < half, 1, -1)).astype(np.int64)


def step_batch(params: ModelParams, starts: np.ndarray, indices: np.ndarray,
               n: int) -> np.ndarray:
    """Forward steps S_n - S_{n-1} for particles (starts[j], indices[j]), n >= 1."""
    u = rnd.uniform_from_words_vec(params.seed, rnd.STEPS_FORWARD, starts, indices, n)
    return lazy_steps_from_uniforms(u, params.q0)


def step_batch_backward(params: ModelParams, starts: np.ndarray,
                        indices: np.ndarray, j: int) -> np.ndarray:
    """Backward steps S_{-j} - S_{-j+1} for the independent past leg, j >= 1."""
    u = rnd.uniform_from_words_vec(params.seed, rnd.STEPS_BACKWARD, starts, indices, j)
    return lazy_steps_from_uniforms(u, params.q0)


def trajectory_position(params: ModelParams, z: int, i: int, t: int) -> int:
    """Position of particle (z, i) at any integer time (exact, O(|t|))."""
    z_arr = np.array([z], dtype=np.int64)
    i_arr = np.array([i], dtype=np.int64)
    pos = z
    if t >= 0:
        for n in range(1, t + 1):
            pos += int(step_batch(params, z_arr, i_arr, n)[0])
    else:
        for j in range(1, -t + 1):
            pos += int(step_batch_backward(params, z_arr, i_arr, j)[0])
    return pos


# ---------------------------------------------------------------------------
# Particle systems: every particle relevant to a spatial start-range
# ---------------------------------------------------------------------------


@dataclass
class ParticleSystem:
    """The particles started in a site range, plus any explicit trajectories.

    ``starts``/``indices`` address the keyed particles; explicit
    trajectories ride along at the end of every position array.
    """

    params: ModelParams
    z_lo: int
    z_hi: int
    starts: np.ndarray   # (P,) int64
    indices: np.ndarray  # (P,) int64, 1-based per start site
    explicit: tuple      # tuple[ExplicitTrajectory, ...]

    @property
    def n_keyed(self) -> int:
        return int(self.starts.size)

    @property
    def n_total(self) -> int:
        return self.n_keyed + len(self.explicit)

    def positions_at_zero(self) -> np.ndarray:
        expl = [tr.position(0) for tr in self.explicit]
        return np.concatenate([self.starts, np.array(expl, dtype=np.int64)]) \
            if expl else self.starts.copy()

    def advance(self, positions: np.ndarray, t_from: int, t_to: int) -> np.ndarray:
        """Positions at t_to given positions at t_from (|t_to - t_from| = 1)."""
        p = positions.copy()
        k = self.n_keyed
        if t_to == t_from + 1:
            if t_to >= 1:
                p[:k] += step_batch(self.params, self.starts, self.indices, t_to)
            else:  # t_to <= 0: undo a backward step
                p[:k] -= step_batch_backward(self.params, self.starts, self.indices, -t_to + 1)
        elif t_to == t_from - 1:
            if t_from >= 1:
                p[:k] -= step_batch(self.params, self.starts, self.indices, t_from)
            else:
                p[:k] += step_batch_backward(self.params, self.starts, self.indices, -t_to)
        else:
            raise ConfigError("advance moves one time step at a time")
        for e, tr in enumerate(self.explicit):
            p[k + e] = tr.position(t_to)
        return p

    def positions_matrix(self, t_lo: int, t_hi: int) -> np.ndarray:
        """(n_total, t_hi - t_lo + 1) positions; column j is time t_lo + j."""
        if t_hi < t_lo:
            raise ConfigError(f"empty time range [{t_lo}, {t_hi}]")
        T = t_hi - t_lo + 1
        out = np.empty((self.n_total, T), dtype=np.int64)
        pos = self.positions_at_zero()
        # walk from time 0 to t_lo, then sweep across the range
        t = 0
        while t > t_lo:
            pos = self.advance(pos, t, t - 1)
            t -= 1
        while t < t_lo:
            pos = self.advance(pos, t, t + 1)
            t += 1
        out[:, 0] = pos
        while t < t_hi:
            pos = self.advance(pos, t, t + 1)
            t += 1
            out[:, t - t_lo] = pos
        return out


def particle_system(params: ModelParams, z_lo: int, z_hi: int,
                    overrides: Overrides = NO_OVERRIDES) -> ParticleSystem:
    """Materialize every keyed particle started in [z_lo, z_hi]."""
    counts = initial_counts(params, z_lo, z_hi, overrides)
    sites = np.arange(z_lo, z_hi + 1, dtype=np.int64)
    starts = np.repeat(sites, counts)
    # 1-based index within each site: offset inside the site's block + 1
    block_starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    indices = np.arange(starts.size, dtype=np.int64) - np.repeat(block_starts, counts) + 1
    return ParticleSystem(params, z_lo, z_hi, starts, indices, tuple(overrides.trajectories))


# ---------------------------------------------------------------------------
# Exact occupancy windows
# ---------------------------------------------------------------------------


@dataclass
class EnvironmentWindow:
    """Exact occupancy counts on a finite space-time box.

    counts[t - t_lo, x - x_lo] is N(x, t).  ``margin`` is the horizontal
    sufficiency margin actually used: particles started farther than that
    from the box cannot reach it within the box's time range.
    """

    x_lo: int
    x_hi: int
    t_lo: int
    t_hi: int
    margin: int
    counts: np.ndarray  # (T, W) int32
    n_particles: int

    def _check(self, x: int, t: int):
        if not (self.x_lo <= x <= self.x_hi and self.t_lo <= t <= self.t_hi):
            raise ConfigError(
                f"({x}, {t}) outside window [{self.x_lo},{self.x_hi}]x[{self.t_lo},{self.t_hi}]")

    def count_at(self, x: int, t: int) -> int:
        self._check(x, t)
        return int(self.counts[t - self.t_lo, x - self.x_lo])

    def occupied(self, x: int, t: int) -> bool:
        return self.count_at(x, t) > 0


def build_window(params: ModelParams, x_lo: int, x_hi: int, t_lo: int, t_hi: int,
                 overrides: Overrides = NO_OVERRIDES) -> EnvironmentWindow:
    """Exact N(x, t) on [x_lo, x_hi] x [t_lo, t_hi].

    The margin max(|t_lo|, |t_hi|) is sufficient because trajectories are
    1-Lipschitz in time: a particle started at distance > margin from the
    box cannot enter it at any time the box contains.
    """
    if x_hi < x_lo or t_hi < t_lo:
        raise ConfigError("window box must be nonempty")
    margin = max(abs(t_lo), abs(t_hi))
    sys = particle_system(params, x_lo - margin, x_hi + margin, overrides)
    T = t_hi - t_lo + 1
    W = x_hi - x_lo + 1
    counts = np.zeros((T, W), dtype=np.int32)
    if sys.n_total:
        pm = sys.positions_matrix(t_lo, t_hi)
        for ti in range(T):
            col = pm[:, ti] - x_lo
            inside = (col >= 0) & (col < W)
            np.add.at(counts[ti], col[inside], 1)
    return EnvironmentWindow(x_lo, x_hi, t_lo, t_hi, margin, counts, sys.n_total)


# ---------------------------------------------------------------------------
# Site uniforms
# ---------------------------------------------------------------------------


def uniform_at(params: ModelParams, x: int, t: int,
               overrides: Overrides = NO_OVERRIDES) -> float:
    """The uniform U_(x,t) in [0, 1) driving walker decisions at (x, t)."""
    if overrides.uniforms is not None:
        v = overrides.uniforms.get((x, t))
        if v is not None:
            return v
    return rnd.uniform_from_words(params.seed, rnd.UNIFORM_FIELD, x, t)


def uniform_at_vec(params: ModelParams, x: np.ndarray, t) -> np.ndarray:
    """Vectorized site uniforms (no override table on the batch path)."""
    return rnd.uniform_from_words_vec(params.seed, rnd.UNIFORM_FIELD, x, t)


def leftmost_even_occupied(params: ModelParams, overrides: Overrides = NO_OVERRIDES,
                           cap: int = 10000) -> int:
    """Smallest even z >= 0 with N(z, 0) >= 1, scanning up to ``cap``."""
    chunk = 256
    z = 0
    while z <= cap:
        hi = min(z + chunk - 1, cap)
        counts = initial_counts(params, z, hi, overrides)
        occ = np.flatnonzero((counts > 0) & (np.arange(z, hi + 1) % 2 == 0))
        if occ.size:
            return z + int(occ[0])
        z = hi + 1
    from .params import NoSeedInfectionError
    raise NoSeedInfectionError(
        f"no even occupied site in [0, {cap}]; environment cannot seed an infection")
