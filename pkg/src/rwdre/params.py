"""Model parameters, injected-environment overrides, and error types.

The model: sites of Z carry i.i.d. Poisson(rho) many particles at time 0,
each particle runs an independent two-sided lazy simple random walk with
stay probability q0.  A walker starts at the origin and, each time step,
jumps right with probability p_circ if its current site is empty and
p_bullet if it is occupied, otherwise left.  Local drifts are
v_circ = 2*p_circ - 1 and v_bullet = 2*p_bullet - 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence


class RwdreError(Exception):
    """Base class for package errors."""


class ConfigError(RwdreError):
    """Invalid parameters, overrides, or operation arguments."""


class StateSpaceError(RwdreError):
    """An exact computation would exceed its configured state-space guard."""


class NoSeedInfectionError(RwdreError):
    """No even nonnegative occupied site exists to seed the infection."""


@dataclass(frozen=True)
class ModelParams:
    """Immutable model parameters plus the master seed.

    rho      -- mean of the Poisson initial counts, >= 0
    p_circ   -- right-jump probability on an empty site
    p_bullet -- right-jump probability on an occupied site
    q0       -- lazy-walk stay probability of every particle
    seed     -- master seed; every random quantity is a pure function of it
    """

    rho: float
    p_circ: float
    p_bullet: float
    q0: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (self.rho >= 0.0):
            raise ConfigError(f"rho must be >= 0, got {self.rho}")
        for name in ("p_circ", "p_bullet", "q0"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an int, got {type(self.seed).__name__}")

    @property
    def v_circ(self) -> float:
        """Local drift on empty sites, 2*p_circ - 1."""
        return 2.0 * self.p_circ - 1.0

    @property
    def v_bullet(self) -> float:
        """Local drift on occupied sites, 2*p_bullet - 1."""
        return 2.0 * self.p_bullet - 1.0

    def with_seed(self, seed: int) -> "ModelParams":
        return ModelParams(self.rho, self.p_circ, self.p_bullet, self.q0, seed)

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "p_circ": self.p_circ,
            "p_bullet": self.p_bullet,
            "q0": self.q0,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ExplicitTrajectory:
    """A hand-specified particle path, used to stage environments in tests.

    ``positions[i]`` is the particle's site at time ``t0 + i``.  Outside the
    given range the particle is frozen at the nearest endpoint (queries far
    outside a staged window would otherwise be undefined; the freeze keeps
    occupancy total and is irrelevant as long as the window covers the
    staged range).  Consecutive positions must differ by at most 1.
    """

    t0: int
    positions: tuple[int, ...]

    def __post_init__(self):
        if not self.positions:
            raise ConfigError("ExplicitTrajectory needs at least one position")
        for a, b in zip(self.positions, self.positions[1:]):
            if abs(b - a) > 1:
                raise ConfigError("ExplicitTrajectory must move by at most 1 per step")

    def position(self, t: int) -> int:
        i = min(max(t - self.t0, 0), len(self.positions) - 1)
        return self.positions[i]


@dataclass(frozen=True)
class Overrides:
    """Optional replacements/additions to the random environment.

    config        -- if given, replaces the Poisson initial counts entirely:
                     a mapping {site: count} with nonnegative counts.  The
                     particles still move by their keyed random walks.
    extra         -- additional particles superposed on top of the base
                     environment, {site: count}.  Their step streams are
                     keyed by (site, index) with indices continuing past the
                     base counts, so the base realization is untouched —
                     this is the coupling used by the monotonicity checks.
    trajectories  -- extra particles with explicit hand-specified paths.
    uniforms      -- overrides of the site uniforms, {(x, t): u in [0,1)}.
    """

    config: Mapping[int, int] | None = None
    extra: Mapping[int, int] = field(default_factory=dict)
    trajectories: Sequence[ExplicitTrajectory] = ()
    uniforms: Mapping[tuple[int, int], float] | None = None

    def __post_init__(self):
        for m, what in ((self.config, "config"), (self.extra, "extra")):
            if m is None:
                continue
            for z, c in m.items():
                if int(c) < 0:
                    raise ConfigError(f"{what} count at site {z} must be >= 0, got {c}")
        if self.uniforms:
            for pt, u in self.uniforms.items():
                if not (0.0 <= u < 1.0):
                    raise ConfigError(f"uniform override at {pt} must be in [0,1), got {u}")


NO_OVERRIDES = Overrides()


def empty_config() -> Overrides:
    """An injected environment with no particles at all (rho irrelevant)."""
    return Overrides(config={})


def config_from_pairs(pairs: Sequence[tuple[int, int]]) -> Overrides:
    """Injected environment from (site, count) pairs."""
    cfg: dict[int, int] = {}
    for z, c in pairs:
        cfg[int(z)] = cfg.get(int(z), 0) + int(c)
    return Overrides(config=cfg)
