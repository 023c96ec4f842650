"""Particle-to-particle infection and its left front.

At time 0 every particle sitting on an even site z >= 0 is infected.
Whenever a healthy particle shares a site with an infected one at time n,
it is infected at time n + 1; infection never heals.  The front is the
position of the leftmost infected particle.

The walker comparison matters in the blocking regime: with
p_bullet = 0 and q0 = 0 the walker can never cross a particle, so it can
never overtake the front (it would have to cross the leftmost infected
particle to do so).  ``compare_walker_front`` runs both processes on the
same realization and reports every violation of X_n <= front_n together
with the parity of the gap.

Window soundness: the front at time n is attained by a particle whose
entire infection chain (the co-location events that actually infected
it, back to a seed) stays within start sites [z0 - 2n, z0 + 2n], where
z0 is the leftmost seed.  Particles started further out can be infected,
but can never attain the minimum by horizon T, so simulating start sites
[z0 - 2T, z0 + 2T] reproduces the infinite-volume front exactly — this
is the enlargement-invariance pinned by tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .environment import leftmost_even_occupied, particle_system, uniform_at
from .params import (ModelParams, NO_OVERRIDES, NoSeedInfectionError,
                     Overrides)
from .walker import WalkerPath


@dataclass
class FrontPath:
    """Leftmost infected-particle position at each time 0..T."""

    positions: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.positions) - 1

    def position(self, n: int) -> int:
        return int(self.positions[n])

    def endpoint(self) -> int:
        return int(self.positions[-1])

    def rows(self):
        """(t, front) pairs, CSV-ready."""
        return [(t, int(x)) for t, x in enumerate(self.positions)]


@dataclass
class InfectionState:
    """Infected set at a fixed time.

    Particle ids are (start site, index) with 1-based indices for keyed
    particles; explicit override trajectories get negative indices
    -(1 + position in the override tuple).
    """

    time: int
    infected: frozenset
    window: tuple[int, int]


@dataclass
class DominationReport:
    horizon: int
    violations: list[int] = field(default_factory=list)
    parity_ok: bool = True
    guarantees_apply: bool = False
    walker: WalkerPath | None = None
    front: FrontPath | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "violations": list(self.violations),
            "parity_ok": self.parity_ok,
            "guarantees_apply": self.guarantees_apply,
        }


def _seed_left_edge(params: ModelParams, overrides: Overrides, cap: int) -> int:
    """Leftmost initially infected position (keyed sites or explicit starts)."""
    candidates = []
    try:
        candidates.append(leftmost_even_occupied(params, overrides, cap=cap))
    except NoSeedInfectionError:
        pass
    for tr in overrides.trajectories:
        p0 = tr.position(0)
        if p0 >= 0 and p0 % 2 == 0:
            candidates.append(p0)
    if not candidates:
        raise NoSeedInfectionError(
            f"no infected particle at time 0 within [0, {cap}]")
    return min(candidates)


def _simulate(params: ModelParams, horizon: int, overrides: Overrides,
              with_walker: bool, seed_cap: int, window_margin: int):
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    z0 = _seed_left_edge(params, overrides, seed_cap)
    lo = z0 - 2 * horizon - window_margin
    hi = z0 + 2 * horizon + window_margin
    if with_walker:
        lo = min(lo, -2 * horizon - window_margin)
        hi = max(hi, 2 * horizon + window_margin)
    system = particle_system(params, lo, hi, overrides)
    pos = system.positions_at_zero()
    if pos.size == 0:
        raise NoSeedInfectionError("empty particle system")
    infected = (pos >= 0) & (pos % 2 == 0)
    if not infected.any():
        raise NoSeedInfectionError(
            "no infected particle at time 0 inside the window")

    front = np.empty(horizon + 1, dtype=np.int64)
    front[0] = pos[infected].min()
    walker_pos = np.zeros(horizon + 1, dtype=np.int64) if with_walker else None
    x = 0
    for t in range(horizon):
        if with_walker:
            occupied = bool(np.any(pos == x))
            p_right = params.p_bullet if occupied else params.p_circ
            x += 1 if uniform_at(params, x, t, overrides) < p_right else -1
            walker_pos[t + 1] = x
        if not infected.all():
            base = pos.min()
            hot = np.zeros(pos.max() - base + 1, dtype=bool)
            hot[pos[infected] - base] = True
            infected |= hot[pos - base]
        pos = system.advance(pos, t, t + 1)
        front[t + 1] = pos[infected].min()

    ids = [(int(z), int(i)) for z, i in zip(system.starts, system.indices)]
    ids += [(tr.position(0), -(1 + e)) for e, tr in enumerate(system.explicit)]
    state = InfectionState(
        time=horizon,
        infected=frozenset(pid for pid, inf in zip(ids, infected) if inf),
        window=(lo, hi),
    )
    return FrontPath(front), state, walker_pos


def run_infection(params: ModelParams, horizon: int,
                  overrides: Overrides = NO_OVERRIDES, *,
                  seed_cap: int = 10000,
                  window_margin: int = 0) -> tuple[FrontPath, InfectionState]:
    """Run the infection to ``horizon``; returns the front path and final state.

    ``window_margin`` widens the start-site window beyond the sufficiency
    radius; the front must not depend on it.
    """
    front, state, _ = _simulate(params, horizon, overrides,
                                with_walker=False, seed_cap=seed_cap,
                                window_margin=window_margin)
    return front, state


def compare_walker_front(params: ModelParams, horizon: int,
                         overrides: Overrides = NO_OVERRIDES, *,
                         seed_cap: int = 10000) -> DominationReport:
    """Walker and front on one realization, with every X_n > front_n flagged.

    The walker here is bit-identical to ``run_walker`` under the same
    seed; the guarantees flag records whether the no-crossing hypotheses
    (p_bullet = 0, q0 = 0) hold, in which case any violation is a defect.
    """
    front, _, walker_pos = _simulate(params, horizon, overrides,
                                     with_walker=True, seed_cap=seed_cap,
                                     window_margin=0)
    walker = WalkerPath(0, 0, walker_pos)
    diff = front.positions - walker_pos
    violations = [int(t) for t in np.flatnonzero(diff < 0)]
    parity_ok = bool(np.all(diff % 2 == 0))
    return DominationReport(
        horizon=horizon,
        violations=violations,
        parity_ok=parity_ok,
        guarantees_apply=(params.p_bullet == 0.0 and params.q0 == 0.0),
        walker=walker,
        front=front,
    )
