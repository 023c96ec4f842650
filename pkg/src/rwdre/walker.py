"""The walker, its homogeneous ghost, and the coupling diagnostics.

At site x and time t the walker jumps right when the site uniform
U_(x,t) is below p_bullet (occupied site) or p_circ (empty site), and
left otherwise.  The ghost is the homogeneous comparison walk: it reads
the same uniform field at its own position but always uses p_circ.

The point of the ghost: on the event G that walker and ghost agree over a
horizon (started from a common anchor), the true walker inherits the
ghost's behaviour; if additionally the ghost stays above the half-drift
ray (event Lambda), the walker is carried to the right.  The coupling
report measures exactly these events, plus the order comparison against
the origin-started walker that the comparison argument needs.

Everything here shares one realization through the keyed PRF: any two
runs with the same params see the same environment and the same uniforms
wherever their windows overlap.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .environment import (
    build_window,
    initial_counts,
    particle_system,
    uniform_at,
)
from .params import ConfigError, ModelParams, Overrides, NO_OVERRIDES, RwdreError


class NoEmptyIntervalError(RwdreError):
    """No fully empty interval of the requested radius within the search bound."""


@dataclass
class WalkerPath:
    """A realized walker trajectory.

    positions[s] is the walker's site at time t0 + s, s = 0..steps.
    """

    x0: int
    t0: int
    positions: np.ndarray

    @property
    def steps(self) -> int:
        return self.positions.size - 1

    def position(self, s: int) -> int:
        return int(self.positions[s])

    def endpoint(self) -> int:
        return int(self.positions[-1])

    def rows(self):
        """(t, x) pairs, one per time."""
        return [(self.t0 + s, int(x)) for s, x in enumerate(self.positions)]


@dataclass
class GhostPath(WalkerPath):
    """A homogeneous drift-v_circ walk on the same uniform field."""


@dataclass
class CouplingReport:
    """Outcome of the walker/ghost coupling at one anchor.

    g_holds_until   -- last s <= horizon with walker == ghost on [0, s]
    g_holds         -- walker == ghost on the whole horizon
    lambda_holds    -- ghost stayed >= anchor + v_circ*s/2 on the horizon
    domination_applicable -- origin walker was >= anchor (same parity) at
                       the anchor time, so the order comparison applies
    domination_ok   -- origin walker dominated the ghost while G held;
                       None when not applicable
    """

    anchor: tuple[int, int]
    horizon: int
    g_holds_until: int
    g_holds: bool
    lambda_holds: bool
    domination_applicable: bool
    domination_ok: bool | None
    walker: WalkerPath
    ghost: GhostPath
    origin_walker: WalkerPath

    def to_dict(self) -> dict:
        return {
            "anchor": list(self.anchor),
            "horizon": self.horizon,
            "g_holds_until": self.g_holds_until,
            "g_holds": self.g_holds,
            "lambda_holds": self.lambda_holds,
            "domination_applicable": self.domination_applicable,
            "domination_ok": self.domination_ok,
        }


@dataclass
class EmptyIntervalScan:
    """Leftmost-scan result: hat_z is the largest z < -2*ell whose radius-2*ell
    neighbourhood is empty at time 0; x_minus is hat_z - ell rounded up to an
    even site."""

    ell: int
    hat_z: int
    x_minus: int


def run_walker(params: ModelParams, steps: int, start: tuple[int, int] = (0, 0),
               overrides: Overrides = NO_OVERRIDES) -> WalkerPath:
    """Simulate the walker for ``steps`` steps from ``start`` = (x0, t0).

    Occupancy is exact: the particle sweep covers every start site able to
    reach the walker's reachable box within its time range.
    """
    x0, t0 = start
    if steps < 0:
        raise ConfigError("steps must be >= 0")
    if t0 < 0:
        raise ConfigError("walker start time must be >= 0")
    positions = np.empty(steps + 1, dtype=np.int64)
    positions[0] = x0
    if steps == 0:
        return WalkerPath(x0, t0, positions)

    t_hi = t0 + steps - 1  # last time at which occupancy is read
    margin = max(abs(t0), abs(t_hi))
    sys = particle_system(params, x0 - steps - margin, x0 + steps + margin, overrides)
    pos = sys.positions_at_zero()
    for t in range(0, t0):
        pos = sys.advance(pos, t, t + 1)

    x = x0
    for s in range(steps):
        t = t0 + s
        occupied = np.count_nonzero(pos == x) > 0
        p = params.p_bullet if occupied else params.p_circ
        u = uniform_at(params, x, t, overrides)
        x += 1 if u < p else -1
        positions[s + 1] = x
        if s + 1 < steps:
            pos = sys.advance(pos, t, t + 1)
    return WalkerPath(x0, t0, positions)


def run_ghost(params: ModelParams, steps: int, anchor: tuple[int, int] = (0, 0),
              overrides: Overrides = NO_OVERRIDES) -> GhostPath:
    """The homogeneous walk from ``anchor``: right iff U at its own position
    is below p_circ.  Never reads occupancy."""
    x0, t0 = anchor
    if steps < 0:
        raise ConfigError("steps must be >= 0")
    positions = np.empty(steps + 1, dtype=np.int64)
    positions[0] = x0
    x = x0
    for s in range(steps):
        u = uniform_at(params, x, t0 + s, overrides)
        x += 1 if u < params.p_circ else -1
        positions[s + 1] = x
    return GhostPath(x0, t0, positions)


def _lambda_holds(ghost: GhostPath, p_circ: float) -> bool:
    """Exact check of X_bar_s - x0 >= v_circ * s / 2 for all s on the path.

    v_circ is the exact rational value of the float 2*p_circ - 1; the
    comparison is done in integers so boundary ties are classified exactly.
    """
    v = 2 * Fraction(p_circ) - 1
    num, den = v.numerator, v.denominator
    x0 = ghost.x0
    for s in range(ghost.steps + 1):
        if 2 * den * (int(ghost.positions[s]) - x0) < num * s:
            return False
    return True


def coupling_report(params: ModelParams, anchor: tuple[int, int], horizon: int,
                    overrides: Overrides = NO_OVERRIDES) -> CouplingReport:
    """Measure the coupling events at ``anchor`` = (x, t), x even, t >= 0.

    Runs the origin walker to time t + horizon, the anchored walker and the
    anchored ghost for ``horizon`` steps, all on the same realization.
    """
    x, t = anchor
    if x % 2 != 0:
        raise ConfigError(f"anchor site must be even, got {x}")
    if t < 0:
        raise ConfigError(f"anchor time must be >= 0, got {t}")
    if horizon < 0:
        raise ConfigError("horizon must be >= 0")

    origin = run_walker(params, t + horizon, (0, 0), overrides)
    walker = run_walker(params, horizon, (x, t), overrides)
    ghost = run_ghost(params, horizon, (x, t), overrides)

    agree = walker.positions == ghost.positions
    g_holds_until = int(np.argmin(agree)) - 1 if not agree.all() else horizon
    g_holds = g_holds_until == horizon

    lam = _lambda_holds(ghost, params.p_circ)

    x_at_t = origin.position(t)
    applicable = x_at_t >= x and (x_at_t - x) % 2 == 0
    dom: bool | None = None
    if applicable:
        dom = all(origin.position(t + s) >= ghost.position(s)
                  for s in range(0, g_holds_until + 1))
    return CouplingReport((x, t), horizon, g_holds_until, g_holds, lam,
                          applicable, dom, walker, ghost, origin)


def find_empty_interval(params: ModelParams, ell: int, search_bound: int,
                        overrides: Overrides = NO_OVERRIDES) -> EmptyIntervalScan:
    """Largest z < -2*ell with N(y, 0) = 0 for all |y - z| <= 2*ell.

    Scans down to z >= -search_bound; raises NoEmptyIntervalError when the
    environment is too dense for the bound.
    """
    if ell < 1:
        raise ConfigError("ell must be >= 1")
    if search_bound <= 2 * ell:
        raise ConfigError("search_bound must exceed 2*ell")
    lo = -search_bound - 2 * ell
    hi = -1  # rightmost site any candidate interval can touch: (-2*ell-1)+2*ell
    counts = initial_counts(params, lo, hi, overrides)
    occupied = counts > 0
    width = 4 * ell + 1
    # windowed occupancy sums; window j covers sites lo+j .. lo+j+width-1
    csum = np.concatenate([[0], np.cumsum(occupied)])
    window_occ = csum[width:] - csum[:-width]
    # candidate centers z = lo + 2*ell + j must satisfy z <= -2*ell - 1
    centers = np.arange(lo + 2 * ell, lo + 2 * ell + window_occ.size)
    valid = (window_occ == 0) & (centers <= -2 * ell - 1) & (centers >= -search_bound)
    if not valid.any():
        raise NoEmptyIntervalError(
            f"no empty interval of radius {2*ell} centred in [-{search_bound}, -{2*ell+1}]")
    hat_z = int(centers[np.flatnonzero(valid)[-1]])
    x_minus = hat_z - ell
    if x_minus % 2 != 0:
        x_minus += 1
    return EmptyIntervalScan(ell, hat_z, x_minus)
