"""Cones, record times, influence fields and regeneration detection.

All geometry is integer-exact.  The cone slope is a rational v_bar =
v_star / 3 stored as num/den; writing A(x, n) = den*x - num*n, the
classifications reduce to integer comparisons:

* (x', n') lies in the forward cone of (x, n)  iff  n' >= n and
  A(x', n') >= A(x, n);
* (x', n') lies in the backward cone of (x, n) iff  n' <= n and
  A(x', n') <  A(x, n).

A trajectory therefore crosses the backward cone iff the running minimum
of its A-value up to the anchor time dips below the anchor's A, and the
forward cone iff the running maximum from the anchor time on reaches it.
Record times are the successive upward crossings of A over multiples of
den - num, which makes every +1 step produce at most one record and
keeps kappa(Y_{R_k}) = k automatic.

Quantifiers over "all trajectories" and "all future times" are evaluated
over an explicit finite window [-w_past, horizon].  Enlarging the window
can only turn a detection into a censoring (more trajectories to cross
cones, a longer stay to verify), never the reverse; every output carries
its window so downstream consumers can see what was actually checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .environment import particle_system, uniform_at
from .params import ConfigError, ModelParams, NO_OVERRIDES, Overrides
from .walker import WalkerPath

_INT64_GUARD = 1 << 62


def as_fraction(v) -> Fraction:
    """Rational from int/Fraction/str/float; floats go via str to keep 0.9 = 9/10."""
    if isinstance(v, float):
        return Fraction(str(v))
    return Fraction(v)


def cone_slope(v_star) -> Fraction:
    """v_bar = v_star / 3, the cone slope used throughout."""
    vs = as_fraction(v_star)
    if not 0 < vs <= 1:
        raise ConfigError(f"v_star must be in (0, 1], got {vs}")
    return vs / 3


@dataclass(frozen=True)
class ConeSpec:
    """A forward/backward cone pair anchored at ``apex`` with slope num/den."""

    apex: tuple[int, int]
    num: int
    den: int

    def __post_init__(self):
        if not (0 < self.num < self.den):
            raise ConfigError("cone slope must satisfy 0 < num/den < 1")
        if math.gcd(self.num, self.den) != 1:
            raise ConfigError("cone slope must be in lowest terms")

    @classmethod
    def at(cls, apex: tuple[int, int], v_star) -> "ConeSpec":
        vb = cone_slope(v_star)
        return cls((int(apex[0]), int(apex[1])), vb.numerator, vb.denominator)

    def classify(self, point: tuple[int, int]) -> str:
        dx = point[0] - self.apex[0]
        dn = point[1] - self.apex[1]
        if dn >= 0 and dx >= 0 and self.den * dx >= self.num * dn:
            return "forward"
        if dn <= 0 and dx <= 0 and self.den * dx < self.num * dn:
            return "backward"
        return "neither"


def cone_classify(point: tuple[int, int], cone: ConeSpec) -> str:
    return cone.classify(point)


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


@dataclass
class RecordSequence:
    """Record times of a walker path: R_k = first n with X_n >= (1-vbar)k + vbar*n."""

    v_star: Fraction
    v_bar: Fraction
    records: list[tuple[int, int]]  # (k, R_k), k = 1, 2, ...

    def times(self) -> dict[int, int]:
        return dict(self.records)

    def rows(self):
        """(k, R_k) pairs, CSV-ready."""
        return list(self.records)


def _a_values(positions: np.ndarray, num: int, den: int,
              t0: int = 0) -> np.ndarray:
    n = t0 + np.arange(len(positions), dtype=np.int64)
    a = den * np.asarray(positions, dtype=np.int64) - num * n
    if np.any(np.abs(a) >= _INT64_GUARD):
        raise ConfigError("cone arithmetic would overflow int64")
    return a


def record_times(path: WalkerPath, v_star) -> RecordSequence:
    """All realized records of ``path``, by exact threshold crossings of A."""
    vs = as_fraction(v_star)
    vb = cone_slope(vs)
    num, den = vb.numerator, vb.denominator
    a = _a_values(np.asarray(path.positions), num, den, path.t0)
    delta = den - num
    records: list[tuple[int, int]] = []
    k = 0
    for n in range(len(a)):
        while a[n] >= (k + 1) * delta:   # one pass per +-1 path; robust to jumps
            k += 1
            records.append((k, path.t0 + n))
    return RecordSequence(vs, vb, records)


def kappa(point: tuple[int, int], v_star) -> int | None:
    """Index of the last ground cone containing ``point`` (None if no k >= 1)."""
    vb = cone_slope(v_star)
    num, den = vb.numerator, vb.denominator
    x, n = point
    if n < 0:
        return None
    a = den * x - num * n
    k = a // (den - num)
    return int(k) if k >= 1 else None


# ---------------------------------------------------------------------------
# Parallelograms
# ---------------------------------------------------------------------------


def parallelogram_contains(y: tuple[int, int], t: int, point: tuple[int, int],
                           v_star) -> bool:
    """Membership in the space-time parallelogram P_t(y).

    P_t(y) is the forward cone of y, minus the ground cone of index
    kappa(y) + t, capped at t/v_bar time steps above y.
    """
    vb = cone_slope(v_star)
    num, den = vb.numerator, vb.denominator
    ky = kappa(y, v_star)
    if ky is None:
        raise ConfigError(f"{y} lies in no ground cone; parallelogram undefined")
    x, n = point
    dx, dn = x - y[0], n - y[1]
    if dn < 0 or dx < 0 or den * dx < num * dn:        # not in forward cone
        return False
    if n >= 0 and den * x - num * n >= (den - num) * (ky + t):   # escaped ahead
        return False
    return num * dn <= t * den                          # time cap n' <= n_y + t/vbar


def right_boundary(y: tuple[int, int], t: int, v_star) -> list[tuple[int, int]]:
    """The right boundary of P_t(y): points just right of it, row by row."""
    vb = cone_slope(v_star)
    num, den = vb.numerator, vb.denominator
    out = []
    n_hi = y[1] + (t * den) // num          # last row allowed by the time cap
    for n in range(y[1], n_hi + 1):
        # row of P_t(y) is an integer interval; scan from the cone's left edge
        dn = n - y[1]
        x_lo = y[0] + -(-num * dn // den)   # ceil(num*dn/den)
        x = x_lo
        if not parallelogram_contains(y, t, (x, n), v_star):
            continue                         # empty row (ground cone already passed)
        while parallelogram_contains(y, t, (x + 1, n), v_star):
            x += 1
        out.append((x + 1, n))
    return out


def exits_through_right(path: WalkerPath, y: tuple[int, int], t: int,
                        v_star) -> bool | None:
    """Whether ``path`` (started at y) first leaves P_t(y) through its right
    boundary; None if it never leaves within the path."""
    if (path.positions[0], path.t0) != tuple(y):
        raise ConfigError("path must start at the parallelogram's apex")
    boundary = set(right_boundary(y, t, v_star))
    for s in range(len(path.positions)):
        p = (int(path.positions[s]), path.t0 + s)
        if not parallelogram_contains(y, t, p, v_star):
            return p in boundary
    return None


# ---------------------------------------------------------------------------
# Good-record-time configuration
# ---------------------------------------------------------------------------


def delta_exponent(params: ModelParams) -> float:
    """delta = 1 / (4 log(1/p_bullet)); 0 when p_bullet = 0, inf when 1."""
    if params.p_bullet <= 0.0:
        return 0.0
    if params.p_bullet >= 1.0:
        return math.inf
    return 1.0 / (4.0 * math.log(1.0 / params.p_bullet))


@dataclass(frozen=True)
class GrtConfig:
    """Window sizes T' and T'' for the good-record-time predicate.

    The exponent epsilon tying T' to the horizon involves a non-explicit
    tail constant, so both sizes are supplied by the caller; delta is the
    explicit part and is carried along for reference.
    """

    t_prime: int
    t_double_prime: int
    delta: float = float("nan")

    def __post_init__(self):
        if self.t_prime < 1 or self.t_double_prime < 0:
            raise ConfigError("need t_prime >= 1 and t_double_prime >= 0")


def make_grt_config(params: ModelParams, t_prime: int,
                    horizon: float | None = None,
                    t_double_prime: int | None = None) -> GrtConfig:
    """GrtConfig with delta filled in; T'' defaults to floor(delta * log T)."""
    d = delta_exponent(params)
    if t_double_prime is None:
        if horizon is None:
            raise ConfigError("need either t_double_prime or a horizon")
        t_double_prime = int(d * math.log(horizon)) if math.isfinite(d) else 0
    return GrtConfig(t_prime, t_double_prime, d)


# ---------------------------------------------------------------------------
# Run context: one realization, its records, and windowed cone data
# ---------------------------------------------------------------------------


@dataclass
class RunContext:
    """A walker run plus everything cone-related, on one realization.

    crossing_count[j] is the number of windowed trajectories through both
    cones at the j-th record; cone_exit[j] is the first s >= 1 at which
    the walker leaves the forward cone of that record (0 means it never
    left within the horizon).
    """

    params: ModelParams
    v_star: Fraction
    v_bar: Fraction
    horizon: int
    w_past: int
    window: tuple[int, int]
    walker: WalkerPath
    a_values: np.ndarray
    records: RecordSequence
    crossing_count: np.ndarray
    cone_exit: np.ndarray
    overrides: Overrides
    # trajectory detail, only when keep_trajectories=True
    positions: np.ndarray | None = None    # (P, w_past + horizon + 1)
    pref_min: np.ndarray | None = None     # running min of A along each trajectory
    suf_max: np.ndarray | None = None      # running max of A along each trajectory

    @property
    def num(self) -> int:
        return self.v_bar.numerator

    @property
    def den(self) -> int:
        return self.v_bar.denominator

    def record_point(self, k: int) -> tuple[int, int]:
        n = self.records.times().get(k)
        if n is None:
            raise ConfigError(f"record {k} was not reached")
        return (int(self.walker.positions[n]), n)

    def _col(self, t: int) -> int:
        if not -self.w_past <= t <= self.horizon:
            raise ConfigError(f"time {t} outside window [{-self.w_past}, {self.horizon}]")
        return t + self.w_past

    def crosses_backward(self, anchor: tuple[int, int]) -> np.ndarray:
        """Per-trajectory: intersects the backward cone of ``anchor`` in-window."""
        if self.pref_min is None:
            raise ConfigError("run context was built without keep_trajectories")
        c = self.den * anchor[0] - self.num * anchor[1]
        return self.pref_min[:, self._col(anchor[1])] < c

    def crosses_forward(self, anchor: tuple[int, int]) -> np.ndarray:
        """Per-trajectory: intersects the forward cone of ``anchor`` in-window."""
        if self.suf_max is None:
            raise ConfigError("run context was built without keep_trajectories")
        c = self.den * anchor[0] - self.num * anchor[1]
        return self.suf_max[:, self._col(anchor[1])] >= c

    def crosses_both(self, anchor: tuple[int, int]) -> np.ndarray:
        return self.crosses_backward(anchor) & self.crosses_forward(anchor)

    def forward_only(self, anchor: tuple[int, int]) -> np.ndarray:
        return self.crosses_forward(anchor) & ~self.crosses_backward(anchor)


def run_context(params: ModelParams, horizon: int, v_star, *,
                w_past: int | None = None,
                overrides: Overrides = NO_OVERRIDES,
                keep_trajectories: bool = False,
                extra_right: int = 0) -> RunContext:
    """Run walker and environment together and assemble cone bookkeeping.

    The particle window [-2T, 2T + extra_right] covers every trajectory
    that can reach the walker or cross both cones at any on-path anchor
    within the time window; extra_right widens it for off-path anchors
    (good-record-time checks look up to T' + T'' to the right).
    """
    if w_past is None:
        w_past = horizon
    if not 0 <= w_past <= horizon:
        raise ConfigError("need 0 <= w_past <= horizon")
    vs = as_fraction(v_star)
    vb = cone_slope(vs)
    num, den = vb.numerator, vb.denominator
    delta = den - num

    system = particle_system(params, -2 * horizon,
                             2 * horizon + int(extra_right), overrides)
    T, W = horizon, w_past
    n_cols = W + T + 1
    P = system.n_total

    keep = keep_trajectories
    if keep:
        positions = np.empty((P, n_cols), dtype=np.int64)
        pref_min = np.empty((P, n_cols), dtype=np.int64)
        suf_max = np.empty((P, n_cols), dtype=np.int64)

    def a_of(pos: np.ndarray, t: int) -> np.ndarray:
        return den * pos - num * t

    # --- backward leg: times 0 down to -W, collecting the running minimum
    pos = system.positions_at_zero()
    v = a_of(pos, 0)
    if keep:
        positions[:, W], pref_min[:, W] = pos, v
    back_min = v.copy()
    t = 0
    while t > -W:
        pos = system.advance(pos, t, t - 1)
        t -= 1
        v = a_of(pos, t)
        np.minimum(back_min, v, out=back_min)
        if keep:
            positions[:, t + W] = pos
    # prefix minima at negative times need a second pass (min from -W up to t)
    if keep:
        run = None
        for tt in range(-W, 1):
            col = tt + W
            va = a_of(positions[:, col], tt)
            run = va.copy() if run is None else np.minimum(run, va)
            pref_min[:, col] = run

    # --- forward leg: walker and particles together, records on the fly
    pos = system.positions_at_zero()
    run_min = back_min
    x = 0
    walker_pos = np.empty(T + 1, dtype=np.int64)
    walker_pos[0] = 0
    a_walk = np.empty(T + 1, dtype=np.int64)
    a_walk[0] = 0
    records: list[tuple[int, int]] = []
    pre_masks: list[np.ndarray] = []
    k = 0
    for t in range(T):
        occupied = bool(np.any(pos == x))
        p_right = params.p_bullet if occupied else params.p_circ
        x += 1 if uniform_at(params, x, t, overrides) < p_right else -1
        walker_pos[t + 1] = x
        a_walk[t + 1] = den * x - num * (t + 1)
        pos = system.advance(pos, t, t + 1)
        v = a_of(pos, t + 1)
        np.minimum(run_min, v, out=run_min)
        if keep:
            positions[:, t + 1 + W] = pos
            pref_min[:, t + 1 + W] = run_min
        if a_walk[t + 1] >= (k + 1) * delta:
            k += 1
            records.append((k, t + 1))
            pre_masks.append(run_min < a_walk[t + 1])

    # --- suffix pass: times T down to 0 for forward-cone maxima
    crossing = np.zeros(len(records), dtype=np.int64)
    rec_iter = len(records) - 1
    run_max = a_of(pos, T)
    if keep:
        suf_max[:, T + W] = run_max
    for t in range(T, 0, -1):
        while rec_iter >= 0 and records[rec_iter][1] == t:
            suf_mask = run_max >= a_walk[t]
            crossing[rec_iter] = int(np.count_nonzero(pre_masks[rec_iter] & suf_mask))
            rec_iter -= 1
        pos = system.advance(pos, t, t - 1)
        v = a_of(pos, t - 1)
        np.maximum(run_max, v, out=run_max)
        if keep:
            suf_max[:, t - 1 + W] = run_max
    while rec_iter >= 0:  # records at t = 0 cannot occur (A_0 = 0 < delta), but be safe
        suf_mask = run_max >= a_walk[0]
        crossing[rec_iter] = int(np.count_nonzero(pre_masks[rec_iter] & suf_mask))
        rec_iter -= 1
    if keep and W > 0:
        for tt in range(-1, -W - 1, -1):
            col = tt + W
            va = a_of(positions[:, col], tt)
            np.maximum(run_max, va, out=run_max)
            suf_max[:, col] = run_max

    # --- first forward-cone exit after each record: next smaller A to the right
    cone_exit = np.zeros(len(records), dtype=np.int64)
    next_smaller = np.zeros(T + 1, dtype=np.int64)  # 0 = none
    stack: list[int] = []
    for n in range(T, -1, -1):
        while stack and a_walk[stack[-1]] >= a_walk[n]:
            stack.pop()
        next_smaller[n] = stack[-1] if stack else 0
        stack.append(n)
    for j, (_, r) in enumerate(records):
        m = next_smaller[r]
        cone_exit[j] = (m - r) if m else 0

    seq = RecordSequence(vs, vb, records)
    ctx = RunContext(
        params=params, v_star=vs, v_bar=vb, horizon=T, w_past=W,
        window=(-2 * horizon, 2 * horizon + int(extra_right)),
        walker=WalkerPath(0, 0, walker_pos), a_values=a_walk, records=seq,
        crossing_count=crossing, cone_exit=cone_exit, overrides=overrides,
        positions=positions if keep else None,
        pref_min=pref_min if keep else None,
        suf_max=suf_max if keep else None,
    )
    for kk, r in records:  # kappa consistency, cheap and load-bearing
        a = ctx.a_values[r]
        assert a // delta == kk, f"kappa(Y_R{kk}) != {kk}"
    return ctx


# ---------------------------------------------------------------------------
# Regeneration detection
# ---------------------------------------------------------------------------


@dataclass
class RegenerationOutcome:
    """Result of windowed regeneration detection on one realization."""

    horizon: int
    w_past: int
    post_window: int
    records_examined: int
    index: int | None
    tau: int | None
    censored: bool
    record_ks: np.ndarray
    record_times: np.ndarray
    crossing_counts: np.ndarray
    cone_stays: np.ndarray

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "w_past": self.w_past,
            "post_window": self.post_window,
            "records_examined": self.records_examined,
            "index": self.index,
            "tau": self.tau,
            "censored": self.censored,
        }


def _good_mask(ctx: RunContext, post_window: int):
    ks = np.array([k for k, _ in ctx.records.records], dtype=np.int64)
    rs = np.array([r for _, r in ctx.records.records], dtype=np.int64)
    stays = np.where(ctx.cone_exit == 0, ctx.horizon - rs, ctx.cone_exit - 1)
    examinable = rs + post_window <= ctx.horizon
    good = examinable & (ctx.crossing_count == 0) & \
        ((ctx.cone_exit == 0) | (ctx.cone_exit > post_window))
    return ks, rs, good, stays, examinable


def outcome_from_context(ctx: RunContext, post_window: int) -> RegenerationOutcome:
    ks, rs, good, stays, examinable = _good_mask(ctx, post_window)
    hit = np.flatnonzero(good)
    index = int(ks[hit[0]]) if hit.size else None
    tau = int(rs[hit[0]]) if hit.size else None
    return RegenerationOutcome(
        horizon=ctx.horizon, w_past=ctx.w_past, post_window=post_window,
        records_examined=int(np.count_nonzero(examinable)),
        index=index, tau=tau, censored=index is None,
        record_ks=ks, record_times=rs,
        crossing_counts=ctx.crossing_count.copy(), cone_stays=stays,
    )


def detect_regeneration(params: ModelParams, v_star, horizon: int,
                        post_window: int, *,
                        w_past: int | None = None,
                        overrides: Overrides = NO_OVERRIDES) -> RegenerationOutcome:
    """First record where no windowed trajectory crosses both cones and the
    walker stays in the forward cone for ``post_window`` steps."""
    if post_window > horizon:
        raise ConfigError("post_window cannot exceed the horizon")
    ctx = run_context(params, horizon, v_star, w_past=w_past, overrides=overrides)
    return outcome_from_context(ctx, post_window)


@dataclass
class ChainedRegenerations:
    """All windowed regeneration records of one realization, in order.

    Successive regeneration points are renewal candidates; the increments
    between consecutive ones (first one discarded as the non-stationary
    head) feed the regenerative estimators.
    """

    outcome: RegenerationOutcome
    ks: np.ndarray
    taus: np.ndarray
    xs: np.ndarray

    @property
    def count(self) -> int:
        return int(self.ks.size)

    def increments(self) -> tuple[np.ndarray, np.ndarray]:
        """(dx, dt) between consecutive regeneration points."""
        return np.diff(self.xs), np.diff(self.taus)


def chained_regenerations(params: ModelParams, v_star, horizon: int,
                          post_window: int, *,
                          w_past: int | None = None,
                          overrides: Overrides = NO_OVERRIDES) -> ChainedRegenerations:
    if post_window > horizon:
        raise ConfigError("post_window cannot exceed the horizon")
    ctx = run_context(params, horizon, v_star, w_past=w_past, overrides=overrides)
    ks, rs, good, _, _ = _good_mask(ctx, post_window)
    hit = np.flatnonzero(good)
    taus = rs[hit]
    return ChainedRegenerations(
        outcome=outcome_from_context(ctx, post_window),
        ks=ks[hit], taus=taus,
        xs=ctx.walker.positions[taus] if hit.size else np.array([], dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# Influence fields
# ---------------------------------------------------------------------------


@dataclass
class InfluenceFieldSample:
    y: tuple[int, int]
    window: tuple[int, int]
    l_max: int
    value: int | None
    censored: bool


def _class_tables(params: ModelParams, v_bar: Fraction,
                  t_lo: int, t_hi: int, z_lo: int, z_hi: int,
                  overrides: Overrides):
    """Positions plus running A-minima/maxima for all windowed trajectories."""
    num, den = v_bar.numerator, v_bar.denominator
    system = particle_system(params, z_lo, z_hi, overrides)
    if system.n_total == 0:
        empty = np.empty((0, t_hi - t_lo + 1), dtype=np.int64)
        return empty, empty, empty
    mat = system.positions_matrix(t_lo, t_hi)
    times = np.arange(t_lo, t_hi + 1, dtype=np.int64)
    v = den * mat - num * times
    pref_min = np.minimum.accumulate(v, axis=1)
    suf_max = np.flip(np.maximum.accumulate(np.flip(v, axis=1), axis=1), axis=1)
    return mat, pref_min, suf_max


def influence_field(params: ModelParams, y: tuple[int, int], l_max: int,
                    time_window: tuple[int, int], v_star, *,
                    overrides: Overrides = NO_OVERRIDES) -> InfluenceFieldSample:
    """Smallest l <= l_max with no windowed trajectory through both cones at
    y and both cones at y + (l, l); censored when none qualifies.

    The defining condition is not monotone in l, so the scan tests every
    l from 0 up and returns the first pass (and by construction the
    returned l re-verifies).
    """
    t_lo, t_hi = int(time_window[0]), int(time_window[1])
    if not (t_lo <= y[1] and y[1] + l_max <= t_hi):
        raise ConfigError("time window must cover y and y + (l_max, l_max)")
    vb = cone_slope(v_star)
    num, den = vb.numerator, vb.denominator
    span = (t_hi - min(t_lo, 0)) + l_max + 2
    _, pref_min, suf_max = _class_tables(params, vb, t_lo, t_hi,
                                         y[0] - span, y[0] + span, overrides)

    def crosses_both(ax: int, an: int) -> np.ndarray:
        c = den * ax - num * an
        col = an - t_lo
        return (pref_min[:, col] < c) & (suf_max[:, col] >= c)

    if pref_min.shape[0] == 0:
        return InfluenceFieldSample(tuple(y), (t_lo, t_hi), l_max, 0, False)
    base = crosses_both(y[0], y[1])
    for l in range(l_max + 1):
        if y[1] + l > t_hi:
            break
        if not np.any(base & crosses_both(y[0] + l, y[1] + l)):
            return InfluenceFieldSample(tuple(y), (t_lo, t_hi), l_max, l, False)
    return InfluenceFieldSample(tuple(y), (t_lo, t_hi), l_max, None, True)


def local_influence_field(ctx: RunContext, point: tuple[int, int],
                          grt: GrtConfig) -> InfluenceFieldSample:
    """The horizon-local field h^T at ``point``: like the influence field but
    additionally requiring the trajectory to be forward-only for the cone
    anchored floor((1 - v_bar) * T') to the left."""
    if ctx.pref_min is None:
        raise ConfigError("local influence field needs keep_trajectories=True")
    shift = int((1 - ctx.v_bar) * grt.t_prime)   # floor, exact rational
    ref = (point[0] - shift, point[1])
    base = ctx.forward_only(ref) & ctx.crosses_both(point)
    l_max = grt.t_double_prime
    for l in range(l_max + 1):
        if point[1] + l > ctx.horizon:
            break
        if not np.any(base & ctx.crosses_both((point[0] + l, point[1] + l))):
            return InfluenceFieldSample(tuple(point), (-ctx.w_past, ctx.horizon),
                                        l_max, l, False)
    return InfluenceFieldSample(tuple(point), (-ctx.w_past, ctx.horizon),
                                l_max, None, True)


# ---------------------------------------------------------------------------
# Filtered walker and good record times
# ---------------------------------------------------------------------------


def _tilde_removal_mask(ctx: RunContext, y1: tuple[int, int],
                        grt: GrtConfig) -> np.ndarray:
    """Trajectories in the removable class W~_{y1} (before the y2 exemption)."""
    shift = int((1 - ctx.v_bar) * grt.t_prime)
    removable = np.zeros(ctx.pref_min.shape[0], dtype=bool)
    for z in right_boundary(y1, grt.t_prime, ctx.v_star):
        if z[1] > ctx.horizon or z[1] + grt.t_double_prime > ctx.horizon:
            continue
        m = ctx.forward_only((z[0] - shift, z[1])) & ctx.crosses_both(z) & \
            ctx.crosses_both((z[0] + grt.t_double_prime, z[1] + grt.t_double_prime))
        removable |= m
    return removable


def filtered_kept_mask(ctx: RunContext, y1: tuple[int, int],
                       y2: tuple[int, int], grt: GrtConfig) -> np.ndarray:
    """Keep a trajectory iff it is not removable at y1 or it intersects the
    backward cone of y2."""
    return ~_tilde_removal_mask(ctx, y1, grt) | ctx.crosses_backward(y2)


def filtered_walker(ctx: RunContext, y1: tuple[int, int], y2: tuple[int, int],
                    steps: int, grt: GrtConfig) -> WalkerPath:
    """Walker from y2 on the filtered trace (removable trajectories dropped),
    reading the same uniform field as the unfiltered walker."""
    if not (y2[0] > y1[0] and y2[1] > y1[1]):
        raise ConfigError("y2 - y1 must be componentwise positive")
    if ctx.positions is None:
        raise ConfigError("filtered walker needs keep_trajectories=True")
    if y2[1] + steps > ctx.horizon:
        raise ConfigError("filtered walk would leave the time window")
    kept = filtered_kept_mask(ctx, y1, y2, grt)
    params = ctx.params
    x = int(y2[0])
    out = np.empty(steps + 1, dtype=np.int64)
    out[0] = x
    for s in range(steps):
        t = y2[1] + s
        col = t + ctx.w_past
        occupied = bool(np.any(ctx.positions[kept, col] == x))
        p_right = params.p_bullet if occupied else params.p_circ
        x += 1 if uniform_at(params, x, t, ctx.overrides) < p_right else -1
        out[s + 1] = x
    return WalkerPath(int(y2[0]), int(y2[1]), out)


@dataclass
class GoodRecordResult:
    """Per-condition breakdown of the good-record-time predicate at record k."""

    k: int
    applicable: bool
    reason: str = ""
    boundary_fields_ok: bool | None = None     # (1) h^T small on the right boundary
    diagonal_uniforms_ok: bool | None = None   # (2) u < p_bullet along the diagonal
    no_forward_crossing: bool | None = None    # (3) the record's cone class is clean
    filtered_exit_right: bool | None = None    # (4) filtered walk exits right

    @property
    def good(self) -> bool:
        return bool(self.applicable and self.boundary_fields_ok
                    and self.diagonal_uniforms_ok and self.no_forward_crossing
                    and self.filtered_exit_right)


def is_good_record_time(ctx: RunContext, k: int, grt: GrtConfig) -> GoodRecordResult:
    """Evaluate the four good-record-time conditions at record k, windowed.

    Needs records k - T' and k; records whose checks would leave the time
    window make the result not-applicable rather than failed.
    """
    times = ctx.records.times()
    if k not in times or (k - grt.t_prime) not in times:
        return GoodRecordResult(k, False, reason="records k and k - T' required")
    if ctx.positions is None:
        raise ConfigError("good-record-time checks need keep_trajectories=True")
    y_prev = ctx.record_point(k - grt.t_prime)
    y_k = ctx.record_point(k)
    tpp = grt.t_double_prime
    y2 = (y_k[0] + tpp, y_k[1] + tpp)
    needed_until = y2[1] + grt.t_prime * ctx.den // ctx.num + 1
    if needed_until > ctx.horizon:
        return GoodRecordResult(k, False, reason="window too short past record k")

    # (1) small local influence fields on the right boundary at the older record
    cond1 = True
    for z in right_boundary(y_prev, grt.t_prime, ctx.v_star):
        sample = local_influence_field(ctx, z, grt)
        if sample.censored or sample.value > tpp:
            cond1 = False
            break

    # (2) the diagonal uniforms force +1 steps regardless of occupancy
    cond2 = all(
        uniform_at(ctx.params, y_k[0] + l, y_k[1] + l, ctx.overrides) < ctx.params.p_bullet
        for l in range(tpp)
    )

    # (3) nothing forward-only at the record also crosses both cones at y2
    cond3 = not np.any(ctx.forward_only(y_k) & ctx.crosses_both(y2))

    # (4) the filtered walker exits the shifted parallelogram through the right
    steps = min(ctx.horizon - y2[1], grt.t_prime * ctx.den // ctx.num + 1)
    path = filtered_walker(ctx, y_prev, y2, steps, grt)
    exit_right = exits_through_right(path, y2, grt.t_prime, ctx.v_star)
    cond4 = bool(exit_right) if exit_right is not None else False

    return GoodRecordResult(k, True, "", cond1, cond2, cond3, cond4)
