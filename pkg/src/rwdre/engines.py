"""Replica-vectorized walker engines.

The estimators need 1e3..1e5 independent replicas; running the scalar
walker that many times would burn the whole budget on Python overhead.
These engines advance *all replicas one time step at a time* with numpy,
drawing the same keyed uniforms the scalar walker would draw, so each
replica's path is bit-identical to ``run_walker`` under the same seed
(pinned by tests).  They only cover the environment shapes the estimators
use: no particles at all, or a small fixed injected configuration.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import randomness as rnd
from .environment import lazy_steps_from_uniforms
from .params import ConfigError, ModelParams, Overrides


def replica_seeds(master_seed: int, tag: int, replicas: int) -> np.ndarray:
    """Per-replica child seeds, replica r -> keyed(master, tag, r)."""
    return rnd.hash_words_vec(master_seed, tag, np.arange(replicas, dtype=np.int64))


def _config_particles(overrides: Overrides) -> tuple[np.ndarray, np.ndarray]:
    if overrides.config is None:
        raise ConfigError("batch config engine needs an injected configuration")
    if overrides.extra or overrides.trajectories or overrides.uniforms:
        raise ConfigError("batch engines support config-only overrides")
    zs, iis = [], []
    for z in sorted(overrides.config):
        for i in range(1, int(overrides.config[z]) + 1):
            zs.append(z)
            iis.append(i)
    return np.array(zs, dtype=np.int64), np.array(iis, dtype=np.int64)


def batch_paths_empty(params: ModelParams, seeds: np.ndarray, steps: int,
                      checkpoints=None) -> np.ndarray:
    """Walker positions for R particle-free replicas.

    Returns (R, len(checkpoints)) positions at the requested times, or the
    (R,) endpoints when ``checkpoints`` is None.  Requires an environment
    with no particles (rho == 0).
    """
    if params.rho != 0.0:
        raise ConfigError("batch_paths_empty requires rho == 0")
    seeds = np.asarray(seeds, dtype=np.uint64)
    x = np.zeros(seeds.size, dtype=np.int64)
    cps = None if checkpoints is None else list(checkpoints)
    out = None if cps is None else np.empty((seeds.size, len(cps)), dtype=np.int64)
    if cps is not None and 0 in cps:
        for j, c in enumerate(cps):
            if c == 0:
                out[:, j] = 0
    for t in range(steps):
        u = rnd.uniform_from_words_vec(seeds, rnd.UNIFORM_FIELD, x, t)
        x += np.where(u < params.p_circ, 1, -1)
        if cps is not None and (t + 1) in cps:
            for j, c in enumerate(cps):
                if c == t + 1:
                    out[:, j] = x
    return x if cps is None else out


def batch_paths_config(params: ModelParams, seeds: np.ndarray, steps: int,
                       overrides: Overrides, checkpoints=None) -> np.ndarray:
    """Walker positions for R replicas over a small injected configuration.

    Each replica evolves its own copy of the configured particles (streams
    keyed by the replica's seed).  Shapes as in :func:`batch_paths_empty`.
    """
    z, idx = _config_particles(overrides)
    if z.size == 0:
        return batch_paths_empty(params, seeds, steps, checkpoints)
    seeds = np.asarray(seeds, dtype=np.uint64)
    R = seeds.size
    x = np.zeros(R, dtype=np.int64)
    pos = np.broadcast_to(z, (R, z.size)).copy()
    seeds_col = seeds[:, None]
    cps = None if checkpoints is None else list(checkpoints)
    out = None if cps is None else np.empty((R, len(cps)), dtype=np.int64)
    if cps is not None and 0 in cps:
        for j, c in enumerate(cps):
            if c == 0:
                out[:, j] = 0
    for t in range(steps):
        occupied = (pos == x[:, None]).any(axis=1)
        p = np.where(occupied, params.p_bullet, params.p_circ)
        u = rnd.uniform_from_words_vec(seeds, rnd.UNIFORM_FIELD, x, t)
        x += np.where(u < p, 1, -1)
        if t + 1 < steps or (cps is not None):
            up = rnd.uniform_from_words_vec(seeds_col, rnd.STEPS_FORWARD,
                                            z[None, :], idx[None, :], t + 1)
            pos = pos + lazy_steps_from_uniforms(up, params.q0)
        if cps is not None and (t + 1) in cps:
            for j, c in enumerate(cps):
                if c == t + 1:
                    out[:, j] = x
    return x if cps is None else out


def batch_backtrack_empty(params: ModelParams, seeds: np.ndarray, horizon: int,
                          v_star: Fraction, depths) -> np.ndarray:
    """Indicator of sign(v)*X_n < |v|*n - L for some n <= horizon, per depth L.

    Exact integer comparison throughout: with |v_star| = num/den the event at
    depth L is max_n (num*n - den*sign*X_n) > den*L.  Returns (R, len(depths))
    booleans; columns are nested (larger L implies smaller event) pathwise.
    """
    if params.rho != 0.0:
        raise ConfigError("batch_backtrack_empty requires rho == 0")
    if v_star == 0:
        raise ConfigError("v_star must be nonzero")
    sign = 1 if v_star > 0 else -1
    num, den = abs(v_star).numerator, abs(v_star).denominator
    seeds = np.asarray(seeds, dtype=np.uint64)
    x = np.zeros(seeds.size, dtype=np.int64)
    gap_max = np.zeros(seeds.size, dtype=np.int64)  # max of num*n - den*sign*x
    for t in range(horizon):
        u = rnd.uniform_from_words_vec(seeds, rnd.UNIFORM_FIELD, x, t)
        x += np.where(u < params.p_circ, 1, -1)
        np.maximum(gap_max, num * (t + 1) - den * sign * x, out=gap_max)
    return gap_max[:, None] > den * np.asarray(list(depths), dtype=np.int64)[None, :]
