"""Counter-based keyed randomness.

Every random quantity in this package is a pure function of
``(seed, stream tag, integer coordinates)``.  There is no sequential
generator state anywhere: two processes asking for the uniform at the same
lattice point get the same bits, regardless of evaluation order.  That is
what makes replica batches, process pools and re-runs bit-identical.

The construction is a splitmix64-style chain: absorb each 64-bit word into
the state and pass it through the splitmix64 finalizer.  This is not a
cryptographic PRF, but the finalizer has full avalanche and the chain keeps
distinct coordinate tuples on distinct states, which is all a Monte Carlo
code needs (uniformity and cross-seed decorrelation are pinned by tests).

Two implementations are exposed and kept bit-identical:

* a scalar path on masked Python ints (numpy scalar uint64 ops warn on
  wraparound, Python ints do arbitrary precision and we mask),
* a vectorized path on numpy uint64 arrays (array ops wrap silently).

Uniforms are mapped to [0, 1) by taking the top 53 bits, so every decision
threshold of the form ``u < p`` is well defined and never sees 1.0.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = 1.0 / (1 << 53)

# Stream tags.  Frozen: changing any of these silently reseeds the world.
UNIFORM_FIELD = 1   # site uniforms U_y driving walker/ghost decisions
INITIAL_COUNTS = 2  # one uniform per site for the initial particle counts
STEPS_FORWARD = 3   # particle increments at positive times
STEPS_BACKWARD = 4  # particle increments at negative times (independent leg)
REPLICA = 5         # per-replica seed derivation inside estimators
SWEEP = 6           # per-grid-point seed derivation inside sweeps


def _fmix(z: int) -> int:
    """splitmix64 finalizer on a masked Python int."""
    z ^= z >> 30
    z = (z * _MIX1) & _MASK
    z ^= z >> 27
    z = (z * _MIX2) & _MASK
    z ^= z >> 31
    return z


def hash_words(seed: int, *words: int) -> int:
    """Keyed 64-bit hash of an integer tuple.

    Negative words are fine; they are absorbed via two's complement.
    """
    h = _fmix((seed & _MASK) ^ _GOLDEN)
    for w in words:
        h = _fmix(((h + _GOLDEN) & _MASK) ^ (w & _MASK))
    return h


def uniform_from_words(seed: int, *words: int) -> float:
    """Uniform in [0, 1) keyed by (seed, words), 53-bit resolution."""
    return (hash_words(seed, *words) >> 11) * _INV53


def derive_seed(seed: int, *words: int) -> int:
    """A child seed for an independent stream (replicas, sweep points)."""
    return hash_words(seed, *words)


# ---------------------------------------------------------------------------
# Vectorized path.  Same chain on numpy uint64; words may be arrays.
# ---------------------------------------------------------------------------

_U_GOLDEN = np.uint64(_GOLDEN)
_U_MIX1 = np.uint64(_MIX1)
_U_MIX2 = np.uint64(_MIX2)


def _fmix_arr(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _U_MIX1
    z = z ^ (z >> np.uint64(27))
    z = z * _U_MIX2
    z = z ^ (z >> np.uint64(31))
    return z


def _as_u64(w) -> np.ndarray:
    """Two's-complement view of integer input (scalar or array) as uint64."""
    arr = np.asarray(w)
    if arr.dtype == np.uint64:
        return arr
    return arr.astype(np.int64).view(np.uint64)


def hash_words_vec(seed, *words) -> np.ndarray:
    """Vectorized :func:`hash_words`; any argument may be an array.

    All array arguments broadcast together. Returns uint64.
    """
    # errstate: array ops wrap silently but 0-d/scalar ops warn on overflow,
    # and wraparound is exactly what the chain wants.
    with np.errstate(over="ignore"):
        h = _fmix_arr(_as_u64(seed) ^ _U_GOLDEN)
        for w in words:
            h = _fmix_arr((h + _U_GOLDEN) ^ _as_u64(w))
    return h


def uniform_from_words_vec(seed, *words) -> np.ndarray:
    """Vectorized :func:`uniform_from_words`; returns float64 in [0, 1)."""
    h = hash_words_vec(seed, *words)
    return (h >> np.uint64(11)).astype(np.float64) * _INV53
