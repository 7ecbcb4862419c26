"""Counter-based per-vertex randomness.

Every random decision in this package is a pure function of a 64-bit seed,
a small integer tag naming the decision channel, and the lattice coordinates
involved.  No generator state is ever carried between calls, so the state of
a vertex cannot depend on region shape, iteration order or thread count.

Algorithm (part of the external interface, frozen by golden-value tests):
starting from ``h = seed mod 2^64``, each of the four words
``(tag, x, y, z)`` is folded in by the SplitMix64 advance

    h = splitmix64_finalizer((h + 0x9E3779B97F4A7C15 + word) mod 2^64)

where negative words enter as their 64-bit two's complement and
``splitmix64_finalizer`` is the usual xorshift-multiply chain
(``>>30 * 0xBF58476D1CE4E5B9``, ``>>27 * 0x94D049BB133111EB``, ``>>31``).
Uniform variates are the top 53 bits scaled to [0, 1).
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MULT1 = 0xBF58476D1CE4E5B9
_MULT2 = 0x94D049BB133111EB

# Channel tags.  New channels get new tags; existing tags never change.
TAG_CLOSED = 1    # pollution uniform (iid / two-stage)
TAG_ACTIVE = 2    # activity uniform (iid / two-stage)
TAG_CENTER = 3    # obstacle-center uniform (big obstacles)
TAG_OCCUPY = 4    # occupancy uniform on open vertices (big obstacles)
TAG_COLOR = 5     # renormalized site coloring
TAG_TRIAL = 6     # per-trial seed derivation
TAG_OCC_FIRST = 7 # occupied-first coupling uniform

_U = np.uint64
_GOLDEN_U = _U(GOLDEN)
_MULT1_U = _U(_MULT1)
_MULT2_U = _U(_MULT2)


def _finalize(h: int) -> int:
    h &= MASK64
    h ^= h >> 30
    h = (h * _MULT1) & MASK64
    h ^= h >> 27
    h = (h * _MULT2) & MASK64
    h ^= h >> 31
    return h


def point_hash(seed: int, tag: int, x: int, y: int, z: int) -> int:
    """64-bit hash of (seed, tag, vertex); scalar reference implementation."""
    h = seed & MASK64
    for word in (tag, x, y, z):
        h = _finalize((h + GOLDEN + (word & MASK64)) & MASK64)
    return h


def point_uniform(seed: int, tag: int, x: int, y: int, z: int) -> float:
    """Uniform variate in [0, 1) for a single vertex."""
    return (point_hash(seed, tag, x, y, z) >> 11) * 2.0**-53


def _finalize_arr(h: np.ndarray) -> np.ndarray:
    h = h ^ (h >> _U(30))
    h = h * _MULT1_U
    h = h ^ (h >> _U(27))
    h = h * _MULT2_U
    h = h ^ (h >> _U(31))
    return h


def grid_hash(seed: int, tag: int, pts: np.ndarray) -> np.ndarray:
    """Vectorized ``point_hash`` over an (k, 3) integer coordinate array."""
    pts = np.asarray(pts, dtype=np.int64)
    k = pts.shape[0]
    h = np.full(k, seed & MASK64, dtype=np.uint64)
    h = _finalize_arr(h + _U((GOLDEN + (tag & MASK64)) & MASK64))
    for axis in range(3):
        word = pts[:, axis].astype(np.uint64)
        h = _finalize_arr(h + _GOLDEN_U + word)
    return h


def grid_uniform(seed: int, tag: int, pts: np.ndarray) -> np.ndarray:
    """Vectorized uniforms in [0, 1), bit-identical to ``point_uniform``."""
    return (grid_hash(seed, tag, pts) >> _U(11)).astype(np.float64) * 2.0**-53


def derive_seed(seed: int, index: int) -> int:
    """Deterministic child seed, used for per-trial and per-attempt streams."""
    return point_hash(seed, TAG_TRIAL, index, 0, 0)
