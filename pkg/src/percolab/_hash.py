"""Counter-based pseudorandomness keyed by lattice coordinates.

These functions are the normative definition of every random value used by
the samplers: the state of an edge (or the sign of a site) is a pure
function of ``(stream seed, canonical coordinates)``.  Query order, worker
count and exploration strategy therefore cannot change a configuration.
The numba kernels in ``_kernels`` re-implement the same arithmetic on
``uint64``; ``tests/test_estimate.py`` checks bit-for-bit agreement.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# domain separation tags
TAG_EDGE = 0x45444745
TAG_SITE = 0x53495445
TAG_SAMPLE = 0x53414D50


def mix64(h: int) -> int:
    """splitmix64 finalizer; bijective on 64-bit words."""
    h &= MASK64
    h ^= h >> 30
    h = (h * 0xBF58476D1CE4E5B9) & MASK64
    h ^= h >> 27
    h = (h * 0x94D049BB133111EB) & MASK64
    h ^= h >> 31
    return h


def absorb(h: int, v: int) -> int:
    """Fold one integer (two's complement on 64 bits) into the state."""
    return mix64(h ^ mix64((v + GOLDEN) & MASK64))


def coords_hash(tag: int, *coord_groups) -> int:
    h = absorb(0, tag)
    for group in coord_groups:
        for c in group:
            h = absorb(h, int(c))
    return h


def edge_hash(lo, hi) -> int:
    """Seed-independent hash of a canonical edge (lo < hi lexicographically)."""
    return coords_hash(TAG_EDGE, lo, hi)


def site_hash(z) -> int:
    return coords_hash(TAG_SITE, z)


def sample_seed(run_seed: int, index: int) -> int:
    """Per-sample stream seed; sample ``index`` of a run is reproducible alone."""
    return absorb(absorb(absorb(0, TAG_SAMPLE), run_seed), index)


def uniform01(key_hash: int, stream_seed: int) -> float:
    """Uniform [0,1) from a key hash and a stream seed. 53-bit mantissa."""
    return (mix64(key_hash ^ stream_seed) >> 11) * 2.0**-53


def sign_bit(key_hash: int, stream_seed: int) -> int:
    """Fair +1/-1 coin from a key hash and a stream seed."""
    return 1 if (mix64(key_hash ^ stream_seed) >> 63) == 0 else -1
