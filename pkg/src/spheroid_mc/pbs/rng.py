"""Counter-based random streams (Philox4x32-10).

Every random number is a pure function of ``(seed, particle id, step,
block)``, so trajectories do not depend on how particles are partitioned or
in which order they are processed.  numpy's generators are sequential per
stream and cannot be addressed per particle in a vectorised way, hence the
small implementation here.
"""

from __future__ import annotations

import numpy as np
from scipy import special

__all__ = ["philox4x32", "stream_counters", "uniforms", "normals_and_uniform", "RELEASE_STREAM"]

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint32(0x9E3779B9)
_W1 = np.uint32(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)

# step value reserved for the initial placement draws
RELEASE_STREAM = 0xFFFFFFFF


def philox4x32(counter, key, rounds: int = 10):
    """Philox4x32 block function.

    Parameters
    ----------
    counter : array_like of uint32, shape ``(4, ...)``
    key : array_like of uint32, shape ``(2,)`` or ``(2, ...)``

    Returns
    -------
    ndarray of uint32, shape ``(4, ...)``
    """
    c = np.asarray(counter, dtype=np.uint32)
    k = np.asarray(key, dtype=np.uint32)
    x0, x1, x2, x3 = (c[i].astype(np.uint32) for i in range(4))
    k0, k1 = k[0].astype(np.uint32), k[1].astype(np.uint32)
    with np.errstate(over="ignore"):
        for r in range(rounds):
            if r:
                k0 = k0 + _W0
                k1 = k1 + _W1
            p0 = x0.astype(np.uint64) * _M0
            p1 = x2.astype(np.uint64) * _M1
            hi0, lo0 = (p0 >> _SHIFT).astype(np.uint32), (p0 & _MASK).astype(np.uint32)
            hi1, lo1 = (p1 >> _SHIFT).astype(np.uint32), (p1 & _MASK).astype(np.uint32)
            x0, x1, x2, x3 = hi1 ^ x1 ^ k0, lo1, hi0 ^ x3 ^ k1, lo0
    return np.stack([x0, x1, x2, x3])


def _key(seed: int):
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.array([seed & 0xFFFFFFFF, seed >> 32], dtype=np.uint32)


def stream_counters(ids, step: int, block: int = 0):
    """Counter words ``(id lo, step, block, id hi)`` for a batch of particle ids."""
    ids = np.asarray(ids, dtype=np.uint64)
    n = ids.shape
    return np.stack(
        [
            (ids & _MASK).astype(np.uint32),
            np.full(n, step & 0xFFFFFFFF, dtype=np.uint32),
            np.full(n, block & 0xFFFFFFFF, dtype=np.uint32),
            (ids >> _SHIFT).astype(np.uint32),
        ]
    )


def uniforms(seed: int, ids, step: int, block: int = 0):
    """Four open-interval uniforms per id, shape ``(4, n)``."""
    raw = philox4x32(stream_counters(ids, step, block), _key(seed))
    return (raw.astype(np.float64) + 0.5) * 2.0**-32


def normals_and_uniform(seed: int, ids, step: int):
    """Three standard normals and one uniform per id from a single block.

    Box-Muller on the two uniform pairs yields four independent normals; the
    fourth is mapped through the normal CDF to a uniform.
    """
    u = uniforms(seed, ids, step)
    r1 = np.sqrt(-2.0 * np.log(u[0]))
    r2 = np.sqrt(-2.0 * np.log(u[2]))
    a1 = 2.0 * np.pi * u[1]
    a2 = 2.0 * np.pi * u[3]
    z = np.stack([r1 * np.cos(a1), r1 * np.sin(a1), r2 * np.cos(a2)])
    return z, special.ndtr(r2 * np.sin(a2))
