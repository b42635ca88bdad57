"""Counter-based random streams.

Monte Carlo draws come from Philox keyed by (seed, salt) with the block
index placed in the counter, so sample i of stream s is the same number no
matter how the index range is partitioned across workers.  Quasi Monte
Carlo uses scrambled Sobol points, which are indexed deterministically by
construction.  Salts are derived from short purpose strings with a stable
hash (never Python's randomized ``hash``).
"""

from __future__ import annotations

import hashlib

import numpy as np
from scipy.stats import qmc

BLOCK = 1 << 13


def salt_of(name: str) -> int:
    """Stable 64-bit salt for a purpose string."""
    return int.from_bytes(hashlib.blake2s(name.encode()).digest()[:8], "little")


def philox_block(seed: int, salt: int, block: int) -> np.random.Generator:
    """Generator for one fixed-size block of a (seed, salt) stream."""
    key = np.array([np.uint64(seed & (2**64 - 1)), np.uint64(salt & (2**64 - 1))])
    counter = np.array([0, 0, 0, block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def uniform_blocks(seed: int, salt: int, n: int, dim: int) -> np.ndarray:
    """n uniform points in [0,1)^dim, assembled block by block."""
    out = np.empty((n, dim))
    for b, lo in enumerate(range(0, n, BLOCK)):
        hi = min(lo + BLOCK, n)
        out[lo:hi] = philox_block(seed, salt, b).random((hi - lo, dim))
    return out


def sobol_points(seed: int, salt: int, n: int, dim: int,
                 skip: int = 0) -> np.ndarray:
    """n scrambled Sobol points; n should be a power of two."""
    eng = qmc.Sobol(dim, scramble=True, seed=(seed * 0x9E3779B97F4A7C15 + salt) % 2**63)
    if skip:
        eng.fast_forward(skip)
    return eng.random(n)


def unit_points(method: str, seed: int, salt: int, n: int, dim: int) -> np.ndarray:
    if method in ("qmc", "sobol"):
        return sobol_points(seed, salt, n, dim)
    if method in ("mc", "montecarlo"):
        return uniform_blocks(seed, salt, n, dim)
    raise ValueError(f"unknown sampling method {method!r}")
