"""Counter-based splitmix64 streams.

Every random quantity in the package is a pure function of (seed, counter),
so results never depend on call order across threads or on numpy's global
generator.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_seed(*parts: int) -> int:
    """Hash an ordered tuple of integers into a 64-bit seed."""
    z = 0
    for p in parts:
        z = mix64((z ^ (int(p) & MASK64)) + GOLDEN)
    return z


def _mix64_array(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        return z ^ (z >> np.uint64(31))


def raw_stream(seed: int | np.ndarray, counters: np.ndarray) -> np.ndarray:
    """64-bit outputs for ``counters`` of the stream(s) keyed by ``seed``.

    ``seed`` may be a scalar or an array broadcastable against ``counters``.
    """
    seed_arr = np.asarray(seed, dtype=np.uint64) if isinstance(seed, np.ndarray) else np.uint64(int(seed) & MASK64)
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = seed_arr + (c + np.uint64(1)) * np.uint64(GOLDEN)
    return _mix64_array(np.asarray(z, dtype=np.uint64))


def uniform(seed: int | np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Doubles in [0, 1) with 53 bits of resolution."""
    z = raw_stream(seed, counters)
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def permutation(seed: int, n: int) -> np.ndarray:
    """Uniform random permutation of ``range(n)`` (sort by random keys)."""
    keys = raw_stream(seed, np.arange(n, dtype=np.uint64))
    return np.argsort(keys, kind="stable")


def integers(seed: int, n: int, high: int) -> np.ndarray:
    """``n`` draws from ``range(high)``."""
    return np.minimum((uniform(seed, np.arange(n, dtype=np.uint64)) * high).astype(np.int64), high - 1)


def bootstrap_counts(seed: int, n: int) -> np.ndarray:
    """Multiplicity of each row in a size-``n`` resample with replacement."""
    return np.bincount(integers(seed, n, n), minlength=n).astype(np.float64)


def choose_subset(seed: int, d: int, k: int) -> list[int]:
    """Sorted uniformly drawn ``k``-subset of ``range(d)``."""
    if k >= d:
        return list(range(d))
    return sorted(int(i) for i in permutation(seed, d)[:k])
