"""Deterministic random streams.

All randomness in the package flows through Philox, a counter-based
generator keyed by a 64-bit master seed plus a derivation path.  Replica
k of an experiment cell draws from ``stream(seed, cell_index, k)``, so
results do not depend on scheduling or evaluation order.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_PATH_INIT = 0x243F6A8885A308D3  # fractional bits of pi; any fixed odd-ish word works


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def stream(seed: int, *path: int) -> np.random.Generator:
    """Return an independent Generator for (seed, path).

    Distinct paths (e.g. replica indices) give statistically independent
    streams; the same (seed, path) always gives the same stream.
    """
    if not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    k0 = int(seed) & _MASK64
    acc = _PATH_INIT
    for w in path:
        acc = _splitmix64(acc ^ (int(w) & _MASK64))
    key = np.array([k0, acc], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def as_generator(rng) -> np.random.Generator:
    """Normalize an rng argument: Generator passes through, int seeds a stream."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.default_rng()
    if isinstance(rng, (int, np.integer)):
        return stream(int(rng))
    raise TypeError(f"rng must be a numpy Generator, an int seed, or None, got {type(rng).__name__}")


def spawn_seeds(rng, count: int) -> np.ndarray:
    """Draw `count` sub-seeds up front so downstream use is order-independent."""
    gen = as_generator(rng)
    return gen.integers(0, 1 << 63, size=count, dtype=np.int64)
