"""
Named random streams.

All randomness derives from one user seed. Each consumer asks for a stream
by name (and optional integer keys), so adding a new consumer never shifts
the numbers another consumer sees.
"""

from typing import Tuple, Union

import numpy as np

Key = Union[int, str]

_MASK64 = (1 << 64) - 1


def _key_to_int(key: Key) -> int:
    if isinstance(key, str):
        # leading marker byte keeps the mapping injective over strings
        return int.from_bytes(b"\x01" + key.encode("utf-8"), "big")
    return int(key) & _MASK64


def spawn_key(*keys: Key) -> Tuple[int, ...]:
    return tuple(_key_to_int(k) for k in keys)


def seed_sequence(seed: int, *keys: Key) -> np.random.SeedSequence:
    """SeedSequence for the named stream under the root seed."""
    return np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=spawn_key(*keys))


def stream(seed: int, *keys: Key) -> np.random.Generator:
    """Return an independent numpy Generator for the named stream."""
    return np.random.default_rng(seed_sequence(seed, *keys))
