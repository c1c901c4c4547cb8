"""Deterministic seed derivation for parallel-safe randomness."""

from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, *path: int | str) -> int:
    """Derive a 64-bit child seed from a master seed and a mixing path.

    Splittable construction: the child depends only on (master, path), never
    on call order, so per-tree or per-fold randomness is identical no matter
    how work is scheduled across threads.
    """
    state = _splitmix64(master & _MASK64)
    for part in path:
        if isinstance(part, str):
            digest = hashlib.blake2b(part.encode("utf-8"), digest_size=8).digest()
            part = int.from_bytes(digest, "little")
        state = _splitmix64(state ^ (part & _MASK64))
    return state
