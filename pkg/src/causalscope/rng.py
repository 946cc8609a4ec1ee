"""Seed derivation: one root seed, named independent substreams.

Every random operation in the package draws from a substream identified by
the root seed plus a path of labels, so results never depend on call order
or on which other subsystems consumed randomness first.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _token(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFF
    digest = hashlib.blake2s(str(part).encode("utf-8"), digest_size=4).digest()
    return int.from_bytes(digest, "little")


def substream(seed: int, *path) -> np.random.Generator:
    """Return an independent generator for (seed, *path).

    Path elements may be strings or integers; the mapping is stable across
    runs, platforms and processes.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_token(p) for p in path]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(seed: int, *path) -> int:
    """A plain integer seed for APIs that take one, derived like a substream."""
    return int(substream(seed, *path).integers(0, 2**63 - 1))
