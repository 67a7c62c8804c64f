"""Deterministic RNG substreams keyed by (seed, path).

Every source of randomness in the package draws from its own substream so
that results do not depend on call ordering or parallel scheduling.
"""
from __future__ import annotations

import zlib

import numpy as np


def _key(component) -> int:
    if isinstance(component, (int, np.integer)):
        if component < 0:
            raise ValueError("substream path components must be non-negative")
        return int(component)
    # crc32 rather than hash(): stable across processes
    return zlib.crc32(str(component).encode())


def substream(seed: int, *path) -> np.random.Generator:
    """Independent generator for (seed, *path).

    Path components may be non-negative ints or short strings; strings are
    mapped to stable integers so streams survive hash randomization.
    """
    return np.random.default_rng(np.random.SeedSequence([_key(c) for c in (seed, *path)]))


def child_seed(seed: int, *path) -> int:
    """A derived integer seed, for APIs that take a plain seed."""
    return int(substream(seed, *path).integers(0, 2**63 - 1))
