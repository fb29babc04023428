"""Seeded generators.

Every random choice is drawn from PCG64 keyed by ``SeedSequence([seed,
stream])``.  Sample points come straight from the 64-bit output words of the
bit generator (``random_raw``), one word per 64 coordinates with the unused
high bits of the last word cleared, so sample streams do not depend on any
numpy distribution algorithm.
"""
from __future__ import annotations

import numpy as np

from .cube import words

SAMPLES = 0
TARGET = 1
PACKING = 2


def generator(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), stream])))


def uniform_points(rng: np.random.Generator, q: int, n: int) -> np.ndarray:
    """``q`` i.i.d. uniform points of {-1,1}^n as a ``(q, words(n))`` array."""
    w = words(n)
    raw = rng.bit_generator.random_raw(q * w).astype(np.uint64).reshape(q, w)
    tail = n % 64
    if tail:
        raw[:, -1] &= np.uint64((1 << tail) - 1)
    return raw
