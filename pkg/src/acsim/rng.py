"""Seeded random streams and per-example seed derivation.

All randomness in the pipeline flows through a RandomStream so tests can
substitute scripted streams, and so each example's stream is derived
independently from (master_seed, scenario tag, example index) for
order-free parallel generation.
"""

from __future__ import annotations

import hashlib
from typing import Protocol, Sequence

import numpy as np


class RandomStream(Protocol):
    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], both ends inclusive."""
        ...

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        ...

    def uniform(self, lo: float, hi: float) -> float:
        ...

    def choice(self, items: Sequence):
        ...


class NumpyStream:
    """RandomStream backed by numpy's PCG64 generator."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.default_rng(self.seed)

    def randint(self, lo: int, hi: int) -> int:
        if hi < lo:
            raise ValueError(f"empty integer range [{lo}, {hi}]")
        return int(self._gen.integers(lo, hi + 1))

    def random(self) -> float:
        return float(self._gen.random())

    def uniform(self, lo: float, hi: float) -> float:
        return float(lo + (hi - lo) * self._gen.random())

    def choice(self, items: Sequence):
        return items[self.randint(0, len(items) - 1)]


def example_seed(master_seed: int, scenario_tag: str, index: int) -> int:
    """Stable 64-bit seed for one example, independent of generation order."""
    digest = hashlib.sha256(f"{master_seed}:{scenario_tag}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")
