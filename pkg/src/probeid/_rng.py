"""Seeded counter-based random streams."""
from __future__ import annotations

import numpy as np

MASK64 = 2**64 - 1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & MASK64))


def derive_seed(seed: int, index: int) -> int:
    """Per-task seed ``seed XOR index``; Philox keys make neighbouring seeds independent."""
    return (int(seed) ^ int(index)) & MASK64
