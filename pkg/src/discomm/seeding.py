"""Seed derivation: one master seed, independent labelled sub-streams."""
from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(seed: int, label: str) -> int:
    """Stable 63-bit sub-seed for a named stage."""
    digest = hashlib.sha256(f"{int(seed)}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def seed_stream(seed: int, n: int) -> list[int]:
    """``n`` independent integer seeds derived from ``seed``."""
    state = np.random.SeedSequence(int(seed)).generate_state(n, dtype=np.uint32)
    return [int(s) for s in state]
