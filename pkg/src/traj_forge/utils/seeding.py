#!/usr/bin/env python3
# 🌀 Eidosian Seed Fan-out
"""
Counter-based RNG streams derived from one master seed.

A stream key depends only on ``(master, stage, index)``, so stages and
frames can run in any order or in parallel and still draw the same
numbers.
"""

import hashlib
from typing import Union

import numpy as np

SeedLike = Union[int, np.integer]


def derive_seed(master: SeedLike, stage: str, index: int = 0) -> int:
    """
    Derive a 64-bit stream key.

    Args:
        master: Master seed of the run
        stage: Stage name, e.g. ``"planner.pair"``
        index: Counter within the stage

    Returns:
        Unsigned 64-bit integer key
    """
    token = f"{int(master)}:{stage}:{int(index)}".encode("utf-8")
    digest = hashlib.blake2b(token, digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream(master: SeedLike, stage: str, index: int = 0) -> np.random.Generator:
    """Return an independent generator for ``(master, stage, index)``."""
    return np.random.default_rng(derive_seed(master, stage, index))
