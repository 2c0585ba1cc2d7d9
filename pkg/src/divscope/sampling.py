"""Seeded subsampling shared by the metric modules."""

from __future__ import annotations

import os

import numpy as np

ENV_SEED = "DIVSCOPE_SEED"


def resolve_seed(explicit: int | None, fallback: int = 0) -> int:
    """Seed resolution: explicit value, then the DIVSCOPE_SEED env var, then 0."""
    if explicit is not None:
        return int(explicit)
    env = os.environ.get(ENV_SEED)
    if env is not None and env.strip():
        return int(env)
    return fallback


def subsample_indices(n: int, cap: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw without replacement of min(n, cap) indices, input order kept.

    With n <= cap no randomness is consumed and every index is returned.
    """
    if n <= cap:
        return np.arange(n)
    idx = rng.choice(n, size=cap, replace=False)
    idx.sort()
    return idx
