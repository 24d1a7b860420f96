"""Seeded synthetic instances for tests and experiment scripts."""

import numpy as np


def low_rank(rows, cols, rank, seed=0):
    """``A @ B / sqrt(rank)`` with standard normal factors, so entries are O(1)."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((rows, rank))
    b = rng.standard_normal((rank, cols))
    return a @ b / np.sqrt(rank)


def random_mask(rows, cols, missing_fraction, seed=0):
    """Random observation mask with an exact missing count (wraps :func:`make_mask`)."""
    from ogerlrmc.metrics import MaskKind, MaskSpec, make_mask

    return make_mask(MaskSpec(MaskKind.RANDOM, missing_fraction=missing_fraction, seed=seed), rows, cols)
