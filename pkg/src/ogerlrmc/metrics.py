"""Degradation masks, sampling-rate accounting, quality metrics and rank truncation.

Images live in ``[0, 1]`` (peak 1), which is what the PSNR numerator
``n1 * n2`` assumes. ``eta`` always means the fraction of MISSING entries.
"""

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ogerlrmc.matrix import ShapeError, as_mask, as_matrix, frobenius_norm_sq, svd


class MaskKind(str, enum.Enum):
    RANDOM = "random"
    BLOCKS = "blocks"
    FROM_IMAGE = "from_image"


@dataclass(frozen=True)
class MaskSpec:
    """How to degrade an image.

    ``rectangles`` holds ``(row, col, height, width)`` tuples; for image masks
    every nonzero pixel of the PGM at ``path`` is missing.
    """

    kind: MaskKind = MaskKind.RANDOM
    missing_fraction: float = 0.0
    rectangles: tuple = field(default=())
    path: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", MaskKind(self.kind))
        object.__setattr__(self, "rectangles", tuple(tuple(int(v) for v in r) for r in self.rectangles))
        if not 0.0 <= self.missing_fraction <= 1.0:
            raise ValueError(f"missing_fraction must lie in [0, 1], got {self.missing_fraction}")
        if self.kind is MaskKind.FROM_IMAGE and not self.path:
            raise ValueError("an image mask needs a path")
        if any(len(r) != 4 for r in self.rectangles):
            raise ValueError("rectangles are (row, col, height, width)")


def make_mask(spec, rows, cols):
    """Observation mask (``True`` = observed) of shape ``(rows, cols)``."""
    if rows < 1 or cols < 1:
        raise ValueError("mask dimensions must be positive")
    if spec.kind is MaskKind.RANDOM:
        n = rows * cols
        n_missing = int(np.floor(spec.missing_fraction * n + 0.5))
        order = np.random.default_rng(spec.seed).permutation(n)
        observed = np.ones(n, dtype=bool)
        observed[order[:n_missing]] = False
        return observed.reshape(rows, cols)
    if spec.kind is MaskKind.BLOCKS:
        observed = np.ones((rows, cols), dtype=bool)
        for r, c, h, w in spec.rectangles:
            if r < 0 or c < 0 or h < 0 or w < 0 or r + h > rows or c + w > cols:
                raise ValueError(f"rectangle {(r, c, h, w)} out of bounds for {rows}x{cols}")
            observed[r : r + h, c : c + w] = False
        return observed
    from ogerlrmc.pgm import read_pgm

    raw = read_pgm(spec.path)
    if raw.shape != (rows, cols):
        raise ShapeError(f"mask image {spec.path} is {raw.shape}, expected {(rows, cols)}")
    return raw == 0


def sampling_rate(mask):
    """``1 - observed / total``: the missing fraction."""
    mask = as_mask(mask)
    return 1.0 - np.count_nonzero(mask) / mask.size


def _diff_energy(reference, estimate):
    reference = as_matrix(reference, "reference")
    estimate = as_matrix(estimate, "estimate")
    if reference.shape != estimate.shape:
        raise ShapeError(f"shape mismatch: {reference.shape} vs {estimate.shape}")
    return reference, frobenius_norm_sq(reference - estimate)


def psnr(reference, estimate):
    """Peak SNR in dB for unit-peak images; ``inf`` for identical inputs."""
    reference, err = _diff_energy(reference, estimate)
    if err == 0.0:
        return float("inf")
    return 10.0 * np.log10(reference.size / err)


def snr(reference, estimate):
    reference, err = _diff_energy(reference, estimate)
    energy = frobenius_norm_sq(reference)
    if energy == 0.0:
        raise ValueError("SNR is undefined for an all-zero reference")
    if err == 0.0:
        return float("inf")
    return 10.0 * np.log10(energy / err)


def truncate_rank(m, k):
    """Best rank-``k`` approximation and the residual ``m - approx``."""
    m = as_matrix(m)
    limit = min(m.shape)
    if not 0 <= k <= limit:
        raise ValueError(f"k={k} must lie in [0, {limit}]")
    dec = svd(m)
    approx = (dec.u[:, :k] * dec.singular_values[:k]) @ dec.vt[:k, :]
    return approx, m - approx


def tail_energy(m, k):
    """``sum_{i > k} sigma_i**2``."""
    s = svd(m).singular_values
    return float(np.sum(s[k:] ** 2))
