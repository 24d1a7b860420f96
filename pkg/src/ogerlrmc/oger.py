"""Overlapping group error representation (OGER) and its MM proximal solver.

For a group size ``K`` every index ``(i, j)`` anchors the ``K x K`` window of
rows ``i - n1 .. i + n2`` and columns ``j - n1 .. j + n2`` with
``n1 = (K - 1) // 2`` and ``n2 = K // 2``. Out-of-range window positions read
as zero. The OGER value is the sum of the Euclidean norms of all windows.

The reweighting diagonal used by the MM solver sums, for each pixel, the
reciprocal norms of every in-range group that contains it, which is what makes the quadratic
surrogate an upper bound of the group norms.
"""

from dataclasses import dataclass

import numpy as np

from ogerlrmc.matrix import ShapeError


@dataclass(frozen=True)
class OgerParams:
    group_size: int = 3
    epsilon: float = 1e-12

    def __post_init__(self):
        if int(self.group_size) != self.group_size or self.group_size < 1:
            raise ValueError(f"group_size must be a positive integer, got {self.group_size}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def left_radius(self):
        return (self.group_size - 1) // 2

    @property
    def right_radius(self):
        return self.group_size // 2


@dataclass(frozen=True)
class MmProxConfig:
    inner_iterations: int = 5
    lam: float = 0.01
    rho: float = 0.6

    def __post_init__(self):
        if self.inner_iterations < 1:
            raise ValueError("inner_iterations must be >= 1")
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        if not self.rho > 0:
            raise ValueError("rho must be positive")


def _box_sum(a, before, after):
    """Sum of ``a[r - before : r + after + 1, c - before : c + after + 1]``, zero padded.

    Shifted adds rather than cumulative sums: magnitudes can span 1e12
    (floored reciprocal norms) and cumsum differences would cancel.
    """
    rows, cols = a.shape
    k = before + after + 1
    padded = np.pad(a, ((before, after), (before, after)))
    out = np.zeros_like(a, dtype=np.float64)
    for di in range(k):
        for dj in range(k):
            out += padded[di : di + rows, dj : dj + cols]
    return out


def group_at(e, i, j, params):
    """The zero-padded ``K x K`` group anchored at ``(i, j)``."""
    e = np.asarray(e, dtype=np.float64)
    rows, cols = e.shape
    if not (0 <= i < rows and 0 <= j < cols):
        raise IndexError(f"group centre ({i}, {j}) outside a {rows}x{cols} matrix")
    n1, k = params.left_radius, params.group_size
    out = np.zeros((k, k))
    r0, c0 = i - n1, j - n1
    rs, re_ = max(r0, 0), min(r0 + k, rows)
    cs, ce = max(c0, 0), min(c0 + k, cols)
    out[rs - r0 : re_ - r0, cs - c0 : ce - c0] = e[rs:re_, cs:ce]
    return out


def group_norms(e, params):
    """Euclidean norm of the group anchored at every index."""
    e = np.asarray(e, dtype=np.float64)
    return np.sqrt(_box_sum(e * e, params.left_radius, params.right_radius))


def oger_value(e, params):
    return float(group_norms(e, params).sum())


def lambda_diagonal(e, params):
    """Per-pixel diagonal of the MM reweighting operator.

    ``out[l]**2`` is the sum of ``1 / max(||group(c)||, epsilon)`` over the
    in-range centres ``c`` whose group contains pixel ``l``.
    """
    inv = 1.0 / np.maximum(group_norms(e, params), params.epsilon)
    # Pixel l lies in the group anchored at c iff c is in [l - n2, l + n1].
    return np.sqrt(_box_sum(inv, params.right_radius, params.left_radius))


def mm_objective(e, d, params, lam, rho):
    """``lam * phi(E) + rho/2 * ||E - D||_F^2``."""
    diff = np.asarray(e) - np.asarray(d)
    return lam * oger_value(e, params) + 0.5 * rho * float(np.vdot(diff, diff))


def mm_majorizer(e, v, d, params, lam, rho):
    """Quadratic upper bound of :func:`mm_objective` that touches it at ``e == v``."""
    e = np.asarray(e, dtype=np.float64)
    e_norms = group_norms(e, params)
    v_norms = np.maximum(group_norms(v, params), params.epsilon)
    s = float(np.sum(e_norms**2 / (2.0 * v_norms) + 0.5 * v_norms))
    diff = e - np.asarray(d)
    return lam * s + 0.5 * rho * float(np.vdot(diff, diff))


def mm_prox(d, warm_start, params, cfg, history=None):
    """Approximate ``argmin_E lam*phi(E) + rho/2*||E - D||_F^2`` by MM sweeps.

    Each sweep rebuilds the reweighting diagonal at the current iterate and
    applies the elementwise update ``E = D / (1 + lam/rho * Lambda**2)``.

    Parameters
    ----------
    d : ndarray
    warm_start : ndarray
        First iterate. A zero group stays (numerically) zero forever, so a
        zero start collapses the output to zero.
    params : OgerParams
    cfg : MmProxConfig
    history : list, optional
        When given, the objective after every sweep is appended (the start
        value first).
    """
    d = np.asarray(d, dtype=np.float64)
    e = np.asarray(warm_start, dtype=np.float64)
    if e.shape != d.shape:
        raise ShapeError(f"warm start shape {e.shape} does not match {d.shape}")
    if cfg.lam == 0.0:
        return d.copy()
    ratio = cfg.lam / cfg.rho
    if history is not None:
        history.append(mm_objective(e, d, params, cfg.lam, cfg.rho))
    for _ in range(cfg.inner_iterations):
        lam_sq = lambda_diagonal(e, params) ** 2
        e = d / (1.0 + ratio * lam_sq)
        if history is not None:
            history.append(mm_objective(e, d, params, cfg.lam, cfg.rho))
    return e
