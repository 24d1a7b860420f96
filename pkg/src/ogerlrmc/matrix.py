"""Dense matrix helpers shared by every solver component.

Matrices are plain ``float64`` numpy arrays and observation masks are ``bool``
arrays of the same shape (``True`` marks an observed entry).
"""

from typing import NamedTuple

import numpy as np


class ShapeError(ValueError):
    """Raised when two arrays that must share a shape do not."""


class NumericalError(ArithmeticError):
    """Raised when a numerical routine fails to produce a usable result."""

    def __init__(self, message, shape=None):
        super().__init__(message)
        self.shape = shape


class SvdResult(NamedTuple):
    u: np.ndarray
    singular_values: np.ndarray
    vt: np.ndarray

    def reconstruct(self, singular_values=None):
        s = self.singular_values if singular_values is None else singular_values
        return (self.u * s) @ self.vt


def as_matrix(m, name="matrix"):
    """Coerce ``m`` to a finite 2-D float64 array (copying only if needed)."""
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2 or 0 in arr.shape:
        raise ShapeError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{name} contains non-finite entries", arr.shape)
    return arr


def as_mask(mask, shape=None):
    """Coerce ``mask`` to a boolean array, optionally checking its shape."""
    arr = np.asarray(mask, dtype=bool)
    if arr.ndim != 2:
        raise ShapeError(f"mask must be 2-D, got shape {arr.shape}")
    if shape is not None and arr.shape != tuple(shape):
        raise ShapeError(f"mask shape {arr.shape} does not match {tuple(shape)}")
    return arr


def _check_same_shape(*arrays):
    shape = arrays[0].shape
    for a in arrays[1:]:
        if a.shape != shape:
            raise ShapeError(f"shape mismatch: {a.shape} vs {shape}")


def svd(m):
    """Thin SVD with singular values in descending order.

    Raises
    ------
    NumericalError
        If LAPACK fails to converge; the input shape is attached.
    """
    m = as_matrix(m)
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge for a {m.shape} matrix", m.shape) from exc
    return SvdResult(u, s, vt)


def frobenius_norm_sq(m):
    m = np.asarray(m, dtype=np.float64)
    return float(np.vdot(m, m))


def restrict(m, mask):
    """Keep entries on the observed set, zero elsewhere."""
    m = np.asarray(m, dtype=np.float64)
    mask = as_mask(mask)
    _check_same_shape(m, mask)
    return np.where(mask, m, 0.0)


def blend(on_omega, off_omega, mask):
    """Take ``on_omega`` on observed entries and ``off_omega`` on the rest."""
    on_omega = np.asarray(on_omega, dtype=np.float64)
    off_omega = np.asarray(off_omega, dtype=np.float64)
    mask = as_mask(mask)
    _check_same_shape(on_omega, off_omega, mask)
    return np.where(mask, on_omega, off_omega)
