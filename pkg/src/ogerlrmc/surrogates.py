"""Rank surrogates and their singular-value shrinkage operators.

Every surrogate acts on singular values only, so its proximal operator keeps
the singular vectors of the input and solves one scalar problem per value::

    min_{x >= 0}  lam * psi(x) + rho/2 * (x - s)**2

with ``psi`` the per-value penalty (``x``, ``x**p`` or ``min(x, tau)**p``).
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from ogerlrmc.matrix import svd


class SurrogateKind(str, enum.Enum):
    NUCLEAR = "nuclear"
    SCHATTEN_P = "schatten_p"
    WEIGHTED_NUCLEAR = "weighted_nuclear"
    WEIGHTED_SCHATTEN_P = "weighted_schatten_p"
    SCHATTEN_CAPPED_P = "schatten_capped_p"


_P_KINDS = (
    SurrogateKind.SCHATTEN_P,
    SurrogateKind.WEIGHTED_SCHATTEN_P,
    SurrogateKind.SCHATTEN_CAPPED_P,
)
_WEIGHTED_KINDS = (SurrogateKind.WEIGHTED_NUCLEAR, SurrogateKind.WEIGHTED_SCHATTEN_P)


@dataclass(frozen=True)
class RankSurrogate:
    """A spectral rank surrogate ``R(X)`` and its parameters.

    ``p`` is used by the three Schatten variants, ``tau`` by the capped one and
    ``weights`` (one per singular value, largest value first) by the weighted
    ones. Unused parameters are ignored.
    """

    kind: SurrogateKind = SurrogateKind.NUCLEAR
    p: float = 1.0
    tau: float = 1.0
    weights: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "kind", SurrogateKind(self.kind))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.kind in _P_KINDS and not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if self.kind is SurrogateKind.SCHATTEN_CAPPED_P and not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.kind in _WEIGHTED_KINDS:
            w = np.asarray(self.weights)
            if w.size == 0:
                raise ValueError(f"{self.kind.value} requires weights")
            if np.any(w < 0) or not np.all(np.isfinite(w)):
                raise ValueError("weights must be finite and non-negative")
            if self.kind is SurrogateKind.WEIGHTED_NUCLEAR and np.any(np.diff(w) < 0):
                raise ValueError("weighted nuclear norm weights must be non-descending")

    @classmethod
    def nuclear(cls):
        return cls(SurrogateKind.NUCLEAR)

    @classmethod
    def schatten_p(cls, p):
        return cls(SurrogateKind.SCHATTEN_P, p=p)

    @classmethod
    def weighted_nuclear(cls, weights):
        return cls(SurrogateKind.WEIGHTED_NUCLEAR, weights=tuple(weights))

    @classmethod
    def weighted_schatten_p(cls, weights, p):
        return cls(SurrogateKind.WEIGHTED_SCHATTEN_P, p=p, weights=tuple(weights))

    @classmethod
    def schatten_capped_p(cls, p, tau):
        return cls(SurrogateKind.SCHATTEN_CAPPED_P, p=p, tau=tau)

    def weights_for(self, n):
        if len(self.weights) < n:
            raise ValueError(f"need {n} weights, surrogate carries {len(self.weights)}")
        return np.asarray(self.weights[:n])


def _check_singular_values(singular_values):
    s = np.asarray(singular_values, dtype=np.float64)
    if s.ndim != 1:
        raise ValueError("singular values must be a 1-D sequence")
    if np.any(s < 0):
        raise ValueError("singular values must be non-negative")
    if np.any(np.diff(s) > 0):
        raise ValueError("singular values must be sorted in descending order")
    return s


def _per_value_penalty(r, s):
    if r.kind is SurrogateKind.NUCLEAR:
        return s
    if r.kind is SurrogateKind.SCHATTEN_P:
        return s**r.p
    if r.kind is SurrogateKind.WEIGHTED_NUCLEAR:
        return r.weights_for(s.size) * s
    if r.kind is SurrogateKind.WEIGHTED_SCHATTEN_P:
        return r.weights_for(s.size) * s**r.p
    return np.minimum(s, r.tau) ** r.p


def surrogate_value(r, singular_values):
    """Value of ``R`` from descending singular values.

    The Schatten variants return the ``1/p``-th root of the summed powers, e.g.
    ``(sum s_i**p)**(1/p)`` for :attr:`SurrogateKind.SCHATTEN_P`.
    """
    s = _check_singular_values(singular_values)
    total = float(np.sum(_per_value_penalty(r, s)))
    if r.kind in _P_KINDS and r.p != 1.0:
        return total ** (1.0 / r.p)
    return total


def surrogate_penalty(r, singular_values):
    """Separable penalty ``sum psi(s_i)`` minimised by :func:`prox_surrogate`.

    Equals :func:`surrogate_value` whenever ``p == 1``.
    """
    s = _check_singular_values(singular_values)
    return float(np.sum(_per_value_penalty(r, s)))


def shrink_scalar_soft(s, lam, rho):
    """Exact minimiser of ``lam*x + rho/2*(x - s)**2`` over ``x >= 0``."""
    return max(s - lam / rho, 0.0)


def p_shrink_threshold(lam, rho, p):
    """Smallest ``s`` at which the p-shrinkage minimiser leaves zero."""
    c = lam / rho
    base = 2.0 * c * (1.0 - p)
    return base ** (1.0 / (2.0 - p)) + c * p * base ** ((p - 1.0) / (2.0 - p))


def shrink_scalar_p(s, lam, rho, p, max_iter=50, xtol=1e-12):
    """Global minimiser of ``lam*x**p + rho/2*(x - s)**2`` over ``x >= 0``.

    Generalized soft thresholding: zero below the exact threshold, otherwise
    the fixed point of ``x = s - (lam*p/rho) * x**(p-1)`` started from ``s``.
    The map contracts with factor at most ``p/2`` above the threshold.
    """
    if p == 1.0:
        return shrink_scalar_soft(s, lam, rho)
    if lam == 0.0 or s == 0.0:
        return float(s)
    if s <= p_shrink_threshold(lam, rho, p):
        return 0.0
    c = lam * p / rho
    x = float(s)
    for _ in range(max_iter):
        x_new = s - c * x ** (p - 1.0)
        if abs(x_new - x) < xtol:
            x = x_new
            break
        x = x_new
    return x


def capped_p_objective(x, s, lam, rho, p, tau):
    return lam * min(x, tau) ** p + 0.5 * rho * (x - s) ** 2


def shrink_scalar_capped_p(s, lam, rho, p, tau):
    """Global minimiser of ``lam*min(x, tau)**p + rho/2*(x - s)**2`` over ``x >= 0``.

    The objective has at most three local minima: ``0``, the p-shrinkage
    minimiser restricted to ``[0, tau]``, and ``max(s, tau)`` on the flat
    branch. All three are compared directly.
    """
    if s == 0.0:
        return 0.0
    flat = max(s, tau)
    inner = min(shrink_scalar_p(s, lam, rho, p), tau)
    candidates = (0.0, inner, flat)
    values = [capped_p_objective(x, s, lam, rho, p, tau) for x in candidates]
    return candidates[int(np.argmin(values))]


def shrink_values(r, s, alpha, rho):
    """Apply the surrogate's scalar solver to each value of ``s``."""
    s = np.asarray(s, dtype=np.float64)
    if alpha == 0.0:
        return s.copy()
    if r.kind is SurrogateKind.NUCLEAR:
        return np.maximum(s - alpha / rho, 0.0)
    if r.kind is SurrogateKind.WEIGHTED_NUCLEAR:
        return np.maximum(s - alpha * r.weights_for(s.size) / rho, 0.0)
    if r.kind is SurrogateKind.SCHATTEN_P:
        return np.array([shrink_scalar_p(si, alpha, rho, r.p) for si in s])
    if r.kind is SurrogateKind.WEIGHTED_SCHATTEN_P:
        lams = alpha * r.weights_for(s.size)
        return np.array([shrink_scalar_p(si, li, rho, r.p) for si, li in zip(s, lams)])
    return np.array([shrink_scalar_capped_p(si, alpha, rho, r.p, r.tau) for si in s])


def prox_surrogate(r, d, alpha, rho):
    """Proximal map ``argmin_W alpha*sum psi(sigma_i(W)) + rho/2*||W - D||_F^2``.

    Parameters
    ----------
    r : RankSurrogate
    d : ndarray
        Point at which the prox is evaluated.
    alpha : float
        Surrogate weight (zero returns ``d`` unchanged).
    rho : float
        Quadratic weight.

    Returns
    -------
    ndarray
        ``U_D diag(x) V_D^T`` with ``x`` the shrunk singular values of ``d``.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    if alpha == 0.0:
        return np.array(d, dtype=np.float64)
    dec = svd(d)
    x = shrink_values(r, dec.singular_values, alpha, rho)
    if r.kind is SurrogateKind.WEIGHTED_SCHATTEN_P:
        # Weights may break the ordering; restore descending order with the factors.
        order = np.argsort(-x, kind="stable")
        return (dec.u[:, order] * x[order]) @ dec.vt[order, :]
    return dec.reconstruct(x)
