"""ADMM solver for low-rank completion with an OGER-regularised error term.

The model splits the data as ``Y = X + Err`` and solves::

    min  alpha * R(W) + lam * phi(E) + 1/2 ||F||_F^2
    s.t. W = X,  E = Err,  F = (Y - X - Err) restricted to the observed set

by cycling through closed-form block updates X, W, Err, F, E and dual ascent
on the three multipliers. ``E`` is the OGER auxiliary copy of ``Err``.
"""

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ogerlrmc.matrix import (
    NumericalError,
    ShapeError,
    as_mask,
    as_matrix,
    blend,
    frobenius_norm_sq,
    restrict,
    svd,
)
from ogerlrmc.metrics import psnr, snr
from ogerlrmc.oger import MmProxConfig, OgerParams, mm_prox, oger_value
from ogerlrmc.surrogates import RankSurrogate, prox_surrogate, surrogate_penalty

log = logging.getLogger(__name__)

BLOCKS = ("x", "w", "err", "e_aux", "f_omega", "mu1", "mu2", "mu3")
WARM_STARTS = ("input", "previous")


class DivergenceError(NumericalError):
    """Raised when an iterate turns non-finite."""

    def __init__(self, iteration, block):
        super().__init__(f"non-finite values in '{block}' at iteration {iteration}")
        self.iteration = iteration
        self.block = block


@dataclass(frozen=True)
class SolverConfig:
    """Tunables of the ADMM solver.

    ``mm_warm_start`` selects the first MM iterate of the E update: ``"input"``
    starts every inner solve at its own prox point, ``"previous"`` reuses the
    last outer E (which never leaves zero when E starts at zero).
    """

    alpha: float = 0.5
    lam: float = 0.01
    rho: float = 0.6
    oger: OgerParams = field(default_factory=OgerParams)
    inner_iterations: int = 5
    tol: float = 1e-5
    max_iterations: int = 500
    surrogate: RankSurrogate = field(default_factory=RankSurrogate.nuclear)
    mm_warm_start: str = "input"

    def __post_init__(self):
        if self.alpha < 0 or self.lam < 0:
            raise ValueError("alpha and lam must be non-negative")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iterations < 1 or self.inner_iterations < 1:
            raise ValueError("iteration counts must be >= 1")
        if self.mm_warm_start not in WARM_STARTS:
            raise ValueError(f"mm_warm_start must be one of {WARM_STARTS}")

    @property
    def mm(self):
        return MmProxConfig(self.inner_iterations, self.lam, self.rho)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class SolverState:
    x: np.ndarray
    w: np.ndarray
    err: np.ndarray
    e_aux: np.ndarray
    f_omega: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray
    mu3: np.ndarray
    iteration: int = 0

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @property
    def recovered(self):
        return self.x + self.err


@dataclass
class IterationTrace:
    iteration: int
    lagrangian: float
    re: float
    diff_norms: dict
    psnr: Optional[float] = None
    snr: Optional[float] = None


def _prepare(y, mask):
    y = as_matrix(y, "observation")
    mask = as_mask(mask, y.shape)
    return y, mask


def init_state(y, mask, cfg=None):
    """Observed entries zero-filled for X and W, zeros everywhere else."""
    y, mask = _prepare(y, mask)
    x = restrict(y, mask)
    zero = np.zeros_like(x)
    return SolverState(
        x=x,
        w=x.copy(),
        err=zero,
        e_aux=zero.copy(),
        f_omega=zero.copy(),
        mu1=zero.copy(),
        mu2=zero.copy(),
        mu3=zero.copy(),
    )


def update_x(state, y, mask, cfg):
    rho = cfg.rho
    n = state.w + state.mu1 / rho
    k = restrict(y - state.f_omega - state.err - state.mu3 / rho, mask)
    return blend(0.5 * (n + k), n, mask)


def update_w(state, cfg):
    return prox_surrogate(cfg.surrogate, state.x - state.mu1 / cfg.rho, cfg.alpha, cfg.rho)


def update_err(state, y, mask, cfg):
    rho = cfg.rho
    g = state.e_aux + state.mu2 / rho
    b = restrict(y - state.x - state.f_omega - state.mu3 / rho, mask)
    return blend(0.5 * (b + g), g, mask)


def update_f(state, y, mask, cfg):
    rho = cfg.rho
    return restrict((rho * (y - state.x - state.err) - state.mu3) / (1.0 + rho), mask)


def e_prox_point(state, cfg):
    """Point at which the E update evaluates the OGER prox."""
    return state.err - state.mu2 / cfg.rho


def update_e_aux(state, cfg):
    d = e_prox_point(state, cfg)
    warm = d if cfg.mm_warm_start == "input" else state.e_aux
    return mm_prox(d, warm, cfg.oger, cfg.mm)


def update_multipliers(state, y, mask, cfg):
    rho = cfg.rho
    mu1 = state.mu1 + rho * (state.w - state.x)
    mu2 = state.mu2 + rho * (state.e_aux - state.err)
    mu3 = state.mu3 + rho * (state.f_omega - restrict(y - state.x - state.err, mask))
    return mu1, mu2, restrict(mu3, mask)


def lagrangian_terms(state, y, mask, cfg):
    """Individual terms of the augmented Lagrangian, keyed by name."""
    rho = cfg.rho
    sv = svd(state.w).singular_values
    feas_f = state.f_omega - restrict(y - state.x - state.err, mask) + state.mu3 / rho
    return {
        "rank": cfg.alpha * surrogate_penalty(cfg.surrogate, sv),
        "oger": cfg.lam * oger_value(state.e_aux, cfg.oger),
        "fidelity": 0.5 * frobenius_norm_sq(state.f_omega),
        "w_x": 0.5 * rho * frobenius_norm_sq(state.w - state.x + state.mu1 / rho),
        "e_err": 0.5 * rho * frobenius_norm_sq(state.e_aux - state.err + state.mu2 / rho),
        "f_res": 0.5 * rho * frobenius_norm_sq(feas_f),
    }


def lagrangian_value(state, y, mask, cfg):
    return float(sum(lagrangian_terms(state, y, mask, cfg).values()))


def relative_change(new, old):
    """Squared change normalised by the squared size of ``new``."""
    num = frobenius_norm_sq(new - old)
    den = frobenius_norm_sq(new)
    return num if den < 1e-30 else num / den


def _check_finite(state):
    for name in BLOCKS:
        if not np.all(np.isfinite(getattr(state, name))):
            raise DivergenceError(state.iteration, name)


def step(state, y, mask, cfg, ground_truth=None):
    """One sweep X, W, Err, F, E, multipliers. Returns ``(new_state, trace)``."""
    y, mask = _prepare(y, mask)
    s = state.replace(x=update_x(state, y, mask, cfg))
    s = s.replace(w=update_w(s, cfg))
    s = s.replace(err=update_err(s, y, mask, cfg))
    s = s.replace(f_omega=update_f(s, y, mask, cfg))
    s = s.replace(e_aux=update_e_aux(s, cfg))
    mu1, mu2, mu3 = update_multipliers(s, y, mask, cfg)
    s = s.replace(mu1=mu1, mu2=mu2, mu3=mu3, iteration=state.iteration + 1)
    _check_finite(s)

    recovered = s.recovered
    diffs = {b: frobenius_norm_sq(getattr(s, b) - getattr(state, b)) for b in BLOCKS}
    trace = IterationTrace(
        iteration=s.iteration,
        lagrangian=lagrangian_value(s, y, mask, cfg),
        re=relative_change(recovered, state.recovered),
        diff_norms=diffs,
    )
    if ground_truth is not None:
        trace.psnr = psnr(ground_truth, recovered)
        trace.snr = snr(ground_truth, recovered)
    return s, trace


def solve(y, mask, cfg, ground_truth=None, state=None, return_state=False):
    """Run ADMM until the relative change of ``X + Err`` drops to ``cfg.tol``.

    Returns
    -------
    recovered : ndarray
        ``X + Err`` of the final iterate.
    traces : list of IterationTrace
    state : SolverState
        Only when ``return_state`` is true.
    """
    y, mask = _prepare(y, mask)
    if ground_truth is not None:
        ground_truth = as_matrix(ground_truth, "ground truth")
        if ground_truth.shape != y.shape:
            raise ShapeError("ground truth shape does not match the observation")
    if state is None:
        state = init_state(y, mask, cfg)
    traces = []
    for _ in range(cfg.max_iterations):
        state, trace = step(state, y, mask, cfg, ground_truth)
        traces.append(trace)
        # The first sweep is compared with the initial fill, not an iterate.
        if len(traces) >= 2 and trace.re <= cfg.tol:
            break
    else:
        log.info("stopped at max_iterations=%d with RE=%.3e", cfg.max_iterations, traces[-1].re)
    if return_state:
        return state.recovered, traces, state
    return state.recovered, traces


def stationarity_report(state, y, mask, cfg=None):
    """Primal feasibility residuals that vanish at a stable point."""
    y, mask = _prepare(y, mask)
    res = state.f_omega - restrict(y - state.x - state.err, mask)
    return {
        "w_minus_x": float(np.linalg.norm(state.w - state.x)),
        "e_minus_err": float(np.linalg.norm(state.e_aux - state.err)),
        "f_minus_residual": float(np.linalg.norm(res)),
    }


def lagrangian_increases(traces, start=2, slack=1e-6):
    """Iterations ``k >= start`` where ``L^{k+1} > L^k + slack``.

    Returns a list of ``(k + 1, increase)`` pairs; empty means monotone.
    """
    by_iter = {t.iteration: t.lagrangian for t in traces}
    out = []
    for t in traces:
        k = t.iteration - 1
        if k >= start and k in by_iter:
            inc = t.lagrangian - by_iter[k]
            if inc > slack:
                out.append((t.iteration, inc))
    return out


def smoothed_diff_norms(traces, window=10):
    """Mean of each block's squared successive difference over the last ``window`` traces."""
    tail = traces[-window:]
    return {b: float(np.mean([t.diff_norms[b] for t in tail])) for b in BLOCKS}
