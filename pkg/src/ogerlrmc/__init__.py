"""Low-rank matrix completion with an overlapping group error representation."""

from ogerlrmc.matrix import (
    NumericalError,
    ShapeError,
    SvdResult,
    as_mask,
    as_matrix,
    blend,
    frobenius_norm_sq,
    restrict,
    svd,
)
from ogerlrmc.surrogates import (
    RankSurrogate,
    prox_surrogate,
    shrink_scalar_capped_p,
    shrink_scalar_p,
    shrink_scalar_soft,
    surrogate_value,
)
from ogerlrmc.oger import (
    MmProxConfig,
    OgerParams,
    group_at,
    lambda_diagonal,
    mm_objective,
    mm_prox,
    oger_value,
)
from ogerlrmc.admm import (
    DivergenceError,
    IterationTrace,
    SolverConfig,
    SolverState,
    init_state,
    lagrangian_value,
    solve,
    stationarity_report,
    step,
)
from ogerlrmc.metrics import MaskSpec, make_mask, psnr, sampling_rate, snr, truncate_rank

__version__ = "0.1.0"
