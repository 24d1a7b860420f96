"""Command-line experiment runner.

Subcommands::

    ogerlrmc complete  INPUT --output-dir DIR [--config FILE] [options]
    ogerlrmc decompose INPUT --k 10 20 --output-dir DIR
    ogerlrmc maskgen   --rows R --cols C --eta 0.2 --seed 1 OUTPUT
    ogerlrmc metrics   REFERENCE ESTIMATE

Exit codes: 0 success, 1 usage error, 2 runtime failure (I/O, divergence).
"""

import argparse
import csv
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ogerlrmc.admm import DivergenceError, SolverConfig, solve
from ogerlrmc.matrix import restrict
from ogerlrmc.metrics import MaskKind, MaskSpec, make_mask, psnr, snr, tail_energy, truncate_rank
from ogerlrmc.oger import OgerParams
from ogerlrmc.pgm import PgmError, load_image, minmax_rescale, quantize, save_image, write_pgm, write_raw
from ogerlrmc.surrogates import RankSurrogate, SurrogateKind

log = logging.getLogger("ogerlrmc")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

TRACE_HEADER = ["iter", "lagrangian", "re", "psnr", "snr", "dx", "dw", "derr", "de", "df", "dmu1", "dmu2", "dmu3"]
_TRACE_BLOCKS = ["x", "w", "err", "e_aux", "f_omega", "mu1", "mu2", "mu3"]


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    input_path: str
    output_dir: str
    mask: MaskSpec = field(default_factory=MaskSpec)
    solver: SolverConfig = field(default_factory=SolverConfig)
    ground_truth_path: Optional[str] = None


def fmt(v):
    """17 significant digits, blank for missing values."""
    if v is None:
        return ""
    return format(float(v), ".17g")


# key=value config: keys mirror the long command-line options.
_CONFIG_KEYS = {
    "alpha": float,
    "lambda": float,
    "rho": float,
    "k": int,
    "inner_n": int,
    "tol": float,
    "max_iter": int,
    "surrogate": str,
    "p": float,
    "tau": float,
    "weights": str,
    "seed": int,
    "eta": float,
    "blocks": str,
    "mask_image": str,
    "ground_truth": str,
    "warm_start": str,
}


def read_config(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key '{key}'")
            try:
                values[key] = _CONFIG_KEYS[key](value)
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: bad value for '{key}': {value}") from exc
    return values


def parse_blocks(text):
    """``"r,c,h,w;r,c,h,w"`` to a tuple of rectangles."""
    rects = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        nums = [int(v) for v in part.split(",")]
        if len(nums) != 4:
            raise UsageError(f"block '{part}' must be row,col,height,width")
        rects.append(tuple(nums))
    return tuple(rects)


def build_surrogate(opts):
    kind = SurrogateKind(opts.get("surrogate", "nuclear"))
    p = opts.get("p", 0.5 if kind is not SurrogateKind.NUCLEAR else 1.0)
    weights = tuple(float(w) for w in opts["weights"].split(",")) if opts.get("weights") else ()
    return RankSurrogate(kind, p=p, tau=opts.get("tau", 1.0), weights=weights)


def build_mask_spec(opts):
    if opts.get("mask_image"):
        return MaskSpec(MaskKind.FROM_IMAGE, path=opts["mask_image"])
    if opts.get("blocks"):
        return MaskSpec(MaskKind.BLOCKS, rectangles=parse_blocks(opts["blocks"]))
    return MaskSpec(MaskKind.RANDOM, missing_fraction=opts.get("eta", 0.2), seed=opts.get("seed", 0))


def build_solver_config(opts):
    defaults = SolverConfig()
    return SolverConfig(
        alpha=opts.get("alpha", defaults.alpha),
        lam=opts.get("lambda", defaults.lam),
        rho=opts.get("rho", defaults.rho),
        oger=OgerParams(opts.get("k", defaults.oger.group_size)),
        inner_iterations=opts.get("inner_n", defaults.inner_iterations),
        tol=opts.get("tol", defaults.tol),
        max_iterations=opts.get("max_iter", defaults.max_iterations),
        surrogate=build_surrogate(opts),
        mm_warm_start=opts.get("warm_start", defaults.mm_warm_start),
    )


def write_trace(traces, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for t in traces:
            row = [str(t.iteration), fmt(t.lagrangian), fmt(t.re), fmt(t.psnr), fmt(t.snr)]
            row += [fmt(t.diff_norms[b]) for b in _TRACE_BLOCKS]
            writer.writerow(row)


def run_complete(cfg):
    """Degrade, complete and report. Returns an exit status."""
    try:
        image = load_image(cfg.input_path)
        truth = load_image(cfg.ground_truth_path) if cfg.ground_truth_path else None
        if truth is not None and truth.shape != image.shape:
            raise UsageError(f"ground truth {cfg.ground_truth_path} does not match {cfg.input_path}")
        mask = make_mask(cfg.mask, *image.shape)
    except (OSError, PgmError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    os.makedirs(cfg.output_dir, exist_ok=True)
    degraded = restrict(image, mask)
    try:
        recovered, traces, state = solve(degraded, mask, cfg.solver, ground_truth=truth, return_state=True)
    except DivergenceError as exc:
        print(f"error: solver diverged: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    out = cfg.output_dir
    try:
        save_image(degraded, os.path.join(out, "degraded.pgm"))
        save_image(recovered, os.path.join(out, "recovered.pgm"))
        save_image(minmax_rescale(state.err), os.path.join(out, "error_component.pgm"))
        write_raw(state.err, os.path.join(out, "error_component.raw"))
        write_trace(traces, os.path.join(out, "trace.csv"))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    last = traces[-1]
    print(f"final_psnr={fmt(last.psnr)} final_snr={fmt(last.snr)} iters={len(traces)}")
    return EXIT_OK


def run_decompose(input_path, k_list, output_dir):
    try:
        image = load_image(input_path)
    except (OSError, PgmError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    limit = min(image.shape)
    bad = [k for k in k_list if not 0 <= k <= limit]
    if bad:
        print(f"error: k values {bad} outside [0, {limit}]", file=sys.stderr)
        return EXIT_USAGE
    os.makedirs(output_dir, exist_ok=True)
    rows = []
    for k in k_list:
        approx, residual = truncate_rank(image, k)
        save_image(approx, os.path.join(output_dir, f"lowrank_k{k}.pgm"))
        save_image(minmax_rescale(residual), os.path.join(output_dir, f"residual_k{k}.pgm"))
        rows.append((k, float(np.vdot(residual, residual)), tail_energy(image, k)))
    with open(os.path.join(output_dir, "truncation_errors.csv"), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "residual_fro_sq", "sum_tail_sigma_sq"])
        for k, res, tail in rows:
            writer.writerow([k, fmt(res), fmt(tail)])
    return EXIT_OK


def run_maskgen(spec, rows, cols, output_path):
    """Write the mask as P5 with 255 = missing, 0 = observed."""
    try:
        mask = make_mask(spec, rows, cols)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        write_pgm(np.where(mask, 0, 255).astype(np.uint8), output_path)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def run_metrics(reference_path, estimate_path):
    try:
        ref = load_image(reference_path)
        est = load_image(estimate_path)
        print(f"psnr={fmt(psnr(ref, est))} snr={fmt(snr(ref, est))}")
    except (OSError, PgmError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_solver_options(p):
    p.add_argument("--config", help="key=value file; command-line options override it")
    p.add_argument("--alpha", type=float)
    p.add_argument("--lambda", dest="lambda_", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--k", type=int, help="OGER group size")
    p.add_argument("--inner-n", type=int, help="MM sweeps per E update")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--surrogate", choices=[k.value for k in SurrogateKind])
    p.add_argument("--p", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--weights", help="comma-separated singular value weights")
    p.add_argument("--warm-start", choices=["input", "previous"])


def _add_mask_options(p):
    p.add_argument("--eta", type=float, help="missing fraction of a random mask")
    p.add_argument("--seed", type=int)
    p.add_argument("--blocks", help="rectangles 'row,col,height,width;...'")
    p.add_argument("--mask-image", help="PGM whose nonzero pixels are missing")


def build_parser():
    parser = _Parser(prog="ogerlrmc", description="Low-rank completion with OGER.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("complete", help="degrade an image and complete it")
    p.add_argument("input")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--ground-truth")
    _add_solver_options(p)
    _add_mask_options(p)

    p = sub.add_parser("decompose", help="rank-k truncations of an image")
    p.add_argument("input")
    p.add_argument("--k", type=int, nargs="+", required=True)
    p.add_argument("--output-dir", required=True)

    p = sub.add_parser("maskgen", help="write a degradation mask as PGM")
    p.add_argument("output")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    _add_mask_options(p)

    p = sub.add_parser("metrics", help="PSNR and SNR between two images")
    p.add_argument("reference")
    p.add_argument("estimate")
    return parser


def _collect(args, names, base=None):
    opts = dict(base or {})
    for name in names:
        value = getattr(args, name, None)
        if value is not None:
            opts[name.rstrip("_")] = value
    return opts


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        if args.command == "complete":
            base = read_config(args.config) if args.config else {}
            names = ["alpha", "lambda_", "rho", "k", "inner_n", "tol", "max_iter", "surrogate",
                     "p", "tau", "weights", "warm_start", "eta", "seed", "blocks", "mask_image"]
            opts = _collect(args, names, base)
            truth = args.ground_truth or opts.get("ground_truth")
            cfg = ExperimentConfig(
                input_path=args.input,
                output_dir=args.output_dir,
                mask=build_mask_spec(opts),
                solver=build_solver_config(opts),
                ground_truth_path=truth,
            )
            return run_complete(cfg)
        if args.command == "decompose":
            return run_decompose(args.input, args.k, args.output_dir)
        if args.command == "maskgen":
            opts = _collect(args, ["eta", "seed", "blocks", "mask_image"])
            return run_maskgen(build_mask_spec(opts), args.rows, args.cols, args.output)
        return run_metrics(args.reference, args.estimate)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
