"""PSNR of random-mask completion over rho, group size K and inner MM count N.

    python scripts/sweep_parameters.py --image data/camera256.pgm --out sweep.csv
"""

import argparse
import csv
import itertools
import time

from ogerlrmc.admm import SolverConfig, solve
from ogerlrmc.metrics import MaskKind, MaskSpec, make_mask
from ogerlrmc.oger import OgerParams
from ogerlrmc.pgm import load_image
from ogerlrmc.surrogates import RankSurrogate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--image", default="data/camera256.pgm")
    ap.add_argument("--eta", type=float, default=0.2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rho", type=float, nargs="+", default=[0.2, 0.6, 1.0, 2.0])
    ap.add_argument("--k", type=int, nargs="+", default=[1, 2, 3, 5])
    ap.add_argument("--inner-n", type=int, nargs="+", default=[1, 5])
    ap.add_argument("--out", default="sweep.csv")
    args = ap.parse_args()

    y = load_image(args.image)
    mask = make_mask(MaskSpec(MaskKind.RANDOM, args.eta, seed=args.seed), *y.shape)
    base = SolverConfig(surrogate=RankSurrogate.schatten_capped_p(0.5, 5.0))
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rho", "k", "inner_n", "psnr", "snr", "iters", "seconds"])
        for rho, k, n in itertools.product(args.rho, args.k, args.inner_n):
            cfg = base.replace(rho=rho, oger=OgerParams(k), inner_iterations=n)
            t0 = time.perf_counter()
            _, traces = solve(y, mask, cfg, ground_truth=y)
            row = [rho, k, n, traces[-1].psnr, traces[-1].snr, len(traces), time.perf_counter() - t0]
            writer.writerow(row)
            print(*(f"{v:.4g}" if isinstance(v, float) else v for v in row), flush=True)


if __name__ == "__main__":
    main()
