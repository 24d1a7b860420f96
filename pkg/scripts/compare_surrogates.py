"""Random-mask completion with each rank surrogate, with and without OGER."""

import argparse

from ogerlrmc.admm import SolverConfig, solve
from ogerlrmc.metrics import MaskKind, MaskSpec, make_mask
from ogerlrmc.pgm import load_image
from ogerlrmc.surrogates import RankSurrogate

SURROGATES = {
    "nuclear": RankSurrogate.nuclear(),
    "schatten_p": RankSurrogate.schatten_p(0.5),
    "schatten_capped_p": RankSurrogate.schatten_capped_p(0.5, 5.0),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--image", default="data/camera256.pgm")
    ap.add_argument("--eta", type=float, nargs="+", default=[0.2, 0.4, 0.6])
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--lam", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    y = load_image(args.image)
    print("eta  surrogate          lam=0 PSNR  with OGER PSNR")
    for eta in args.eta:
        mask = make_mask(MaskSpec(MaskKind.RANDOM, eta, seed=args.seed), *y.shape)
        for name, sur in SURROGATES.items():
            cfg = SolverConfig(alpha=args.alpha, lam=args.lam, surrogate=sur)
            _, off = solve(y, mask, cfg.replace(lam=0.0), ground_truth=y)
            _, on = solve(y, mask, cfg, ground_truth=y)
            print(f"{eta:<4} {name:<18} {off[-1].psnr:10.2f}  {on[-1].psnr:14.2f}", flush=True)


if __name__ == "__main__":
    main()
