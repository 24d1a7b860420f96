"""Lagrangian monotonicity and successive differences on a synthetic instance.

Prints violations of L^{k+1} <= L^k + slack and the smoothed block
differences at termination, for each penalty rho and tolerance requested.
"""

import argparse

from ogerlrmc.admm import SolverConfig, lagrangian_increases, smoothed_diff_norms, solve
from ogerlrmc.synthetic import low_rank, random_mask


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=32)
    ap.add_argument("--rank", type=int, default=3)
    ap.add_argument("--eta", type=float, default=0.4)
    ap.add_argument("--rho", type=float, nargs="+", default=[0.6, 5.0])
    ap.add_argument("--tol", type=float, nargs="+", default=[1e-5, 1e-7, 1e-9])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    y = low_rank(args.size, args.size, args.rank, seed=args.seed)
    mask = random_mask(args.size, args.size, args.eta, seed=args.seed)
    for rho in args.rho:
        for tol in args.tol:
            _, traces = solve(y, mask, SolverConfig(rho=rho, tol=tol, max_iterations=5000))
            bad = lagrangian_increases(traces)
            diffs = smoothed_diff_norms(traces)
            worst = max(diffs, key=diffs.get)
            print(f"rho={rho:<4} tol={tol:.0e} iters={len(traces):<5} increases={len(bad):<3} "
                  f"max smoothed diff {worst}={diffs[worst]:.3e}")


if __name__ == "__main__":
    main()
