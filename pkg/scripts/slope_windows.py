"""Fitted sum-rate slope of every scheme over sliding power windows.

Shows how slowly the finite-SNR slopes approach their DoF targets.

    python3 scripts/slope_windows.py --trials 300
"""

import argparse

import numpy as np

from dcsit.analysis import dof_achievable_k3, dof_baseline, dof_weak, fit_dof_slope
from dcsit.schemes import sweep

CASES = [
    ("weak", 3, (0.2, 0.0, 0.0), lambda a: dof_weak(a, 3)),
    ("toy", 3, (0.1, 0.0, 0.0), lambda a: dof_weak(a, 3)),
    ("arbitrary_k3", 3, (0.5, 0.25, 0.0), dof_achievable_k3),
    ("baseline_zf", 3, (0.5, 0.0, 0.0), lambda a: dof_baseline(a, 3)),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-exp", type=int, default=64)
    ap.add_argument("--width", type=int, default=16, help="window width in decades")
    args = ap.parse_args()

    exps = np.arange(2, args.max_exp + 1, 2)
    P = 10.0 ** exps
    for scheme, K, alphas, target in CASES:
        reps = sweep(scheme, K, alphas, P, trials=args.trials, seed=args.seed)
        pts = [(r.P, r.sum_rate) for r in reps]
        print(f"{scheme} alphas={alphas} target={float(target(alphas)):.4f}")
        for lo in range(2, args.max_exp - args.width + 1, 4):
            fit = fit_dof_slope(pts, (10.0**lo, 10.0 ** (lo + args.width)))
            print(f"  P in [1e{lo}, 1e{lo + args.width}]: slope {fit.slope:.3f}")
        print(f"  P in [1e2, 1e8]: slope {fit_dof_slope(pts, (1e2, 1e8)).slope:.3f}")


if __name__ == "__main__":
    main()
