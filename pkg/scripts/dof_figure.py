"""Print the K=3 DoF curves against alpha1 as a text table.

    python3 scripts/dof_figure.py --step 0.1 --alpha2 0 0.25 0.5 0.75
"""

import argparse

import numpy as np

from dcsit.analysis import figure_curves


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--step", type=float, default=0.1)
    ap.add_argument("--alpha2", type=float, nargs="+", default=[0.0, 0.25, 0.5, 0.75])
    ap.add_argument("--alpha3", type=float, default=0.0)
    args = ap.parse_args()

    grid = np.round(np.arange(0.0, 1.0 + args.step / 2, args.step), 10)
    curves = figure_curves(args.alpha2, alpha3=args.alpha3, alpha1_grid=grid)
    cols = [dict(c.points) for c in curves]
    print("alpha1  " + "  ".join(f"{c.label:>20}" for c in curves))
    for a1 in grid:
        cells = [f"{col[a1]:20.4f}" if a1 in col else " " * 20 for col in cols]
        print(f"{a1:6.2f}  " + "  ".join(cells))


if __name__ == "__main__":
    main()
