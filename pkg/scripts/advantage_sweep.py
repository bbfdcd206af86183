"""Distinguisher advantage versus compressibility t at l = 3t + 2.

    python3 scripts/advantage_sweep.py --n 6 --t 0 1 2 6 --trials 200 --seed 11 --out results/
"""

from __future__ import annotations

import argparse
import os

import numpy as np

from kdesign.attack import advantage_curve, write_advantage_json


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--t", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--epsilon-t", type=float, default=0.5)
    ap.add_argument("--thresholded", action="store_true")
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    rows = advantage_curve(
        args.t,
        args.n,
        args.trials,
        rng,
        epsilon_t=args.epsilon_t,
        thresholded=args.thresholded,
    )
    path = os.path.join(args.out, f"advantage_n{args.n}_seed{args.seed}.json")
    write_advantage_json(
        rows, path, n=args.n, trials=args.trials, seed=args.seed, epsilon_t=args.epsilon_t
    )
    for row in rows:
        print(
            f"t={row.t}: l={row.l} copies={row.copies} "
            f"source={row.source_mean:.4f} haar={row.haar_mean:.4f} "
            f"advantage={row.advantage:.4f} +- {row.stderr:.4f}"
        )
    print(f"-> {path}")


if __name__ == "__main__":
    main()
