"""Export Gram/Weingarten archives for a grid of (k, n).

    python3 scripts/export_commutant_tables.py --k 2 3 4 --n 1 2 3 --out tables/
"""

from __future__ import annotations

import argparse
import os

from kdesign.commutant import export_weingarten_table, weingarten_table


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--n", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--out", default="tables")
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    for k in args.k:
        for n in args.n:
            table = weingarten_table(k, n)
            path = os.path.join(args.out, f"weingarten_k{k}_n{n}.json")
            export_weingarten_table(table, path)
            tag = " (pseudo-inverse)" if table.pseudo else ""
            print(f"k={k} n={n}: {len(table.monomials)} monomials{tag} -> {path}")


if __name__ == "__main__":
    main()
