"""How close can LW(a,b) @ LW(b,a) get to identity in float64?

For random trees (up to 10 levels, parent/child size ratios 10**U(-3, 6))
this compares the round-trip error with the rounding floor of the largest
translation terms, and with the 256-bit oracle product.

    python scripts/lw_roundtrip_floor.py --trees 1000
"""

import argparse
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "tests"))
from trees import random_tree, roundtrip_floor  # noqa: E402

from scalefree.transform import local_world_matrix  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trees", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=2)
    ap.add_argument("--tol", type=float, default=1e-9)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    errs, floors = [], []
    for _ in range(args.trees):
        nodes = random_tree(rng)
        i, j = rng.choice(len(nodes), size=2, replace=False)
        ab, ba = local_world_matrix(nodes[i], nodes[j]), local_world_matrix(nodes[j], nodes[i])
        errs.append(float(np.abs(ab @ ba - np.eye(4)).max()))
        floors.append(roundtrip_floor(ab, ba))
    errs, floors = np.array(errs), np.array(floors)
    ratio = errs / floors
    over = errs >= args.tol
    print(f"trees: {args.trees}")
    print(f"max error: {errs.max():.3e}   over {args.tol:g}: {over.sum()}")
    print(f"error / floor: median {np.median(ratio):.2f}, max {ratio.max():.2f}")
    print(f"failing trees whose floor alone exceeds {args.tol:g}: {(floors[over] >= args.tol).sum()} / {over.sum()}")
    for q in (50, 90, 99, 100):
        print(f"  p{q:<3} error {np.percentile(errs, q):.3e}")


if __name__ == "__main__":
    main()
