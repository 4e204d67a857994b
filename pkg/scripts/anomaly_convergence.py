"""Map where the corrected-anomaly iteration stalls.

Sweeps (e, t_hat) on a grid and reports, per eccentricity band, the share of
phases that hit the iteration cap. Optionally writes a PGM image of the
iteration counts (white = stalled).

    python scripts/anomaly_convergence.py --ne 200 --nt 400 --pgm anomaly.pgm
"""

import argparse
import math

import numpy as np

from scalefree.errors import NonConvergenceError
from scalefree.orbit import ANOMALY_MAX_ITER, solve_corrected_anomaly


def iterations(e, t_hat):
    # replay the loop once more just to count passes
    D, E, n = 1.0, t_hat, 0
    while D > 0.001 and n < ANOMALY_MAX_ITER:
        E_next = e * math.sin(E) - t_hat
        D, E, n = abs(E_next - E), E_next, n + 1
    return n if D <= 0.001 else ANOMALY_MAX_ITER + 1


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--ne", type=int, default=200)
    ap.add_argument("--nt", type=int, default=400)
    ap.add_argument("--pgm")
    args = ap.parse_args()

    es = np.linspace(0.0, 0.999, args.ne)
    ts = -math.pi + 2 * math.pi * np.arange(args.nt) / args.nt
    counts = np.zeros((args.ne, args.nt), dtype=int)
    stalled = np.zeros_like(counts, dtype=bool)
    for i, e in enumerate(es):
        for j, t in enumerate(ts):
            counts[i, j] = iterations(e, t)
            try:
                solve_corrected_anomaly(float(e), float(t))
            except NonConvergenceError:
                stalled[i, j] = True
    assert np.array_equal(stalled, counts > ANOMALY_MAX_ITER)
    first = es[stalled.any(axis=1)]
    print(f"grid {args.ne} x {args.nt}, stalled cells {stalled.sum()}")
    print(f"smallest e with a stall: {first.min():.3f}" if first.size else "no stalls")
    for lo in (0.0, 0.5, 0.8, 0.85, 0.9, 0.95):
        band = (es >= lo) & (es < lo + 0.05)
        if band.any():
            print(f"  e in [{lo:.2f}, {lo + 0.05:.2f}): stalled {stalled[band].mean():7.2%}, "
                  f"mean passes {counts[band][~stalled[band]].mean():.1f}")
    if args.pgm:
        img = (255 * np.minimum(counts, ANOMALY_MAX_ITER + 1) / (ANOMALY_MAX_ITER + 1)).astype(np.uint8)
        with open(args.pgm, "wb") as f:
            f.write(f"P5\n{args.nt} {args.ne}\n255\n".encode())
            f.write(img[::-1].tobytes())
        print(f"wrote {args.pgm}")


if __name__ == "__main__":
    main()
