#!/usr/bin/env python3
"""Sweep the unit-interval kernels across a time ladder and tabulate the
sharp-estimate envelopes.

Writes one CSV per kernel with diagonal and off-diagonal profiles, plus a
JSON table of ratio ranges from the estimate checker.  Useful for eyeballing
how the weighted and flat kernels separate as t grows.
"""
import argparse
import json
import os

import numpy as np

from fbhardy.basis import EigenBasis
from fbhardy.kernels import LEMMA_IDS, UnitIntervalKernels, check_sharp_estimate
from fbhardy.specfun import Order


def profile_rows(kernels, which, times, x):
    fn = getattr(kernels, which)
    rows = []
    for t in times:
        diag = fn(float(t), x, x)
        off = fn(float(t), x, np.full_like(x, 0.35))
        for xi, dv, ov in zip(x, diag, off):
            rows.append((float(t), float(xi), float(dv), float(ov)))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nu", type=float, default=0.5)
    ap.add_argument("--n-zeros", type=int, default=2400)
    ap.add_argument("--out", default="out/panorama")
    ap.add_argument("--n-x", type=int, default=41)
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    basis = EigenBasis.build(Order(args.nu), args.n_zeros)
    kernels = UnitIntervalKernels(basis)
    times = np.geomspace(0.02, 2.0, 9)
    x = np.linspace(0.02, 0.98, args.n_x)

    for which in ("poisson_mu", "poisson_lebesgue", "heat_mu",
                  "heat_lebesgue"):
        rows = profile_rows(kernels, which, times, x)
        path = os.path.join(args.out, f"{which}.csv")
        with open(path, "w") as fh:
            fh.write("t,x,diagonal,off_diagonal\n")
            for row in rows:
                fh.write(",".join("%.17g" % v for v in row) + "\n")
        print(f"wrote {path} ({len(rows)} rows)")

    table = {}
    for lemma in LEMMA_IDS:
        rep = check_sharp_estimate(lemma, kernels=kernels, nu=args.nu,
                                   n_space=12)
        table[lemma] = {"ratio_min": rep.ratio_min, "ratio_max": rep.ratio_max,
                        "kind": rep.kind, "passed": rep.passed}
        print(f"{lemma:18s} [{rep.ratio_min:.4g}, {rep.ratio_max:.4g}] "
              f"{rep.kind} {'ok' if rep.passed else 'DRIFTING'}")
    with open(os.path.join(args.out, "estimates.json"), "w") as fh:
        json.dump(table, fh, indent=1, sort_keys=True)


if __name__ == "__main__":
    main()
