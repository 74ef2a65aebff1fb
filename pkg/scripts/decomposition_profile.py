#!/usr/bin/env python3
"""Cost and coefficient-mass profile of the atomic decomposition.

The cascade keeps subdividing a cell while its detail coefficient is above
the cut; every cell that stops emits its exact remainder as a closing atom,
so reconstruction is exact at any cut and the only trade is between the
number of retained details and the coefficient mass carried by the closers.
This script measures that trade on a few profiles.
"""
import argparse
import json
import os
import time

import numpy as np

from fbhardy.covers import Interval
from fbhardy.hardy import PiecewiseLinear, atomic_decompose, cascade_decompose
from fbhardy.quadrature import MEASURE_LEBESGUE, MEASURE_MU


def bump(a=0.08, b=0.40):
    nodes = np.linspace(a, b, 33)
    u = (nodes - a) / (b - a)
    return PiecewiseLinear.from_node_values(nodes, np.sin(np.pi * u) ** 2)


def cascade_table(fn, space, measure, cuts):
    x = np.linspace(space.a, space.b, 4001)
    rows = []
    for cut in cuts:
        t0 = time.perf_counter()
        c = cascade_decompose(fn, space, measure, 0.5, detail_cut=cut)
        dt = time.perf_counter() - t0
        err = float(np.max(np.abs(c.evaluate(x) - fn.evaluate(x))))
        rows.append({"cut": cut,
                     "n_details": int(sum(len(l.idx) for l in c.levels)),
                     "n_closers": len(c.closers),
                     "closure_l1": c.closure_l1,
                     "coeff_l1": c.coeff_l1(),
                     "sup_error": err,
                     "seconds": dt})
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/decomposition")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    fn = PiecewiseLinear.tent(0.25, 0.45, 1.3)
    space = Interval(0.2, 0.5)
    cuts = [10.0 ** -k for k in range(3, 10)]
    report = {}
    for measure in (MEASURE_MU, MEASURE_LEBESGUE):
        rows = cascade_table(fn, space, measure, cuts)
        report[measure] = rows
        for r in rows:
            print(f"{measure:9s} cut={r['cut']:.0e} details={r['n_details']:6d} "
                  f"closers={r['n_closers']:6d} closure={r['closure_l1']:.3e} "
                  f"sup_err={r['sup_error']:.2e} {r['seconds']:.2f}s")

    pipeline = {}
    for measure, profile in ((MEASURE_MU, bump()),
                             (MEASURE_LEBESGUE,
                              PiecewiseLinear.tent(0.3, 0.62, 1.0))):
        t0 = time.perf_counter()
        dec = atomic_decompose(profile, nu=0.5, measure=measure)
        dt = time.perf_counter() - t0
        s = dec.summary()
        s["seconds"] = dt
        pipeline[measure] = s
        print(f"pipeline {measure}: {s['n_details']} details, "
              f"{s['n_closers']} closers, coeff L1 {s['coeff_l1']:.4g}, "
              f"{dt:.2f}s")

    with open(os.path.join(args.out, "profile.json"), "w") as fh:
        json.dump({"cascade": report, "pipeline": pipeline}, fh, indent=1,
                  sort_keys=True)
    print(f"wrote {os.path.join(args.out, 'profile.json')}")


if __name__ == "__main__":
    main()
