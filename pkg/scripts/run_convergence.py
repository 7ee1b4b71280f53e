#!/usr/bin/env python3
"""Convergence sweep: recovery error vs number of coefficients.

Synthesizes a jump model plus a chosen smooth part, runs the full
pipeline over a geometric M sweep and prints per-column errors with
fitted log-log slopes.  Numbers go to stdout as a plain table; pass
--csv to get machine-readable output instead.
"""

import argparse
import json
import math
import sys

import numpy as np

from jumprec import (
    AprioriBounds,
    JumpModel,
    ReconstructionConfig,
    full_reconstruct,
    jump_free_error,
    phi_eval,
    smooth_catalog,
    synth_spectrum,
)
from jumprec.stability import fit_loglog_slope


def circ(a, b):
    r = abs(a - b) % (2.0 * math.pi)
    return min(r, 2.0 * math.pi - r)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", help="model JSON file; default single d=2 jump")
    ap.add_argument("--smooth", default="expsin", help="smooth catalog name")
    ap.add_argument("--smooth-args", default='{"amp": 1.0}')
    ap.add_argument("--M", type=int, nargs="+",
                    default=[64, 128, 256, 512, 1024])
    ap.add_argument("--bounds", default='{"J": 1.5707963, "A": 4.0, "B": 0.05, "R": 10.0}')
    ap.add_argument("--csv", action="store_true")
    args = ap.parse_args()

    if args.model:
        with open(args.model) as fh:
            model = JumpModel.from_json_dict(json.load(fh))
    else:
        model = JumpModel(2, ((0.7, (1.0, -0.4, 0.25)),))
    smooth = smooth_catalog(args.smooth, **json.loads(args.smooth_args))
    b = json.loads(args.bounds)
    bounds = AprioriBounds(J=b["J"], A=b["A"], B=b["B"], R=b["R"])
    d = model.order

    def truth(xs):
        return phi_eval(model, xs) + smooth.evaluator(xs)

    cols = ["err_xi"] + [f"err_a_{l}" for l in range(d + 1)] + ["err_sup"]
    rows = []
    for M in args.M:
        spec = synth_spectrum(model, smooth, M)
        cfg = ReconstructionConfig(d=d, K=model.K, bounds=bounds)
        appr = full_reconstruct(spec, cfg)
        e_xi, e_a = 0.0, [0.0] * (d + 1)
        for (xi_t, a_t), (xi_e, a_e) in zip(model.jumps, appr.estimate.jumps):
            e_xi = max(e_xi, circ(xi_t, xi_e))
            for l in range(d + 1):
                e_a[l] = max(e_a[l], abs(a_e[l] - a_t[l]))
        e_sup = jump_free_error(appr, truth, bounds.J / 4.0,
                                true_jumps=model.locations)
        rows.append([e_xi] + e_a + [e_sup])

    if args.csv:
        print("M," + ",".join(cols))
        for M, row in zip(args.M, rows):
            print(f"{M}," + ",".join(repr(v) for v in row))
    else:
        head = "M".rjust(6) + "".join(c.rjust(13) for c in cols)
        print(head)
        for M, row in zip(args.M, rows):
            print(str(M).rjust(6) + "".join(f"{v:13.3e}" for v in row))
    print()
    for j, c in enumerate(cols):
        slope, used = fit_loglog_slope(args.M, [r[j] for r in rows])
        print(f"slope {c}: {slope:+.2f}  (rows used {int(np.sum(used))}/{len(rows)})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
