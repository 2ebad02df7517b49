#!/usr/bin/env python3
"""Solve the 1D weighted subdiffusion model with a manufactured solution
u = t^2 sin(pi x) and report the space-time error under one refinement."""

import argparse
import math
import sys

import numpy as np

from wsonine.kernels import KernelPair, Weight
from wsonine.quadrature import Mesh
from wsonine.subdiffusion import PdeConfig, solve_subdiffusion

G25 = math.gamma(2.5)
PI2 = math.pi ** 2


def forcing(x, t):
    return (2.0 * t ** 1.5 / G25 + PI2 * t * t) * np.sin(math.pi * np.asarray(x))


def exact(x, t):
    return t * t * np.sin(math.pi * np.asarray(x))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--m", type=int, default=32, help="interior spatial nodes")
    p.add_argument("--n", type=int, default=64, help="time steps")
    p.add_argument("--grading", type=float, default=4.0)
    p.add_argument("--out", default=None, help="optional CSV output path")
    args = p.parse_args(argv)

    pair = KernelPair.make("0.5", normalized=True)
    weight = Weight.from_expr("1")
    errs = []
    for m, n in ((args.m, args.n), (2 * args.m, 2 * args.n)):
        cfg = PdeConfig(m=m, mesh=Mesh(1.0, n, args.grading), pair=pair,
                        weight=weight, forcing=forcing, initial="0")
        sol = solve_subdiffusion(cfg)
        err = sol.final_l2_error(exact)
        errs.append(err)
        print(f"M = {m:4d}, N = {n:4d}: relative L2 error at T=1 {err:.3e}")
        if args.out and m == args.m:
            sol.write_csv(args.out)
            print(f"wrote {args.out}")
    print(f"refinement ratio {errs[1] / errs[0]:.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
