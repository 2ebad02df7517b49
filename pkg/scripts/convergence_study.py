#!/usr/bin/env python3
"""Mesh-refinement study for the weighted first-kind solve with a
manufactured solution; prints error and observed order per doubling."""

import argparse
import sys
import time

import numpy as np

from wsonine.kernels import KernelPair, Weight
from wsonine.quadrature import Mesh
from wsonine.sonine import SonineData
from wsonine.vie import (FirstKindProblem, manufactured_forcing,
                         max_node_error, solve_first_kind)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--alpha", default="0.5 + 0.1*t", help="exponent expression")
    p.add_argument("--weight", default="1 + s*t", help="weight expression")
    p.add_argument("--exact", default="1 + t", help="manufactured solution")
    p.add_argument("--n", type=int, default=64, help="coarsest mesh size")
    p.add_argument("--grading", type=float, default=4.0)
    p.add_argument("--doublings", type=int, default=3)
    args = p.parse_args(argv)

    pair = KernelPair.make(args.alpha)
    weight = Weight.from_expr(args.weight)
    data = SonineData.make(pair, weight)
    forcing = manufactured_forcing(pair, weight, args.exact)
    problem = FirstKindProblem(pair, weight, forcing)
    from wsonine.expr import as_function
    exact = as_function(args.exact)

    print(f"alpha = {args.alpha!r}, w = {args.weight!r}, u = {args.exact!r}")
    prev = None
    n = args.n
    for _ in range(args.doublings + 1):
        start = time.perf_counter()
        mesh = Mesh(pair.b, n, args.grading)
        rep = solve_first_kind(problem, mesh, "second-kind", data)
        err = max_node_error(mesh, rep.u, exact)
        order = f"{np.log2(prev / err):.2f}" if prev else "  - "
        print(f"N = {n:5d}  error = {err:.3e}  order = {order}  "
              f"({time.perf_counter() - start:.2f} s)")
        prev = err
        n *= 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
