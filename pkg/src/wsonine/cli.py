"""Command-line front door: verify | solve | converge.

stdout carries exactly one JSON summary line; all human diagnostics go to
stderr.  Exit codes: 0 success, 2 configuration error, 3 verification
failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import vie
from .config import RunConfig
from .errors import (ConfigError, DomainError, ExprError, NumericalError,
                     UnsupportedConfigurationError, ValidationError)
from .kernels import licm_check
from .quadrature import Mesh
from .sonine import (SonineData, csc_residual, wsc1_report, wsc2_report)
from .subdiffusion import PdeConfig, solve_subdiffusion

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_NUMERICAL = 4

_SOLVE_KINDS = ("vie1", "vie1k", "ode", "pde")


def _emit(summary: dict) -> None:
    sys.stdout.write(json.dumps(summary) + "\n")


def _note(msg: str) -> None:
    sys.stderr.write(msg + "\n")


def _ensure_out(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        out.writerows(rows)


# ----------------------------------------------------------------- verify

def cmd_verify(cfg: RunConfig, out_dir: str) -> int:
    pair = cfg.make_pair()
    weight = cfg.make_weight()
    data = SonineData.make(pair, weight)
    tol = cfg.identity_tol
    failures = []
    residuals = []

    if pair.exponent.is_constant:
        ts = [0.1 * k * pair.b for k in range(1, 11)]
        rows = []
        worst = 0.0
        for t in ts:
            r = csc_residual(pair, t, cfg.jacobi_n)
            worst = max(worst, r)
            rows.append([f"{t:.17g}", f"{r:.17g}"])
        _write_rows(os.path.join(out_dir, "csc.csv"), ["t", "residual"], rows)
        residuals.append(worst)
        _note(f"CSC residual: max {worst:.3e} over {len(ts)} points "
              f"({'pass' if worst <= tol else 'FAIL'})")
        if worst > tol:
            failures.append("csc")
    else:
        _note("CSC identity: skipped (holds for constant exponents only)")

    rep1 = wsc1_report(data, tolerance=tol)
    rep1.write_csv(os.path.join(out_dir, "wsc1.csv"))
    residuals.append(rep1.max_residual)
    _note(rep1.summary())
    failures.extend(rep1.failures)

    if pair.exponent.is_constant:
        rep2 = wsc2_report(pair, weight, tolerance=tol)
        rep2.write_csv(os.path.join(out_dir, "wsc2.csv"))
        residuals.append(rep2.max_residual)
        _note(rep2.summary())
        failures.extend(rep2.failures)
    else:
        _note("WSC2: skipped (supported for constant exponents only)")

    lic = licm_check(pair.k, b=pair.b)
    status = "pass" if lic.passed else "FAIL"
    _note(f"LICM screen of k up to order {lic.max_order}: {status}"
          + ("" if lic.passed else f" (first violation {lic.first_violation})"))
    if not lic.passed:
        failures.append("licm")

    ok = not failures
    _emit({"command": "verify",
           "status": "pass" if ok else "fail",
           "max_residual": max(residuals) if residuals else None,
           "failures": sorted(set(failures))})
    return EXIT_OK if ok else EXIT_VERIFY


# ------------------------------------------------------------------ solve

def _build_forcing(cfg: RunConfig, pair, weight) -> vie.Forcing:
    if cfg.manufactured:
        if cfg.exact_expr is None:
            raise ConfigError("manufactured forcing needs an exact expression")
        return vie.manufactured_forcing(pair, weight, cfg.exact_expr)
    if cfg.f_expr is None:
        raise ConfigError("missing [forcing] f expression")
    return vie.Forcing.from_expr(cfg.f_expr)


def _exact_fn(cfg: RunConfig):
    if cfg.exact_expr is None:
        return None
    from .expr import as_function
    return as_function(cfg.exact_expr)


def _solve_once(cfg: RunConfig, kind: str, mesh: Mesh):
    """Returns (report-like, error-vs-exact or None, max_residual or None)."""
    pair = cfg.make_pair()
    weight = cfg.make_weight()
    exact = _exact_fn(cfg)

    if kind == "pde":
        if cfg.f_expr is None:
            raise ConfigError("missing [forcing] f expression")
        pcfg = PdeConfig(cfg.pde_m, mesh, pair, weight, cfg.f_expr,
                         cfg.initial_expr, exact=cfg.exact_expr)
        sol = solve_subdiffusion(pcfg)
        err = sol.final_l2_error(cfg.exact_expr) if cfg.exact_expr else None
        return sol, err, float(np.max(sol.solve_residuals))

    forcing = _build_forcing(cfg, pair, weight)
    if kind == "ode":
        prob = vie.NonlocalOdeProblem(pair, weight, forcing, c=cfg.c)
        rep = vie.solve_nonlocal_ode(prob, mesh)
        max_res = None
    else:
        variant = "weighted-k" if kind == "vie1" else "K-kernel"
        prob = vie.FirstKindProblem(pair, weight, forcing, variant=variant)
        rep = vie.solve_first_kind(prob, mesh)
        pts, res = vie.residual_first_kind(
            prob, mesh, rep.u, [0.25 * cfg.b, 0.5 * cfg.b, cfg.b])
        rep.residual_points, rep.residuals = pts, res
        max_res = rep.max_residual
    err = None
    if exact is not None:
        try:
            err = vie.max_node_error(mesh, rep.u, exact)
        except (DomainError, ZeroDivisionError, FloatingPointError):
            err = None
        if err is None or not np.isfinite(err):
            err = vie.weighted_l1_error(mesh, rep.u, exact)
    return rep, err, max_res


def cmd_solve(cfg: RunConfig, kind: str, out_dir: str) -> int:
    mesh = cfg.make_mesh()
    rep, err, max_res = _solve_once(cfg, kind, mesh)
    if kind == "pde":
        rep.write_csv(os.path.join(out_dir, "solution.csv"))
    else:
        rep.write_solution_csv(os.path.join(out_dir, "solution.csv"))
        if rep.residuals is not None:
            _write_rows(os.path.join(out_dir, "residuals.csv"),
                        ["t", "residual"],
                        [[f"{p:.17g}", f"{r:.17g}"]
                         for p, r in zip(rep.residual_points, rep.residuals)])
    _note(f"solve kind={kind} N={mesh.n} done; outputs in {out_dir}")
    summary = {"command": "solve", "status": "ok", "kind": kind}
    if max_res is not None:
        summary["max_residual"] = max_res
    if err is not None:
        summary["error"] = err
    _emit(summary)
    return EXIT_OK


# --------------------------------------------------------------- converge

def cmd_converge(cfg: RunConfig, kind: str, doublings: int, out_dir: str) -> int:
    if cfg.exact_expr is None:
        raise ConfigError("converge needs an exact expression in [forcing]")
    rows = []
    errs = []
    n = cfg.n
    for level in range(doublings + 1):
        mesh = cfg.make_mesh(n)
        if kind == "pde":
            # simultaneous space-time refinement
            sub = RunConfig(**{**cfg.__dict__, "pde_m": cfg.pde_m * 2 ** level})
            _, err, _ = _solve_once(sub, kind, mesh)
        else:
            _, err, _ = _solve_once(cfg, kind, mesh)
        errs.append(err)
        if level == 0:
            order = ""
        elif errs[-2] < 1e-13 or err < 1e-13:
            order = "exact"
        else:
            order = f"{np.log2(errs[-2] / err):.6g}"
        rows.append([n, f"{err:.17g}", order])
        _note(f"converge kind={kind} N={n}: error {err:.6e}"
              + (f", order {order}" if order else ""))
        n *= 2
    _write_rows(os.path.join(out_dir, "convergence.csv"),
                ["N", "error", "order"], rows)
    last_order = rows[-1][2] if len(rows) > 1 else None
    _emit({"command": "converge", "status": "ok", "kind": kind,
           "error": errs[-1], "order": last_order})
    return EXIT_OK


# ------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="wsonine",
        description="weighted Sonine kernels: verification and solvers")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to config file")
    common.add_argument("--out", default=None, help="output directory override")

    sub.add_parser("verify", parents=[common],
                   help="check the configured kernel/weight conditions")
    ps = sub.add_parser("solve", parents=[common], help="solve one problem")
    ps.add_argument("--kind", choices=_SOLVE_KINDS, default="vie1")
    pc = sub.add_parser("converge", parents=[common],
                        help="mesh-refinement study against the exact solution")
    pc.add_argument("--kind", choices=_SOLVE_KINDS, default="vie1")
    pc.add_argument("--doublings", type=int, default=3)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_path(args.config)
        out_dir = _ensure_out(args.out if args.out is not None else cfg.out_dir)
        if args.command == "verify":
            return cmd_verify(cfg, out_dir)
        if args.command == "solve":
            return cmd_solve(cfg, args.kind, out_dir)
        if args.command == "converge":
            if args.doublings < 0:
                raise ConfigError("doublings must be >= 0")
            return cmd_converge(cfg, args.kind, args.doublings, out_dir)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ExprError, ValidationError,
            UnsupportedConfigurationError) as exc:
        _note(f"configuration error: {exc}")
        _emit({"command": args.command, "status": "config-error",
               "error": str(exc)})
        return EXIT_CONFIG
    except (NumericalError, DomainError) as exc:
        _note(f"numerical failure: {exc}")
        _emit({"command": args.command, "status": "numerical-failure",
               "error": str(exc)})
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
