"""Command line interface.

    vlpbenson solve problem.vlp [--algorithm primal|dual] [--eps E] ...
    vlpbenson risk avar|rwc market.txt [--output PREFIX] [--solve ...]
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import DimensionError, ParseError, VlpError
from .problem_io import export_off, read_problem, write_problem, write_report
from .twophase import SolveOptions, SolveStatus, solve

EXIT_CODES = {
    SolveStatus.SOLVED: 0,
    SolveStatus.PRIMAL_INFEASIBLE: 2,
    SolveStatus.DUAL_INFEASIBLE: 3,
    SolveStatus.LINES: 4,
    SolveStatus.NUMERICAL_FAILURE: 5,
}


def _add_solve_flags(p):
    p.add_argument("--algorithm", choices=("primal", "dual"), default="primal")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--no-break", action="store_true", help="process all vertices of a round")
    p.add_argument("--assume-bounded", action="store_true", help="skip phase 1")
    p.add_argument("--output", metavar="PREFIX", help="write result files with this prefix")
    p.add_argument("--off", type=float, metavar="BOX",
                   help="write PREFIX.off, truncating BOX beyond the largest vertex coordinate (q=3)")
    p.add_argument("--lp-tol", type=float, help="LP feasibility and optimality tolerance")
    p.add_argument("--geom-tol", type=float, help="geometric tolerance")
    p.add_argument("--parallel", type=int, default=1, metavar="K",
                   help="threads for per-vertex LPs (with --no-break)")


def build_parser():
    parser = argparse.ArgumentParser(prog="vlpbenson", description="Solve vector linear programs.")
    sub = parser.add_subparsers(dest="command", required=True)
    ps = sub.add_parser("solve", help="solve a problem file")
    ps.add_argument("problem")
    _add_solve_flags(ps)
    ps.add_argument("--minimal-cone", action="store_true", help="(risk problems only; ignored here)")
    pr = sub.add_parser("risk", help="build a risk measure problem from a market file")
    pr.add_argument("measure", choices=("avar", "rwc"))
    pr.add_argument("market")
    pr.add_argument("--problem-out", metavar="FILE", help="write the problem file here (default stdout)")
    pr.add_argument("--solve", action="store_true", help="solve the assembled problem")
    pr.add_argument("--minimal-cone", action="store_true", help="drop redundant solvency generators")
    _add_solve_flags(pr)
    return parser


def _options(args):
    tol = DEFAULT_TOLERANCES
    if args.lp_tol is not None:
        tol = replace(tol, lp_feas=args.lp_tol, lp_opt=args.lp_tol)
    if args.geom_tol is not None:
        tol = replace(tol, geom=args.geom_tol)
    return SolveOptions(
        algorithm=args.algorithm,
        eps=args.eps,
        break_mode=not args.no_break,
        assume_bounded=args.assume_bounded,
        tolerances=tol,
        parallel=args.parallel,
    )


def print_stats(sol, status, out):
    st = sol.stats
    pre = getattr(sol, "phase_one_stats", None)
    total = st.seconds + (pre.lp_seconds if pre else 0.0)
    ratio = st.lp_max_seconds / st.lp_avg_seconds if st.lp_avg_seconds else 0.0
    print(f"status      {status.value}", file=out)
    print(f"algorithm   {sol.algorithm}  eps {sol.epsilon:g}", file=out)
    print(f"time        {total:.3f} s", file=out)
    print(f"|Sbar|      {len(sol.sbar)}", file=out)
    print(f"|Sbar_h|    {len(sol.sbar_h)}", file=out)
    print(f"|Tbar|      {len(sol.tbar)}", file=out)
    print(f"#LPs        {st.lp_count}" + (f"  (+{pre.lp_count} in phase 1)" if pre else ""), file=out)
    print(f"t_max       {st.lp_max_seconds:.6f} s", file=out)
    print(f"t_max/t_avg {ratio:.2f}", file=out)
    if not sol.solution_of_primal:
        print("note        Sbar is an eps-infimizer only", file=out)


def _run_solve(prob, args, out, err):
    status, sol = solve(prob, _options(args))
    if status is not SolveStatus.SOLVED:
        print(f"status      {status.value}", file=out)
        return EXIT_CODES[status]
    print_stats(sol, status, out)
    if args.output:
        write_report(sol, args.output, status.value)
    if args.off is not None:
        if not args.output:
            print("--off needs --output", file=err)
            return 1
        hi = sol.p_vrep.points.max(axis=0) + args.off
        try:
            text = export_off(sol.p_vrep, (-np.inf, hi))
        except DimensionError as exc:
            print(f"error: {exc}", file=err)
            return 1
        with open(args.output + ".off", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return 0


def run(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        if args.command == "solve":
            prob = read_problem(args.problem)
            return _run_solve(prob, args, out, err)
        from .risk import build_avar, build_rwc, parse_market

        with open(args.market, encoding="utf-8") as fh:
            spec = parse_market(fh.read())
        mk = spec.market
        if args.measure == "avar":
            alpha = spec.alpha if spec.alpha is not None else np.full(mk.d, 0.05)
            prob = build_avar(mk, spec.payoff, alpha, minimal_cone=args.minimal_cone)
        else:
            eps = spec.rwc_eps if spec.rwc_eps is not None else np.zeros(mk.d)
            lam = spec.rwc_lambda
            if lam is None:
                raise ParseError("rwc needs an 'rwc_lambda' record")
            prob = build_rwc(mk, spec.payoff, eps, lam, minimal_cone=args.minimal_cone)
        text = write_problem(prob)
        if args.problem_out:
            with open(args.problem_out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        elif not args.solve:
            out.write(text)
        if args.solve:
            return _run_solve(prob, args, out, err)
        return 0
    except (ParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return 1
    except VlpError as exc:
        print(f"error: {exc}", file=err)
        return 1


def main():
    sys.exit(run())
