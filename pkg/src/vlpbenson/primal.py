"""Outer approximation of the upper image (primal algorithm).

Every round enumerates the vertices of the current outer polyhedron and
solves one translation LP per vertex.  A vertex that lies strictly outside
the upper image (``z > eps``) yields a supporting halfspace that cuts it off;
one inside yields a minimizer.
"""
from __future__ import annotations

import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import ContainsLine, NoVertex, NumericalFailure
from .polyhedral import dual_from_outer
from .scalarizations import solve_p1, solve_p2
from .solution import RoundRunner, SolveStats, assemble, same_dual_point, timer

MAX_ROUNDS = 10**6


def initial_dual_points(prob, seed_th, solver):
    """Solve ``P1(w)`` for every seed weight and keep the distinct dual points."""
    out = []
    for seed in seed_th:
        w = seed.w if hasattr(seed, "w") else np.asarray(seed[1] if isinstance(seed, tuple) else seed, float)
        x, dp, res = solve_p1(prob, w, solver)
        if dp is None:
            raise NumericalFailure("seed weight gives an unbounded weighted-sum LP; is the problem bounded?")
        if not any(same_dual_point(dp, o, 1e-9) for o in out):
            out.append(dp)
    if not out:
        raise ValueError("at least one seed weight is required")
    return out


def solve_primal(prob, seed_sh, seed_th, eps=0.0, break_mode=True, tol=None, parallel=1):
    """Run the primal algorithm from the given seeds.

    Parameters
    ----------
    prob : MolpProblem
    seed_sh : list of arrays
        Directions of the feasible set whose images, with ``C``, generate the
        recession cone of the upper image.
    seed_th : list of DualPoint or weights
        Seed weights; each is re-solved as ``P1(w)``.
    eps : float
        Vertices with ``z <= eps`` are accepted.
    break_mode : bool
        Restart vertex enumeration after the first cut of a round.
    parallel : int
        Worker threads for the vertex LPs (no-break mode only).

    Returns
    -------
    PrimalDualSolution
    """
    tol = tol or DEFAULT_TOLERANCES
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    t_start = timer()
    stats = SolveStats()
    runner = RoundRunner(tol, 1 if break_mode else parallel)
    try:
        tbar = initial_dual_points(prob, seed_th, runner.main)
        warm = None
        sbar = []
        for _ in range(MAX_ROUNDS):
            stats.iterations += 1
            sbar = []
            try:
                outer = dual_from_outer(np.array([dp.image() for dp in tbar]), prob.c, tol.geom)
            except ContainsLine as exc:
                raise NoVertex(str(exc)) from exc
            vertices = list(outer.points)
            added = 0
            stalled = 0
            if break_mode:
                for t in vertices:
                    sol, res = solve_p2(prob, t, runner.main, warm)
                    warm = res.basis
                    if sol.z > eps + tol.accept:
                        if any(same_dual_point(sol.dual, o, 1e-9) for o in tbar):
                            stalled += 1
                            stats.duplicate_cuts += 1
                            continue
                        tbar.append(sol.dual)
                        added += 1
                        break
                    sbar.append(sol.x)
            else:
                results = runner.map(lambda t, s, b: solve_p2(prob, t, s, b), vertices, warm)
                for sol, res in results:
                    if sol.z > eps + tol.accept:
                        if any(same_dual_point(sol.dual, o, 1e-9) for o in tbar):
                            stalled += 1
                            stats.duplicate_cuts += 1
                            continue
                        tbar.append(sol.dual)
                        added += 1
                    else:
                        sbar.append(sol.x)
                if results:
                    warm = results[-1][1].basis
            if added == 0:
                if stalled:
                    raise NumericalFailure("cuts repeat existing halfspaces; no progress")
                break
        else:
            raise NumericalFailure("round cap reached")
        runner.collect(stats)
        sol = assemble(prob, sbar, list(seed_sh), tbar, eps, "primal", stats, tol.geom)
    finally:
        runner.close()
    stats.seconds = timer() - t_start
    return sol
