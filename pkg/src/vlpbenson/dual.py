"""Outer approximation of the lower image (dual algorithm).

The roles are mirrored: the inner approximation of the upper image,
``conv P[S] + cone(directions)``, is dualized into an outer approximation of
the lower image, and each of its vertices is tested with one weighted-sum
LP.
"""
from __future__ import annotations

import numpy as np

from .config import DEFAULT_TOLERANCES
from .duality import weight_from_dual
from .errors import NumericalFailure
from .polyhedral import dual_from_inner, dual_from_outer
from .scalarizations import solve_p1
from .solution import (
    RoundRunner, SolveStats, assemble, recession_generators, same_dual_point, timer,
)

MAX_ROUNDS = 10**6


def _seed_weight(seed):
    if hasattr(seed, "w"):
        return np.asarray(seed.w, float)
    if isinstance(seed, tuple):
        return np.asarray(seed[1], float)
    return np.asarray(seed, float)


def prune_nonvertices(prob, sbar, t_vrep, tol=1e-7):
    """Keep the ``x`` whose image is a vertex of ``t_vrep``."""
    if not sbar:
        return []
    V = t_vrep.points
    out = []
    for x in sbar:
        y = prob.P @ x
        if V.shape[0] and np.min(np.max(np.abs(V - y), axis=1)) <= tol * (1 + np.abs(y).max()):
            out.append(x)
    return out


def solve_dual(prob, seed_sh, seed_th, eps=0.0, break_mode=True, tol=None, parallel=1):
    """Run the dual algorithm from the given seeds.

    Arguments as for :func:`vlpbenson.primal.solve_primal`.  For
    ``eps > 0`` the non-vertex pruning of ``sbar`` is skipped and the result
    is only an eps-infimizer of the primal problem.
    """
    tol = tol or DEFAULT_TOLERANCES
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    t_start = timer()
    stats = SolveStats()
    runner = RoundRunner(tol, 1 if break_mode else parallel)
    c = prob.c
    try:
        weights = [_seed_weight(s) for s in seed_th]
        if not weights:
            raise ValueError("at least one seed weight is required")
        wbar = np.mean(weights, axis=0)
        wbar = wbar / (c @ wbar)
        x0, dp0, _ = solve_p1(prob, wbar, runner.main)
        if dp0 is None:
            raise NumericalFailure("mean seed weight gives an unbounded weighted-sum LP")
        sbar = [x0]
        dirs = recession_generators(prob, seed_sh)
        tbar = []
        warm = None

        def test(tstar, solver, basis):
            w = weight_from_dual(tstar, c)
            x, dp, res = solve_p1(prob, w, solver, basis)
            if dp is None:
                raise NumericalFailure("weighted-sum LP unbounded for a dual vertex")
            return x, dp, res

        for _ in range(MAX_ROUNDS):
            stats.iterations += 1
            tbar = []
            images = prob.objective_values(np.array(sbar))
            vertices = list(dual_from_inner(images, dirs, c, tol.geom))
            added = 0
            stalled = 0
            if break_mode:
                results = []
                for ts in vertices:
                    x, dp, res = test(ts, runner.main, warm)
                    warm = res.basis
                    results.append((ts, x, dp))
                    if ts[-1] - dp.offset > eps + tol.accept:
                        break
            else:
                out = runner.map(test, vertices, warm)
                if out:
                    warm = out[-1][2].basis
                results = [(ts, x, dp) for ts, (x, dp, _) in zip(vertices, out)]
            for ts, x, dp in results:
                if ts[-1] - dp.offset > eps + tol.accept:
                    y = prob.P @ x
                    if np.min(np.max(np.abs(images - y), axis=1)) <= 1e-9 * (1 + np.abs(y).max()):
                        stalled += 1
                        stats.duplicate_cuts += 1
                        continue
                    sbar.append(x)
                    images = np.vstack([images, y])
                    added += 1
                else:
                    if not any(same_dual_point(dp, o, 1e-9) for o in tbar):
                        tbar.append(dp)
            if added == 0:
                if stalled:
                    raise NumericalFailure("new minimizers repeat existing images; no progress")
                break
        else:
            raise NumericalFailure("round cap reached")
        if eps == 0:
            outer = dual_from_outer(np.array([dp.image() for dp in tbar]), c, tol.geom)
            sbar = prune_nonvertices(prob, sbar, outer)
        runner.collect(stats)
        sol = assemble(prob, sbar, list(seed_sh), tbar, eps, "dual", stats, tol.geom)
    finally:
        runner.close()
    stats.seconds = timer() - t_start
    return sol
