"""Two-phase driver: boundedness handling, seeding, and status diagnosis.

Phase 1 solves the homogeneous problem truncated by ``eta^T P x <= 1`` for a
weight ``eta`` that is strictly positive on the recession cone of the upper
image.  Its solution provides the directions and the weights that seed the
actual solve in phase 2.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .config import DEFAULT_TOLERANCES, Tolerances
from .duality import weight_from_dual
from .dual import solve_dual
from .errors import (
    DualInfeasible, NumericalFailure, PrimalInfeasible, UpperImageContainsLines,
)
from .lp import LpStatus, StandardLp
from .primal import solve_primal
from .scalarizations import build_bounding_problem, cone_seed_weights, homogenize
from .solution import SolveStats, make_solver

ETA_ITERATIONS = 1000


class SolveStatus(enum.Enum):
    SOLVED = "Solved"
    PRIMAL_INFEASIBLE = "PrimalInfeasible"
    DUAL_INFEASIBLE = "DualInfeasible"
    LINES = "UpperImageContainsLines"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class SolveOptions:
    algorithm: str = "primal"
    eps: float = 0.0
    break_mode: bool = True
    assume_bounded: bool = False
    tolerances: Tolerances = field(default_factory=lambda: DEFAULT_TOLERANCES)
    parallel: int = 1

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")
        if self.algorithm not in ("primal", "dual"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")


def _price_bounds(lo, up):
    """Sign restrictions of prices for rows/columns with bounds ``lo``/``up``."""
    plo = np.where(np.isfinite(up), -np.inf, 0.0)
    pup = np.where(np.isfinite(lo), np.inf, 0.0)
    return plo, pup


def _dual_system(prob):
    """Rows ``B^T u + r - P^T eta = 0`` and ``c^T eta = 1`` in variables (eta, u, r)."""
    q, n, m = prob.q, prob.n, prob.m
    top = sp.hstack([
        sp.csr_matrix(-prob.P.T), prob.B.T.tocsr(), sp.identity(n, format="csr"),
    ])
    crow = sp.csr_matrix(np.concatenate([prob.c, np.zeros(m + n)])[None, :])
    A = sp.vstack([top, crow]).tocsr()
    rhs = np.concatenate([np.zeros(n), [1.0]])
    ulo, uup = _price_bounds(prob.a, prob.b)
    rlo, rup = _price_bounds(prob.lb, prob.ub)
    col_lo = np.concatenate([np.full(q, -np.inf), ulo, rlo])
    col_up = np.concatenate([np.full(q, np.inf), uup, rup])
    return A, rhs, col_lo, col_up


def find_eta(prob, tol=None, solver=None, stats=None):
    """A weight ``eta`` with ``c^T eta = 1`` strictly positive on the recession
    cone of the upper image.

    Raises DualInfeasible when no dual feasible weight exists and
    UpperImageContainsLines when no weight is strictly positive.
    """
    tol = tol or DEFAULT_TOLERANCES
    solver = solver or make_solver(tol)
    q, n, m = prob.q, prob.n, prob.m
    A, rhs, col_lo, col_up = _dual_system(prob)
    nv = A.shape[1]
    res = solver.solve(StandardLp(np.zeros(nv), A, rhs, rhs, col_lo, col_up))
    if res.status is LpStatus.INFEASIBLE:
        raise DualInfeasible("dual feasible set is empty")

    Y = prob.Y / np.abs(prob.Y).max(axis=0, keepdims=True)
    rays = []
    h = homogenize(prob)
    row_lo = h.a
    row_up = h.b
    box_lo = np.maximum(h.lb, -1.0)
    box_up = np.minimum(h.ub, 1.0)
    delta_tol = 1e-8
    for _ in range(ETA_ITERATIONS):
        # master: max delta over (eta, u, r, delta)
        cuts = [Y.T] + ([np.array(rays)] if rays else [])
        G = np.vstack(cuts)
        k = G.shape[0]
        M = sp.vstack([
            sp.hstack([A, sp.csr_matrix((A.shape[0], 1))]),
            sp.hstack([sp.csr_matrix(G), sp.csr_matrix((k, m + n)), sp.csr_matrix(-np.ones((k, 1)))]),
        ]).tocsr()
        lo = np.concatenate([rhs, np.zeros(k)])
        up = np.concatenate([rhs, np.full(k, np.inf)])
        cost = np.zeros(nv + 1)
        cost[-1] = 1.0
        mres = solver.solve(StandardLp(
            cost, M, lo, up, np.append(col_lo, -np.inf), np.append(col_up, 1.0), sense="max",
        ))
        if mres.status is not LpStatus.OPTIMAL:
            raise NumericalFailure("eta master LP failed: %s" % mres.status.value)
        delta = mres.x[-1]
        eta = mres.x[:q].copy()
        if delta <= delta_tol:
            raise UpperImageContainsLines("no weight is strictly positive on the recession cone")
        # oracle: x in the boxed recession cone of S with eta^T P x <= 0 and P x != 0
        ep = eta @ h.P
        Bx = sp.vstack([h.B, sp.csr_matrix(ep[None, :])]).tocsr()
        blo = np.append(row_lo, -np.inf)
        bup = np.append(row_up, 0.0)
        witness = None
        for i in range(q):
            for sgn in (1.0, -1.0):
                ores = solver.solve(StandardLp(sgn * h.P[i], Bx, blo, bup, box_lo, box_up, sense="max"))
                if ores.status is LpStatus.OPTIMAL and ores.value > 1e-7:
                    witness = ores.x
                    break
            if witness is not None:
                break
        if witness is None:
            if stats is not None:
                stats.absorb(solver)
            return eta / (prob.c @ eta)
        g = h.P @ witness
        rays.append(g / np.abs(g).max())
    raise NumericalFailure("eta search did not converge")


def phase_one(prob, eta, options=None):
    """Solve the truncated homogeneous problem; returns ``(seed_sh, seed_th, solution)``."""
    options = options or SolveOptions()
    tol = options.tolerances
    ph = build_bounding_problem(homogenize(prob), eta)
    seeds = cone_seed_weights(ph)
    run = solve_primal if options.algorithm == "primal" else solve_dual
    sol = run(ph, [], seeds, 0.0, options.break_mode, tol, options.parallel)
    seed_sh = [x for x in sol.sbar if np.abs(prob.P @ x).max() > 1e-9 * (1 + np.abs(x).max())]
    seed_th = []
    for ys in sol.dstar_vrep.points:
        if abs(ys[-1]) <= tol.eta_zero:
            w = weight_from_dual(ys, prob.c)
            if not any(np.max(np.abs(w - o)) <= 1e-9 for o in seed_th):
                seed_th.append(w)
    if not seed_th:
        raise NumericalFailure("phase one produced no seed weight")
    return seed_sh, seed_th, sol


def solve(prob, options=None):
    """Solve a vector problem; returns ``(SolveStatus, PrimalDualSolution or None)``.

    The solve's ``stats`` cover phase 2 only; phase 1 and the eta search are
    recorded in ``phase_one_stats``.
    """
    options = options or SolveOptions()
    tol = options.tolerances
    pre = SolveStats()
    try:
        if options.assume_bounded:
            seed_sh, seed_th = [], cone_seed_weights(prob)
            eta = None
        else:
            eta = find_eta(prob, tol, stats=pre)
            seed_sh, seed_th, p1 = phase_one(prob, eta, options)
            pre.merge(p1.stats)
        run = solve_primal if options.algorithm == "primal" else solve_dual
        sol = run(prob, seed_sh, seed_th, options.eps, options.break_mode, tol, options.parallel)
    except PrimalInfeasible:
        return SolveStatus.PRIMAL_INFEASIBLE, None
    except DualInfeasible:
        return SolveStatus.DUAL_INFEASIBLE, None
    except UpperImageContainsLines:
        return SolveStatus.LINES, None
    except NumericalFailure:
        return SolveStatus.NUMERICAL_FAILURE, None
    sol.eta = eta
    sol.phase_one_stats = pre
    return SolveStatus.SOLVED, sol
