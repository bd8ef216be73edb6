"""Result container shared by the primal and the dual algorithm."""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import ContainsLine, NoVertex
from .lp import LpSolver
from .polyhedral import GeneratorRep, dual_from_inner, dual_from_outer, minimize_vrep


@dataclass
class SolveStats:
    iterations: int = 0
    lp_count: int = 0
    lp_seconds: float = 0.0
    lp_max_seconds: float = 0.0
    seconds: float = 0.0
    duplicate_cuts: int = 0

    @property
    def lp_avg_seconds(self):
        return self.lp_seconds / self.lp_count if self.lp_count else 0.0

    def absorb(self, solver: LpSolver):
        self.lp_count += solver.lp_count
        self.lp_seconds += solver.total_seconds
        self.lp_max_seconds = max(self.lp_max_seconds, solver.max_seconds)
        solver.lp_count = 0
        solver.total_seconds = 0.0
        solver.max_seconds = 0.0

    def merge(self, other):
        self.iterations += other.iterations
        self.lp_count += other.lp_count
        self.lp_seconds += other.lp_seconds
        self.lp_max_seconds = max(self.lp_max_seconds, other.lp_max_seconds)
        self.duplicate_cuts += other.duplicate_cuts


@dataclass
class PrimalDualSolution:
    """Output of one run of either outer approximation algorithm.

    ``p_vrep`` is the upper image recovered from the dual points ``tbar``,
    ``dstar_vrep`` the lower image recovered from ``sbar``/``sbar_h`` (its
    implicit direction ``-e^q`` is not stored).  For ``epsilon > 0`` the two
    are an outer and an inner approximation respectively.
    """

    problem: object
    sbar: list
    sbar_h: list
    tbar: list
    p_vrep: GeneratorRep
    dstar_vrep: GeneratorRep
    inner_vrep: GeneratorRep
    epsilon: float
    algorithm: str
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def solution_of_primal(self):
        """Whether ``sbar`` is certified as an (eps-)solution of the primal problem.

        The dual algorithm with ``epsilon > 0`` only certifies an
        eps-infimizer.
        """
        return self.algorithm == "primal" or self.epsilon == 0


def direction_images(prob, sbar_h):
    if not sbar_h:
        return np.zeros((0, prob.q))
    d = np.array(sbar_h) @ prob.P.T
    keep = np.abs(d).max(axis=1) > 1e-12
    return d[keep]


def recession_generators(prob, sbar_h):
    return np.vstack([direction_images(prob, sbar_h), prob.Y.T])


def assemble(prob, sbar, sbar_h, tbar, eps, algorithm, stats, tol):
    c = prob.c
    pts = [dp.image() for dp in tbar]
    try:
        p_vrep = dual_from_outer(np.array(pts), c, tol)
    except ContainsLine as exc:
        raise NoVertex(str(exc)) from exc
    images = prob.objective_values(np.array(sbar))
    dirs = recession_generators(prob, sbar_h)
    inner = minimize_vrep(GeneratorRep(images, dirs), tol)
    dstar = GeneratorRep(dual_from_inner(images, dirs, c, tol), np.zeros((0, prob.q)), minimal=True)
    return PrimalDualSolution(
        prob, list(sbar), list(sbar_h), list(tbar), p_vrep, dstar, inner, eps, algorithm, stats
    )


def same_dual_point(a, b, tol):
    return (
        np.max(np.abs(a.w - b.w)) <= tol * (1 + np.max(np.abs(a.w)))
        and abs(a.offset - b.offset) <= tol * (1 + abs(a.offset))
    )


def make_solver(tol):
    tol = tol or DEFAULT_TOLERANCES
    return LpSolver(tol.lp_feas, tol.lp_opt, tol.lp_pivot)


class RoundRunner:
    """Evaluates one LP per vertex, sequentially or on a thread pool.

    In parallel mode every vertex LP of a round starts from the same warm
    basis, and results are consumed in vertex order, so the outcome does not
    depend on thread scheduling.
    """

    def __init__(self, tol, parallel=1):
        self.tol = tol
        self.parallel = max(1, int(parallel or 1))
        self._solvers = [make_solver(tol) for _ in range(self.parallel)]
        self._pool = ThreadPoolExecutor(self.parallel) if self.parallel > 1 else None

    @property
    def main(self):
        return self._solvers[0]

    def map(self, fn, items, warm):
        if self._pool is None:
            return [fn(item, self.main, warm) for item in items]
        chunks = [items[i:: self.parallel] for i in range(self.parallel)]

        def work(k):
            return [fn(item, self._solvers[k], warm) for item in chunks[k]]

        parts = list(self._pool.map(work, range(self.parallel)))
        out = [None] * len(items)
        for k, part in enumerate(parts):
            for j, r in enumerate(part):
                out[k + j * self.parallel] = r
        return out

    def collect(self, stats):
        for s in self._solvers:
            stats.absorb(s)

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()


def timer():
    return time.perf_counter()
