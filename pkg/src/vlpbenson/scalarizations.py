"""The vector problem container and the scalar LPs built from it.

Two weighted-sum/translation scalarizations drive everything:

* ``P1(w)``: ``min w^T P x`` over the feasible set; its dual prices give a
  dual point ``(u, w)``.
* ``P2(t)``: ``min z`` subject to feasibility and ``Z^T P x <= Z^T t + z Z^T c``;
  the prices ``v`` of the cone rows give ``w = Z v`` so one LP yields both a
  boundary point of the upper image and a supporting halfspace.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .config import GEOM_TOL
from .errors import (
    ContainsLine, EmptySet, InvalidC, InvalidCone, NumericalFailure, PrimalInfeasible,
)
from .lp import LpSolver, LpStatus, StandardLp, active_bound_value
from .polyhedral import GeneratorRep, HalfspaceRep, h_to_v, v_to_h


def _col_matrix(a, q):
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return np.zeros((q, 0))
    return a.reshape(q, -1) if a.ndim == 1 else a


@dataclass
class MolpProblem:
    """``min P x`` w.r.t. ``C = cone(Y)`` s.t. ``a <= B x <= b``, ``lb <= x <= ub``.

    ``Y`` and ``Z`` hold generators of ``C`` and of its dual cone as columns.
    ``negated`` records that ``P`` and ``C`` were replaced by ``-P`` and
    ``-C`` to make ``c_q = 1`` possible.
    """

    B: sp.csr_matrix
    a: np.ndarray
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    P: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    c: np.ndarray
    negated: bool = False

    def __post_init__(self):
        self.P = np.atleast_2d(np.asarray(self.P, dtype=float))
        q, n = self.P.shape
        self.B = sp.csr_matrix(self.B, dtype=float) if self.B is not None else sp.csr_matrix((0, n))
        if self.B.shape[0] == 0:
            self.B = sp.csr_matrix((0, n))
        m = self.B.shape[0]
        self.a = _fill(self.a, m, -np.inf)
        self.b = _fill(self.b, m, np.inf)
        self.lb = _fill(self.lb, n, -np.inf)
        self.ub = _fill(self.ub, n, np.inf)
        self.Y = _col_matrix(self.Y, q)
        self.Z = _col_matrix(self.Z, q)
        self.c = np.asarray(self.c, dtype=float).reshape(-1)

    @property
    def q(self):
        return self.P.shape[0]

    @property
    def n(self):
        return self.P.shape[1]

    @property
    def m(self):
        return self.B.shape[0]

    def validate(self, tol=GEOM_TOL):
        """Raise InvalidCone / InvalidC when the cone data is unusable."""
        q = self.q
        if self.Y.shape[1] == 0 or self.Z.shape[1] == 0:
            raise InvalidCone("cone needs generators")
        if np.linalg.matrix_rank(self.Y, tol=1e-9) < q:
            raise InvalidCone("ordering cone is not solid")
        if np.linalg.matrix_rank(self.Z, tol=1e-9) < q:
            raise InvalidCone("ordering cone is not pointed")
        scale = max(1.0, np.abs(self.Y).max()) * max(1.0, np.abs(self.Z).max())
        if np.any(self.Z.T @ self.Y < -tol * scale * 10):
            raise InvalidCone("Y and Z are not dual to each other")
        if self.c.size != q:
            raise InvalidC("c has the wrong length")
        if abs(self.c[-1] - 1.0) > tol:
            raise InvalidC("last coordinate of c must be 1")
        if np.any(self.Z.T @ self.c <= tol):
            raise InvalidC("c is not interior to the ordering cone")
        return self

    def objective_values(self, xs):
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if xs.size == 0:
            return np.zeros((0, self.q))
        return xs @ self.P.T

    def feasibility_residual(self, x):
        x = np.asarray(x, dtype=float)
        r = self.B @ x if self.m else np.zeros(0)
        parts = [0.0]
        if self.m:
            parts.append(np.max(np.maximum(self.a - r, 0.0)))
            parts.append(np.max(np.maximum(r - self.b, 0.0)))
        parts.append(np.max(np.maximum(self.lb - x, 0.0)))
        parts.append(np.max(np.maximum(x - self.ub, 0.0)))
        return float(max(parts))


def _fill(v, size, default):
    if v is None:
        return np.full(size, default)
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.size != size:
        raise ValueError("bound vector has the wrong length")
    return arr


# ---------------------------------------------------------------------------
# the ordering cone
# ---------------------------------------------------------------------------

def dual_generators(Y, tol=GEOM_TOL):
    """Columns generating the dual cone of ``cone(Y)``."""
    Y = np.asarray(Y, dtype=float)
    q = Y.shape[0]
    try:
        h = v_to_h(GeneratorRep(np.zeros((1, q)), Y.T), tol)
    except (EmptySet, ContainsLine) as exc:
        raise InvalidCone(str(exc)) from exc
    if h.normals.shape[0] == 0:
        raise InvalidCone("cone is the whole space")
    return np.ascontiguousarray(h.normals.T)


def primal_generators(Z, tol=GEOM_TOL):
    """Columns generating ``{y : Z^T y >= 0}``."""
    Z = np.asarray(Z, dtype=float)
    q = Z.shape[0]
    try:
        v = h_to_v(HalfspaceRep(Z.T, np.zeros(Z.shape[1])), tol)
    except ContainsLine as exc:
        raise InvalidCone("cone is not pointed") from exc
    if v.directions.shape[0] == 0:
        raise InvalidCone("cone is {0}")
    return np.ascontiguousarray(v.directions.T)


def choose_c(Y, Z, tol=GEOM_TOL, solver=None):
    """Pick ``c`` interior to ``cone(Y)`` with ``c_q = +-1``; returns ``(c, negate)``.

    ``negate`` is True when ``c_q = -1``, in which case the caller replaces
    ``P`` and ``C`` by their negatives and uses ``-c``.
    """
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    s = Y.sum(axis=1)
    if s[-1] > tol:
        return s / s[-1], False
    if s[-1] < -tol:
        return s / -s[-1], True
    solver = solver or LpSolver()
    q = Y.shape[0]
    for sign in (1.0, -1.0):
        # find c with Z^T c >= 1 and c_q = sign
        A = Z.T
        lo = np.ones(A.shape[0])
        clo = np.full(q, -np.inf)
        cup = np.full(q, np.inf)
        clo[-1] = cup[-1] = sign
        res = solver.solve(StandardLp(np.zeros(q), A, lo, None, clo, cup))
        if res.status is LpStatus.OPTIMAL:
            c = res.x.copy()
            c[-1] = sign
            return c, sign < 0
    raise InvalidCone("ordering cone has no interior point")


def make_problem(B, a, b, lb, ub, P, Y=None, Z=None, c=None, tol=GEOM_TOL):
    """Assemble and validate a MolpProblem, filling in missing cone data.

    Without ``Y`` and ``Z`` the cone is the nonnegative orthant.  A missing
    ``c`` is chosen by :func:`choose_c`, negating the problem if required.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    q = P.shape[0]
    if Y is None and Z is None:
        Y = np.eye(q)
        Z = np.eye(q)
    elif Z is None:
        Y = _col_matrix(Y, q)
        Z = dual_generators(Y, tol)
    elif Y is None:
        Z = _col_matrix(Z, q)
        Y = primal_generators(Z, tol)
    Y = _col_matrix(Y, q)
    Z = _col_matrix(Z, q)
    negated = False
    if c is None:
        c, negated = choose_c(Y, Z, tol)
        if negated:
            P, Y, Z, c = -P, -Y, -Z, -c
    prob = MolpProblem(B, a, b, lb, ub, P, Y, Z, c, negated=negated)
    return prob.validate(tol)


# ---------------------------------------------------------------------------
# scalar LPs
# ---------------------------------------------------------------------------

@dataclass
class DualPoint:
    """A feasible point ``(u, w)`` of the dual vector problem.

    ``u`` prices the constraint rows and ``r`` the variable bounds, so that
    ``B^T u + r = P^T w``.  ``offset`` is the dual objective value, i.e. the
    last coordinate of the image point ``D*(u, w)``.
    """

    u: np.ndarray
    r: np.ndarray
    w: np.ndarray
    offset: float

    def image(self):
        out = self.w.copy()
        out[-1] = self.offset
        return out


def dual_offset(prob, u, r, tol=1e-9):
    """Dual objective ``a/b``-weighted row prices plus bound prices.

    Prices below ``tol`` in magnitude are treated as zero; a larger price on
    an infinite bound means the dual point is infeasible.
    """
    total = np.sum(active_bound_value(u, prob.a, prob.b, tol))
    total += np.sum(active_bound_value(r, prob.lb, prob.ub, tol))
    if not np.isfinite(total):
        raise NumericalFailure("dual price on an infinite bound")
    return float(total)


def build_p1(prob: MolpProblem, w) -> StandardLp:
    w = np.asarray(w, dtype=float)
    return StandardLp(prob.P.T @ w, prob.B, prob.a, prob.b, prob.lb, prob.ub)


def p1_dual_point(prob, lp, res, w):
    """Dual point of ``P1(w)`` from an optimal result."""
    u = res.y.copy()
    r = res.reduced.copy()
    return DualPoint(u, r, np.asarray(w, dtype=float).copy(), dual_offset(prob, u, r))


def build_p2(prob: MolpProblem, t) -> StandardLp:
    """Variables ``(x, z)``; rows ``a <= B x <= b`` then ``Z^T P x - Z^T c z <= Z^T t``."""
    t = np.asarray(t, dtype=float)
    n = prob.n
    ZP = prob.Z.T @ prob.P
    Zc = prob.Z.T @ prob.c
    top = sp.hstack([prob.B, sp.csr_matrix((prob.m, 1))])
    bottom = sp.csr_matrix(np.hstack([ZP, -Zc[:, None]]))
    A = sp.vstack([top, bottom]).tocsr()
    k = prob.Z.shape[1]
    row_lo = np.concatenate([prob.a, np.full(k, -np.inf)])
    row_up = np.concatenate([prob.b, prob.Z.T @ t])
    cost = np.zeros(n + 1)
    cost[-1] = 1.0
    col_lo = np.append(prob.lb, -np.inf)
    col_up = np.append(prob.ub, np.inf)
    return StandardLp(cost, A, row_lo, row_up, col_lo, col_up)


@dataclass
class P2Solution:
    x: np.ndarray
    z: float
    dual: DualPoint
    basis: object = None

    @property
    def w(self):
        return self.dual.w


def p2_solution(prob, lp, res, t):
    """Decode an optimal ``P2(t)`` result into ``(x, z, (u, w))``."""
    m = prob.m
    n = prob.n
    v = -res.y[m:]
    v = np.maximum(v, 0.0)
    w = prob.Z @ v
    cw = float(prob.c @ w)
    if cw <= 0:
        raise NumericalFailure("cone-row prices vanish")
    w = w / cw
    u = res.y[:m] / cw
    r = res.reduced[:n] / cw
    offset = dual_offset(prob, u, r)
    return P2Solution(res.x[:n].copy(), float(res.x[n]), DualPoint(u, r, w, offset), res.basis)


# ---------------------------------------------------------------------------
# problem transforms
# ---------------------------------------------------------------------------

def _homogeneous_bounds(lo, up):
    lo = np.where(np.isfinite(lo), 0.0, -np.inf)
    up = np.where(np.isfinite(up), 0.0, np.inf)
    return lo, up


def homogenize(prob: MolpProblem) -> MolpProblem:
    """Problem whose feasible set is the recession cone of the original one."""
    a, b = _homogeneous_bounds(prob.a, prob.b)
    lb, ub = _homogeneous_bounds(prob.lb, prob.ub)
    return replace(prob, a=a, b=b, lb=lb, ub=ub)


def build_bounding_problem(prob_h: MolpProblem, eta) -> MolpProblem:
    """Append the row ``eta^T P x <= 1``."""
    eta = np.asarray(eta, dtype=float)
    row = sp.csr_matrix((eta @ prob_h.P)[None, :])
    B = sp.vstack([prob_h.B, row]).tocsr()
    return replace(
        prob_h,
        B=B,
        a=np.append(prob_h.a, -np.inf),
        b=np.append(prob_h.b, 1.0),
    )


def cone_seed_weights(prob: MolpProblem):
    """Weights ``z / z^T c`` for the columns ``z`` of ``Z``."""
    Zc = prob.Z.T @ prob.c
    return [prob.Z[:, j] / Zc[j] for j in range(prob.Z.shape[1])]


def solve_p1(prob, w, solver, warm=None):
    """Solve ``P1(w)``; returns ``(x, DualPoint, result)``.

    Raises PrimalInfeasible when the feasible set is empty.  An unbounded LP
    is returned with ``x`` and dual point set to None.
    """
    lp = build_p1(prob, w)
    res = solver.solve(lp, warm)
    if res.status is LpStatus.INFEASIBLE:
        raise PrimalInfeasible("feasible set is empty")
    if res.status is LpStatus.UNBOUNDED:
        return None, None, res
    return res.x.copy(), p1_dual_point(prob, lp, res, w), res


def solve_p2(prob, t, solver, warm=None):
    lp = build_p2(prob, t)
    res = solver.solve(lp, warm)
    if res.status is LpStatus.INFEASIBLE:
        raise PrimalInfeasible("feasible set is empty")
    if res.status is LpStatus.UNBOUNDED:
        raise NumericalFailure("translation LP reported unbounded")
    return p2_solution(prob, lp, res, t), res
