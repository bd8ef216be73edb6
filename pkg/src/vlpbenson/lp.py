"""Scalar LP engine: revised simplex with bounded variables.

Problems are stated as::

    min/max  c^T x   s.t.  row_lo <= A x <= row_up,   col_lo <= x <= col_up

with any bound allowed to be infinite.  Each row gets a logical variable
``s = A x`` carrying the row bounds, so the working system is ``[A, -I] (x, s) = 0``
and every variable is simply bounded.  Infeasible starting bases are repaired
by minimizing the sum of infeasibilities (composite phase 1), which is what
makes warm starts from a previous optimal basis cheap: a changed right-hand
side only makes a few logicals infeasible.

Row prices ``y`` follow the usual sign convention for minimization: ``y_i >= 0``
when the lower row bound is active, ``y_i <= 0`` when the upper one is.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import NumericalFailure

AT_LO, AT_UP, AT_ZERO, BASIC = 0, 1, 2, 3


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


def _as_bounds(v, size, fill):
    if v is None:
        return np.full(size, fill, dtype=float)
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.size == 1 and size != 1:
        arr = np.full(size, float(arr[0]))
    return arr.copy()


@dataclass
class StandardLp:
    """An LP in two-sided row/column bound form."""

    c: np.ndarray
    A: object
    row_lo: np.ndarray = None
    row_up: np.ndarray = None
    col_lo: np.ndarray = None
    col_up: np.ndarray = None
    sense: str = "min"

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        if sp.issparse(self.A):
            self.A = sp.csr_matrix(self.A, dtype=float)
        else:
            self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
            if self.A.size == 0:
                self.A = self.A.reshape(-1, self.c.size)
        m, n = self.A.shape
        if n != self.c.size:
            raise ValueError(f"objective has {self.c.size} entries, matrix has {n} columns")
        self.row_lo = _as_bounds(self.row_lo, m, -np.inf)
        self.row_up = _as_bounds(self.row_up, m, np.inf)
        self.col_lo = _as_bounds(self.col_lo, n, -np.inf)
        self.col_up = _as_bounds(self.col_up, n, np.inf)
        if self.row_lo.size != m or self.row_up.size != m:
            raise ValueError("row bound length mismatch")
        if self.col_lo.size != n or self.col_up.size != n:
            raise ValueError("column bound length mismatch")
        if np.any(self.row_lo > self.row_up) or np.any(self.col_lo > self.col_up):
            # crossing bounds are legal input; they make the LP infeasible
            pass
        if self.sense not in ("min", "max"):
            raise ValueError(f"unknown sense {self.sense!r}")

    @property
    def shape(self):
        return self.A.shape

    def dense_matrix(self):
        return self.A.toarray() if sp.issparse(self.A) else self.A


@dataclass(frozen=True)
class Basis:
    """Opaque warm-start token: basic index set plus nonbasic bound states."""

    shape: tuple
    basic: tuple
    state: tuple


@dataclass
class LpResult:
    status: LpStatus
    x: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    reduced: Optional[np.ndarray] = None
    value: float = np.nan
    ray: Optional[np.ndarray] = None
    basis: Optional[Basis] = None
    iterations: int = 0
    seconds: float = 0.0

    @property
    def optimal(self):
        return self.status is LpStatus.OPTIMAL


@dataclass
class LpSolver:
    """A stateful simplex instance.

    Not thread-safe; give every thread its own instance.  ``log``, when set
    to a list, receives ``(lp, result, warm)`` for every solve.
    """

    feas_tol: float = 1e-9
    opt_tol: float = 1e-9
    pivot_tol: float = 1e-10
    iter_factor: int = 50
    log: Optional[list] = None
    lp_count: int = field(default=0, init=False)
    total_seconds: float = field(default=0.0, init=False)
    max_seconds: float = field(default=0.0, init=False)

    def solve(self, lp: StandardLp, warm: Optional[Basis] = None) -> LpResult:
        t0 = time.perf_counter()
        res = _Simplex(lp, self).run(warm)
        res.seconds = time.perf_counter() - t0
        self.lp_count += 1
        self.total_seconds += res.seconds
        self.max_seconds = max(self.max_seconds, res.seconds)
        if self.log is not None:
            self.log.append((lp, res, warm))
        return res


_default_solver = LpSolver()


def solve_lp(lp: StandardLp, warm: Optional[Basis] = None, solver: Optional[LpSolver] = None) -> LpResult:
    """Solve ``lp``, optionally starting from the basis of an earlier solve."""
    return (solver or _default_solver).solve(lp, warm)


class _Simplex:
    def __init__(self, lp: StandardLp, opts: LpSolver):
        self.lp = lp
        self.opts = opts
        m, n = lp.shape
        self.m, self.n = m, n
        A = lp.dense_matrix()
        self.M = np.hstack([A, -np.eye(m)]) if m else np.zeros((0, n))
        self.lo = np.concatenate([lp.col_lo, lp.row_lo])
        self.up = np.concatenate([lp.col_up, lp.row_up])
        sgn = 1.0 if lp.sense == "min" else -1.0
        self.sgn = sgn
        self.cost = np.concatenate([sgn * lp.c, np.zeros(m)])

    # -- basis bookkeeping -------------------------------------------------
    def _default_state(self, j):
        lo, up = self.lo[j], self.up[j]
        if np.isfinite(lo):
            return AT_LO
        if np.isfinite(up):
            return AT_UP
        return AT_ZERO

    def _repair_state(self, j, s):
        lo, up = self.lo[j], self.up[j]
        if s == AT_LO and np.isfinite(lo):
            return AT_LO
        if s == AT_UP and np.isfinite(up):
            return AT_UP
        if s == AT_ZERO and not np.isfinite(lo) and not np.isfinite(up):
            return AT_ZERO
        return self._default_state(j)

    def _cold(self):
        basic = list(range(self.n, self.n + self.m))
        state = [self._default_state(j) for j in range(self.n)] + [BASIC] * self.m
        return basic, state

    def _factor(self, basic):
        if self.m == 0:
            return None
        B = self.M[:, basic]
        lu, piv = scipy.linalg.lu_factor(B, check_finite=False)
        diag = np.abs(np.diag(lu))
        if diag.min() <= 1e-13 * max(1.0, diag.max()):
            return None
        return lu, piv

    def _nonbasic_values(self, state):
        x = np.zeros(self.n + self.m)
        st = np.asarray(state)
        lo_mask = st == AT_LO
        up_mask = st == AT_UP
        x[lo_mask] = self.lo[lo_mask]
        x[up_mask] = self.up[up_mask]
        return x

    # -- main loop ---------------------------------------------------------
    def run(self, warm):
        m, n = self.m, self.n
        N = n + m
        if np.any(self.lo > self.up + self.opts.feas_tol):
            return LpResult(LpStatus.INFEASIBLE)
        basic, state = None, None
        fac = None
        if warm is not None:
            if tuple(warm.shape) != (m, n):
                raise ValueError("basis token does not match the LP shape")
            basic = list(warm.basic)
            state = [BASIC if j in set(basic) else self._repair_state(j, s) for j, s in enumerate(warm.state)]
            fac = self._factor(basic)
            if fac is None and m:
                basic = None
        if basic is None:
            basic, state = self._cold()
            fac = self._factor(basic)

        feas, opt, piv_tol = self.opts.feas_tol, self.opts.opt_tol, self.opts.pivot_tol
        cap = self.opts.iter_factor * max(1, m + n)
        degenerate_run = 0
        bland = False
        it = 0
        while True:
            if it > cap:
                raise NumericalFailure(f"simplex exceeded {cap} iterations")
            if m and fac is None:
                raise NumericalFailure("singular basis")
            x = self._nonbasic_values(state)
            nb_mask = np.asarray(state) != BASIC
            if m:
                rhs = -(self.M[:, nb_mask] @ x[nb_mask])
                xB = scipy.linalg.lu_solve(fac, rhs, check_finite=False)
                x[basic] = xB
            else:
                xB = np.zeros(0)
            loB, upB = self.lo[basic], self.up[basic]
            below = xB < loB - feas
            above = xB > upB + feas
            phase1 = bool(np.any(below) or np.any(above))
            if phase1:
                cB = np.where(below, -1.0, np.where(above, 1.0, 0.0))
                cvec = np.zeros(N)
            else:
                cB = self.cost[basic]
                cvec = self.cost
            y = scipy.linalg.lu_solve(fac, cB, trans=1, check_finite=False) if m else np.zeros(0)
            d = cvec - self.M.T @ y if m else cvec.copy()

            st = np.asarray(state)
            movable = self.lo < self.up
            inc = (st == AT_LO) & movable & (d < -opt)
            dec = (st == AT_UP) & movable & (d > opt)
            free = (st == AT_ZERO) & (np.abs(d) > opt)
            cand = inc | dec | free
            if not np.any(cand):
                if phase1:
                    return LpResult(LpStatus.INFEASIBLE, iterations=it, y=y,
                                    basis=Basis((m, n), tuple(basic), tuple(state)))
                return self._finish(x, basic, state, fac, it)
            idx = np.flatnonzero(cand)
            if bland:
                q = int(idx[0])
            else:
                q = int(idx[np.argmax(np.abs(d[idx]))])
            direction = 1.0 if (inc[q] or (free[q] and d[q] < 0)) else -1.0

            alpha = scipy.linalg.lu_solve(fac, self.M[:, q], check_finite=False) if m else np.zeros(0)
            rate = -direction * alpha
            # Harris two-pass ratio test with per-variable breakpoint limits
            lim = np.full(m, np.inf)
            pos = rate > piv_tol
            neg = rate < -piv_tol
            if phase1:
                up_lim = np.where(below, loB, np.where(above, np.inf, upB))
                lo_lim = np.where(above, upB, np.where(below, -np.inf, loB))
            else:
                up_lim, lo_lim = upB, loB
            with np.errstate(invalid="ignore", divide="ignore"):
                relaxed = np.full(m, np.inf)
                relaxed[pos] = (up_lim[pos] + feas - xB[pos]) / rate[pos]
                relaxed[neg] = (lo_lim[neg] - feas - xB[neg]) / rate[neg]
                lim[pos] = (up_lim[pos] - xB[pos]) / rate[pos]
                lim[neg] = (lo_lim[neg] - xB[neg]) / rate[neg]
            relaxed = np.where(np.isnan(relaxed), np.inf, relaxed)
            lim = np.where(np.isnan(lim), np.inf, lim)
            theta_max = relaxed.min() if m else np.inf
            flip = self.up[q] - self.lo[q]
            leave = -1
            if np.isfinite(theta_max):
                ok = np.flatnonzero(lim <= theta_max)
                if ok.size:
                    if bland:
                        # smallest variable index among ties keeps cycling away
                        leave = int(ok[np.argmin(np.asarray(basic)[ok])])
                    else:
                        leave = int(ok[np.argmax(np.abs(alpha[ok]))])
            theta = max(0.0, lim[leave]) if leave >= 0 else np.inf
            if np.isfinite(flip) and flip <= theta:
                theta = flip
                leave = -1
            if not np.isfinite(theta):
                if phase1:
                    raise NumericalFailure("unbounded phase 1 direction")
                ray = np.zeros(N)
                ray[q] = direction
                ray[basic] = rate
                ray = ray[:n]
                nrm = np.abs(ray).max()
                if nrm > 0:
                    ray = ray / nrm
                return LpResult(LpStatus.UNBOUNDED, x=x[:n], ray=ray, iterations=it,
                                basis=Basis((m, n), tuple(basic), tuple(state)))

            if theta <= 1e-12:
                degenerate_run += 1
                if degenerate_run > 20:
                    bland = True
            else:
                degenerate_run = 0
                bland = False

            if leave < 0:
                state[q] = AT_UP if direction > 0 else AT_LO
            else:
                r = basic[leave]
                hit_up = rate[leave] > 0
                target = up_lim[leave] if hit_up else lo_lim[leave]
                if np.isfinite(self.lo[r]) and target == self.lo[r]:
                    state[r] = AT_LO
                elif np.isfinite(self.up[r]) and target == self.up[r]:
                    state[r] = AT_UP
                else:
                    state[r] = self._default_state(r)
                basic[leave] = q
                state[q] = BASIC
                fac = self._factor(basic)
            it += 1

    def _finish(self, x, basic, state, fac, it):
        m, n = self.m, self.n
        cB = self.cost[basic]
        y = scipy.linalg.lu_solve(fac, cB, trans=1, check_finite=False) if m else np.zeros(0)
        d = self.cost[:n] - (self.M[:, :n].T @ y if m else 0.0)
        xs = x[:n].copy()
        value = float(self.lp.c @ xs)
        return LpResult(
            LpStatus.OPTIMAL,
            x=xs,
            y=self.sgn * y,
            reduced=self.sgn * d,
            value=value,
            basis=Basis((m, n), tuple(basic), tuple(state)),
            iterations=it,
        )


def active_bound_value(price, lo, up, tol=0.0):
    """Dual objective contribution of prices against the bound they price.

    A positive price pairs with the lower bound, a negative one with the
    upper bound.  Near-zero prices on infinite bounds contribute nothing.
    """
    price = np.asarray(price, dtype=float)
    lo = np.asarray(lo, dtype=float)
    up = np.asarray(up, dtype=float)
    out = np.zeros_like(price)
    pos = price > tol
    neg = price < -tol
    with np.errstate(invalid="ignore"):
        out[pos] = price[pos] * lo[pos]
        out[neg] = price[neg] * up[neg]
    out[~np.isfinite(out)] = np.nan
    return out


def dual_value(lp: StandardLp, res: LpResult, tol=1e-12) -> float:
    """Dual objective of an optimal result, in the LP's own sense."""
    sgn = 1.0 if lp.sense == "min" else -1.0
    parts = np.concatenate([
        active_bound_value(sgn * res.y, lp.row_lo, lp.row_up, tol),
        active_bound_value(sgn * res.reduced, lp.col_lo, lp.col_up, tol),
    ])
    return sgn * float(np.sum(parts))
