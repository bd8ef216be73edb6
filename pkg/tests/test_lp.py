import numpy as np
import pytest
import scipy.sparse as sp

from oracles import highs
from vlpbenson.errors import NumericalFailure
from vlpbenson.lp import LpSolver, LpStatus, StandardLp, dual_value, solve_lp


def test_one_row_lp():
    lp = StandardLp([1, 1], [[1, 1]], [1], None, [0, 0], None)
    res = solve_lp(lp)
    assert res.status is LpStatus.OPTIMAL
    assert res.value == pytest.approx(1.0)
    assert res.y[0] == pytest.approx(1.0)


def test_unbounded_ray():
    lp = StandardLp([-1], np.zeros((0, 1)), col_lo=[0])
    res = solve_lp(lp)
    assert res.status is LpStatus.UNBOUNDED
    assert res.ray[0] > 0


def test_infeasible_bounds():
    lp = StandardLp([0], np.zeros((0, 1)), col_lo=[1], col_up=[0])
    assert solve_lp(lp).status is LpStatus.INFEASIBLE


def test_maximize_and_sparse_input():
    A = sp.csr_matrix([[1.0, 2.0], [3.0, 1.0]])
    lp = StandardLp([1, 1], A, None, [4, 6], [0, 0], None, sense="max")
    res = solve_lp(lp)
    # vertex (8/5, 6/5)
    assert res.value == pytest.approx(2.8)
    assert res.x == pytest.approx([1.6, 1.2])
    assert dual_value(lp, res) == pytest.approx(2.8)


def test_price_signs():
    # upper row bound active in a min problem gives a nonpositive price
    lp = StandardLp([-1, -1], [[1, 1]], None, [2], [0, 0], None)
    res = solve_lp(lp)
    assert res.value == pytest.approx(-2)
    assert res.y[0] <= 1e-12


def test_equality_row():
    lp = StandardLp([1, 2], [[1, 1]], [3], [3], [0, 0], None)
    res = solve_lp(lp)
    assert res.value == pytest.approx(3)
    assert dual_value(lp, res) == pytest.approx(3)


def test_iteration_cap():
    A = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, 2.0]])
    lp = StandardLp([1, 2, 3], A, [1, -1], [5, 4], [0, 0, 0], None)
    with pytest.raises(NumericalFailure):
        LpSolver(iter_factor=0).solve(lp)


def test_log_records_solves():
    log = []
    s = LpSolver(log=log)
    lp = StandardLp([1], [[1]], [1], None)
    s.solve(lp)
    s.solve(lp)
    assert len(log) == 2 and s.lp_count == 2


def _random_lp(rng):
    m, n = rng.integers(1, 12), rng.integers(1, 10)
    A = rng.integers(-3, 4, (m, n)).astype(float)
    c = rng.integers(-3, 4, n).astype(float)
    x0 = rng.integers(-2, 3, n)
    s = A @ x0
    rl = np.where(rng.random(m) < 0.7, s - rng.integers(0, 3, m), -np.inf)
    ru = np.where(rng.random(m) < 0.4, s + rng.integers(0, 3, m), np.inf)
    if rng.random() < 0.3:
        rl = rl + 3
    cl = np.where(rng.random(n) < 0.6, x0 - rng.integers(0, 3, n), -np.inf)
    cu = np.where(rng.random(n) < 0.4, x0 + rng.integers(0, 3, n), np.inf)
    return StandardLp(c, A, rl, ru, cl, cu)


def _highs_status(lp):
    A, rl, ru = lp.A, lp.row_lo, lp.row_up
    Aub = np.vstack([A[np.isfinite(ru)], -A[np.isfinite(rl)]])
    bub = np.concatenate([ru[np.isfinite(ru)], -rl[np.isfinite(rl)]])
    bounds = [(a if np.isfinite(a) else None, b if np.isfinite(b) else None)
              for a, b in zip(lp.col_lo, lp.col_up)]
    h = highs(lp.c, A_ub=Aub if bub.size else None, b_ub=bub if bub.size else None, bounds=bounds)
    return {0: "Optimal", 2: "Infeasible", 3: "Unbounded"}.get(h.status), h.fun


def test_random_sweep_against_highs():
    rng = np.random.default_rng(1)
    for _ in range(400):
        lp = _random_lp(rng)
        res = solve_lp(lp)
        status, fun = _highs_status(lp)
        assert res.status.value == status
        if not res.optimal:
            continue
        assert res.value == pytest.approx(fun, abs=1e-7)
        # strong duality and feasibility
        assert abs(dual_value(lp, res) - res.value) <= 1e-7 * (1 + abs(res.value))
        Ax = lp.A @ res.x
        assert np.all(Ax >= lp.row_lo - 1e-7) and np.all(Ax <= lp.row_up + 1e-7)
        assert np.all(res.x >= lp.col_lo - 1e-7) and np.all(res.x <= lp.col_up + 1e-7)
        assert np.max(np.abs(lp.c - lp.A.T @ res.y - res.reduced)) <= 1e-7


def test_warm_start_agrees_with_cold():
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(300):
        lp = _random_lp(rng)
        r = solve_lp(lp)
        if not r.optimal:
            continue
        rl2 = lp.row_lo + rng.integers(-1, 2, lp.shape[0])
        lp2 = StandardLp(lp.c, lp.A, rl2, np.maximum(lp.row_up, rl2), lp.col_lo, lp.col_up)
        cold = solve_lp(lp2)
        warm = solve_lp(lp2, warm=r.basis)
        assert cold.status is warm.status
        if cold.optimal:
            checked += 1
            assert abs(cold.value - warm.value) <= 1e-8
    assert checked > 50
