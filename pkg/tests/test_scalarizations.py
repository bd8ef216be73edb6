import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import instance_a, instance_b
from corpus import random_instance
from oracles import translation_value
from vlpbenson.errors import InvalidC, InvalidCone, PrimalInfeasible
from vlpbenson.lp import LpSolver
from vlpbenson.scalarizations import (
    build_bounding_problem, build_p1, choose_c, cone_seed_weights, dual_generators, homogenize,
    make_problem, primal_generators, solve_p1, solve_p2,
)


def solver():
    return LpSolver()


def test_make_problem_defaults(inst_a):
    assert inst_a.c == pytest.approx([1, 1])
    assert np.allclose(inst_a.Y, np.eye(2))
    inst_a.validate()


def test_non_pointed_cone_rejected():
    with pytest.raises(InvalidCone):
        make_problem(None, None, None, None, None, np.eye(2), Y=[[1, -1], [0, 0]])


def test_bad_c_rejected():
    with pytest.raises(InvalidC):
        make_problem(None, None, None, None, None, np.eye(2), c=[1, -1])


def test_cone_negated_when_needed():
    # every element of C has a negative last coordinate
    Y = np.array([[1.0, 0.0], [-1.0, -1.0]])
    prob = make_problem(None, None, None, [0, 0], [1, 1], np.eye(2), Y=Y)
    assert prob.negated
    assert prob.c[-1] == pytest.approx(1.0)
    prob.validate()


def test_dual_generators_consistent():
    rng = np.random.default_rng(0)
    Y = np.array([[1.0, 2.0, 0.5], [0.0, 1.0, 2.0], [1.0, 1.0, 1.0]])
    Z = dual_generators(Y)
    assert np.all(Z.T @ Y >= -1e-9)
    Y2 = primal_generators(Z)
    # cone(Z) is the dual of cone(Y): random probes agree
    for _ in range(50):
        y = rng.normal(size=3)
        in_dual = np.all(Y.T @ y >= -1e-12)
        assert in_dual == np.all(Y2.T @ y >= -1e-12) or abs(np.min(Y.T @ y)) < 1e-6
    c, neg = choose_c(Y, Z)
    assert not neg and np.all(Z.T @ c > 0)


def test_p1_examples(inst_a):
    x, dp, res = solve_p1(inst_a, [0.5, 0.5], solver())
    assert res.value == pytest.approx(0.5)
    assert dp.offset == pytest.approx(0.5)
    x, dp, res = solve_p1(inst_a, [1, 0], solver())
    assert res.value == pytest.approx(0.0)
    h = homogenize(inst_a)
    for w in ([0.5, 0.5], [0.2, 0.8]):
        _, _, res = solve_p1(h, w, solver())
        assert res.value == pytest.approx(0.0)


def test_p1_dual_reconstructs_weight(inst_a):
    lp = build_p1(inst_a, [0.3, 0.7])
    x, dp, _ = solve_p1(inst_a, [0.3, 0.7], solver())
    lhs = inst_a.B.T @ dp.u + dp.r
    assert lhs == pytest.approx(inst_a.P.T @ dp.w)
    assert lp.shape == (3, 2)


@pytest.mark.parametrize("t, zbar", [((0, 0), 0.5), ((1, 0), 0.0), ((2, 2), -1.5)])
def test_p2_examples(inst_a, t, zbar):
    sol, _ = solve_p2(inst_a, t, solver())
    assert sol.z == pytest.approx(zbar)
    assert translation_value(inst_a, np.array(t, float)) == pytest.approx(zbar)
    s = np.asarray(t, float) + sol.z * inst_a.c
    assert sol.w @ s == pytest.approx(sol.dual.offset)
    assert inst_a.c @ sol.w == pytest.approx(1.0)
    if t == (0, 0):
        assert s == pytest.approx([0.5, 0.5])
        assert sol.w == pytest.approx([0.5, 0.5])


def test_p2_infeasible():
    prob = make_problem([[0, 0]], [1], None, None, None, np.eye(2))
    with pytest.raises(PrimalInfeasible):
        solve_p2(prob, [0, 0], solver())


def test_homogenize_examples(inst_a):
    h = homogenize(inst_a)
    assert h.a == pytest.approx([0, 0, 0])
    two_sided = make_problem([[1, 1]], [1], [2], [0, 0], [5, np.inf], np.eye(2))
    h = homogenize(two_sided)
    assert h.a[0] == 0 and h.b[0] == 0
    assert list(h.lb) == [0, 0] and list(h.ub) == [0, np.inf]
    hh = homogenize(h)
    for f in ("a", "b", "lb", "ub"):
        assert np.array_equal(getattr(h, f), getattr(hh, f))


def test_bounding_problem_examples(inst_b, inst_a):
    pb = build_bounding_problem(homogenize(inst_b), [0.75, 0.25])
    assert pb.B.toarray()[-1] == pytest.approx([0.5])
    assert pb.b[-1] == 1.0 and pb.a[-1] == -np.inf
    pa = build_bounding_problem(homogenize(inst_a), [0.5, 0.5])
    assert pa.B.toarray()[-1] == pytest.approx([0.5, 0.5])


def test_cone_seed_weights(inst_a):
    ws = cone_seed_weights(inst_a)
    assert all(inst_a.c @ w == pytest.approx(1.0) for w in ws)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([1, 2, 3, 4, 6, 7, 8, 9, 10, 11]), st.integers(0, 1000))
def test_p2_support_property(seed, tseed):
    prob = random_instance(seed)
    t = np.random.default_rng(tseed).uniform(-3, 3, size=prob.q)
    sol, _ = solve_p2(prob, t, solver())
    s = t + sol.z * prob.c
    assert abs(sol.w @ s - sol.dual.offset) <= 1e-7 * (1 + abs(sol.dual.offset))
    assert np.all(prob.Y.T @ sol.w >= -1e-9)
    assert prob.c @ sol.w == pytest.approx(1.0)
    # the supporting point lies in the upper image
    again, _ = solve_p2(prob, s, solver())
    assert again.z <= 1e-7
    assert sol.z == pytest.approx(translation_value(prob, t), abs=1e-7)
