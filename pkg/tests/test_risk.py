import numpy as np
import pytest

from oracles import hausdorff, highs
from vlpbenson.errors import InvalidAlpha, ParseError
from vlpbenson.polyhedral import GeneratorRep, contains
from vlpbenson.risk import (
    ScenarioMarket, build_avar, build_rwc, ordering_cone, parse_market, scalar_avar_oracle,
    solvency_generators,
)
from vlpbenson.twophase import SolveOptions, SolveStatus, solve


def small_market(d=2, m=2, N=3, seed=0):
    rng = np.random.default_rng(seed)
    s0 = np.concatenate([[1.0], rng.uniform(1, 3, d - 1)])
    sT = s0 * np.exp(rng.normal(0, 0.2, size=(N, d)))
    # one scenario up and one down: a martingale measure exists, so no arbitrage
    sT[0] = 1.3 * s0
    sT[1] = 0.7 * s0
    sT[:, 0] = 1.0
    lam = np.concatenate([[0.0], np.full(d - 1, 0.05)])
    p = rng.dirichlet(np.ones(N))
    X = rng.normal(0, 1, size=(N, d))
    return ScenarioMarket.from_mid(p, s0, sT, lam, m), X


def upper_image(prob):
    status, sol = solve(prob)
    assert status is SolveStatus.SOLVED
    return sol


def test_generator_counts_and_example():
    bid = np.full(12, 1.0)
    ask = np.full(12, 1.1)
    assert solvency_generators(bid, ask).shape == (12, 132)
    G = solvency_generators([1, 1], [1, 3])
    assert hausdorff(G.T, [[3, -1], [-1, 1]]) <= 1e-12


def test_round_trip_gives_unit_vectors():
    G = solvency_generators([1, 1], [1, 3])
    assert G[:, 0] + G[:, 1] == pytest.approx([2, 0])
    rng = np.random.default_rng(2)
    mid = rng.uniform(1, 5, 4)
    G = solvency_generators(0.95 * mid, 1.05 * mid)
    cone = GeneratorRep(np.zeros((1, 4)), G.T)
    for e in np.eye(4):
        assert contains(cone, e, 1e-9)


def test_frictionless_pair_gets_disposal():
    G = solvency_generators([1, 2], [1, 2])
    assert G.shape == (2, 4)
    assert solvency_generators([1], [1]).shape == (1, 1)


def test_avar_scalar_example():
    mk = ScenarioMarket([0.5, 0.5], [1], [1], [[1], [1]], [[1], [1]], 1)
    prob = build_avar(mk, [[-1], [3]], 0.5)
    sol = upper_image(prob)
    assert sol.p_vrep.points.ravel() == pytest.approx([1.0])
    assert scalar_avar_oracle([0.5, 0.5], [-1, 3], 0.5) == pytest.approx(1.0)


def test_scalar_oracle_special_cases():
    p = np.array([0.2, 0.3, 0.5])
    x = np.array([1.0, -2.0, 4.0])
    assert scalar_avar_oracle(p, x, 1.0) == pytest.approx(-(p @ x))
    assert scalar_avar_oracle(p, np.full(3, 2.5), 0.1) == pytest.approx(-2.5)
    with pytest.raises(InvalidAlpha):
        scalar_avar_oracle(p, x, 0.0)
    mk, X = small_market()
    with pytest.raises(InvalidAlpha):
        build_avar(mk, X, 1.5)


def test_avar_of_cash_position():
    # d = m = 1 without costs: R(u) = [-u, inf)
    mk = ScenarioMarket([0.25, 0.5, 0.25], [1], [1], [[1], [1], [1]], [[1], [1], [1]], 1)
    for u in (0.7, -0.4):
        sol = upper_image(build_avar(mk, np.full((3, 1), u), 0.3))
        assert sol.p_vrep.points.ravel() == pytest.approx([-u])


@pytest.mark.parametrize("builder", ["avar", "rwc"])
def test_translativity(builder):
    mk, X = small_market(d=3, m=2, seed=4)
    rng = np.random.default_rng(5)

    def build(Xs):
        if builder == "avar":
            return build_avar(mk, Xs, [0.2, 0.3, 0.4])
        return build_rwc(mk, Xs, [0.1, 0.1, 0.1], [0.3, 0.3, 0.3])

    base = upper_image(build(X)).p_vrep.points
    for _ in range(3):
        u = np.concatenate([rng.normal(size=2), [0.0]])
        shifted = upper_image(build(X + u)).p_vrep.points
        assert hausdorff(shifted, base - u[:2]) <= 1e-6


def _rwc_oracle_lp(mk, X, eps, G_blocks, weight):
    """min weight^T u over the relaxed worst case set, written out per scenario."""
    d, N, m = mk.d, mk.N, mk.m
    K0 = solvency_generators(mk.bid0, mk.ask0)
    KT = [solvency_generators(mk.bidT[n], mk.askT[n]) for n in range(N)]
    # variables: u (m), r, then per scenario s_n, gamma_n
    sizes = [m, K0.shape[1]] + [k.shape[1] for k in KT] + [g.shape[1] for g in G_blocks]
    offs = np.cumsum([0] + sizes)
    nv = offs[-1]
    E = np.eye(d)[:, :m]
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for n in range(N):
        # position after trading: X_n + E u - K0 r - KT_n s_n
        M = np.zeros((d, nv))
        M[:, offs[0]:offs[1]] = E
        M[:, offs[1]:offs[2]] = -K0
        M[:, offs[2 + n]:offs[3 + n]] = -KT[n]
        # >= -eps
        A_ub.append(-M)
        b_ub.append(X[n] + eps)
        # = G_n gamma_n
        Me = M.copy()
        Me[:, offs[2 + N + n]:offs[3 + N + n]] = -G_blocks[n]
        A_eq.append(Me)
        b_eq.append(-X[n])
    cost = np.zeros(nv)
    cost[:m] = weight
    bounds = [(None, None)] * m + [(0, None)] * (nv - m)
    return highs(cost, np.vstack(A_ub), np.concatenate(b_ub), np.vstack(A_eq), np.concatenate(b_eq), bounds)


def test_rwc_support_matches_direct_oracle():
    mk, X = small_market(d=3, m=2, N=4, seed=8)
    eps = np.array([0.2, 0.1, 0.3])
    wl = np.array([0.25, 0.3, 0.35])
    mid = 0.5 * (mk.bid0 + mk.ask0)
    G = [solvency_generators((1 - wl) * mid, (1 + wl) * mid)] * mk.N
    sol = upper_image(build_rwc(mk, X, eps, wl))
    assert len(sol.tbar) >= 2
    for dp in sol.tbar:
        res = _rwc_oracle_lp(mk, X, eps, G, dp.w)
        assert res.status == 0
        assert res.fun == pytest.approx(dp.offset, abs=1e-6)


def test_rwc_zero_eps_inside_superhedging():
    mk, X = small_market(d=2, m=2, N=3, seed=1)
    sol = upper_image(build_rwc(mk, X, [0, 0], [0.2, 0.25]))
    K0 = solvency_generators(mk.bid0, mk.ask0)
    KT = [solvency_generators(mk.bidT[n], mk.askT[n]) for n in range(mk.N)]
    for v in sol.p_vrep.points:
        # feasibility of X_n + v - K0 r - KT_n s_n >= 0
        nv = K0.shape[1] + sum(k.shape[1] for k in KT)
        rows, rhs = [], []
        col = K0.shape[1]
        for n in range(mk.N):
            M = np.zeros((2, nv))
            M[:, :K0.shape[1]] = K0
            M[:, col:col + KT[n].shape[1]] = KT[n]
            col += KT[n].shape[1]
            rows.append(M)
            rhs.append(X[n] + v)
        res = highs(np.zeros(nv), np.vstack(rows), np.concatenate(rhs), bounds=[(0, None)] * nv)
        assert res.status == 0


def test_rwc_monotone_in_eps():
    mk, X = small_market(d=2, m=2, N=3, seed=1)
    small = upper_image(build_rwc(mk, X, [0.0, 0.0], [0.2, 0.25]))
    large = upper_image(build_rwc(mk, X, [0.3, 0.2], [0.2, 0.25]))
    rep = GeneratorRep(large.p_vrep.points, large.p_vrep.directions)
    for v in small.p_vrep.points:
        assert contains(rep, v, 1e-7)


def test_avar_market_monotone():
    # smaller time-T spreads mean a larger solvency cone, which can only enlarge the risk set
    mk, X = small_market(d=2, m=2, N=3, seed=3)
    mid = 0.5 * (mk.bidT + mk.askT)
    lam = np.array([0.0, 0.01])
    tight = ScenarioMarket(mk.probs, mk.bid0, mk.ask0, (1 - lam) * mid, (1 + lam) * mid, 2)
    # alpha small enough that a price system with density <= 1/alpha exists
    base = upper_image(build_avar(mk, X, [0.1, 0.1]))
    larger = upper_image(build_avar(tight, X, [0.1, 0.1]))
    rep = GeneratorRep(larger.p_vrep.points, larger.p_vrep.directions)
    for v in base.p_vrep.points:
        assert contains(rep, v, 1e-7)


def test_minimal_cone_same_image():
    mk, X = small_market(d=3, m=2, N=3, seed=6)
    a = upper_image(build_avar(mk, X, [0.3, 0.3, 0.3])).p_vrep.points
    b = upper_image(build_avar(mk, X, [0.3, 0.3, 0.3], minimal_cone=True)).p_vrep.points
    assert hausdorff(a, b) <= 1e-7


def test_rwc_cost_checks():
    mk, X = small_market()
    with pytest.raises(ValueError):
        build_rwc(mk, X, [-1, 0], [0.3, 0.3])
    with pytest.raises(ValueError):
        build_rwc(mk, X, [0, 0], [0.0, 0.0])


MARKET = """\
market 2 2 1
prob 1 0.4
prob 2 0.6
s0 1 2
lambda 0 0.1
sT 1 1 2.5
sT 2 1 1.5
payoff 1 1 -1
payoff 2 -0.5 1
alpha 0.5 0.5
rwc_eps 0.1 0.1
rwc_lambda 0.2 0.2
"""


def test_parse_market():
    spec = parse_market(MARKET)
    mk = spec.market
    assert (mk.d, mk.N, mk.m) == (2, 2, 1)
    assert mk.ask0 == pytest.approx([1, 2.2])
    assert spec.payoff.shape == (2, 2)
    assert spec.rwc_lambda == pytest.approx([0.2, 0.2])


@pytest.mark.parametrize("edit", [
    lambda t: t.replace("prob 2 0.6\n", ""),
    lambda t: t.replace("market 2 2 1", "market 2 2"),
    lambda t: t.replace("payoff 2 -0.5 1", "payoff 2 -0.5"),
    lambda t: t.replace("s0 1 2\n", ""),
    lambda t: t + "bogus 1\n",
])
def test_parse_market_errors(edit):
    with pytest.raises(ParseError):
        parse_market(edit(MARKET))


def test_risk_shapes_small():
    mk, X = small_market(d=3, m=2, N=4)
    prob, shape = build_avar(mk, X, 0.5, return_shape=True)
    assert shape.cols == 3 * (4 + 1) + shape.I + shape.J == prob.n
    assert prob.q == 2
    prob, shape = build_rwc(mk, X, 0.1, 0.3, return_shape=True)
    assert shape.cols == 2 + shape.L * 4 + shape.I + shape.J == prob.n
    assert shape.rows == 2 * 3 * 4
