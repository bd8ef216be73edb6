"""Set-valued risk measures in a one-period market with proportional costs.

Positions are vectors of physical units of ``d`` assets.  A solvency cone is
generated by exchange vectors ``pi_ij e^i - e^j``: give up ``pi_ij`` units
of asset ``i`` to receive one unit of asset ``j``.  Risk is measured in the
first ``m`` assets (the eligible ones).

The builders return a MolpProblem whose upper image is the risk of the
payoff ``X`` (an ``N x d`` array, row ``n`` is the payoff in scenario
``n``).  Scenario-stacked vectors use the order ``(X_1(w_1), ..., X_d(w_1),
X_1(w_2), ...)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .config import GEOM_TOL
from .errors import InvalidAlpha, NoInteriorC, ParseError, VlpError
from .polyhedral import GeneratorRep, cone_section, minimize_vrep
from .scalarizations import dual_generators, make_problem


@dataclass
class ScenarioMarket:
    """Bid and ask prices at time 0 and per scenario at time T.

    Prices are quoted in a common numeraire.  ``bidT``/``askT`` have shape
    ``(N, d)``.
    """

    probs: np.ndarray
    bid0: np.ndarray
    ask0: np.ndarray
    bidT: np.ndarray
    askT: np.ndarray
    m: int

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float).reshape(-1)
        self.bid0 = np.asarray(self.bid0, dtype=float).reshape(-1)
        self.ask0 = np.asarray(self.ask0, dtype=float).reshape(-1)
        self.bidT = np.atleast_2d(np.asarray(self.bidT, dtype=float))
        self.askT = np.atleast_2d(np.asarray(self.askT, dtype=float))
        d, N = self.d, self.N
        if self.ask0.size != d or self.bidT.shape != (N, d) or self.askT.shape != (N, d):
            raise ValueError("price arrays do not match d and N")
        if np.any(self.probs <= 0) or abs(self.probs.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be positive and sum to 1")
        for bid, ask in ((self.bid0, self.ask0), (self.bidT, self.askT)):
            if np.any(bid <= 0) or np.any(bid > ask):
                raise ValueError("need 0 < bid <= ask")
        if not 1 <= self.m <= d:
            raise ValueError("need 1 <= m <= d")

    @property
    def d(self):
        return self.bid0.size

    @property
    def N(self):
        return self.probs.size

    @classmethod
    def from_mid(cls, probs, s0, sT, lam, m):
        """Bid/ask ``(1 -/+ lambda_i) S_i`` around mid prices."""
        lam = np.asarray(lam, dtype=float)
        s0 = np.asarray(s0, dtype=float)
        sT = np.atleast_2d(np.asarray(sT, dtype=float))
        return cls(probs, (1 - lam) * s0, (1 + lam) * s0, (1 - lam) * sT, (1 + lam) * sT, m)


def solvency_generators(bid, ask):
    """Exchange generators ``pi_ij e^i - e^j`` for all ordered pairs, as columns.

    ``pi_ij = ask_j / bid_i`` (sell ``i``, buy ``j`` through the numeraire).
    Disposal vectors ``e^i`` are appended when some round trip is free, which
    always includes ``d = 1``; otherwise they are already generated.
    """
    bid = np.asarray(bid, dtype=float)
    ask = np.asarray(ask, dtype=float)
    d = bid.size
    cols = []
    frictionless = d == 1
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            g = np.zeros(d)
            g[i] = ask[j] / bid[i]
            g[j] = -1.0
            cols.append(g)
            if i < j and (ask[j] / bid[i]) * (ask[i] / bid[j]) <= 1.0 + 1e-12:
                frictionless = True
    if frictionless:
        cols.extend(np.eye(d))
    return np.array(cols).T if cols else np.zeros((d, 0))


def _mid_functional(bid, ask):
    return 0.5 * (np.asarray(bid) + np.asarray(ask))


def ordering_cone(market, tol=GEOM_TOL):
    """Generators (columns, in ``R^m``) of the time-0 solvency cone restricted to
    the eligible assets."""
    K0 = solvency_generators(market.bid0, market.ask0)
    d, m = market.d, market.m
    rep = GeneratorRep(np.zeros((1, d)), K0.T)
    if m == d:
        sec = minimize_vrep(rep, tol)
    else:
        w = _mid_functional(market.bid0, market.ask0)
        if np.all(K0.T @ w > tol):
            sec = cone_section(rep, range(m), w, tol)
        else:
            sec = cone_section(rep, range(m), None, tol)
    return sec.directions.T


def risk_c(Y, tol=GEOM_TOL):
    """Mean generator scaled to last coordinate 1, or ``1`` if that fails."""
    s = Y.mean(axis=1)
    if s[-1] > tol:
        c = s / s[-1]
        Z = dual_generators(Y, tol)
        if np.all(Z.T @ c > tol):
            return c
    return np.ones(Y.shape[0])


def _stack_payoff(X, market):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape != (market.N, market.d):
        raise ValueError(f"payoff must have shape ({market.N}, {market.d})")
    if not np.all(np.isfinite(X)):
        raise ValueError("payoff entries must be finite")
    return X.reshape(-1)


def _generators(bid, ask, minimal, tol=GEOM_TOL):
    G = solvency_generators(bid, ask)
    if minimal:
        G = minimize_vrep(GeneratorRep(np.zeros((1, G.shape[0])), G.T), tol).directions.T
    return sp.csr_matrix(G)


def _time_T_blocks(market, bid, ask, minimal=False):
    """Block diagonal matrix of per-scenario generators, plus the widest block."""
    blocks = [_generators(bid[n], ask[n], minimal) for n in range(market.N)]
    return sp.block_diag(blocks, format="csr"), max(b.shape[1] for b in blocks)


def _finish(B, a, b, lb, ub, P, market, tol):
    Y = ordering_cone(market, tol)
    try:
        c = risk_c(Y, tol)
        return make_problem(B, a, b, lb, ub, P, Y=Y, Z=dual_generators(Y, tol), c=c, tol=tol)
    except VlpError as exc:
        raise NoInteriorC(f"eligible cone unusable: {exc}") from exc


@dataclass
class RiskShape:
    rows: int
    cols: int
    I: int
    J: int
    L: int = 0


def build_avar(market, X, alpha, minimal_cone=False, tol=GEOM_TOL, return_shape=False):
    """AV@R market extension.

    Variables ``(zhat in R^{dN}_+, z in R^d, r in R^I_+, s in R^J_+)``;
    equalities ``zhat - I_d z - I_d K0 r - K_T s = -xhat``; objective
    ``diag(alpha)^{-1} sum_n p_n zhat_n - z`` on the eligible coordinates, the
    remaining coordinates being forced to zero by equality rows.
    """
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (market.d,)).copy()
    if np.any(alpha <= 0) or np.any(alpha > 1):
        raise InvalidAlpha("alpha must lie in (0, 1]")
    d, N, m = market.d, market.N, market.m
    xhat = _stack_payoff(X, market)
    K0 = _generators(market.bid0, market.ask0, minimal_cone, tol)
    I = K0.shape[1]
    KT, _ = _time_T_blocks(market, market.bidT, market.askT, minimal_cone)
    J = KT.shape[1]
    Istack = sp.vstack([sp.identity(d, format="csr")] * N, format="csr")
    eq = sp.hstack([
        sp.identity(d * N, format="csr"), -Istack, -(Istack @ K0), -KT,
    ], format="csr")
    # expectation operator: row i sums p_n zhat_{n,i} / alpha_i
    Erows = sp.csr_matrix(
        (np.tile(1.0 / alpha, N) * np.repeat(market.probs, d),
         (np.tile(np.arange(d), N), np.arange(d * N))),
        shape=(d, d * N),
    )
    obj = sp.hstack([Erows, -sp.identity(d), sp.csr_matrix((d, I + J))], format="csr")
    extra = obj[m:]
    B = sp.vstack([eq, extra], format="csr")
    nrow = B.shape[0]
    a = np.concatenate([-xhat, np.zeros(d - m)])
    b = a.copy()
    ncol = d * N + d + I + J
    lb = np.concatenate([np.zeros(d * N), np.full(d, -np.inf), np.zeros(I + J)])
    ub = np.full(ncol, np.inf)
    shape = RiskShape(nrow, ncol, I, J)
    if return_shape == "only":
        return shape
    P = obj[:m].toarray()
    prob = _finish(B, a, b, lb, ub, P, market, tol)
    return (prob, shape) if return_shape else prob


def build_rwc(market, X, eps_vec, wc_lambda, minimal_cone=False, tol=GEOM_TOL, return_shape=False,
              mid=None):
    """Relaxed worst case risk measure.

    Variables ``(z in R^m, gamma in R^{LN}_+, r in R^I_+, s in R^J_+)``;
    rows ``I_d(Pz - K0 r) - K_T s >= -xhat - I_d eps`` and
    ``I_d(Pz - K0 r) - K_T s - G gamma = -xhat``; objective ``z``.  The cone
    ``G`` is the solvency cone of the mid prices ``mid`` (default: time-0 mid
    prices) with the proportional costs ``wc_lambda``; the same ``L``
    generators are used in every scenario.
    """
    d, N, m = market.d, market.N, market.m
    eps_vec = np.broadcast_to(np.asarray(eps_vec, dtype=float), (d,))
    wc_lambda = np.broadcast_to(np.asarray(wc_lambda, dtype=float), (d,))
    if np.any(eps_vec < 0):
        raise ValueError("eps must be nonnegative")
    mid = 0.5 * (market.bid0 + market.ask0) if mid is None else np.asarray(mid, dtype=float)
    lam_0 = (market.ask0 - market.bid0) / (market.ask0 + market.bid0)
    if np.any(wc_lambda < lam_0 - 1e-12):
        raise ValueError("worst case costs must dominate market costs")
    if np.any(wc_lambda >= 1):
        raise ValueError("worst case costs must be below 1")
    xhat = _stack_payoff(X, market)
    K0 = _generators(market.bid0, market.ask0, minimal_cone, tol)
    I = K0.shape[1]
    KT, _ = _time_T_blocks(market, market.bidT, market.askT, minimal_cone)
    J = KT.shape[1]
    g = _generators((1 - wc_lambda) * mid, (1 + wc_lambda) * mid, minimal_cone, tol)
    L = g.shape[1]
    G = sp.block_diag([g] * N, format="csr")
    Istack = sp.vstack([sp.identity(d, format="csr")] * N, format="csr")
    Pm = sp.csr_matrix(np.eye(d)[:, :m])
    left = (Istack @ Pm).tocsr()
    LN = G.shape[1]
    zero_g = sp.csr_matrix((d * N, LN))
    ineq = sp.hstack([left, zero_g, -(Istack @ K0), -KT], format="csr")
    eq = sp.hstack([left, -G, -(Istack @ K0), -KT], format="csr")
    B = sp.vstack([ineq, eq], format="csr")
    a = np.concatenate([-xhat - np.tile(eps_vec, N), -xhat])
    b = np.concatenate([np.full(d * N, np.inf), -xhat])
    ncol = m + LN + I + J
    lb = np.concatenate([np.full(m, -np.inf), np.zeros(LN + I + J)])
    ub = np.full(ncol, np.inf)
    shape = RiskShape(B.shape[0], ncol, I, J, L)
    if return_shape == "only":
        return shape
    P = np.hstack([np.eye(m), np.zeros((m, ncol - m))])
    prob = _finish(B, a, b, lb, ub, P, market, tol)
    return (prob, shape) if return_shape else prob


def scalar_avar_oracle(probs, x, alpha):
    """``min_z z + E[(-X - z)^+] / alpha`` for a scalar payoff.

    The objective is convex and piecewise linear in ``z`` with kinks at
    ``z = -x_n``, so the minimum is attained at one of them.
    """
    p = np.asarray(probs, dtype=float)
    x = np.asarray(x, dtype=float)
    if not 0 < alpha <= 1:
        raise InvalidAlpha("alpha must lie in (0, 1]")
    zs = -x
    vals = [z + (p @ np.maximum(-x - z, 0.0)) / alpha for z in zs]
    return float(min(vals))


# ---------------------------------------------------------------------------
# market files
# ---------------------------------------------------------------------------

@dataclass
class MarketSpec:
    market: ScenarioMarket
    payoff: np.ndarray
    alpha: np.ndarray = None
    rwc_eps: np.ndarray = None
    rwc_lambda: np.ndarray = None


def parse_market(text):
    """Parse a market file (see the README for the record list)."""
    header = None
    probs, payoff, sT, bidT, askT = {}, {}, {}, {}, {}
    vec = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        try:
            if kind == "market":
                header = tuple(int(t) for t in tok[1:4])
                if len(tok) != 4:
                    raise ValueError
                continue
            if header is None:
                raise ParseError("record before 'market' header", ln)
            d, N, m = header
            if kind == "prob":
                n = int(tok[1])
                if not 1 <= n <= N or len(tok) != 3:
                    raise ValueError
                probs[n - 1] = float(tok[2])
            elif kind in ("payoff", "sT", "bidT", "askT"):
                n = int(tok[1])
                vals = [float(t) for t in tok[2:]]
                if not 1 <= n <= N or len(vals) != d:
                    raise ValueError
                {"payoff": payoff, "sT": sT, "bidT": bidT, "askT": askT}[kind][n - 1] = vals
            elif kind in ("s0", "lambda", "bid0", "ask0", "alpha", "rwc_eps", "rwc_lambda"):
                vals = [float(t) for t in tok[1:]]
                if len(vals) != d:
                    raise ValueError
                vec[kind] = np.array(vals)
            else:
                raise ParseError(f"unknown record {kind!r}", ln)
        except (ValueError, IndexError):
            raise ParseError(f"malformed {kind!r} record", ln) from None
    if header is None:
        raise ParseError("missing 'market' header")
    d, N, m = header

    def full(table, what):
        if sorted(table) != list(range(N)):
            raise ParseError(f"need one '{what}' record per scenario")
        return np.array([table[n] for n in range(N)])

    p = np.array([probs.get(n, np.nan) for n in range(N)])
    if np.any(np.isnan(p)):
        raise ParseError("need one 'prob' record per scenario")
    X = full(payoff, "payoff")
    try:
        if "bid0" in vec or bidT:
            market = ScenarioMarket(p, vec["bid0"], vec["ask0"], full(bidT, "bidT"), full(askT, "askT"), m)
        else:
            lam = vec.get("lambda", np.zeros(d))
            market = ScenarioMarket.from_mid(p, vec["s0"], full(sT, "sT"), lam, m)
    except KeyError as exc:
        raise ParseError(f"missing price record {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return MarketSpec(market, X, vec.get("alpha"), vec.get("rwc_eps"), vec.get("rwc_lambda"))
