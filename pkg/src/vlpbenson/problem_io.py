"""Text formats: problem files, result files, OFF export.

Problem file records (one per line, ``#`` starts a comment, indices 1-based)::

    vlp q m n
    a i j v          constraint coefficient B[i, j]
    o i j v          objective coefficient P[i, j]
    r i lo up        row bounds (inf / -inf allowed)
    x j lo up        variable bounds
    k y j v_1..v_q   generator j of the ordering cone
    k z j v_1..v_q   generator j of its dual cone
    c c_1..c_q
    opt min

Rows and variables without bound records are free.
"""
from __future__ import annotations

import os

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, ParseError
from .polyhedral import GeneratorRep, HalfspaceRep, h_to_v, lexsort_rows, normalize_directions, v_to_h
from .scalarizations import make_problem


def _float(tok, line):
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"bad number {tok!r}", line) from None


def _int(tok, line, upper, what):
    try:
        v = int(tok)
    except ValueError:
        raise ParseError(f"bad index {tok!r}", line) from None
    if not 1 <= v <= upper:
        raise ParseError(f"{what} index {v} out of range 1..{upper}", line)
    return v - 1


def parse_problem(text):
    """Parse a problem file into a validated MolpProblem."""
    header = None
    Bt, Pt = {}, {}
    rows, cols = {}, {}
    ygen, zgen = {}, {}
    c = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        if kind == "vlp":
            if header is not None:
                raise ParseError("duplicate header", ln)
            if len(tok) != 4:
                raise ParseError("header needs q m n", ln)
            try:
                header = tuple(int(t) for t in tok[1:])
            except ValueError:
                raise ParseError("header entries must be integers", ln) from None
            if header[0] < 1 or header[1] < 0 or header[2] < 1:
                raise ParseError("need q >= 1, m >= 0, n >= 1", ln)
            continue
        if header is None:
            raise ParseError("record before header", ln)
        q, m, n = header
        if kind in ("a", "o"):
            if len(tok) != 4:
                raise ParseError(f"'{kind}' needs i j value", ln)
            i = _int(tok[1], ln, m if kind == "a" else q, "row")
            j = _int(tok[2], ln, n, "column")
            target = Bt if kind == "a" else Pt
            if (i, j) in target:
                raise ParseError("duplicate coefficient", ln)
            target[(i, j)] = _float(tok[3], ln)
        elif kind in ("r", "x"):
            if len(tok) != 4:
                raise ParseError(f"'{kind}' needs index lo up", ln)
            i = _int(tok[1], ln, m if kind == "r" else n, "row" if kind == "r" else "variable")
            lo, up = _float(tok[2], ln), _float(tok[3], ln)
            if np.isnan(lo) or np.isnan(up):
                raise ParseError("nan bound", ln)
            target = rows if kind == "r" else cols
            if i in target:
                raise ParseError("duplicate bound record", ln)
            target[i] = (lo, up)
        elif kind == "k":
            if len(tok) != 3 + q or tok[1] not in ("y", "z"):
                raise ParseError("'k' needs y|z j and q values", ln)
            target = ygen if tok[1] == "y" else zgen
            try:
                j = int(tok[2])
            except ValueError:
                raise ParseError(f"bad index {tok[2]!r}", ln) from None
            if j < 1 or j in target:
                raise ParseError("bad or duplicate generator index", ln)
            target[j] = [_float(t, ln) for t in tok[3:]]
        elif kind == "c":
            if len(tok) != 1 + q:
                raise ParseError("'c' needs q values", ln)
            if c is not None:
                raise ParseError("duplicate c", ln)
            c = [_float(t, ln) for t in tok[1:]]
        elif kind == "opt":
            if len(tok) != 2 or tok[1] != "min":
                raise ParseError("only 'opt min' is supported", ln)
        else:
            raise ParseError(f"unknown record {kind!r}", ln)
    if header is None:
        raise ParseError("missing header")
    q, m, n = header
    if Bt:
        ij = np.array(list(Bt.keys()))
        B = sp.csr_matrix((list(Bt.values()), (ij[:, 0], ij[:, 1])), shape=(m, n))
    else:
        B = sp.csr_matrix((m, n))
    P = np.zeros((q, n))
    for (i, j), v in Pt.items():
        P[i, j] = v
    a = np.full(m, -np.inf)
    b = np.full(m, np.inf)
    for i, (lo, up) in rows.items():
        a[i], b[i] = lo, up
    lb = np.full(n, -np.inf)
    ub = np.full(n, np.inf)
    for j, (lo, up) in cols.items():
        lb[j], ub[j] = lo, up

    def gen_matrix(g):
        if not g:
            return None
        keys = sorted(g)
        if keys != list(range(1, len(keys) + 1)):
            raise ParseError("generator indices must be 1..k without gaps")
        return np.array([g[k] for k in keys]).T

    return make_problem(B, a, b, lb, ub, P, gen_matrix(ygen), gen_matrix(zgen), c)


def read_problem(path):
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


def _tok(v):
    v = float(v)
    if v == 0.0:
        return "0"
    return repr(v)


def write_problem(prob):
    """Serialize a problem; numbers use shortest round-trip float reprs."""
    q, m, n = prob.q, prob.m, prob.n
    out = [f"vlp {q} {m} {n}"]
    B = prob.B.tocoo()
    order = np.lexsort((B.col, B.row))
    for k in order:
        out.append(f"a {B.row[k] + 1} {B.col[k] + 1} {_tok(B.data[k])}")
    for i in range(q):
        for j in range(n):
            if prob.P[i, j] != 0:
                out.append(f"o {i + 1} {j + 1} {_tok(prob.P[i, j])}")
    for i in range(m):
        out.append(f"r {i + 1} {_tok(prob.a[i])} {_tok(prob.b[i])}")
    for j in range(n):
        out.append(f"x {j + 1} {_tok(prob.lb[j])} {_tok(prob.ub[j])}")
    for j in range(prob.Y.shape[1]):
        out.append(f"k y {j + 1} " + " ".join(_tok(v) for v in prob.Y[:, j]))
    for j in range(prob.Z.shape[1]):
        out.append(f"k z {j + 1} " + " ".join(_tok(v) for v in prob.Z[:, j]))
    out.append("c " + " ".join(_tok(v) for v in prob.c))
    out.append("opt min")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# result files
# ---------------------------------------------------------------------------

SNAP = 1e-13


def _num(v):
    v = float(v)
    if abs(v) <= SNAP:
        v = 0.0
    return "%.17g" % v


def _rows(tag, arr):
    arr = np.atleast_2d(np.asarray(arr, dtype=float))
    if arr.size == 0:
        return []
    arr = np.where(np.abs(arr) <= SNAP, 0.0, arr)
    arr = arr[lexsort_rows(arr)]
    return [tag + " " + " ".join(_num(v) for v in row) for row in arr]


def report_texts(sol, status="Solved"):
    """The five result files as a dict ``suffix -> text``."""
    q = sol.problem.q
    p = sol.p_vrep
    primal = _rows("v", p.points) + _rows("d", normalize_directions(p.directions))
    dual = _rows("v", sol.dstar_vrep.points)
    sbar = _rows("x", np.array(sol.sbar)) if sol.sbar else []
    if sol.sbar_h:
        sbar += _rows("d", normalize_directions(np.array(sol.sbar_h)))
    tb = []
    for dp in sol.tbar:
        tb.append(np.concatenate([dp.w, [dp.offset], dp.u, dp.r]))
    tbar = _rows("t", np.array(tb)) if tb else []
    st = sol.stats
    pre = getattr(sol, "phase_one_stats", None)
    stats = [
        f"status {status}",
        f"algorithm {sol.algorithm}",
        f"epsilon {_num(sol.epsilon)}",
        f"q {q}",
        f"solution_of_primal {'yes' if sol.solution_of_primal else 'no'}",
        f"negated {'yes' if getattr(sol.problem, 'negated', False) else 'no'}",
        f"sbar {len(sol.sbar)}",
        f"sbar_h {len(sol.sbar_h)}",
        f"tbar {len(sol.tbar)}",
        f"primal_vertices {p.points.shape[0]}",
        f"primal_directions {p.directions.shape[0]}",
        f"dual_vertices {sol.dstar_vrep.points.shape[0]}",
        f"iterations {st.iterations}",
        f"lps {st.lp_count}",
    ]
    if pre is not None:
        stats += [f"phase1_iterations {pre.iterations}", f"phase1_lps {pre.lp_count}"]
    join = lambda lines: "\n".join(lines) + ("\n" if lines else "")
    return {
        "primal_v": join(primal),
        "dual_v": join(dual),
        "sbar": join(sbar),
        "tbar": join(tbar),
        "stats": join(stats),
    }


def write_report(sol, prefix, status="Solved"):
    """Write ``<prefix>.primal_v``, ``.dual_v``, ``.sbar``, ``.tbar``, ``.stats``."""
    paths = []
    d = os.path.dirname(prefix)
    if d:
        os.makedirs(d, exist_ok=True)
    for suffix, text in report_texts(sol, status).items():
        path = f"{prefix}.{suffix}"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# OFF export
# ---------------------------------------------------------------------------

def export_off(vrep, box=None, tol=1e-9):
    """OFF mesh of the boundary of ``vrep`` intersected with ``box``.

    ``box`` is ``(lo, hi)`` with scalars or 3-vectors (infinite entries mean
    no bound) and is required when there are directions.
    """
    if vrep.dim != 3:
        raise DimensionError(f"OFF export needs q = 3, got {vrep.dim}")
    h = v_to_h(vrep)
    N, off = h.normals, h.offsets
    if box is not None:
        lo = np.broadcast_to(np.asarray(box[0], dtype=float), (3,))
        hi = np.broadcast_to(np.asarray(box[1], dtype=float), (3,))
        extra_n, extra_o = [], []
        for i in range(3):
            e = np.eye(3)[i]
            if np.isfinite(lo[i]):
                extra_n.append(e)
                extra_o.append(lo[i])
            if np.isfinite(hi[i]):
                extra_n.append(-e)
                extra_o.append(-hi[i])
        if extra_n:
            N = np.vstack([N, extra_n])
            off = np.concatenate([off, extra_o])
    elif vrep.directions.shape[0]:
        raise ValueError("unbounded set needs a truncation box")
    cut = h_to_v(HalfspaceRep(N, off))
    if cut.directions.shape[0]:
        raise ValueError("truncation box does not bound the set")
    V = cut.points
    faces = []
    seen = set()
    for a, beta in zip(N / np.linalg.norm(N, axis=1, keepdims=True),
                       off / np.linalg.norm(N, axis=1)):
        idx = [i for i in range(V.shape[0]) if abs(a @ V[i] - beta) <= 1e-7 * (1 + abs(beta))]
        key = frozenset(idx)
        if len(idx) < 3 or key in seen:
            continue
        seen.add(key)
        center = V[idx].mean(axis=0)
        # orthonormal basis of the facet plane, oriented so the outward normal -a
        # sees the vertices counterclockwise
        u = V[idx[0]] - center
        u /= np.linalg.norm(u)
        v = np.cross(-a, u)
        ang = [np.arctan2((V[i] - center) @ v, (V[i] - center) @ u) for i in idx]
        faces.append([idx[k] for k in np.argsort(ang, kind="stable")])
    lines = ["OFF", f"{V.shape[0]} {len(faces)} 0"]
    lines += [" ".join(_num(x) for x in row) for row in V]
    lines += [f"{len(f)} " + " ".join(str(i) for i in f) for f in faces]
    return "\n".join(lines) + "\n"
