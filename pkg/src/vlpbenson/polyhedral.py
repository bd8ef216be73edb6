"""Representations of line-free convex polyhedra and conversions between them.

A polyhedron is held either as a :class:`GeneratorRep` (``conv(points) +
cone(directions)``) or as a :class:`HalfspaceRep` (``{y : N y >= offsets}``).
Both conversions go through the homogenized cone in one dimension more and
the double description method in :func:`extreme_rays`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import GEOM_TOL
from .errors import ContainsLine, EmptySet, NumericalFailure
from .lp import LpSolver, LpStatus, StandardLp


def _as_matrix(a, q=None):
    arr = np.asarray(a, dtype=float)
    if arr.size == 0:
        if q is None:
            q = arr.shape[-1] if arr.ndim == 2 else 0
        return np.zeros((0, q))
    return np.atleast_2d(arr)


def lexsort_rows(a):
    """Row order that sorts ``a`` lexicographically (first column primary)."""
    a = np.asarray(a)
    if a.shape[0] == 0:
        return np.zeros(0, dtype=int)
    return np.lexsort(a.T[::-1])


def unique_rows(a, tol=GEOM_TOL):
    """Drop rows within ``tol`` (max-norm) of an earlier row; order is kept."""
    a = _as_matrix(a)
    keep = []
    for i, row in enumerate(a):
        if all(np.max(np.abs(row - a[j])) > tol for j in keep):
            keep.append(i)
    return a[keep]


def normalize_directions(d):
    d = _as_matrix(d)
    if d.shape[0] == 0:
        return d
    return d / np.abs(d).max(axis=1, keepdims=True)


@dataclass
class GeneratorRep:
    """``conv(points) + cone(directions)``.

    ``minimal`` records whether every point is known to be a vertex and every
    direction an extreme direction.
    """

    points: np.ndarray
    directions: np.ndarray = None
    minimal: bool = False

    def __post_init__(self):
        self.points = _as_matrix(self.points)
        q = self.points.shape[1]
        if self.directions is None:
            self.directions = np.zeros((0, q))
        self.directions = _as_matrix(self.directions, q)
        if self.directions.shape[0] and self.points.shape[0]:
            if self.directions.shape[1] != q:
                raise ValueError("points and directions live in different spaces")
        if self.directions.shape[0] and np.any(np.abs(self.directions).max(axis=1) == 0):
            raise ValueError("zero direction")

    @property
    def dim(self):
        if self.points.shape[0]:
            return self.points.shape[1]
        return self.directions.shape[1]

    def sorted(self):
        """Copy with normalized directions and rows in lexicographic order."""
        pts = self.points[lexsort_rows(self.points)]
        dirs = normalize_directions(self.directions)
        dirs = dirs[lexsort_rows(dirs)]
        return GeneratorRep(pts, dirs, self.minimal)


@dataclass
class HalfspaceRep:
    """``{y : normals @ y >= offsets}``."""

    normals: np.ndarray
    offsets: np.ndarray = field(default=None)

    def __post_init__(self):
        self.normals = _as_matrix(self.normals)
        if self.offsets is None:
            self.offsets = np.zeros(self.normals.shape[0])
        self.offsets = np.asarray(self.offsets, dtype=float).reshape(-1)
        if self.offsets.size != self.normals.shape[0]:
            raise ValueError("one offset per normal required")
        if self.normals.shape[0] and np.any(np.abs(self.normals).max(axis=1) == 0):
            raise ValueError("zero normal")

    @property
    def dim(self):
        return self.normals.shape[1]

    @property
    def rows(self):
        return list(zip(self.normals, self.offsets))

    def satisfied(self, y, tol=GEOM_TOL):
        y = np.asarray(y, dtype=float)
        return bool(np.all(self.normals @ y >= self.offsets - tol))


# ---------------------------------------------------------------------------
# double description
# ---------------------------------------------------------------------------

def _popcount(v):
    return bin(v).count("1")


def _dd_pointed(M, tol):
    """Extreme rays of the pointed cone ``{x : M x >= 0}`` with ``rank M = dim``.

    Rows are inserted in index order; the initial simplicial cone uses the
    first linearly independent rows.  Adjacency is decided combinatorially.
    """
    k, D = M.shape
    if D == 0:
        return np.zeros((0, 0))
    chosen = []
    for i in range(k):
        trial = M[chosen + [i]]
        if np.linalg.matrix_rank(trial, tol=1e-10) == len(chosen) + 1:
            chosen.append(i)
            if len(chosen) == D:
                break
    if len(chosen) < D:
        raise NumericalFailure("double description needs a full-rank row set")
    R = np.linalg.inv(M[chosen]).T
    R = R / np.linalg.norm(R, axis=1, keepdims=True)
    # zero sets over the processed rows, as bitmasks
    zsets = []
    for r in R:
        mask = 0
        for i in chosen:
            if abs(M[i] @ r) <= tol:
                mask |= 1 << i
        zsets.append(mask)
    rays = [r for r in R]
    for i in range(k):
        if i in chosen:
            continue
        a = M[i]
        vals = np.array([a @ r for r in rays])
        pos = [j for j, v in enumerate(vals) if v > tol]
        neg = [j for j, v in enumerate(vals) if v < -tol]
        zero = [j for j, v in enumerate(vals) if abs(v) <= tol]
        if not neg:
            for j in zero:
                zsets[j] |= 1 << i
            continue
        new_rays, new_z = [], []
        for p in pos:
            for n in neg:
                common = zsets[p] & zsets[n]
                if _popcount(common) < D - 2:
                    continue
                adjacent = True
                for j in range(len(rays)):
                    if j != p and j != n and (zsets[j] & common) == common:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                r = vals[p] * rays[n] - vals[n] * rays[p]
                nr = np.linalg.norm(r)
                if nr <= tol:
                    continue
                new_rays.append(r / nr)
                new_z.append(common | (1 << i))
        keep = pos + zero
        rays = [rays[j] for j in keep] + new_rays
        zsets = [zsets[j] | ((1 << i) if j in zero else 0) for j in keep] + new_z
    if not rays:
        return np.zeros((0, D))
    out = np.array(rays)
    # duplicates can only come from tolerance noise
    return unique_rows(out, tol=1e-9)


def extreme_rays(M, tol=GEOM_TOL):
    """Generators of the cone ``{x : M x >= 0}``.

    Returns ``(rays, lineality)`` where ``lineality`` is an orthonormal basis
    of ``{x : M x = 0}`` and ``rays`` are the extreme rays of the pointed cone
    obtained by intersecting with the orthogonal complement.
    """
    M = _as_matrix(M)
    D = M.shape[1]
    if M.shape[0] == 0:
        return np.zeros((0, D)), np.eye(D)
    norms = np.linalg.norm(M, axis=1)
    keep = norms > tol
    M = M[keep] / norms[keep, None]
    M = unique_rows(M, tol=tol)
    if M.shape[0] == 0:
        return np.zeros((0, D)), np.eye(D)
    _, s, Vt = np.linalg.svd(M)
    rank = int(np.sum(s > 1e-10 * max(1.0, s[0])))
    lineality = Vt[rank:]
    if rank == 0:
        return np.zeros((0, D)), lineality
    Q = Vt[:rank]
    if rank == D:
        rays = _dd_pointed(M, tol)
    else:
        Mq = M @ Q.T
        rays = _dd_pointed(Mq, tol) @ Q
    return rays, lineality


# ---------------------------------------------------------------------------
# conversions
# ---------------------------------------------------------------------------

def _has_point(rays, tol):
    return rays.shape[0] > 0 and np.any(rays[:, -1] > tol)


def h_to_v(h: HalfspaceRep, tol=GEOM_TOL) -> GeneratorRep:
    """Vertices and extreme directions of ``{y : N y >= offsets}``."""
    N, b = h.normals, h.offsets
    q = N.shape[1]
    nrm = np.linalg.norm(N, axis=1) if N.shape[0] else np.zeros(0)
    N = N / nrm[:, None] if N.shape[0] else N
    b = b / nrm if N.shape[0] else b
    M = np.vstack([np.hstack([N, -b[:, None]]), np.eye(1, q + 1, q)])
    rays, lineality = extreme_rays(M, tol)
    if lineality.shape[0]:
        if _has_point(rays, tol):
            raise ContainsLine("polyhedron contains a line")
        if rays.shape[0] == 0 and np.any(np.abs(lineality[:, -1]) > tol):
            raise ContainsLine("polyhedron contains a line")
        raise EmptySet("polyhedron is empty")
    lam = rays[:, -1]
    is_point = lam > tol
    if not np.any(is_point):
        raise EmptySet("polyhedron is empty")
    points = rays[is_point, :q] / lam[is_point, None]
    dirs = normalize_directions(rays[~is_point, :q])
    points = unique_rows(points, tol=1e-8)
    dirs = unique_rows(dirs, tol=1e-8)
    order = lexsort_rows(points)
    dorder = lexsort_rows(dirs)
    return GeneratorRep(points[order], dirs[dorder], minimal=True)


def v_to_h(v: GeneratorRep, tol=GEOM_TOL) -> HalfspaceRep:
    """Irredundant inequality description of ``conv(points) + cone(dirs)``.

    Lower-dimensional sets produce pairs of opposite rows for their
    equalities.
    """
    q = v.dim
    if v.points.shape[0] == 0 and v.directions.shape[0] == 0:
        raise EmptySet("empty generator list")
    pts = v.points
    dirs = normalize_directions(v.directions)
    M = np.vstack([
        np.hstack([pts, np.ones((pts.shape[0], 1))]),
        np.hstack([dirs, np.zeros((dirs.shape[0], 1))]),
    ])
    rays, lineality = extreme_rays(M, tol)
    normals, offsets = [], []

    def push(a, beta):
        na = np.linalg.norm(a)
        if na <= 1e-9:
            return
        normals.append(a / na)
        offsets.append(-beta / na)

    for ell in lineality:
        push(ell[:q], ell[q])
        push(-ell[:q], -ell[q])
    for r in rays:
        push(r[:q], r[q])
    if not normals:
        return HalfspaceRep(np.zeros((0, q)), np.zeros(0))
    Nm = np.array(normals)
    off = np.array(offsets)
    both = unique_rows(np.hstack([Nm, off[:, None]]), tol=1e-9)
    order = lexsort_rows(both)
    both = both[order]
    return HalfspaceRep(both[:, :q], both[:, q])


# ---------------------------------------------------------------------------
# the two dual() transforms of the outer approximation schemes
# ---------------------------------------------------------------------------

def _weight_rows(tstar, c):
    tstar = _as_matrix(tstar)
    c = np.asarray(c, dtype=float)
    q = c.size
    W = tstar.copy()
    W[:, q - 1] = 1.0 - tstar[:, : q - 1] @ c[: q - 1]
    return W, tstar[:, q - 1]


def dual_from_outer(tstar_points, c, tol=GEOM_TOL) -> GeneratorRep:
    """Minimal V-representation of ``{y : w(t*)^T y >= t*_q for all t*}``."""
    tstar = _as_matrix(tstar_points, np.asarray(c).size)
    if tstar.shape[0] == 0:
        raise EmptySet("no dual points")
    W, off = _weight_rows(tstar, c)
    nz = np.abs(W).max(axis=1) > tol
    if np.any(~nz & (off > tol)):
        raise EmptySet("zero weight with positive offset")
    if not np.any(nz):
        raise ContainsLine("no constraint left")
    return h_to_v(HalfspaceRep(W[nz], off[nz]), tol)


def dual_from_inner(t_points, t_dirs, c, tol=GEOM_TOL) -> np.ndarray:
    """Vertices of ``{y* : phi(p, y*) >= 0, phi_hat(d, y*) >= 0}``.

    The recession direction ``-e^q`` of the result is implied and not
    returned.
    """
    c = np.asarray(c, dtype=float)
    q = c.size
    P = _as_matrix(t_points, q)
    D = normalize_directions(_as_matrix(t_dirs, q))
    if P.shape[0] == 0:
        raise EmptySet("inner approximation has no point")
    # phi(p, y*) = sum_{i<q} (p_i - p_q c_i) y*_i - y*_q + p_q
    rows, offs = [], []
    for p in P:
        a = np.empty(q)
        a[: q - 1] = p[: q - 1] - p[q - 1] * c[: q - 1]
        a[q - 1] = -1.0
        rows.append(a)
        offs.append(-p[q - 1])
    for d in D:
        a = np.zeros(q)
        a[: q - 1] = d[: q - 1] - d[q - 1] * c[: q - 1]
        beta = -d[q - 1]
        if np.abs(a).max() <= tol:
            if beta > tol:
                raise EmptySet("direction constraint violated")
            continue
        rows.append(a)
        offs.append(beta)
    rep = h_to_v(HalfspaceRep(np.array(rows), np.array(offs)), tol)
    return rep.points


# ---------------------------------------------------------------------------
# LP based helpers
# ---------------------------------------------------------------------------

_lp = LpSolver()


def _combination_lp(points, dirs, y):
    """min t s.t. |V lam + D mu - y|_inf <= t, lam in simplex, mu >= 0."""
    q = y.size
    s, k = points.shape[0], dirs.shape[0]
    nv = s + k + 1
    G = np.hstack([points.T, dirs.T, np.zeros((q, 1))])
    A = np.vstack([
        np.hstack([G[:, :-1], np.ones((q, 1))]),
        np.hstack([G[:, :-1], -np.ones((q, 1))]),
    ])
    lo = np.concatenate([y, np.full(q, -np.inf)])
    up = np.concatenate([np.full(q, np.inf), y])
    if s:
        A = np.vstack([A, np.concatenate([np.ones(s), np.zeros(k + 1)])])
        lo = np.append(lo, 1.0)
        up = np.append(up, 1.0)
    cost = np.zeros(nv)
    cost[-1] = 1.0
    return StandardLp(cost, A, lo, up, np.zeros(nv), np.full(nv, np.inf))


def contains(v: GeneratorRep, y, tol=GEOM_TOL) -> bool:
    """Whether ``y`` lies within ``tol`` (max-norm) of the represented set."""
    y = np.asarray(y, dtype=float).reshape(-1)
    dirs = normalize_directions(v.directions)
    if v.points.shape[0] == 0:
        pts = np.zeros((0, y.size))
        if dirs.shape[0] == 0:
            return bool(np.abs(y).max() <= tol)
        # a pure cone always contains the origin
        lp = _combination_lp(pts, dirs, y)
    else:
        lp = _combination_lp(v.points, dirs, y)
    res = _lp.solve(lp)
    if res.status is not LpStatus.OPTIMAL:
        return False
    return bool(res.value <= tol)


def _cone_has_line(dirs, tol):
    if dirs.shape[0] < 2:
        return False
    q = dirs.shape[1]
    k = dirs.shape[0]
    A = np.vstack([dirs.T, np.ones((1, k))])
    lo = np.concatenate([np.zeros(q), [1.0]])
    lp = StandardLp(np.zeros(k), A, lo, lo, np.zeros(k), np.full(k, np.inf))
    res = _lp.solve(lp)
    if res.status is LpStatus.OPTIMAL:
        return True
    # LP tolerances: confirm with a residual check
    return False


def minimize_vrep(v: GeneratorRep, tol=GEOM_TOL) -> GeneratorRep:
    """Drop points that are not vertices and directions that are not extreme."""
    dirs = unique_rows(normalize_directions(v.directions), tol=1e-9)
    if _cone_has_line(dirs, tol):
        raise ContainsLine("recession cone contains a line")
    keep_d = list(range(dirs.shape[0]))
    for i in range(dirs.shape[0]):
        others = [j for j in keep_d if j != i]
        if contains(GeneratorRep(np.zeros((0, dirs.shape[1])), dirs[others]), dirs[i], tol) and others:
            keep_d = others
    dirs = dirs[keep_d]
    pts = unique_rows(v.points, tol=1e-9)
    keep_p = list(range(pts.shape[0]))
    for i in range(pts.shape[0]):
        others = [j for j in keep_p if j != i]
        if not others:
            # a single point plus directions: redundant only if it is not a vertex,
            # which cannot happen for a line-free set
            continue
        if contains(GeneratorRep(pts[others], dirs), pts[i], tol):
            keep_p = others
    pts = pts[keep_p]
    pts = pts[lexsort_rows(pts)]
    dirs = dirs[lexsort_rows(dirs)]
    return GeneratorRep(pts, dirs, minimal=True)


def cone_section(cone_v: GeneratorRep, keep_coords, positive_functional=None, tol=GEOM_TOL) -> GeneratorRep:
    """Intersection of a cone with the coordinate subspace spanned by ``keep_coords``.

    The result is expressed in the kept coordinates.  Without
    ``positive_functional`` the section is computed by converting to
    inequalities, appending the coordinate equalities and converting back.
    When a functional ``w`` with ``w^T g > 0`` on the cone is supplied, the
    section is built from LP probes over the slice ``w^T y = 1`` instead,
    which scales to cones with many generators in high dimension.
    """
    G = normalize_directions(cone_v.directions)
    keep = sorted(int(i) for i in keep_coords)
    d = cone_v.dim
    drop = [i for i in range(d) if i not in keep]
    m = len(keep)
    if G.shape[0] == 0:
        return GeneratorRep(np.zeros((1, m)), np.zeros((0, m)), minimal=True)
    if positive_functional is not None:
        return _section_by_probing(G, keep, drop, np.asarray(positive_functional, float), tol)
    h = v_to_h(GeneratorRep(np.zeros((1, d)), G), tol)
    E = np.eye(d)[drop]
    N = np.vstack([h.normals, E, -E]) if drop else h.normals
    off = np.zeros(N.shape[0])
    rep = h_to_v(HalfspaceRep(N, off), tol)
    dirs = rep.directions[:, keep]
    nz = np.abs(dirs).max(axis=1) > tol if dirs.shape[0] else np.zeros(0, bool)
    dirs = normalize_directions(dirs[nz])
    return GeneratorRep(np.zeros((1, m)), dirs[lexsort_rows(dirs)], minimal=True)


def _section_by_probing(G, keep, drop, w, tol):
    m = len(keep)
    L = G.shape[0]
    Gk = G[:, keep].T
    Gd = G[:, drop].T
    scale = G @ w
    if np.any(scale <= tol):
        raise ValueError("functional is not positive on the cone generators")
    A = np.vstack([Gd, scale[None, :]])
    rlo = np.concatenate([np.zeros(len(drop)), [1.0]])

    def probe(direction):
        lp = StandardLp(direction @ Gk, A, rlo, rlo, np.zeros(L), np.full(L, np.inf))
        res = _lp.solve(lp)
        if res.status is LpStatus.INFEASIBLE:
            return None, None
        if res.status is not LpStatus.OPTIMAL:
            raise NumericalFailure("section probe unbounded")
        return res.value, Gk @ res.x

    found = []
    for i in range(m):
        for sgn in (1.0, -1.0):
            val, y = probe(sgn * np.eye(m)[i])
            if y is None:
                return GeneratorRep(np.zeros((1, m)), np.zeros((0, m)), minimal=True)
            found.append(y)
    found = unique_rows(normalize_directions(np.array(found)), tol=1e-9)
    for _ in range(10000):
        h = v_to_h(GeneratorRep(np.zeros((1, m)), found), tol)
        added = False
        for a in h.normals:
            val, y = probe(a)
            if val < -1e-9:
                yn = normalize_directions(y[None, :])
                if all(np.abs(yn[0] - f).max() > 1e-9 for f in found):
                    found = np.vstack([found, yn])
                    added = True
        if not added:
            break
    else:
        raise NumericalFailure("section probing did not converge")
    rep = minimize_vrep(GeneratorRep(np.zeros((1, m)), found), tol)
    return GeneratorRep(np.zeros((1, m)), rep.directions, minimal=True)
