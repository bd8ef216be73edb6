"""The coupling function between outcome space and dual space.

``phi(y, y*) = w(y*)^T y - y*_q`` vanishes exactly on incident pairs of faces
of the upper image and the lower image.  :func:`verify_incidence` checks
that correspondence face by face for two computed V-representations.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import GEOM_TOL
from .errors import IncidenceViolation
from .polyhedral import GeneratorRep, contains, normalize_directions, v_to_h


@dataclass(frozen=True)
class DualityContext:
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        if abs(c[-1] - 1.0) > 1e-12:
            raise ValueError("last coordinate of c must be 1")
        object.__setattr__(self, "c", c)

    @property
    def q(self):
        return self.c.size


def _ctx(ctx):
    return ctx if isinstance(ctx, DualityContext) else DualityContext(ctx)


def weight_from_dual(ystar, ctx):
    """``(y*_1, ..., y*_{q-1}, 1 - sum_{i<q} c_i y*_i)``."""
    c = _ctx(ctx).c
    ystar = np.asarray(ystar, dtype=float)
    w = ystar.copy()
    w[..., -1] = 1.0 - ystar[..., :-1] @ c[:-1]
    return w


def dual_from_point(y, ctx):
    """``(y_1 - y_q c_1, ..., y_{q-1} - y_q c_{q-1}, -1)``."""
    c = _ctx(ctx).c
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    out[..., :-1] = y[..., :-1] - y[..., -1:] * c[:-1]
    out[..., -1] = -1.0
    return out


def phi(y, ystar, ctx):
    c = _ctx(ctx).c
    y = np.asarray(y, dtype=float)
    ystar = np.asarray(ystar, dtype=float)
    return float(
        y[:-1] @ ystar[:-1] + y[-1] * (1.0 - c[:-1] @ ystar[:-1]) - ystar[-1]
    )


def phi_hat(y, ystar, ctx):
    """``phi`` without the ``-y*_q`` term, used to pair directions."""
    return phi(y, ystar, ctx) + float(np.asarray(ystar, dtype=float)[-1])


# ---------------------------------------------------------------------------
# incidence verification
# ---------------------------------------------------------------------------

@dataclass
class IncidenceReport:
    ok: bool = True
    pairs: list = field(default_factory=list)
    direction_pairs: list = field(default_factory=list)
    problems: list = field(default_factory=list)

    def fail(self, msg):
        self.ok = False
        self.problems.append(msg)

    def to_text(self):
        lines = ["incidence " + ("ok" if self.ok else "FAILED")]
        for f_star, f, dims in self.pairs:
            lines.append(
                "face* %s <-> face %s  dims %d+%d" % (sorted(f_star), _fmt_face(f), dims[0], dims[1])
            )
        for d, facet in self.direction_pairs:
            lines.append("direction %d <-> vertical facet* %s" % (d, sorted(facet)))
        lines.extend("problem: " + p for p in self.problems)
        return "\n".join(lines)

    def raise_if_failed(self):
        if not self.ok:
            raise IncidenceViolation(self)


def _fmt_face(f):
    pts, dirs = f
    return "pts%s dirs%s" % (sorted(pts), sorted(dirs))


def _affine_dim(points, dirs, tol):
    if len(points) == 0:
        return -1
    p0 = points[0]
    rows = [p - p0 for p in points[1:]] + list(dirs)
    if not rows:
        return 0
    return int(np.linalg.matrix_rank(np.array(rows), tol=max(tol, 1e-7)))


def _face_closure(facet_sets):
    """All intersections of the given facet sets (as frozensets), plus the full set."""
    faces = set()
    frontier = set(facet_sets)
    faces |= frontier
    while frontier:
        new = set()
        for f in frontier:
            for g in facet_sets:
                h = f & g
                if h not in faces:
                    new.add(h)
        faces |= new
        frontier = new
    return faces


def verify_incidence(p_vrep: GeneratorRep, dstar_vrep: GeneratorRep, ctx, tol=1e-7) -> IncidenceReport:
    """Check the inclusion-reversing face correspondence.

    Faces of both sets are enumerated as sets of generator indices obtained by
    intersecting facet incidence sets.  For every K-maximal proper face of the
    lower image the coupled face of the upper image is formed from the
    generators on which ``phi`` (points) or ``phi_hat`` (directions) vanishes;
    the map has to hit every proper face exactly once and satisfy
    ``dim F* + dim F = q - 1``.
    """
    ctx = _ctx(ctx)
    q = ctx.q
    rep = IncidenceReport()
    V = p_vrep.points
    D = normalize_directions(p_vrep.directions)
    Vs = dstar_vrep.points
    nV, nD, nS = V.shape[0], D.shape[0], Vs.shape[0]
    if nV == 0 or nS == 0:
        rep.fail("empty representation")
        return rep

    # lower image: generators are the vertices plus the direction -e^q (index nS)
    down = -np.eye(1, q, q - 1)
    lower = GeneratorRep(Vs, down)
    if q == 1:
        # both sets are half-lines; the only proper faces are the end points
        if nV != 1 or nS != 1 or abs(V[0, 0] - Vs[0, 0]) > tol:
            rep.fail("q=1 end points differ")
        else:
            rep.pairs.append((frozenset([0]), (frozenset([0]), frozenset()), (0, 0)))
        return rep

    hs = v_to_h(lower)
    lower_facets = []
    for a, beta in hs.rows:
        tight = frozenset(
            [i for i in range(nS) if abs(a @ Vs[i] - beta) <= tol]
            + ([nS] if abs(a @ down[0]) <= tol else [])
        )
        lower_facets.append(tight)
    hp = v_to_h(p_vrep)
    upper_sets = []
    for a, beta in hp.rows:
        pts = frozenset(i for i in range(nV) if abs(a @ V[i] - beta) <= tol)
        dirs = frozenset(j for j in range(nD) if abs(a @ D[j]) <= tol)
        upper_sets.append((pts, dirs))

    upper_faces = set()
    for f in _face_closure([frozenset([("p", i) for i in s] + [("d", j) for j in t]) for s, t in upper_sets]):
        pts = frozenset(i for kind, i in f if kind == "p")
        if pts:
            upper_faces.add((pts, frozenset(j for kind, j in f if kind == "d")))

    lower_faces = [f for f in _face_closure(lower_facets) if f and nS not in f]

    def kmax(face):
        centroid = Vs[sorted(face)].mean(axis=0)
        probe = centroid.copy()
        probe[-1] += 1e-5 * max(1.0, abs(probe[-1]))
        return not contains(lower, probe, tol=1e-9)

    hit = {}
    for f_star in sorted(lower_faces, key=lambda s: sorted(s)):
        if not kmax(f_star):
            rep.fail("face* %s is not K-maximal" % sorted(f_star))
            continue
        ys = Vs[sorted(f_star)]
        pts = frozenset(
            i for i in range(nV) if all(abs(phi(V[i], y, ctx)) <= tol for y in ys)
        )
        dirs = frozenset(
            j for j in range(nD) if all(abs(phi_hat(D[j], y, ctx)) <= tol for y in ys)
        )
        image = (pts, dirs)
        if image not in upper_faces:
            rep.fail("face* %s maps to a non-face %s" % (sorted(f_star), _fmt_face(image)))
            continue
        if image in hit:
            rep.fail("faces* %s and %s share an image" % (sorted(hit[image]), sorted(f_star)))
            continue
        hit[image] = f_star
        d_star = _affine_dim(list(ys), [], tol)
        d_img = _affine_dim([V[i] for i in sorted(pts)], [D[j] for j in sorted(dirs)], tol)
        if d_star + d_img != q - 1:
            rep.fail("dimension identity fails for face* %s: %d + %d" % (sorted(f_star), d_star, d_img))
        rep.pairs.append((f_star, image, (d_star, d_img)))
    for face in sorted(upper_faces, key=lambda f: (sorted(f[0]), sorted(f[1]))):
        if face not in hit:
            rep.fail("face %s has no partner" % _fmt_face(face))

    # extreme directions of the upper image against vertical facets
    vertical = [f for f in lower_facets if nS in f]
    used = set()
    for j in range(nD):
        match = None
        for k, f in enumerate(vertical):
            ys = Vs[sorted(i for i in f if i < nS)]
            if all(abs(phi_hat(D[j], y, ctx)) <= tol for y in ys):
                match = k
                break
        if match is None:
            rep.fail("direction %d has no vertical facet* partner" % j)
            continue
        used.add(match)
        rep.direction_pairs.append((j, vertical[match]))
    if len(used) != len(vertical):
        rep.fail("%d vertical facets* without a direction" % (len(vertical) - len(used)))
    return rep

