"""Random regression corpus of small vector LPs.

Instances are generated from fixed seeds and kept only if the oracle finds
a nonempty upper image without lines.  ``corpus_oracle.json`` freezes the
oracle's vertex and direction sets; regenerate it with
``python3 tests/corpus.py``.
"""
import json
import os

import numpy as np

from vlpbenson.scalarizations import make_problem

HERE = os.path.dirname(os.path.abspath(__file__))
ORACLE_FILE = os.path.join(HERE, "data", "corpus_oracle.json")
CORPUS_SIZE = 50


def random_cone(rng, q):
    """2 to 5 generators of a pointed solid cone in R^q."""
    k = int(rng.integers(max(2, q), 6))
    if q == 2:
        start = rng.uniform(0, 2 * np.pi)
        width = rng.uniform(0.3, 0.85) * np.pi
        angles = np.sort(start + width * np.concatenate([[0, 1], rng.uniform(0, 1, k - 2)]))
        Y = np.vstack([np.cos(angles), np.sin(angles)])
    else:
        axis = rng.normal(size=q)
        axis /= np.linalg.norm(axis)
        Y = []
        while len(Y) < k:
            g = rng.normal(size=q)
            g = g - (g @ axis) * axis
            g = axis + rng.uniform(0.3, 1.2) * g / np.linalg.norm(g)
            Y.append(g)
        Y = np.array(Y).T
        if np.linalg.matrix_rank(Y) < q:
            return random_cone(rng, q)
    return np.round(Y, 3)


def random_instance(seed):
    rng = np.random.default_rng(seed)
    q = int(rng.choice([2, 3]))
    n = int(rng.integers(2, 7))
    m = int(rng.integers(1, 9))
    B = rng.integers(-3, 4, size=(m, n)).astype(float)
    P = rng.integers(-3, 4, size=(q, n)).astype(float)
    x0 = rng.integers(-2, 3, size=n).astype(float)
    r = B @ x0
    a = np.full(m, -np.inf)
    b = np.full(m, np.inf)
    for i in range(m):
        kind = rng.integers(0, 4)
        if kind in (0, 1):
            a[i] = r[i] - rng.integers(0, 3)
        elif kind == 2:
            b[i] = r[i] + rng.integers(0, 3)
        else:
            a[i] = r[i] - rng.integers(0, 3)
            b[i] = r[i] + rng.integers(0, 3)
    lb = np.full(n, -np.inf)
    ub = np.full(n, np.inf)
    bounded = rng.uniform() < 0.4
    for j in range(n):
        kind = rng.integers(0, 4)
        if bounded or kind == 0:
            lb[j] = x0[j] - rng.integers(0, 3)
            ub[j] = x0[j] + rng.integers(0, 3)
        elif kind in (1, 2):
            lb[j] = min(0.0, x0[j])
        elif kind == 3:
            ub[j] = max(0.0, x0[j])
    if rng.uniform() < 0.3:
        Y = np.eye(q)
    else:
        Y = random_cone(rng, q)
    if rng.uniform() < 0.4:
        # recession directions inside x >= lb, objective columns tilted into a
        # halfspace that also contains C: unbounded but line free
        lb = np.where(np.isfinite(lb), lb, x0 - rng.integers(0, 3, size=n))
        ub = np.where(rng.uniform(size=n) < 0.7, np.inf, np.maximum(ub, lb))
        a = np.where(np.isfinite(a), a, r - 1.0)
        b = np.full(m, np.inf)
        B = np.abs(B)
        center = Y.mean(axis=1)
        eta = center / np.linalg.norm(center)
        for j in range(n):
            gap = eta @ P[:, j]
            if gap <= 0.2:
                P[:, j] = np.round(P[:, j] + (0.5 - gap) / (eta @ center) * center, 2)
    return make_problem(B, a, b, lb, ub, P, Y=Y)


def qualifies(vertices, dirs, hrep):
    G, h = hrep
    q = G.shape[1] if G.size else 0
    if vertices.shape[0] == 0 or q == 0:
        return False
    return np.linalg.matrix_rank(G) == q


def build_oracle(count=CORPUS_SIZE):
    from oracles import upper_image_vertices

    out = []
    seed = 0
    while len(out) < count:
        seed += 1
        try:
            prob = random_instance(seed)
            V, D, hrep = upper_image_vertices(prob)
        except ValueError:
            continue
        if not qualifies(V, D, hrep):
            continue
        if V.shape[0] > 40:
            continue
        out.append({"seed": seed, "vertices": V.tolist(), "directions": D.tolist()})
    return out


def load_oracle():
    with open(ORACLE_FILE) as fh:
        return json.load(fh)


if __name__ == "__main__":
    import sys

    sys.path.insert(0, HERE)
    data = build_oracle()
    os.makedirs(os.path.dirname(ORACLE_FILE), exist_ok=True)
    with open(ORACLE_FILE, "w") as fh:
        json.dump(data, fh, indent=1)
    print(len(data), "instances; seeds", [d["seed"] for d in data])
