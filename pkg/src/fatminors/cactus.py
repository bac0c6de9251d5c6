"""The K4-minus pipeline.

Either every leftover component has a boundary that splits into two small
clusters, and then a path-shaped decomposition along a geodesic joining the
clusters does the job, or three boundary vertices lie far apart and we build
a fat K4-minus model from them.

Constants for fatness K: ball radius and outer width 42K+1, spread 28K+1
inside a step, 1 on the step's attachment bag; overall spread 28K+3.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

from .decomp import (
    Ball,
    ContractViolation,
    DriverBounds,
    DriverResult,
    PartialDecomposition,
    StepResult,
    extension_driver,
)
from .graph import (
    Graph,
    GraphError,
    Path,
    ball,
    bfs_layers,
    component_of,
    components,
    dist,
    far_pair_at_least,
    far_triple,
    is_path,
    neighborhood,
    shortest_path,
    shortest_path_in,
)
from .minors import K4minus, MinorModel, fatness

log = logging.getLogger(__name__)


class PreconditionError(GraphError):
    pass


def cactus_bounds(K: int) -> DriverBounds:
    if K < 1:
        raise ValueError("K must be at least 1")
    return DriverBounds(R=42 * K + 1, f0=42 * K + 1, f1p=28 * K + 1, f1pp=1)


def _boundary_of(G: Graph, C) -> frozenset:
    return frozenset(v for v in C if not G.adj(v) <= C)


def fat_k4minus_from_triple(G: Graph, w: int, r: int, C, u1: int, u2: int, u3: int, K: int) -> MinorModel:
    """A K-fat K4-minus model from three far boundary vertices of C.

    C must be a component of G - B(w, r) and the u_i boundary vertices of C
    pairwise at least 7K apart. Pattern vertices: 0 is C, 1 is the inner
    ball B(w, r-3K+1), 2 and 3 are the middle thirds of the first two spokes.
    """
    if K < 1:
        raise PreconditionError("K must be at least 1")
    C = frozenset(C)
    B = ball(G, w, r)
    if C & B or not C or component_of(G, B, min(C)).vertices != C:
        raise PreconditionError("C is not a component of G minus the ball")
    us = (u1, u2, u3)
    bnd = _boundary_of(G, C)
    if any(u not in bnd for u in us):
        raise PreconditionError("the three vertices must lie on the boundary of C")
    for a, b in ((u1, u2), (u1, u3), (u2, u3)):
        if dist(G, a, b) < 7 * K:
            raise PreconditionError(f"vertices {a} and {b} are closer than {7 * K}")
    inner_r = r - 3 * K + 1
    if inner_r < 0:
        raise PreconditionError("ball too small for the construction")
    inner = ball(G, w, inner_r)
    # spokes run from the inner ball out to u_i
    Q = []
    for u in us:
        q = shortest_path(G, inner, {u})
        if q is None or q.length != 3 * K:
            raise ContractViolation("spoke has unexpected length", {"u": u, "length": None if q is None else q.length})
        Q.append(q)
    q1, q2, q3 = Q
    sets = {
        0: C,
        1: inner,
        2: frozenset(q1.sub(K, 2 * K)),
        3: frozenset(q2.sub(K, 2 * K)),
    }
    paths = {
        (0, 1): q3.reverse(),
        (0, 2): q1.sub(2 * K, 3 * K),
        (0, 3): q2.sub(2 * K, 3 * K),
        (1, 2): q1.sub(0, K),
        (1, 3): q2.sub(0, K),
    }
    m = MinorModel(K4minus(), sets, paths)
    f = fatness(G, m)
    if f < K:
        raise ContractViolation("constructed model is not fat enough", {"fatness": f, "K": K})
    return m


def path_ball_decomposition(G: Graph, P, r: int) -> PartialDecomposition:
    """Bags along a geodesic: node j gets the r-balls of all p_j' with |j - j'| <= r+1."""
    P = Path(P)
    if not is_path(G, P):
        raise PreconditionError("not a path")
    if dist(G, P.first, P.last) != P.length:
        raise PreconditionError("path is not a shortest path between its ends")
    balls = [ball(G, p, r) for p in P]
    n = len(P)
    bags = {}
    for j in range(n):
        lo, hi = max(0, j - r - 1), min(n - 1, j + r + 1)
        bags[j] = frozenset().union(*balls[lo : hi + 1])
    support = frozenset().union(*balls)
    return PartialDecomposition.make(Graph(range(n), [(j, j + 1) for j in range(n - 1)]), bags, support)


@dataclass
class PathStep:
    decomposition: PartialDecomposition
    path: Path
    support: frozenset


def _try_triple(G, centre, rho, us, K):
    """Witness from a candidate ball and three vertices if they qualify."""
    if len(set(us)) < 3:
        return None
    B = ball(G, centre, rho)
    if any(u in B for u in us):
        return None
    if any(not (G.adj(u) & B) for u in us):
        return None
    for i in range(3):
        for j in range(i + 1, 3):
            if dist(G, us[i], us[j]) < 7 * K:
                return None
    comp = component_of(G, B, us[0]).vertices
    if not all(u in comp for u in us):
        return None
    return fat_k4minus_from_triple(G, centre, rho, comp, *us, K)


def path_decomposition_step(G: Graph, w: int, r: int, C, K: int):
    """Path-shaped partial decomposition of a long component, or a witness."""
    C = frozenset(C)
    NC = neighborhood(G, C)
    dC = _boundary_of(G, C)
    pair = far_pair_at_least(G, dC, 42 * K + 1)
    if pair is None:
        raise PreconditionError("boundary has no pair of vertices 42K+1 apart")
    v1, v2 = pair
    B1 = ball(G, v1, 21 * K - 1)
    B2 = ball(G, v2, 21 * K - 1)
    N1 = ball(G, v1, 7 * K - 1) & dC
    N2 = ball(G, v2, 7 * K - 1) & dC
    rest = dC - N1 - N2
    if rest:
        u = min(rest)
        log.info("boundary vertex %d far from both clusters", u)
        return fat_k4minus_from_triple(G, w, r, C, v1, v2, u, K)
    P = shortest_path_in(G, N1, N2, B1 | C | B2)
    if P is None or not set(P) <= C:
        raise ContractViolation("no cluster-to-cluster path inside the component", {"v1": v1, "v2": v2})
    p0, pn = P.first, P.last
    for Ni, pe, other in ((N1, p0, v2), (N2, pn, v1)):
        d = bfs_layers(G, pe, limit=7 * K - 1)
        far = sorted(u for u in Ni if u not in d)
        if far:
            return fat_k4minus_from_triple(G, w, r, C, *sorted((far[0], pe, other)), K)
    rP = 14 * K
    # P is a geodesic of G' = G[B1 ∪ C ∪ B2]; its rP-balls agree with those of G
    Gp = G.induced(B1 | C | B2)
    base = path_ball_decomposition(Gp, P, rP)
    Y = base.support & (C | NC)
    n = len(P) - 1
    bags = {}
    for j, b in base.bags.items():
        b = b & Y
        if j not in (0, n):
            b = b - NC
        bags[j] = b
    D = PartialDecomposition.make(base.H, bags, Y)
    witness = _check_admissible(G, w, r, C, P, D, rP, K)
    if witness is not None:
        return witness
    return PathStep(D, P, Y)


def _check_admissible(G, w, r, C, P, D, rP, K):
    """Every component of G - Y inside C has its neighbourhood in one bag.

    When that fails the far-apart case of the argument gives a witness.
    """
    Y = D.support
    idx = D.node_index()
    pballs = None
    for comp in components(G, Y, within=C):
        Nc = comp.neighborhood
        common = None
        for v in Nc:
            s = set(idx.get(v, ()))
            common = s if common is None else common & s
            if not common:
                break
        if common:
            continue
        if pballs is None:
            pballs = [ball(G, p, rP) for p in P]
        J = [j for j, b in enumerate(pballs) if Nc & b]
        j1, j2 = J[0], J[-1]
        ctx = {"component_min": min(comp.vertices), "j1": j1, "j2": j2, "path_length": len(P) - 1}
        if j2 - j1 <= 2 * rP + 2:
            raise ContractViolation("component neighbourhood not in a bag despite short span", ctx)
        m = _admissibility_witness(G, w, r, C, P, comp.vertices, pballs, j1, j2, rP, K)
        if m is None:
            raise ContractViolation("admissibility failed and no witness could be assembled", ctx)
        return m
    return None


def _admissibility_witness(G, w, r, C, P, Cp, pballs, j1, j2, rP, K):
    z = []
    Qs = []
    for j in (j1, j2):
        cand = sorted(v for v in Cp if G.adj(v) & pballs[j])
        zi = cand[0]
        z.append(zi)
        Qs.append(shortest_path(G, {P[j]}, {zi}))
    q1 = Qs[0]
    W1 = shortest_path(G, {w}, {P.first})
    n = len(P) - 1
    attempts = []
    if j1 >= 7 * K + 1 and j1 + 7 * K + 1 <= n and q1.length >= 7 * K + 1:
        attempts.append((P[j1], 7 * K, (P[j1 - 7 * K - 1], P[j1 + 7 * K + 1], q1[7 * K + 1])))
    if j1 <= 7 * K and j1 + 14 * K + 1 <= n:
        idx = r - 14 * K + j1
        if 0 <= idx < len(W1):
            attempts.append((P[j1], 14 * K, (W1[idx], P[j1 + 14 * K + 1], z[0])))
    for centre, rho, us in attempts:
        m = _try_triple(G, centre, rho, us, K)
        if m is not None:
            return m
    return None


def cactus_star_step(G: Graph, B: Ball, C, K: int):
    """One extension step: a decomposition hanging off N(C), or a witness."""
    C = frozenset(C)
    w, r = B.centre, B.radius
    NC = neighborhood(G, C)
    dC = _boundary_of(G, C)
    t = far_triple(G, dC, 7 * K)
    if t is not None:
        return fat_k4minus_from_triple(G, w, r, C, *t, K)
    if far_pair_at_least(G, dC, 42 * K + 1) is None:
        H = Graph([0, 1], [(0, 1)])
        D = PartialDecomposition.make(H, {0: NC, 1: NC | dC}, NC | dC)
        return StepResult(D, 0)
    res = path_decomposition_step(G, w, r, C, K)
    if isinstance(res, MinorModel):
        return res
    D = res.decomposition
    n = len(res.path) - 1
    h = n + 1
    H = Graph(list(D.H.vertices) + [h], list(D.H.edges()) + [(h, 0), (h, n)])
    bags = dict(D.bags)
    bags[h] = NC
    return StepResult(PartialDecomposition.make(H, bags, D.support), h)


def decompose_cactus(G: Graph, K: int, **kw) -> DriverResult:
    """Honest (42K+1, 28K+3)-radial decomposition on a cactus, or a K-fat K4-minus."""
    bounds = cactus_bounds(K)
    res = extension_driver(G, K, cactus_star_step, bounds, X="k4minus", **kw)
    if res.witness is not None:
        f = fatness(G, res.witness)
        if f < K:
            raise ContractViolation("witness is not fat enough", {"fatness": f})
    return res
