"""The K4 pipeline.

Constants for fatness K, with hitting multiplier S (129 in production):
R0 = (S+1)·5K, R0' = 3R0+5K+1, ell = 2R0+5K+2, R1 = 4(2(ell+22K+1)+11K+2),
R2 = 2R1+5K+3, f0 = R2+2R0'+2. A single step has spread at most 7, the
whole decomposition at most 22.

A step either finds three far boundary vertices beyond a collar around the
ball, and then hangs series-parallel pieces between a far ball and the old
ball, or every far region has a boundary in two clusters and the pieces
hang between the clusters. Inside a piece, balls hitting every path between
two balls are found by a coarse Menger search; when it yields two far paths
instead, a fat K4 is built.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

from .decomp import (
    Ball,
    ContractViolation,
    DriverBounds,
    DriverResult,
    PartialDecomposition,
    StepResult,
    extension_driver,
    prune,
    restrict,
    validate,
)
from .graph import (
    INF,
    Graph,
    GraphError,
    Path,
    ball,
    bfs_layers,
    checks_enabled,
    component_of,
    components,
    dist,
    far_pair_at_least,
    far_triple,
    is_connected_set,
    is_path,
    neighborhood,
    radius_and_centre,
    shortest_path,
    shortest_path_in,
)
from .minors import K4, BudgetExceeded, MinorModel, TwoTerminalGraph, _Budget, fatness, in_HSP, is_minor_free

log = logging.getLogger(__name__)


class PreconditionError(GraphError):
    pass


# --- constants ---------------------------------------------------------------


@dataclass(frozen=True)
class ConstantsBundle:
    K: int
    S: int = 129

    @property
    def hit(self) -> int:
        """Radius of the hitting balls from the coarse Menger search."""
        return self.S * 5 * self.K

    @property
    def R0(self) -> int:
        return (self.S + 1) * 5 * self.K

    @property
    def R0p(self) -> int:
        return 3 * self.R0 + 5 * self.K + 1

    @property
    def ell(self) -> int:
        return 2 * self.R0 + 5 * self.K + 2

    @property
    def R1(self) -> int:
        K = self.K
        return 4 * (2 * (self.ell + 22 * K + 1) + 11 * K + 2)

    @property
    def R2(self) -> int:
        return 2 * self.R1 + 5 * self.K + 3

    @property
    def f0(self) -> int:
        return self.R2 + 2 * self.R0p + 2

    f1p = 7
    f1pp = 7

    @property
    def f1(self) -> int:
        return self.f1p + 2 * self.f1pp + 1

    @property
    def scaled(self) -> bool:
        return self.S != 129

    def as_tuple(self):
        return (self.R0, self.R0p, self.ell, self.R1, self.R2, self.f0, self.f1)

    def bounds(self) -> DriverBounds:
        return DriverBounds(R=self.R2, f0=self.f0, f1p=self.f1p, f1pp=self.f1pp)

    def qi(self):
        """Constants of the map read off a decomposition, and of its inverse."""
        M = max(2 * self.f0, 2 * self.f1)
        return (M, M), (M, 3 * M * M)


def check_inequalities(cb: ConstantsBundle) -> list[tuple[str, bool]]:
    """The linear inequalities between constants that the construction relies on."""
    K = cb.K
    return [
        ("hitting radius plus 5K equals R0", cb.R0 == cb.hit + 5 * K),
        ("far-ball radius 22K is at most R0", 22 * K <= cb.R0),
        ("collar-shifted ell is at least 6·11K", cb.ell + 22 * K + 1 >= 66 * K),
        ("ell is at least R0 + 5K", cb.ell >= cb.R0 + 5 * K),
        ("R1 - 1 is at least 5K", cb.R1 - 1 >= 5 * K),
        ("R1 exceeds twice the collar-shifted ell", cb.R1 > 2 * (cb.ell + 22 * K + 1)),
        ("R2 - 1 is at least 2 ell + 2 R0'", cb.R2 - 1 >= 2 * cb.ell + 2 * cb.R0p),
        ("f0 covers the collar bag", cb.f0 >= cb.R2 + 22 * K + 1),
        ("f0 covers the cluster bags", cb.f0 >= cb.R1 + 2 * cb.R0 + 5 * K + 2),
        ("f1 = 7 + 2·7 + 1", cb.f1 == 22),
    ]


def constants(K: int, scale: int | None = None) -> ConstantsBundle:
    """Exact constants for fatness K; `scale` replaces the multiplier 129."""
    if not isinstance(K, int) or K < 1:
        raise ValueError("K must be a positive integer")
    if scale is None:
        return ConstantsBundle(K)
    cb = ConstantsBundle(K, int(scale))
    bad = [name for name, ok in check_inequalities(cb) if not ok]
    if bad:
        raise ValueError(f"scale {scale} breaks: {', '.join(bad)}")
    return cb


# --- small path utilities ----------------------------------------------------


def _loop_erase(walk) -> Path:
    out: list = []
    pos: dict = {}
    for v in walk:
        if v in pos:
            k = pos[v]
            for x in out[k + 1 :]:
                del pos[x]
            del out[k + 1 :]
        else:
            pos[v] = len(out)
            out.append(v)
    return Path(out)


def _trim(p, X, Y) -> Path | None:
    """The X–Y subpath ending at the first vertex of p in Y."""
    p = list(p)
    for seq in (p, p[::-1]):
        j = next((k for k, v in enumerate(seq) if v in Y), None)
        if j is None:
            continue
        i = max((k for k in range(j + 1) if seq[k] in X), default=None)
        if i is not None:
            return Path(seq[i : j + 1])
    return None


def _concat(*parts) -> list:
    out: list = []
    for p in parts:
        p = list(p)
        if out and p and out[-1] == p[0]:
            p = p[1:]
        out.extend(p)
    return out


def set_distance(G: Graph, A, B, cap=None):
    """d_G(A, B), or cap + 1 once it is known to exceed cap."""
    A, B = frozenset(A), frozenset(B)
    if A & B:
        return 0
    d = bfs_layers(G, A, limit=cap)
    best = min((d[v] for v in B if v in d), default=INF)
    if best is INF and cap is not None:
        return cap + 1
    return best


def _orient(G, p, X, Y) -> Path:
    p = Path(p)
    if p.first in X and p.last in Y:
        return p
    if p.last in X and p.first in Y:
        return p.reverse()
    raise PreconditionError("path does not run between the two balls")


def _is_ball_path(p, X, Y) -> bool:
    """First vertex in X, last in Y, interior avoiding both."""
    return len(p) >= 2 and p[0] in X and p[-1] in Y and not (set(p[1:-1]) & (X | Y))


# --- fat K4 from three far paths ---------------------------------------------


def fat_k4_from_three_paths(G: Graph, v1: int, v2: int, r1: int, r2: int, P1, P2, P3, K: int) -> MinorModel:
    """A K-fat K4 from three far B1–B2 paths, two of which share a component off the balls."""
    if K < 1:
        raise PreconditionError("K must be at least 1")
    if min(r1, r2) <= 2 * K:
        raise PreconditionError("ball radii must exceed 2K")
    if dist(G, v1, v2) < r1 + r2 + 5 * K:
        raise PreconditionError("ball centres are too close")
    B1, B2 = ball(G, v1, r1), ball(G, v2, r2)
    outer = B1 | B2
    Ps = []
    for p in (P1, P2, P3):
        if not is_path(G, p):
            raise PreconditionError("not a path")
        p = _orient(G, p, B1, B2)
        if not _is_ball_path(p, B1, B2):
            raise PreconditionError("paths must be B1–B2 paths")
        Ps.append(p)
    for i in range(3):
        for j in range(i + 1, 3):
            if set_distance(G, Ps[i], Ps[j], cap=5 * K) < 5 * K:
                raise PreconditionError(f"paths {i + 1} and {j + 1} are closer than {5 * K}")
    comp = []
    for p in Ps:
        inner = p[1:-1]
        comp.append(component_of(G, outer, inner[0]).vertices if inner else None)
    pair = next(((i, j) for i in range(3) for j in range(i + 1, 3) if comp[i] is not None and comp[i] == comp[j]), None)
    if pair is None:
        raise PreconditionError("no two path interiors share a component off the balls")
    a = pair[0]
    C = comp[a]
    inner1, inner2 = ball(G, v1, r1 - 2 * K), ball(G, v2, r2 - 2 * K)
    Q = []
    for p in Ps:
        q = shortest_path_in(G, inner1, inner2, B1 | B2 | set(p))
        if q is None:
            raise ContractViolation("no inner-ball path along a far path", {})
        Q.append(q)
    others = [i for i in range(3) if i != a]
    near = {i: ball(G, Q[i], K) for i in others}
    W = shortest_path_in(G, set(Q[a]) & C, (near[others[0]] | near[others[1]]) & C, C)
    if W is None:
        raise ContractViolation("no connecting path inside the shared component", {})
    b = others[0] if W.last in near[others[0]] else others[1]
    c = others[1] if b == others[0] else others[0]
    q1, q2, q3 = Q[a], Q[b], Q[c]
    # W' runs inside the K-ball around Q2 together with W
    verts = near[b] | set(W)
    Gw = Graph(verts, list(G.induced(near[b]).edges()) + list(zip(W, W[1:])))
    Wp = shortest_path(Gw, set(q1) & verts, set(q2))
    if Wp is None:
        raise ContractViolation("no path from Q1 to Q2 near W", {})
    m, n1, n2 = Wp.length, q1.length, q2.length
    if m < 2 * K or n1 < 2 * K or n2 < 2 * K:
        raise ContractViolation("paths too short for the construction", {"m": m})
    sets = {
        0: set(q1.sub(K, n1 - K)) | set(Wp.sub(0, K)),
        1: set(q2.sub(K, n2 - K)) | set(Wp.sub(m - K, m)),
        2: inner1,
        3: inner2,
    }
    paths = {
        (0, 1): Wp.sub(K, m - K),
        (0, 2): q1.sub(0, K),
        (1, 2): q2.sub(0, K),
        (0, 3): q1.sub(n1 - K, n1),
        (1, 3): q2.sub(n2 - K, n2),
        (2, 3): q3,
    }
    model = MinorModel(K4(), sets, paths)
    f = fatness(G, model)
    if f < K:
        raise ContractViolation("constructed K4 model is not fat enough", {"fatness": f, "K": K})
    return model


# --- coarse Menger for two paths ---------------------------------------------


class HittingBall(NamedTuple):
    centre: int
    radius: int
    path: Path


class TwoPaths(NamedTuple):
    first: Path
    second: Path


def _separates(G: Graph, X, Y, removed) -> bool:
    Xs, Ys = X - removed, Y - removed
    if not Xs or not Ys:
        return True
    reach = bfs_layers(G, Xs, allowed=G.vertex_set() - removed)
    return not any(y in reach for y in Ys)


def _xy_path(G: Graph, X, Y, forbidden=frozenset()) -> Path | None:
    Xs, Ys = X - forbidden, Y - forbidden
    if not Xs or not Ys:
        return None
    allowed = G.vertex_set() - forbidden - X - Y
    return shortest_path(G, Xs, Ys, allowed=allowed)


def coarse_menger_two_paths(G: Graph, X, Y, d: int, S: int = 129, budget=None, ambient: Graph | None = None,
                            exhaustive_limit: int = 24):
    """A ball of radius S·d on a shortest X–Y path meeting every X–Y path, or two X–Y paths d apart.

    Balls are measured in `ambient` (default G); paths live in G. Raises
    BudgetExceeded when neither certificate turns up within the budget.
    """
    X, Y = frozenset(X), frozenset(Y)
    if not X or not Y:
        raise PreconditionError("X and Y must be nonempty")
    if d < 1:
        raise PreconditionError("d must be positive")
    amb = ambient if ambient is not None else G
    tick = (budget if isinstance(budget, _Budget) else _Budget(budget)).tick
    Q = _xy_path(G, X, Y)
    if Q is None:
        if X & Y:
            Q = Path((min(X & Y),))
        else:
            raise PreconditionError("no X–Y path")
    rho = S * d
    avoiders = []
    for z in Q:
        tick()
        Bz = ball(amb, z, rho) & G.vertex_set()
        if _separates(G, X, Y, Bz):
            return HittingBall(z, rho, Q)
        p = _xy_path(G, X, Y, Bz)
        if p is not None:
            avoiders.append(p)
    cands = [Q] + avoiders
    for x in sorted(X):
        p = _xy_path(G, frozenset((x,)) | (X - X), Y)
        if p is not None and p[0] in X and not (set(p[1:-1]) & (X | Y)):
            cands.append(p)
    seen = set()
    for P1 in cands:
        if P1 in seen:
            continue
        seen.add(P1)
        tick()
        P2 = _xy_path(G, X, Y, ball(G, P1, d - 1))
        if P2 is not None:
            return TwoPaths(P1, P2)
    if G.n <= exhaustive_limit:
        import networkx as nx

        g = nx.Graph(list(G.edges()))
        g.add_nodes_from(G.vertices)
        for x in sorted(X):
            for y in sorted(Y):
                if x == y:
                    continue
                for p in nx.all_simple_paths(g, x, y):
                    tick()
                    if set(p[1:-1]) & (X | Y):
                        continue
                    P2 = _xy_path(G, X, Y, ball(G, p, d - 1))
                    if P2 is not None:
                        return TwoPaths(Path(p), P2)
    raise BudgetExceeded(f"coarse Menger search found neither a hitting ball of radius {rho} nor two paths {d} apart")


# --- hitting balls inside a component between two balls ----------------------


class Split(NamedTuple):
    centre: int
    path: Path


def _two_ball_premise(G, v1, v2, r1, r2, C, P, K):
    B1, B2 = ball(G, v1, r1), ball(G, v2, r2)
    if dist(G, v1, v2) < r1 + r2 + 5 * K + 2:
        raise PreconditionError("ball centres are too close")
    if not C or C & (B1 | B2):
        raise PreconditionError("component meets the balls")
    if component_of(G, B1 | B2, min(C)).vertices != C:
        raise PreconditionError("not a component off the two balls")
    NC = neighborhood(G, C)
    if not (NC & B1) or not (NC & B2):
        raise PreconditionError("component does not attach to both balls")
    if not is_path(G, P):
        raise PreconditionError("far path is not a path")
    P = _orient(G, P, B1, B2)
    if set_distance(G, P, C | NC, cap=5 * K) < 5 * K:
        raise PreconditionError(f"far path is closer than {5 * K} to the component")
    return B1, B2, NC, P


def hitting_ball_in_component(G: Graph, v1: int, v2: int, r1: int, r2: int, C, P, K: int,
                              cb: ConstantsBundle | None = None, budget=None):
    """A vertex u near C whose hitting ball meets every N1–N2 path through C, or a fat K4."""
    cb = cb or constants(K)
    C = frozenset(C)
    B1, B2, NC, P = _two_ball_premise(G, v1, v2, r1, r2, C, P, K)
    N1, N2 = NC & B1, NC & B2
    t = -(-5 * K // 2)
    ext = ball(G, B1 | B2, t)
    core = C | NC
    Gp = Graph(core | ext, list(G.induced(core).edges()) + list(G.induced(ext).edges()))
    res = coarse_menger_two_paths(Gp, N1, N2, 5 * K, cb.S, budget, ambient=G)
    if isinstance(res, TwoPaths):
        log.info("two far paths through a component; building a fat K4")
        return fat_k4_from_three_paths(G, v1, v2, r1, r2, res.first, res.second, P, K)
    u = res.centre
    if u not in core:
        raise ContractViolation("splitting vertex is not next to the component", {"u": u})
    Bu = ball(G, u, cb.hit)
    reach = bfs_layers(G, N1 - Bu, allowed=C - Bu)
    if any(y in reach or (G.adj(y) & reach.keys()) for y in N2 - Bu):
        raise ContractViolation("hitting ball misses a path through the component", {"u": u})
    return Split(u, res.path)


def _far_path(G, P, Bend, Bother, D, Bx, target, K):
    """A Bend–Bx path at distance >= 5K from target ∪ N(target).

    Extends P through the other ball into D as in the hitting-ball argument;
    falls back to a direct search if that path comes too close.
    """
    P = _orient(G, P, Bend, Bother)
    close = target | neighborhood(G, target)
    if Bx & Bother:
        tail = shortest_path_in(G, {P.last}, Bx & Bother, Bother)
        walk = _concat(P, tail) if tail is not None else None
    else:
        ND = neighborhood(G, D) & Bother
        P1 = shortest_path_in(G, {P.last}, ND, Bother)
        walk = None
        if P1 is not None:
            P2 = shortest_path(G, {P1.last}, Bx, allowed=D)
            if P2 is not None:
                walk = _concat(P, P1, P2)
    if walk is not None:
        cand = _trim(_loop_erase(walk), Bend, Bx)
        if cand is not None and set_distance(G, cand, close, cap=5 * K) >= 5 * K:
            return cand
    log.info("extended far path came too close; searching directly")
    forb = ball(G, close, 5 * K - 1)
    p = shortest_path(G, Bend - forb, Bx - forb, allowed=G.vertex_set() - forb - Bend - Bx)
    if p is None:
        raise ContractViolation("no far path for a sub-component", {"component_min": min(target)})
    return p


# --- the two-ball recursion --------------------------------------------------


@dataclass
class TwoBallResult:
    decomposition: PartialDecomposition
    h1: int
    h2: int
    centres: dict
    radii: dict
    splits: int

    @property
    def terminal_graph(self) -> TwoTerminalGraph:
        return TwoTerminalGraph(self.decomposition.H, self.h1, self.h2)


def _long(G, centre, rad, a, b, K) -> bool:
    return dist(G, centre[a], centre[b]) >= rad[a] + rad[b] + 5 * K + 2


def two_ball_component_decomposition(G: Graph, v1: int, v2: int, r1: int, r2: int, C, P, K: int,
                                     cb: ConstantsBundle | None = None, budget=None):
    """Series-parallel decomposition of a component lying between two balls, or a fat K4.

    Long pieces are split at hitting-ball centres until every remaining
    piece sits between two nearby balls; then long edges are dropped and the
    rest subdivided, the middle bag being the union of the two end bags.
    """
    cb = cb or constants(K)
    C = frozenset(C)
    B1, B2, NC, P = _two_ball_premise(G, v1, v2, r1, r2, C, P, K)
    centre, rad = {0: v1, 1: v2}, {0: r1, 1: r2}
    balls = {0: B1, 1: B2}
    bags = {0: NC & B1, 1: NC & B2}
    edges = {(0, 1)}
    work = [(C, 0, 1, P)]
    splits = 0
    while work:
        D, a, b, PD = work.pop()
        if not _long(G, centre, rad, a, b, K):
            continue
        splits += 1
        if splits > len(C):
            raise ContractViolation("splitting did not terminate", {"splits": splits})
        res = hitting_ball_in_component(G, centre[a], centre[b], rad[a], rad[b], D, PD, K, cb, budget)
        if isinstance(res, MinorModel):
            return res
        x = len(centre)
        centre[x], rad[x] = res.centre, cb.R0
        balls[x] = ball(G, res.centre, cb.R0)
        bags[x] = balls[x] & (D | neighborhood(G, D))
        edges |= {(a, x), (x, b)}
        for sub in components(G, bags[x], within=D):
            N = sub.neighborhood
            if any(N <= bags[h] for h in (a, b, x)):
                continue
            at_a, at_b = bool(N & (bags[a] - bags[x])), bool(N & (bags[b] - bags[x]))
            if at_a and at_b:
                raise ContractViolation("piece still joins both old bags after a split", {"u": res.centre})
            end = a if at_a else b
            other = b if end == a else a
            Pn = _far_path(G, PD, balls[end], balls[other], D, balls[x], sub.vertices, K)
            work.append((sub.vertices, end, x, Pn) if end == a else (sub.vertices, x, end, Pn))
    # drop long edges, subdivide the rest
    H_nodes = list(centre)
    H_edges = []
    out_bags = dict(bags)
    nxt = len(centre)
    for a, b in sorted(edges):
        if _long(G, centre, rad, a, b, K):
            continue
        s = nxt
        nxt += 1
        H_nodes.append(s)
        out_bags[s] = bags[a] | bags[b]
        H_edges += [(a, s), (s, b)]
    D = PartialDecomposition.make(Graph(H_nodes, H_edges), out_bags)
    out = TwoBallResult(D, 0, 1, centre, rad, splits)
    if checks_enabled():
        bad = check_two_ball(G, out, v1, v2, r1, r2, C, K, cb)
        if bad:
            raise ContractViolation("two-ball guarantees fail: " + bad[0], {"failures": bad})
    return out


def check_two_ball(G, res: TwoBallResult, v1, v2, r1, r2, C, K, cb) -> list[str]:
    """Failed guarantees of the two-ball decomposition, as short labels."""
    C = frozenset(C)
    D = res.decomposition
    H = D.H
    bad = []
    rep = validate(G, D, metrics=False)
    if not rep.ok or not rep.honest:
        bad.append("not an honest decomposition: " + "; ".join(rep.violations[:2]))
    if not in_HSP(res.terminal_graph):
        bad.append("H is not series-parallel between its terminals")
    if not D.support <= C | neighborhood(G, C):
        bad.append("support leaves the closed neighbourhood")
    NC = neighborhood(G, C)
    B = {res.h1: ball(G, v1, r1), res.h2: ball(G, v2, r2)}
    for h in (res.h1, res.h2):
        if D.bags[h] != NC & B[h]:
            bad.append("(a) terminal bag is not N(C) ∩ ball")
    near = {h for t in (res.h1, res.h2) for h in [t, *H.neighbors(t)]}
    for h in H.vertices:
        if h in near:
            continue
        if radius_and_centre(G, D.bags[h])[0] > cb.R0p:
            bad.append(f"(b) bag {h} radius exceeds R0'")
            break
    for t, (v, r) in ((res.h1, (v1, r1)), (res.h2, (v2, r2))):
        cap = r + 2 * cb.R0 + 5 * K + 1
        dv = bfs_layers(G, v, limit=cap)
        for h in [t, *H.neighbors(t)]:
            if any(x not in dv for x in D.bags[h]):
                bad.append(f"(c) bag {h} leaves the ball of radius {cap} around a terminal centre")
    rep = validate(G, D, metrics=True)
    if rep.irs > 3:
        bad.append("(d) spread exceeds 3")
    idx = D.node_index()
    for t in (res.h1, res.h2):
        dt = bfs_layers(H, t)
        for v in D.bags[t]:
            if any(dt.get(h, INF) > 3 for h in idx[v]):
                bad.append("(d) a terminal vertex spreads beyond distance 3")
                break
    for comp in components(G, D.support, within=C):
        if not any(comp.neighborhood <= b for b in D.bags.values()):
            bad.append("(e) a leftover component has no host bag")
            break
    return bad


# --- bipartitioned boundary ----------------------------------------------------


class _Builder:
    def __init__(self):
        self.bags: dict = {}
        self.edges: set = set()

    def node(self, bag=frozenset()) -> int:
        h = len(self.bags)
        self.bags[h] = frozenset(bag)
        return h

    def edge(self, a, b):
        if a != b:
            self.edges.add((min(a, b), max(a, b)))

    def embed(self, D: PartialDecomposition, fixed: dict) -> dict:
        mp = {}
        for h in D.H.vertices:
            mp[h] = fixed[h] if h in fixed else self.node(D.bags[h])
        for a, b in D.H.edges():
            self.edge(mp[a], mp[b])
        return mp

    def build(self, support=None) -> PartialDecomposition:
        H = Graph(range(len(self.bags)), sorted(self.edges))
        return PartialDecomposition.make(H, self.bags, support)


@dataclass
class SPStep:
    decomposition: PartialDecomposition
    anchor: int
    branch: str
    terminals: tuple = ()

    def as_step(self) -> StepResult:
        return StepResult(self.decomposition, self.anchor)


def _boundary_of(G: Graph, C) -> frozenset:
    return frozenset(v for v in C if not G.adj(v) <= C)


def bipartitioned_boundary_step(G: Graph, w: int, r: int, C, v1: int, v2: int, K: int,
                                cb: ConstantsBundle | None = None, budget=None):
    """Decomposition of a component whose boundary lies in two far clusters, or a fat K4."""
    cb = cb or constants(K)
    C = frozenset(C)
    R1 = cb.R1
    B = ball(G, w, r)
    if C & B or component_of(G, B, min(C)).vertices != C:
        raise PreconditionError("C is not a component of G minus the ball")
    dC = _boundary_of(G, C)
    if v1 not in dC or v2 not in dC:
        raise PreconditionError("cluster centres must lie on the boundary")
    if dist(G, v1, v2) < 2 * R1 + 5 * K + 2:
        raise PreconditionError("cluster centres are too close")
    B1, B2 = ball(G, v1, R1), ball(G, v2, R1)
    if not dC <= B1 | B2:
        raise PreconditionError("boundary is not covered by the two cluster balls")
    NC = neighborhood(G, C)
    W = _concat(shortest_path(G, B1, {w}), shortest_path(G, {w}, B2))
    P = _trim(_loop_erase(W), B1, B2)
    if P is None or set_distance(G, P, C | NC, cap=5 * K) < 5 * K:
        raise ContractViolation("path through the ball centre is too close to the component", {})
    bld = _Builder()
    h1 = bld.node((B1 & C) | (NC & ball(G, B1, 1)))
    h2 = bld.node((B2 & C) | (NC & ball(G, B2, 1)))
    g = bld.node(NC)
    bld.edge(h1, g)
    bld.edge(g, h2)
    support = set(bld.bags[h1] | bld.bags[h2] | NC)
    pieces = 0
    for comp in components(G, B1 | B2, within=C):
        if not (comp.neighborhood & B1 and comp.neighborhood & B2):
            continue
        res = two_ball_component_decomposition(G, v1, v2, R1, R1, comp.vertices, P, K, cb, budget)
        if isinstance(res, MinorModel):
            return res
        bld.embed(res.decomposition, {res.h1: h1, res.h2: h2})
        support |= res.decomposition.support
        pieces += 1
    D = bld.build(support)
    out = SPStep(D, g, "bipartitioned", (h1, h2))
    log.debug("bipartitioned step: %d pieces", pieces)
    if checks_enabled():
        bad = check_bipartitioned(G, out, r, C, K, cb)
        if bad:
            raise ContractViolation("bipartitioned step guarantees fail: " + bad[0], {"failures": bad})
    return out


def check_bipartitioned(G, step: SPStep, r, C, K, cb) -> list[str]:
    C = frozenset(C)
    D = step.decomposition
    NC = neighborhood(G, C)
    bad = []
    rep = validate(G, D)
    if not rep.ok or not rep.honest:
        bad.append("not an honest decomposition")
    if not _boundary_of(G, C) <= D.support or not D.support <= C | NC:
        bad.append("support does not sit between the boundary and the closed neighbourhood")
    if D.bags[step.anchor] != NC:
        bad.append("(i) N(C) is not the anchor bag")
    cap = cb.R1 + 2 * cb.R0 + 5 * K + 2
    if rep.orw > max(r, cap):
        bad.append("(ii) bag radius too large")
    if rep.irs > 3:
        bad.append("(iii) spread exceeds 3")
    if not in_HSP(TwoTerminalGraph(D.H, *step.terminals)):
        bad.append("H is not series-parallel between its terminals")
    for comp in components(G, D.support, within=C):
        if not any(comp.neighborhood <= b and rep.bag_radii[h] <= cap for h, b in D.bags.items()):
            bad.append("(iv) a leftover component has no small host bag")
            break
    return bad


# --- three far boundary vertices -----------------------------------------------


class ThreePaths(NamedTuple):
    centre: int
    paths: tuple


def _descent(G, dB, v, C) -> list:
    out = [v]
    while dB[out[-1]] > 1:
        u = out[-1]
        out.append(min(y for y in G.adj(u) if y in C and dB.get(y) == dB[u] - 1))
    return out


def three_paths_far_apart(G: Graph, w: int, r: int, C, ell: int, d: int) -> ThreePaths:
    """A vertex w' of C and three B(w, r-ell)–B(w', 2d) paths pairwise >= d apart."""
    if ell < 6 * d or d < 1:
        raise PreconditionError("need ell >= 6d and d >= 1")
    if r < ell:
        raise PreconditionError("need r >= ell")
    C = frozenset(C)
    B = ball(G, w, r)
    if not C or C & B or component_of(G, B, min(C)).vertices != C:
        raise PreconditionError("C is not a component of G minus the ball")
    dC = _boundary_of(G, C)
    T = 2 * ell + d + 2
    t = far_triple(G, dC, 4 * T)
    if t is None:
        raise PreconditionError(f"no three boundary vertices pairwise {4 * T} apart")
    us = list(t)
    inner = ball(G, w, r - ell)
    dB = bfs_layers(G, B, allowed=C)
    near = [frozenset(bfs_layers(G, u, limit=T - 1)) for u in us]
    # U_i: vertices all of whose shortest routes to B leave C close to u_i
    alln = [dict() for _ in range(3)]
    for v in sorted(C, key=lambda v: (dB[v], v)):
        if dB[v] == 1:
            for i in range(3):
                alln[i][v] = v in near[i]
        else:
            preds = [y for y in G.adj(v) if y in C and dB.get(y) == dB[v] - 1]
            for i in range(3):
                alln[i][v] = all(alln[i][y] for y in preds)
    U = [frozenset(v for v in C if alln[i][v]) for i in range(3)]
    Pp = shortest_path_in(G, U[0], U[1] | U[2], C)
    if Pp is None:
        raise ContractViolation("no path between the attribution classes", {})
    if Pp.last in U[2]:
        us[1], us[2], U[1], U[2] = us[2], us[1], U[2], U[1]
    P = Path(_concat(_descent(G, dB, Pp.first, C)[::-1], Pp, _descent(G, dB, Pp.last, C)))
    if not is_path(G, P):
        raise ContractViolation("extended attribution path is not a path", {})
    u3 = us[2]
    BP = ball(G, P, 2 * d)
    Q = shortest_path_in(G, {u3}, BP & C, C)
    if Q is None:
        raise ContractViolation("no path from the third vertex towards P", {})
    dq = bfs_layers(G, Q.last, limit=2 * d)
    p = next(x for x in P if x in dq)
    if p in U[2]:
        raise ContractViolation("attachment vertex on P is attributed to the third vertex", {"p": p})
    dp = bfs_layers(G, p, allowed=C, limit=dB[p] - 1)
    exits = sorted(x for x in dC if dp.get(x) == dB[p] - 1 and x not in near[2])
    if not exits:
        raise ContractViolation("no exit far from the third vertex", {"p": p})
    pprime = exits[0]
    W = Path(_concat(shortest_path_in(G, {p}, {pprime}, C), shortest_path(G, {pprime}, inner)))
    if W.length != dB[p] + ell or not is_path(G, W):
        raise ContractViolation("route to the inner ball is not shortest", {"length": W.length})
    if dist(G, pprime, us[1]) < 2 * T:
        P = P.reverse()
        us[0], us[1] = us[1], us[0]
    pm = P.last
    dW = bfs_layers(G, W, limit=2 * d)
    x3 = next(v for v in Q if v in dW)
    x2 = [v for v in P if v in dW][-1]
    Q2 = shortest_path(G, {pm}, inner)
    Q3 = shortest_path(G, {u3}, inner)
    arm2 = _concat(P.sub(P.index(x2), P.length), Q2)
    arm3 = _concat(Q.sub(Q.index(x3), 0), Q3)
    dx2 = bfs_layers(G, x2, limit=2 * d)
    dx3 = bfs_layers(G, x3)
    I2 = [i for i, x in enumerate(W) if x in dx2]
    m3 = min(dx3[x] for x in W)
    I3 = [i for i, x in enumerate(W) if dx3[x] == m3]
    k = W.length
    tried = 0
    for i2 in I2:
        for i3 in I3:
            tried += 1
            if tried > 64:
                break
            if i3 <= i2:
                top, xs, i_low, low_arm, high_arm = i2, x3, i3, arm3, arm2
            else:
                top, xs, i_low, low_arm, high_arm = i3, x2, i2, arm2, arm3
            if top + 2 * d > k:
                continue
            wp = W[top]
            Rp = _concat(shortest_path(G, {xs}, {W[i_low]}), W.sub(i_low, top))
            dtop = bfs_layers(G, wp, limit=2 * d)
            j = next(j for j, v in enumerate(Rp) if v in dtop)
            A = ball(G, wp, 2 * d)
            cand = [
                W.sub(top + 2 * d, k),
                _concat(Rp[: j + 1][::-1], low_arm),
                high_arm,
            ]
            paths = []
            for c in cand:
                q = _trim(_loop_erase(c), A, inner)
                if q is None:
                    break
                paths.append(q)
            if len(paths) < 3:
                continue
            if all(set_distance(G, paths[a], paths[b], cap=d) >= d for a in range(3) for b in range(a + 1, 3)):
                return ThreePaths(wp, tuple(paths))
    raise ContractViolation("three far paths could not be certified", {"candidates": tried})


class FarComponents(NamedTuple):
    centre: int
    paths: tuple
    assignment: dict


def ball_and_three_components(G: Graph, w: int, r: int, C, K: int, ell: int):
    """w' in C with, for every piece between B(w, r-ell) and B(w', 22K), a path 5K away; or a fat K4."""
    if ell < 66 * K:
        raise PreconditionError("need ell >= 66K")
    C = frozenset(C)
    tp = three_paths_far_apart(G, w, r, C, ell, 11 * K)
    wp = tp.centre
    Bp, A = ball(G, w, r - ell), ball(G, wp, 22 * K)
    nears = [frozenset(bfs_layers(G, p, limit=5 * K - 1)) for p in tp.paths]
    assignment = {}
    for comp in components(G, Bp | A):
        N = comp.neighborhood
        if not (N & Bp and N & A):
            continue
        closed = comp.vertices | N
        i = next((i for i in range(3) if not (closed & nears[i])), None)
        if i is None:
            log.info("all three far paths come close to one piece; building a fat K4")
            r1, r2 = r - ell - 3 * K, 19 * K
            inner1, inner2 = ball(G, w, r1), ball(G, wp, r2)
            short = [shortest_path_in(G, inner1, inner2, set(p) | Bp | A) for p in tp.paths]
            return fat_k4_from_three_paths(G, w, wp, r1, r2, *short, K)
        assignment[min(comp.vertices)] = tp.paths[i]
    return FarComponents(wp, tp.paths, assignment)


# --- absorbing the old ball ----------------------------------------------------


@dataclass
class AbsorbResult:
    decomposition: PartialDecomposition
    h1: int
    h2: int


def two_ball_decomposition_absorbing(G: Graph, v1: int, v2: int, r1: int, r2: int, D, P, K: int,
                                     cb: ConstantsBundle | None = None, budget=None):
    """Two-ball decomposition whose second terminal bag swallows B(v2, r2); or a fat K4.

    D is a piece between B(v1, r1) and the shrunken ball B(v2, r2 - ell).
    """
    cb = cb or constants(K)
    D = frozenset(D)
    if r1 > cb.R0:
        raise PreconditionError("first radius exceeds R0")
    if r2 <= cb.ell:
        raise PreconditionError("second radius must exceed ell")
    if dist(G, v1, v2) < r1 + r2 + 2:
        raise PreconditionError("ball centres are too close")
    r2p = r2 - cb.ell
    B1, B2, B2p = ball(G, v1, r1), ball(G, v2, r2), ball(G, v2, r2p)
    if not D or D & (B1 | B2p) or component_of(G, B1 | B2p, min(D)).vertices != D:
        raise PreconditionError("D is not a component off the two balls")
    ND = neighborhood(G, D)
    if not (ND & B1 and ND & B2p):
        raise PreconditionError("D does not attach to both balls")
    res = two_ball_component_decomposition(G, v1, v2, r1, r2p, D, P, K, cb, budget)
    if isinstance(res, MinorModel):
        return res
    D1 = res.decomposition
    B2plus = ball(G, v2, r2 + 1)
    Ht = {h for h in D1.H.vertices if D1.bags[h] & B2plus}
    if res.h2 not in Ht or res.h1 in Ht or not is_connected_set(D1.H, Ht):
        raise ContractViolation("nodes meeting the enlarged ball do not form a connected set around the terminal", {})
    mp = {h: (res.h2 if h in Ht else h) for h in D1.H.vertices}
    nodes = sorted(set(mp.values()))
    edges = {(min(mp[a], mp[b]), max(mp[a], mp[b])) for a, b in D1.H.edges() if mp[a] != mp[b]}
    bags = {h: D1.bags[h] for h in nodes}
    bags[res.h2] = frozenset().union(*(D1.bags[h] for h in Ht)) | B2
    bags[res.h1] = D1.bags[res.h1] | B1
    out = AbsorbResult(PartialDecomposition.make(Graph(nodes, sorted(edges)), bags), res.h1, res.h2)
    if checks_enabled():
        bad = check_absorbing(G, out, v1, v2, r1, r2, D, K, cb)
        if bad:
            raise ContractViolation("absorbing guarantees fail: " + bad[0], {"failures": bad})
    return out


def check_absorbing(G, res: AbsorbResult, v1, v2, r1, r2, D, K, cb) -> list[str]:
    D = frozenset(D)
    Dec = res.decomposition
    bad = []
    rep = validate(G, Dec)
    if not rep.ok or not rep.honest:
        bad.append("not an honest decomposition: " + "; ".join(rep.violations[:2]))
    if not in_HSP(TwoTerminalGraph(Dec.H, res.h1, res.h2)):
        bad.append("H is not series-parallel between its terminals")
    B1, B2 = ball(G, v1, r1), ball(G, v2, r2)
    if Dec.bags[res.h1] != B1 or not B2 <= Dec.bags[res.h2]:
        bad.append("(alpha) terminal bags")
    if any(rep.bag_radii[h] > cb.R0p for h in Dec.H.vertices if h != res.h2):
        bad.append("(beta) a bag radius exceeds R0'")
    if rep.bag_radii[res.h2] > r2 + 2 * cb.R0p + 1:
        bad.append("(gamma) absorbing bag too wide")
    if rep.irs > 3:
        bad.append("(delta) spread exceeds 3")
    C = component_of(G, B2, v1).vertices
    for comp in components(G, Dec.support):
        if not (comp.vertices & C and comp.vertices & D):
            continue
        N = comp.neighborhood
        if radius_and_centre(G, N)[0] > cb.R2 - 1 or not any(N <= b for b in Dec.bags.values()):
            bad.append("(epsilon) leftover component without a small host bag")
            break
    return bad


def three_vertices_step(G: Graph, w: int, r: int, C, C_star, K: int, cb: ConstantsBundle | None = None, budget=None):
    """Decomposition hanging off N(C) when a far region has three far boundary vertices; or a fat K4."""
    cb = cb or constants(K)
    C, C_star = frozenset(C), frozenset(C_star)
    B = ball(G, w, r)
    if not C or C & B or component_of(G, B, min(C)).vertices != C:
        raise PreconditionError("C is not a component of G minus the ball")
    rr = r + 22 * K + 1
    if not C_star <= C or component_of(G, ball(G, w, rr), min(C_star)).vertices != C_star:
        raise PreconditionError("C_star is not a component of C minus the collar")
    if far_triple(G, _boundary_of(G, C_star), cb.R1) is None:
        raise PreconditionError("C_star has no three boundary vertices pairwise R1 apart")
    fc = ball_and_three_components(G, w, rr, C_star, K, cb.ell + 22 * K + 1)
    if isinstance(fc, MinorModel):
        return fc
    wp = fc.centre
    B1, B2p = ball(G, wp, 22 * K), ball(G, w, r - cb.ell)
    NC = neighborhood(G, C)
    bld = _Builder()
    h1 = bld.node(B1)
    h2 = bld.node()
    g = bld.node(NC)
    bld.edge(h2, g)
    h2bag = set(B)
    owner = {}
    sub_nodes = []
    Y1 = set(B1) | set(B)
    for comp in components(G, B1 | B2p):
        if not (comp.vertices & C and comp.neighborhood & B2p):
            continue
        P = fc.assignment[min(comp.vertices)]
        res = two_ball_decomposition_absorbing(G, wp, w, 22 * K, r, comp.vertices, P, K, cb, budget)
        if isinstance(res, MinorModel):
            return res
        mp = bld.embed(res.decomposition, {res.h1: h1, res.h2: h2})
        h2bag |= res.decomposition.bags[res.h2]
        Y1 |= res.decomposition.support
        k = len(sub_nodes)
        sub_nodes.append([mp[h] for h in res.decomposition.H.vertices])
        for v in comp.vertices:
            owner[v] = k
    bld.bags[h2] = frozenset(h2bag)
    Y2 = set(Y1)
    for comp in components(G, Y1, within=C):
        k = owner.get(min(comp.vertices))
        if k is None:
            continue
        N = comp.neighborhood
        host = next((h for h in sub_nodes[k] if N <= bld.bags[h]), None)
        if host is None:
            host = next((h for h in sorted(bld.bags) if N <= bld.bags[h]), None)
        if host is None:
            raise ContractViolation("leftover component has no host bag", {"component_min": min(comp.vertices)})
        bnd = _boundary_of(G, comp.vertices)
        hp = bld.node(N | bnd)
        bld.edge(host, hp)
        Y2 |= bnd
    full = bld.build(frozenset(Y2))
    Dec = prune(restrict(full, C | NC))
    out = SPStep(Dec, g, "three-vertices")
    if checks_enabled():
        bad = check_three_vertices(G, out, r, C, K, cb)
        if bad:
            raise ContractViolation("three-vertices step guarantees fail: " + bad[0], {"failures": bad})
    return out


def check_three_vertices(G, step: SPStep, r, C, K, cb) -> list[str]:
    C = frozenset(C)
    D = step.decomposition
    NC = neighborhood(G, C)
    bad = []
    rep = validate(G, D)
    if not rep.ok or not rep.honest:
        bad.append("not an honest decomposition: " + "; ".join(rep.violations[:2]))
    if not _boundary_of(G, C) <= D.support or not D.support <= C | NC:
        bad.append("support does not sit between the boundary and the closed neighbourhood")
    if D.bags[step.anchor] != NC:
        bad.append("(i) N(C) is not the anchor bag")
    if rep.orw > max(r + 2 * cb.R0p + 2, cb.R2):
        bad.append("(ii) bag radius too large")
    if rep.irs > 7:
        bad.append("(iii) spread exceeds 7")
    R = max(r, cb.R2)
    for comp in components(G, D.support):
        if not any(comp.neighborhood <= b and rep.bag_radii[h] <= R for h, b in D.bags.items()):
            bad.append("(iv) a leftover component has no small host bag")
            break
    if not is_minor_free(D.H, "k4"):
        bad.append("H has a K4 minor")
    return bad


# --- one extension step and the driver -----------------------------------------


def k4_star_step(G: Graph, B: Ball, C, K: int, cb: ConstantsBundle | None = None, budget=None):
    """One extension step: a decomposition hanging off N(C), or a fat K4."""
    cb = cb or constants(K)
    C = frozenset(C)
    w, r = B.centre, B.radius
    rr = r + 22 * K + 1
    collar = ball(G, w, rr)
    NC = neighborhood(G, C)
    far = components(G, collar, within=C)
    for D in far:
        if far_triple(G, D.boundary, cb.R1) is not None:
            log.info("region beyond the collar has three far boundary vertices")
            out = three_vertices_step(G, w, r, C, D.vertices, K, cb, budget)
            return out if isinstance(out, MinorModel) else out.as_step()
    bld = _Builder()
    g = bld.node(NC)
    gp = bld.node((collar & C) | NC)
    bld.edge(g, gp)
    support = set(bld.bags[gp])
    for D in far:
        pair = far_pair_at_least(G, D.boundary, 2 * cb.R1 + 5 * K + 2)
        if pair is None:
            bld.edge(gp, bld.node(D.neighborhood))
            continue
        res = bipartitioned_boundary_step(G, w, rr, D.vertices, *pair, K, cb, budget)
        if isinstance(res, MinorModel):
            return res
        bld.embed(res.decomposition, {res.anchor: gp})
        support |= res.decomposition.support
    return StepResult(bld.build(frozenset(support)), g)


def decompose_series_parallel(G: Graph, K: int, scale: int | None = None, budget=None, **kw) -> DriverResult:
    """Honest (f0, 22)-radial decomposition on a K4-minor-free graph, or a K-fat K4.

    `budget` caps the coarse Menger search steps over the whole run.
    """
    cb = constants(K, scale)
    shared = budget if isinstance(budget, _Budget) else _Budget(budget)

    def step(G_, B, C, K_):
        return k4_star_step(G_, B, C, K_, cb, shared)

    res = extension_driver(G, K, step, cb.bounds(), X="k4", **kw)
    if res.witness is not None:
        f = fatness(G, res.witness)
        if f < K:
            raise ContractViolation("witness is not fat enough", {"fatness": f})
    return res
