"""Finite simple graphs and the metric primitives used everywhere else.

Vertex ids are nonnegative integers. Every iteration order is by id so that
tie-breaks in searches are reproducible.
"""
from __future__ import annotations

import os
from collections import deque
from typing import Iterable, Iterator, NamedTuple


class _Infinity:
    """The distance between vertices in different components."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("fatminors.INF")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __mul__(self, other):
        if other == 0:
            raise ValueError("INF * 0 is undefined")
        return self

    __rmul__ = __mul__

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(x) -> bool:
    return x is INF


class GraphError(ValueError):
    pass


class DomainError(GraphError):
    pass


_CHECKS = {"on": os.environ.get("FATMINORS_CHECKS", "") not in ("", "0", "false")}


def checks_enabled() -> bool:
    """Whether expensive internal postcondition checks run."""
    return _CHECKS["on"]


def set_checks(on: bool) -> None:
    _CHECKS["on"] = bool(on)


class Graph:
    """An immutable finite undirected simple graph."""

    __slots__ = ("_adj", "_vertices", "_nbrs", "_m")

    def __init__(self, vertices: Iterable[int] = (), edges: Iterable[tuple[int, int]] = ()):
        adj: dict[int, set[int]] = {}
        for v in vertices:
            _check_id(v)
            adj.setdefault(v, set())
        for u, v in edges:
            _check_id(u)
            _check_id(v)
            if u == v:
                raise GraphError(f"loop at vertex {u}")
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        self._vertices = tuple(sorted(adj))
        self._adj = {v: frozenset(adj[v]) for v in self._vertices}
        self._nbrs = {v: tuple(sorted(adj[v])) for v in self._vertices}
        self._m = sum(len(s) for s in adj.values()) // 2

    @property
    def vertices(self) -> tuple[int, ...]:
        return self._vertices

    def __len__(self):
        return len(self._vertices)

    def __contains__(self, v):
        return v in self._adj

    def __iter__(self) -> Iterator[int]:
        return iter(self._vertices)

    @property
    def n(self) -> int:
        return len(self._vertices)

    @property
    def m(self) -> int:
        return self._m

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._nbrs[v]

    def adj(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return u in self._adj and v in self._adj[u]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in self._vertices for v in self._nbrs[u] if u < v]

    def vertex_set(self) -> frozenset[int]:
        return frozenset(self._vertices)

    def induced(self, U: Iterable[int]) -> "Graph":
        U = set(U)
        return Graph(U, ((u, v) for u in U for v in self._nbrs[u] if v in U and u < v))

    def with_edges(self, extra: Iterable[tuple[int, int]]) -> "Graph":
        """Copy with extra edges; edges already present are ignored."""
        return Graph(self._vertices, list(self.edges()) + [e for e in extra if e[0] != e[1]])

    def relabel(self, mapping: dict[int, int]) -> "Graph":
        return Graph((mapping[v] for v in self._vertices), ((mapping[u], mapping[v]) for u, v in self.edges()))

    def __eq__(self, other):
        return isinstance(other, Graph) and self._adj == other._adj

    def __hash__(self):
        return hash((self._vertices, tuple(self.edges())))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def _check_id(v):
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise GraphError(f"vertex ids must be nonnegative integers, got {v!r}")


class Path(tuple):
    """An ordered vertex sequence p0 ... pn."""

    @property
    def length(self) -> int:
        return len(self) - 1

    @property
    def first(self) -> int:
        return self[0]

    @property
    def last(self) -> int:
        return self[-1]

    def sub(self, i: int, j: int) -> "Path":
        """The subpath p_i ... p_j (reversed if j < i)."""
        if j >= i:
            return Path(self[i : j + 1])
        return Path(reversed(self[j : i + 1]))

    def reverse(self) -> "Path":
        return Path(reversed(self))

    def interior(self) -> "Path":
        return Path(self[1:-1])

    def index_of(self, v: int) -> int:
        return self.index(v)


def is_path(G: Graph, p) -> bool:
    if len(p) == 0:
        return False
    if len(set(p)) != len(p):
        return False
    if any(v not in G for v in p):
        return False
    return all(G.has_edge(p[i], p[i + 1]) for i in range(len(p) - 1))


def _as_set(U) -> frozenset[int]:
    if isinstance(U, int):
        return frozenset((U,))
    return U if isinstance(U, frozenset) else frozenset(U)


def bfs_layers(G: Graph, sources, allowed=None, limit=None) -> dict[int, int]:
    """Distances from the source set, optionally inside `allowed` and up to `limit`.

    Sources outside `allowed` are still used as starting points.
    """
    src = sorted(_as_set(sources))
    dist = {s: 0 for s in src}
    q = deque(src)
    adj = G._nbrs
    while q:
        u = q.popleft()
        d = dist[u]
        if limit is not None and d >= limit:
            continue
        for w in adj[u]:
            if w not in dist and (allowed is None or w in allowed):
                dist[w] = d + 1
                q.append(w)
    return dist


def dist(G: Graph, U, U2):
    """Minimum distance between the two vertex sets, or INF."""
    U = _as_set(U)
    U2 = _as_set(U2)
    if not U or not U2:
        raise DomainError("dist needs two nonempty vertex sets")
    for v in U | U2:
        if v not in G:
            raise DomainError(f"vertex {v} not in graph")
    if U & U2:
        return 0
    # grow from the smaller side and stop at the first hit
    if len(U2) < len(U):
        U, U2 = U2, U
    seen = set(U)
    frontier = sorted(U)
    d = 0
    adj = G._nbrs
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w in seen:
                    continue
                if w in U2:
                    return d
                seen.add(w)
                nxt.append(w)
        frontier = nxt
    return INF


def ball(G: Graph, U, r: int) -> frozenset[int]:
    U = _as_set(U)
    for v in U:
        if v not in G:
            raise DomainError(f"vertex {v} not in graph")
    if r < 0:
        raise DomainError("negative radius")
    if r == 0:
        return U
    return frozenset(bfs_layers(G, U, limit=r))


def eccentricity_within(G: Graph, v: int, U, cap=None):
    """max over u in U of d(v, u); returns INF if some u is unreachable.

    With `cap`, returns cap + 1 as soon as the value is known to exceed cap.
    """
    U = _as_set(U)
    if not U:
        return 0
    remaining = set(U)
    remaining.discard(v)
    if not remaining:
        return 0
    seen = {v}
    frontier = [v]
    d = 0
    adj = G._nbrs
    while frontier:
        d += 1
        if cap is not None and d > cap:
            return cap + 1
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
                    remaining.discard(w)
        if not remaining:
            return d
        frontier = nxt
    return INF


def radius_and_centre(G: Graph, U, hint: int | None = None):
    """(rad_G(U), minimal-id centre) with rad of the empty set equal to 0.

    The centre is None when U is empty or the radius is INF.
    """
    U = _as_set(U)
    if not U:
        return 0, None
    for v in U:
        if v not in G:
            raise DomainError(f"vertex {v} not in graph")
    u0 = min(U)
    d0 = bfs_layers(G, u0)
    if any(u not in d0 for u in U):
        return INF, None
    best = max(d0[u] for u in U)
    best_v = u0
    if hint is not None and hint in G:
        e = eccentricity_within(G, hint, U, cap=best)
        if e <= best:
            best, best_v = e, hint
    # a centre with radius <= best lies within best of every member of U;
    # intersect the candidate sets of a few far-apart members
    anchors = [u0]
    far = max(U, key=lambda u: (d0[u], -u))
    anchors.append(far)
    cand = {v for v, d in d0.items() if d <= best}
    for a in anchors[1:]:
        da = bfs_layers(G, a, limit=best)
        cand &= da.keys()
    # order candidates by a cheap lower bound so the search can stop early
    dfar = bfs_layers(G, far)
    order = sorted(cand, key=lambda v: (max(d0[v], dfar.get(v, 0)), v))
    for v in order:
        lb = max(d0[v], dfar.get(v, 0))
        if lb > best:
            break
        e = eccentricity_within(G, v, U, cap=best)
        if e < best or (e == best and v < best_v):
            best, best_v = e, v
    return best, best_v


def rad_of_set(G: Graph, U):
    return radius_and_centre(G, U)[0]


def radius_at_most(G: Graph, U, R: int, hint: int | None = None) -> bool:
    U = _as_set(U)
    if not U:
        return True
    if hint is not None and hint in G and eccentricity_within(G, hint, U, cap=R) <= R:
        return True
    r = rad_of_set(G, U)
    return r <= R


class Component(NamedTuple):
    vertices: frozenset
    boundary: frozenset
    neighborhood: frozenset

    def attaches_to(self, U) -> bool:
        return not self.neighborhood.isdisjoint(U)


def components(G: Graph, removed=frozenset(), within=None) -> list[Component]:
    """Components of G - removed (restricted to `within` if given), by minimal vertex.

    Each comes with its boundary N(removed) ∩ C and neighbourhood N(C).
    """
    removed = _as_set(removed)
    pool = G.vertices if within is None else sorted(_as_set(within))
    seen: set[int] = set()
    out = []
    adj = G._nbrs
    for s in pool:
        if s in seen or s in removed:
            continue
        comp = [s]
        seen.add(s)
        nbh = set()
        bnd = set()
        i = 0
        while i < len(comp):
            u = comp[i]
            i += 1
            for w in adj[u]:
                if w in removed or (within is not None and w not in within):
                    nbh.add(w)
                    bnd.add(u)
                elif w not in seen:
                    seen.add(w)
                    comp.append(w)
        out.append(Component(frozenset(comp), frozenset(bnd), frozenset(nbh)))
    return out


def component_of(G: Graph, removed, v: int) -> Component:
    removed = _as_set(removed)
    if v in removed:
        raise DomainError(f"vertex {v} is removed")
    return components(G, removed, within=_reach(G, v, removed))[0]


def _reach(G: Graph, v, removed) -> frozenset[int]:
    seen = {v}
    stack = [v]
    adj = G._nbrs
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen and w not in removed:
                seen.add(w)
                stack.append(w)
    return frozenset(seen)


def is_connected_set(G: Graph, U) -> bool:
    U = _as_set(U)
    if not U:
        return False
    s = min(U)
    seen = {s}
    stack = [s]
    adj = G._nbrs
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w in U and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(U)


def neighborhood(G: Graph, U) -> frozenset[int]:
    U = _as_set(U)
    return frozenset(w for u in U for w in G.adj(u) if w not in U)


def boundary(G: Graph, Y) -> frozenset[int]:
    """Vertices of Y with a neighbour outside Y."""
    Y = _as_set(Y)
    return frozenset(y for y in Y if not G.adj(y) <= Y)


def shortest_path(G: Graph, X, Y, allowed=None) -> Path | None:
    """A shortest X–Y path whose interior lies in `allowed` (if given).

    The path meets X only in its first and Y only in its last vertex.
    """
    X = _as_set(X)
    Y = _as_set(Y)
    if not X or not Y:
        raise DomainError("shortest_path needs nonempty end sets")
    both = X & Y
    if both:
        return Path((min(both),))
    parent = {x: None for x in sorted(X)}
    q = deque(sorted(X))
    adj = G._nbrs
    while q:
        u = q.popleft()
        for w in adj[u]:
            if w in parent:
                continue
            if w in Y:
                path = [w, u]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return Path(reversed(path))
            if allowed is not None and w not in allowed:
                continue
            parent[w] = u
            q.append(w)
    return None


def shortest_path_in(G: Graph, X, Y, inside) -> Path | None:
    """A shortest X–Y path with every vertex in `inside`."""
    inside = _as_set(inside)
    X = _as_set(X) & inside
    Y = _as_set(Y) & inside
    if not X or not Y:
        return None
    return shortest_path(G, X, Y, allowed=inside)


def diameter_pair(G: Graph, U, exact: bool = True):
    """A pair of members of U at maximal distance, with that distance."""
    U = sorted(_as_set(U))
    if not U:
        raise DomainError("empty set")
    if len(U) == 1:
        return (U[0], U[0]), 0
    Us = set(U)
    # double sweep first
    d = bfs_layers(G, U[0])
    a = max(U, key=lambda u: (d.get(u, -1), -u))
    da = bfs_layers(G, a)
    if any(u not in da for u in U):
        b = min(u for u in U if u not in da)
        return (min(a, b), max(a, b)), INF
    b = max(U, key=lambda u: (da[u], -u))
    best = ((min(a, b), max(a, b)), da[b])
    if not exact:
        return best
    for u in U:
        du = bfs_layers(G, u)
        for v in U:
            if v > u and du[v] > best[1]:
                best = ((u, v), du[v])
    del Us
    return best


def far_pair_at_least(G: Graph, U, t: int):
    """Some pair of members of U at distance >= t, or None."""
    (a, b), d = diameter_pair(G, U, exact=False)
    if d >= t:
        return a, b
    U = sorted(_as_set(U))
    for u in U:
        du = bfs_layers(G, u)
        for v in U:
            if v > u and du.get(v, INF) >= t:
                return u, v
    return None


def far_triple(G: Graph, U, t: int, exhaustive_limit: int = 2000):
    """Three members of U pairwise at least t apart, or None.

    Exhaustive over triples when |U| <= exhaustive_limit; otherwise a
    farthest-point sweep.
    """
    U = sorted(_as_set(U))
    if len(U) < 3:
        return None
    # greedy farthest-point sweep first; cheap and usually enough
    d0 = bfs_layers(G, U[0])
    a = max(U, key=lambda u: (d0.get(u, INF), -u) if u in d0 else (10**18, -u))
    da = bfs_layers(G, a)
    b = max(U, key=lambda u: (da.get(u, 10**18), -u))
    db = bfs_layers(G, b)
    c = max(U, key=lambda u: (min(da.get(u, 10**18), db.get(u, 10**18)), -u))
    if len({a, b, c}) == 3 and min(da.get(b, INF), da.get(c, INF), db.get(c, INF)) >= t:
        return tuple(sorted((a, b, c)))
    if len(U) > exhaustive_limit:
        return None
    dists = {u: bfs_layers(G, u) for u in U}

    def far(x, y):
        return dists[x].get(y, INF) >= t

    for i, x in enumerate(U):
        fx = [y for y in U[i + 1 :] if far(x, y)]
        for j, y in enumerate(fx):
            for z in fx[j + 1 :]:
                if far(y, z):
                    return (x, y, z)
    return None


def path_graph(n: int) -> Graph:
    return Graph(range(n), ((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError("cycles need at least 3 vertices")
    return Graph(range(n), [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph(range(n), ((i, j) for i in range(n) for j in range(i + 1, n)))


def grid_graph(rows: int, cols: int) -> Graph:
    def vid(i, j):
        return i * cols + j

    edges = []
    for i in range(rows):
        for j in range(cols):
            if j + 1 < cols:
                edges.append((vid(i, j), vid(i, j + 1)))
            if i + 1 < rows:
                edges.append((vid(i, j), vid(i + 1, j)))
    return Graph(range(rows * cols), edges)


def disjoint_union(graphs: list[Graph]) -> tuple[Graph, list[dict[int, int]]]:
    """Disjoint union with fresh ids; returns the maps old id -> new id."""
    maps = []
    vs, es = [], []
    nxt = 0
    for g in graphs:
        mp = {}
        for v in g.vertices:
            mp[v] = nxt
            nxt += 1
        maps.append(mp)
        vs.extend(mp.values())
        es.extend((mp[u], mp[v]) for u, v in g.edges())
    return Graph(vs, es), maps


class EdgeListError(GraphError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def parse_edge_list(text: str) -> Graph:
    """Parse `u v` lines; `#` starts a comment; a lone id declares a vertex."""
    vertices = set()
    seen = set()
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            ids = [int(p) for p in parts]
        except ValueError:
            raise EdgeListError(lineno, f"expected integers, got {line!r}") from None
        if any(i < 0 for i in ids):
            raise EdgeListError(lineno, "negative vertex id")
        if len(ids) == 1:
            vertices.add(ids[0])
            continue
        if len(ids) != 2:
            raise EdgeListError(lineno, f"expected 'u v', got {line!r}")
        u, v = ids
        if u == v:
            raise EdgeListError(lineno, f"loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise EdgeListError(lineno, f"duplicate edge {u} {v}")
        seen.add(key)
        edges.append(key)
    return Graph(vertices, edges)


def format_edge_list(G: Graph) -> str:
    lines = []
    covered = set()
    for u, v in G.edges():
        lines.append(f"{u} {v}")
        covered.add(u)
        covered.add(v)
    for v in G.vertices:
        if v not in covered:
            lines.append(f"{v}")
    return "\n".join(lines) + ("\n" if lines else "")


def read_edge_list(path) -> Graph:
    with open(path) as fh:
        return parse_edge_list(fh.read())
