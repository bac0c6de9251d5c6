"""Minor models, fatness, a brute-force oracle, and class recognition.

A model of a pattern X in G assigns a connected branch set to each vertex of
X and a branch path to each edge of X. The model is K-fat when all of these
are pairwise at least K apart, except that a path may touch the branch sets
of its own ends.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx

from .graph import (
    INF,
    Graph,
    GraphError,
    Path,
    bfs_layers,
    checks_enabled,
    complete_graph,
    is_connected_set,
    is_path,
)


class StructuralError(GraphError):
    """A certificate refers to vertices or keys that do not exist."""


class BudgetExceeded(RuntimeError):
    """A search ran out of budget before it could decide."""

    def __init__(self, msg, steps=None):
        super().__init__(msg)
        self.steps = steps


def K3() -> Graph:
    return complete_graph(3)


def K4() -> Graph:
    return complete_graph(4)


def K4minus() -> Graph:
    """K4 with the edge 23 removed; 0 and 1 are the degree-3 vertices."""
    return Graph(range(4), [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])


PATTERNS = {"k3": K3, "k4": K4, "k4minus": K4minus}


def _ekey(e) -> tuple[int, int]:
    u, v = e
    return (u, v) if u < v else (v, u)


@dataclass
class MinorModel:
    pattern: Graph
    branch_sets: dict
    branch_paths: dict = field(default_factory=dict)

    def __post_init__(self):
        self.branch_sets = {x: frozenset(V) for x, V in self.branch_sets.items()}
        self.branch_paths = {_ekey(e): Path(p) for e, p in self.branch_paths.items()}

    def members(self):
        """All branch sets and paths as (tag, vertex set) pairs."""
        out = [(("V", x), self.branch_sets[x]) for x in sorted(self.branch_sets)]
        out += [(("E", e), frozenset(self.branch_paths[e])) for e in sorted(self.branch_paths)]
        return out

    def vertices(self) -> frozenset:
        s = set()
        for V in self.branch_sets.values():
            s |= V
        for p in self.branch_paths.values():
            s.update(p)
        return frozenset(s)


@dataclass
class Report:
    ok: bool
    violation: str | None = None

    def __bool__(self):
        return self.ok


def _structural_check(G: Graph, m: MinorModel):
    X = m.pattern
    if set(m.branch_sets) != set(X.vertices):
        raise StructuralError("branch set keys do not match the pattern vertices")
    if set(m.branch_paths) != set(X.edges()):
        raise StructuralError("branch path keys do not match the pattern edges")
    for x, V in m.branch_sets.items():
        bad = [v for v in V if v not in G]
        if bad:
            raise StructuralError(f"branch set {x} uses unknown vertex {bad[0]}")
    for e, p in m.branch_paths.items():
        bad = [v for v in p if v not in G]
        if bad:
            raise StructuralError(f"path {e} uses unknown vertex {bad[0]}")


def validate_model(G: Graph, m: MinorModel) -> Report:
    """Check the model clauses in order and report the first failure."""
    _structural_check(G, m)
    sets = m.branch_sets
    for x in sorted(sets):
        if not sets[x]:
            return Report(False, f"branch set {x} is empty")
        if not is_connected_set(G, sets[x]):
            return Report(False, f"branch set {x} is not connected")
    xs = sorted(sets)
    for x, y in itertools.combinations(xs, 2):
        if sets[x] & sets[y]:
            return Report(False, f"branch sets not disjoint: {x} and {y}")
    paths = m.branch_paths
    for e in sorted(paths):
        p = paths[e]
        if not is_path(G, p):
            return Report(False, f"path {e} is not a path in G")
        a, b = sets[e[0]], sets[e[1]]
        inner = set(p[1:-1])
        ends_ok = (p[0] in a and p[-1] in b) or (p[0] in b and p[-1] in a)
        if len(p) < 2 or not ends_ok or inner & (a | b):
            return Report(False, f"path {e} is not a path between branch sets {e[0]} and {e[1]}")
        for x in xs:
            if x not in e and sets[x] & set(p):
                return Report(False, f"path {e} meets branch set {x}")
    for e, f in itertools.combinations(sorted(paths), 2):
        pe, pf = paths[e], paths[f]
        if set(pe[1:-1]) & set(pf) or set(pf[1:-1]) & set(pe):
            return Report(False, f"paths {e} and {f} are not internally disjoint")
    return Report(True)


def _exempt(tag_a, tag_b) -> bool:
    (ka, a), (kb, b) = tag_a, tag_b
    if ka == "E" and kb == "V":
        return b in a
    if ka == "V" and kb == "E":
        return a in b
    return False


def pairwise_distances(G: Graph, m: MinorModel):
    """Distances between all non-exempt member pairs, keyed by tags."""
    members = m.members()
    out = {}
    for i, (ta, A) in enumerate(members):
        d = bfs_layers(G, A)
        for tb, Bset in members[i + 1 :]:
            if _exempt(ta, tb):
                continue
            best = min((d[v] for v in Bset if v in d), default=INF)
            out[(ta, tb)] = best
    return out


def fatness(G: Graph, m: MinorModel):
    """Largest K for which the model is K-fat (INF with no non-exempt pair)."""
    rep = validate_model(G, m)
    if not rep:
        raise GraphError(f"invalid model: {rep.violation}")
    ds = pairwise_distances(G, m)
    return min(ds.values(), default=INF)


def closest_pair(G: Graph, m: MinorModel):
    ds = pairwise_distances(G, m)
    if not ds:
        return None
    return min(ds.items(), key=lambda kv: (kv[1], kv[0]))


def is_fat(G: Graph, m: MinorModel, K: int) -> bool:
    return bool(validate_model(G, m)) and fatness(G, m) >= K


# --- brute force -----------------------------------------------------------


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    def tick(self, n=1):
        self.used += n
        if self.limit is not None and self.used > self.limit:
            raise BudgetExceeded(f"search budget of {self.limit} steps exhausted", self.used)


def connected_subsets(G: Graph, max_size=None, budget=None):
    """All connected vertex subsets as bitmasks over G.vertices, smallest first."""
    idx = {v: i for i, v in enumerate(G.vertices)}
    nb = [0] * len(idx)
    for v, i in idx.items():
        for w in G.neighbors(v):
            nb[i] |= 1 << idx[w]
    layer = {1 << i for i in range(len(idx))}
    out = []
    size = 1
    while layer:
        layer_sorted = sorted(layer)
        out.extend(layer_sorted)
        if max_size is not None and size >= max_size:
            break
        nxt = set()
        for s in layer_sorted:
            if budget:
                budget.tick()
            frontier = 0
            t = s
            while t:
                low = t & -t
                frontier |= nb[low.bit_length() - 1]
                t ^= low
            frontier &= ~s
            while frontier:
                low = frontier & -frontier
                nxt.add(s | low)
                frontier ^= low
        layer = nxt
        size += 1
    return out, nb


def _twins(X: Graph):
    """Pairs x < y of pattern vertices exchanged by an automorphism swapping them."""
    out = []
    for x, y in itertools.combinations(X.vertices, 2):
        if set(X.adj(x)) - {y} == set(X.adj(y)) - {x}:
            out.append((x, y))
    return out


def _mask_to_set(mask, verts):
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(verts[i])
        mask >>= 1
        i += 1
    return frozenset(out)


def brute_force_fat_minor(G: Graph, X: Graph, K: int, budget: int | None = 10**7):
    """Exhaustively search for a K-fat model of X in G.

    Returns a model or None when the search is complete. Raises
    BudgetExceeded when it cannot decide within `budget` steps.
    """
    if K < 0:
        raise ValueError("K must be nonnegative")
    bud = _Budget(budget)
    if X.n == 0:
        return MinorModel(X, {}, {})
    if G.n == 0:
        return None
    verts = G.vertices
    cands, nb = connected_subsets(G, budget=bud)
    order = list(X.vertices)
    twins = _twins(X)
    twin_before = {y: [x for x, yy in twins if yy == y] for y in order}

    def nbr_mask(s):
        out = 0
        t = s
        while t:
            low = t & -t
            out |= nb[low.bit_length() - 1]
            t ^= low
        return out

    # for K >= 1 we need distance-K neighbourhoods of candidate sets
    dist_cache = {}

    def far_mask(s):
        """Mask of vertices at distance < K from s."""
        if s not in dist_cache:
            reach = s
            front = s
            for _ in range(K - 1):
                nm = nbr_mask(front) & ~reach
                if not nm:
                    break
                reach |= nm
                front = nm
            dist_cache[s] = reach
        return dist_cache[s]

    cand_min = {s: (s & -s).bit_length() - 1 for s in cands}
    cand_nbr = {} if K == 0 else None
    if K == 0:
        for s in cands:
            cand_nbr[s] = nbr_mask(s)

    chosen: dict[int, int] = {}

    def compatible(x, s):
        for y, t in chosen.items():
            if K == 0:
                if s & t:
                    return False
                if X.has_edge(x, y) and not (cand_nbr[s] & t):
                    return False
            else:
                if far_mask(s) & t:
                    return False
        for y in twin_before[x]:
            if y in chosen and cand_min[chosen[y]] > cand_min[s]:
                return False
        return True

    def assign(i):
        if i == len(order):
            if K == 0:
                return _edge_paths(G, X, chosen, verts)
            return _fat_paths(G, X, chosen, verts, K, bud)
        x = order[i]
        for s in cands:
            bud.tick()
            if compatible(x, s):
                chosen[x] = s
                res = assign(i + 1)
                if res is not None:
                    return res
                del chosen[x]
        return None

    res = assign(0)
    if res is not None and checks_enabled():
        assert fatness(G, res) >= K
    return res


def _edge_paths(G, X, chosen, verts):
    sets = {x: _mask_to_set(s, verts) for x, s in chosen.items()}
    paths = {}
    for x, y in X.edges():
        e = min((a, b) for a in sets[x] for b in G.adj(a) if b in sets[y])
        paths[(x, y)] = Path(e)
    return MinorModel(X, sets, paths)


def _fat_paths(G, X, chosen, verts, K, bud):
    sets = {x: _mask_to_set(s, verts) for x, s in chosen.items()}
    all_sets = frozenset().union(*sets.values())
    edges = X.edges()
    # per edge the vertices a path interior may use
    near = {x: bfs_layers(G, sets[x], limit=K - 1) for x in sets}
    allowed = {}
    for e in edges:
        bad = set(all_sets)
        for x in sets:
            if x not in e:
                bad |= near[x].keys()
        allowed[e] = frozenset(v for v in G.vertices if v not in bad)
    paths: dict = {}

    def candidates(e):
        a, b = sets[e[0]], sets[e[1]]
        H = nx.Graph()
        ok = allowed[e]
        src, dst = ("s",), ("t",)
        for u, v in G.edges():
            if (u in ok or u in a or u in b) and (v in ok or v in a or v in b):
                if u in a and v in a or u in b and v in b:
                    continue
                H.add_edge(u, v)
        for u in a:
            H.add_edge(src, u)
        for v in b:
            H.add_edge(v, dst)
        if src not in H or dst not in H:
            return
        try:
            for p in nx.shortest_simple_paths(H, src, dst):
                core = p[1:-1]
                # endpoints must be the only branch set vertices
                if any(v in a for v in core[1:]) or any(v in b for v in core[:-1]):
                    continue
                yield Path(core)
        except nx.NetworkXNoPath:
            return

    def place(i):
        if i == len(edges):
            return MinorModel(X, sets, dict(paths))
        e = edges[i]
        for p in candidates(e):
            bud.tick()
            pset = set(p)
            dp = None
            okp = True
            for f, q in paths.items():
                if dp is None:
                    dp = bfs_layers(G, pset, limit=K - 1)
                if any(v in dp for v in q):
                    okp = False
                    break
            if not okp:
                continue
            paths[e] = p
            res = place(i + 1)
            if res is not None:
                return res
            del paths[e]
        return None

    return place(0)


# --- recognition -----------------------------------------------------------


def _sp_reduces(G: Graph) -> bool:
    """Series-parallel reduction on a scratch copy.

    Adjacency is kept as sets, so parallel edges created by suppressing a
    degree-2 vertex merge immediately.
    """
    adj = {v: set(G.adj(v)) for v in G.vertices}
    stack = [v for v in G.vertices if len(adj[v]) <= 2]
    while stack:
        v = stack.pop()
        if v not in adj or len(adj[v]) > 2:
            continue
        nbrs = list(adj.pop(v))
        for u in nbrs:
            adj[u].discard(v)
        if len(nbrs) == 2:
            a, b = nbrs
            adj[a].add(b)
            adj[b].add(a)
        for u in nbrs:
            if len(adj[u]) <= 2:
                stack.append(u)
    return not adj


def blocks(G: Graph):
    """Biconnected blocks as (vertex set, edge count), iterative Tarjan."""
    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    out = []
    t = 0
    for root in G.vertices:
        if root in disc:
            continue
        if G.degree(root) == 0:
            out.append((frozenset([root]), 0))
            disc[root] = t
            t += 1
            continue
        disc[root] = low[root] = t
        t += 1
        estack = []
        stack = [(root, None, iter(G.neighbors(root)))]
        while stack:
            v, parent, it = stack[-1]
            advanced = False
            for w in it:
                if w == parent:
                    continue
                if w not in disc:
                    disc[w] = low[w] = t
                    t += 1
                    estack.append((v, w))
                    stack.append((w, v, iter(G.neighbors(w))))
                    advanced = True
                    break
                if disc[w] < disc[v]:
                    estack.append((v, w))
                    low[v] = min(low[v], disc[w])
            if advanced:
                continue
            stack.pop()
            if parent is not None:
                low[parent] = min(low[parent], low[v])
                if low[v] >= disc[parent]:
                    vs = set()
                    m = 0
                    while True:
                        e = estack.pop()
                        vs.update(e)
                        m += 1
                        if e == (parent, v):
                            break
                    out.append((frozenset(vs), m))
    return out


def is_cactus_forest(G: Graph) -> bool:
    """Every block is an edge or a cycle."""
    return all(len(vs) <= 2 or m == len(vs) for vs, m in blocks(G))


def is_minor_free(G: Graph, X) -> bool:
    """Decide K4- or K4minus-minor-freeness (X given by name or as a pattern)."""
    name = _pattern_name(X)
    if name == "k4":
        return _sp_reduces(G)
    if name == "k4minus":
        return is_cactus_forest(G)
    raise ValueError(f"unsupported pattern {X!r}")


def _pattern_name(X) -> str:
    if isinstance(X, str):
        key = X.lower().replace("-", "").replace("_", "")
        if key in ("k4", "k4minus"):
            return key
        raise ValueError(f"unsupported pattern {X!r}")
    if isinstance(X, Graph):
        if X == K4():
            return "k4"
        if X.n == 4 and X.m == 5:
            return "k4minus"
    raise ValueError(f"unsupported pattern {X!r}")


# --- two-terminal graphs ---------------------------------------------------


@dataclass(frozen=True)
class TwoTerminalGraph:
    graph: Graph
    source: int
    sink: int

    def __post_init__(self):
        if self.source not in self.graph or self.sink not in self.graph:
            raise GraphError("terminals must be vertices of the graph")


def in_HSP(T: TwoTerminalGraph) -> bool:
    H = T.graph
    if T.source != T.sink:
        H = H.with_edges([(T.source, T.sink)])
    return is_minor_free(H, "k4")


class TerminalMismatch(GraphError):
    pass


def _shift(T: TwoTerminalGraph, start: int, keep: dict):
    """Relabel T with fresh ids from `start`, except vertices fixed by `keep`."""
    mapping = {}
    nxt = start
    for v in T.graph.vertices:
        if v in keep:
            mapping[v] = keep[v]
        else:
            mapping[v] = nxt
            nxt += 1
    return mapping


def _fresh_start(T: TwoTerminalGraph) -> int:
    return (max(T.graph.vertices) + 1) if T.graph.n else 0


def hsp_build(op: str, *args) -> TwoTerminalGraph:
    """Compose two-terminal graphs.

    parallel(T1, T2), series(T1, T2), subdivide(T, u, v),
    long_path(T, u, v, length), one_sum(T, G2, v_in_T, w_in_G2).
    Operands after the first are relabelled with fresh ids.
    """
    if op == "parallel":
        T1, T2 = args
        if (T1.source == T1.sink) != (T2.source == T2.sink):
            raise TerminalMismatch("parallel composition needs both or neither operand to have equal terminals")
        mp = _shift(T2, _fresh_start(T1), {T2.source: T1.source, T2.sink: T1.sink})
        H = Graph(T1.graph.vertices + tuple(mp.values()), T1.graph.edges() + [(mp[a], mp[b]) for a, b in T2.graph.edges()])
        out = TwoTerminalGraph(H, T1.source, T1.sink)
    elif op == "series":
        T1, T2 = args
        mp = _shift(T2, _fresh_start(T1), {T2.source: T1.sink})
        H = Graph(T1.graph.vertices + tuple(mp.values()), T1.graph.edges() + [(mp[a], mp[b]) for a, b in T2.graph.edges()])
        out = TwoTerminalGraph(H, T1.source, mp[T2.sink])
    elif op == "subdivide":
        T, u, v = args
        if not T.graph.has_edge(u, v):
            raise GraphError(f"{u}{v} is not an edge")
        x = _fresh_start(T)
        es = [e for e in T.graph.edges() if set(e) != {u, v}] + [(u, x), (x, v)]
        out = TwoTerminalGraph(Graph(T.graph.vertices + (x,), es), T.source, T.sink)
    elif op == "long_path":
        T, u, v, length = args
        if not T.graph.has_edge(u, v):
            raise GraphError(f"{u}{v} is not an edge")
        if length < 2:
            raise GraphError("the added path needs length at least 2")
        x = _fresh_start(T)
        inner = list(range(x, x + length - 1))
        seq = [u] + inner + [v]
        es = T.graph.edges() + list(zip(seq, seq[1:]))
        out = TwoTerminalGraph(Graph(T.graph.vertices + tuple(inner), es), T.source, T.sink)
    elif op == "one_sum":
        T, G2, v, w = args
        if v not in T.graph or w not in G2:
            raise GraphError("1-sum vertices must belong to their graphs")
        mp = _shift(TwoTerminalGraph(G2, w, w), _fresh_start(T), {w: v})
        H = Graph(T.graph.vertices + tuple(mp.values()), T.graph.edges() + [(mp[a], mp[b]) for a, b in G2.edges()])
        out = TwoTerminalGraph(H, T.source, T.sink)
    else:
        raise ValueError(f"unknown operation {op!r}")
    if checks_enabled() and op != "one_sum":
        assert in_HSP(out), f"{op} left the class"
    return out


def edge_tt() -> TwoTerminalGraph:
    return TwoTerminalGraph(Graph([0, 1], [(0, 1)]), 0, 1)


# --- serialisation ---------------------------------------------------------


def format_model(m: MinorModel) -> str:
    lines = []
    covered = set()
    for u, v in m.pattern.edges():
        lines.append(f"{u} {v}")
        covered |= {u, v}
    for x in m.pattern.vertices:
        if x not in covered:
            lines.append(f"{x}")
    for x in sorted(m.branch_sets):
        lines.append(f"branch {x}: " + " ".join(map(str, sorted(m.branch_sets[x]))))
    for e in sorted(m.branch_paths):
        lines.append(f"path {e[0]} {e[1]}: " + " ".join(map(str, m.branch_paths[e])))
    return "\n".join(lines) + "\n"


class FormatError(GraphError):
    pass


def parse_model(text: str) -> MinorModel:
    pverts, pedges, sets, paths = set(), [], {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("branch"):
                head, body = line.split(":", 1)
                x = int(head.split()[1])
                if x in sets:
                    raise FormatError(f"line {lineno}: repeated branch set {x}")
                sets[x] = [int(t) for t in body.split()]
            elif line.startswith("path"):
                head, body = line.split(":", 1)
                _, a, b = head.split()
                paths[_ekey((int(a), int(b)))] = [int(t) for t in body.split()]
            else:
                ids = [int(t) for t in line.split()]
                if len(ids) == 1:
                    pverts.add(ids[0])
                elif len(ids) == 2:
                    pedges.append(tuple(ids))
                else:
                    raise ValueError
        except (ValueError, IndexError):
            raise FormatError(f"line {lineno}: cannot parse {line!r}") from None
    X = Graph(pverts, pedges)
    return MinorModel(X, sets, paths)
