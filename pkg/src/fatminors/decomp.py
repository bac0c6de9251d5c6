"""Graph-decompositions, their metrics, and the step-by-step extension driver.

A decomposition of G is a graph H together with a bag of vertices of G per
node, such that the parts cover G and every vertex sits in a connected set of
nodes. A partial decomposition only covers an induced subgraph, its support.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from .graph import (
    INF,
    Graph,
    GraphError,
    ball,
    boundary,
    checks_enabled,
    components,
    is_connected_set,
    neighborhood,
    radius_and_centre,
)
from .minors import MinorModel, is_minor_free

log = logging.getLogger(__name__)


class DecompositionError(GraphError):
    pass


class ContractViolation(RuntimeError):
    """An internal step broke a guarantee it is supposed to provide."""

    def __init__(self, msg, context=None):
        super().__init__(msg)
        self.context = context or {}


@dataclass
class GraphDecomposition:
    H: Graph
    bags: dict

    def __post_init__(self):
        self.bags = {h: frozenset(b) for h, b in self.bags.items()}

    def nodes_containing(self, v) -> list:
        return [h for h in self.H.vertices if v in self.bags.get(h, ())]


@dataclass
class PartialDecomposition:
    inner: GraphDecomposition
    support: frozenset

    def __post_init__(self):
        self.support = frozenset(self.support)

    @property
    def H(self) -> Graph:
        return self.inner.H

    @property
    def bags(self) -> dict:
        return self.inner.bags

    @classmethod
    def make(cls, H: Graph, bags: dict, support=None):
        bags = {h: frozenset(b) for h, b in bags.items()}
        if support is None:
            support = frozenset().union(*bags.values()) if bags else frozenset()
        return cls(GraphDecomposition(H, bags), support)

    def node_index(self) -> dict:
        """vertex -> list of nodes whose bag contains it."""
        idx: dict = {}
        for h in self.H.vertices:
            for v in self.bags.get(h, ()):
                idx.setdefault(v, []).append(h)
        return idx

    def copy(self):
        return PartialDecomposition(GraphDecomposition(self.H, dict(self.bags)), self.support)


def single_bag(U, node: int = 0) -> PartialDecomposition:
    U = frozenset(U)
    return PartialDecomposition.make(Graph([node]), {node: U}, U)


@dataclass
class DecompReport:
    h1_ok: bool = True
    h2_ok: bool = True
    honest: bool = True
    nonempty: bool = True
    bag_radii: dict = field(default_factory=dict)
    spread: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.h1_ok and self.h2_ok and self.nonempty

    def __bool__(self):
        return self.ok

    @property
    def orw(self):
        return max(self.bag_radii.values(), default=0)

    @property
    def irs(self):
        return max(self.spread.values(), default=0)


def _structural(G: Graph, D: PartialDecomposition):
    for v in D.support:
        if v not in G:
            raise DecompositionError(f"support vertex {v} is not in the graph")
    for h in D.bags:
        if h not in D.H:
            raise DecompositionError(f"bag for unknown node {h}")
    for h, b in D.bags.items():
        out = b - D.support
        if out:
            raise DecompositionError(f"bag {h} contains vertex {min(out)} outside the support")


def validate(G: Graph, D: PartialDecomposition, metrics: bool = True) -> DecompReport:
    """Check cover, connectivity and honesty; report every violation."""
    _structural(G, D)
    rep = DecompReport()
    H = D.H
    for h in H.vertices:
        if not D.bags.get(h):
            rep.nonempty = False
            rep.violations.append(f"bag {h} is empty")
    idx = D.node_index()
    Y = D.support
    for v in sorted(Y):
        if v not in idx:
            rep.h1_ok = False
            rep.violations.append(f"(H1) vertex {v} is in no bag")
    for u in sorted(Y):
        for w in G.neighbors(u):
            if w > u and w in Y:
                if any(w in D.bags[h] for h in idx.get(u, ())):
                    continue
                rep.h1_ok = False
                rep.violations.append(f"(H1) edge {u} {w} is in no part")
    for v in sorted(idx):
        if not is_connected_set(H, idx[v]):
            rep.h2_ok = False
            rep.violations.append(f"(H2) nodes containing vertex {v} are not connected")
    for a, b in H.edges():
        if not (D.bags.get(a, frozenset()) & D.bags.get(b, frozenset())):
            rep.honest = False
            rep.violations.append(f"edge {a} {b} of H joins disjoint bags")
    if metrics:
        rep.bag_radii = {h: radius_and_centre(G, D.bags.get(h, ()))[0] for h in H.vertices}
        rep.spread = {v: _inner_radius(H, idx[v]) for v in sorted(idx)}
    return rep


def _inner_radius(H: Graph, nodes):
    """Radius of the subgraph of H induced by `nodes`, centres inside it."""
    nodes = frozenset(nodes)
    if len(nodes) <= 1:
        return 0
    best = INF
    for c in sorted(nodes):
        seen = {c}
        frontier = [c]
        d = 0
        while frontier:
            if d >= best:
                break
            nxt = []
            for u in frontier:
                for w in H.neighbors(u):
                    if w in nodes and w not in seen:
                        seen.add(w)
                        nxt.append(w)
            if not nxt:
                break
            frontier = nxt
            d += 1
        if len(seen) == len(nodes) and d < best:
            best = d
            if best == 1:
                break
    return best


def orw(G: Graph, D: PartialDecomposition):
    return max((radius_and_centre(G, b)[0] for b in D.bags.values()), default=0)


def irs_at(D: PartialDecomposition, v):
    return _inner_radius(D.H, [h for h in D.H.vertices if v in D.bags.get(h, ())])


def irs(D: PartialDecomposition):
    idx = D.node_index()
    return max((_inner_radius(D.H, idx[v]) for v in idx if v in D.support), default=0)


def restrict(D: PartialDecomposition, Y2) -> PartialDecomposition:
    """Intersect every bag with Y2; empty bags are kept for validate to flag."""
    Y2 = frozenset(Y2)
    bags = {h: b & Y2 for h, b in D.bags.items()}
    return PartialDecomposition(GraphDecomposition(D.H, bags), D.support & Y2)


def prune(D: PartialDecomposition) -> PartialDecomposition:
    """Drop empty-bag nodes and H-edges between disjoint bags.

    Neither changes any H_v, so cover, connectivity, both radii and
    minor-freeness of H are preserved.
    """
    keep = [h for h in D.H.vertices if D.bags.get(h)]
    ks = set(keep)
    edges = [(a, b) for a, b in D.H.edges() if a in ks and b in ks and D.bags[a] & D.bags[b]]
    return PartialDecomposition(GraphDecomposition(Graph(keep, edges), {h: D.bags[h] for h in keep}), D.support)


def relabel(D: PartialDecomposition, mapping: dict) -> PartialDecomposition:
    H = D.H.relabel(mapping)
    return PartialDecomposition(GraphDecomposition(H, {mapping[h]: b for h, b in D.bags.items()}), D.support)


def disjoint_union(parts: list[PartialDecomposition]) -> PartialDecomposition:
    """Union of decompositions of different components, with fresh node ids."""
    nxt = 0
    verts, edges, bags, support = [], [], {}, set()
    for D in parts:
        mp = {}
        for h in D.H.vertices:
            mp[h] = nxt
            nxt += 1
        verts.extend(mp.values())
        edges.extend((mp[a], mp[b]) for a, b in D.H.edges())
        bags.update({mp[h]: b for h, b in D.bags.items()})
        support |= D.support
    return PartialDecomposition.make(Graph(verts, edges), bags, support)


# --- gluing ----------------------------------------------------------------


class FamilyEntry(NamedTuple):
    component: frozenset
    decomposition: PartialDecomposition
    anchor: int
    target: int


@dataclass
class GlueResult:
    decomposition: PartialDecomposition
    renaming: dict


def check_feasible(G: Graph, D: PartialDecomposition, entry: FamilyEntry):
    C = frozenset(entry.component)
    NC = neighborhood(G, C)
    dC = frozenset(v for v in C if not G.adj(v) <= C)
    sub = entry.decomposition
    where = f"component with minimal vertex {min(C)}"
    if entry.anchor not in sub.H:
        raise DecompositionError(f"{where}: anchor {entry.anchor} is not a node of its decomposition")
    if entry.target not in D.H:
        raise DecompositionError(f"{where}: target node {entry.target} is not in H")
    if sub.bags.get(entry.anchor) != NC:
        raise DecompositionError(f"{where}: anchor bag differs from the component's neighbourhood")
    if not NC <= D.bags.get(entry.target, frozenset()):
        raise DecompositionError(f"{where}: neighbourhood not inside the target bag")
    if not dC <= sub.support:
        raise DecompositionError(f"{where}: boundary not covered by the new support")
    if not sub.support <= C | NC:
        raise DecompositionError(f"{where}: new support leaves the closed neighbourhood of the component")


def glue(G: Graph, D: PartialDecomposition, family: list[FamilyEntry]) -> GlueResult:
    """Join each family member to D by identifying its anchor with its target."""
    Y = D.support
    comp_of = {}
    for c in components(G, Y):
        comp_of[min(c.vertices)] = c.vertices
    for e in family:
        if comp_of.get(min(e.component)) != frozenset(e.component):
            raise DecompositionError(f"component with minimal vertex {min(e.component)} is not a component of G - Y")
        check_feasible(G, D, e)
    verts = list(D.H.vertices)
    edges = list(D.H.edges())
    bags = dict(D.bags)
    support = set(Y)
    nxt = max(verts) + 1 if verts else 0
    renaming = {}
    for i, e in enumerate(family):
        mp = {}
        for h in e.decomposition.H.vertices:
            if h == e.anchor:
                mp[h] = e.target
            else:
                mp[h] = nxt
                nxt += 1
                verts.append(mp[h])
                bags[mp[h]] = e.decomposition.bags[h]
        edges.extend((mp[a], mp[b]) for a, b in e.decomposition.H.edges())
        support |= e.decomposition.support
        renaming[i] = mp
    out = PartialDecomposition.make(Graph(verts, edges), bags, support)
    if checks_enabled():
        bY = boundary(G, Y) & Y
        for v in bY:
            old = irs_at(D, v)
            extra = max((irs_at(e.decomposition, v) for e in family if v in e.decomposition.support), default=0)
            new = irs_at(out, v)
            if new > old + 2 * extra:
                raise ContractViolation(f"glue spread bound fails at vertex {v}", {"old": old, "extra": extra, "new": new})
    return GlueResult(out, renaming)


# --- feasibility and ball-componental repair -------------------------------


def _centres(G: Graph, D: PartialDecomposition, R, cache=None):
    """node -> (radius, centre) for nodes whose bag has radius <= R."""
    out = {}
    for h in D.H.vertices:
        bag = D.bags.get(h, frozenset())
        if cache is not None and bag in cache:
            r, c = cache[bag]
        else:
            r, c = radius_and_centre(G, bag)
            if cache is not None:
                cache[bag] = (r, c)
        if c is not None and r <= R:
            out[h] = (r, c)
    return out


def _choose_hosts(G, D, R, comps, centres):
    hosts = {}
    for c in comps:
        NC = c.neighborhood
        h = next((h for h in sorted(centres) if NC <= D.bags[h]), None)
        hosts[min(c.vertices)] = h
    return hosts


def is_component_feasible(G: Graph, D: PartialDecomposition, R) -> bool:
    comps = components(G, D.support)
    if not comps:
        return True
    centres = _centres(G, D, R)
    hosts = _choose_hosts(G, D, R, comps, centres)
    return all(h is not None for h in hosts.values())


def is_ball_componental(G: Graph, support, R, centres=None) -> bool:
    """Every component of G - support is a component of G - B(w, R) for some w.

    With `centres` (component min vertex -> w) only those balls are tried.
    """
    support = frozenset(support)
    for c in components(G, support):
        cands = [centres[min(c.vertices)]] if centres else G.vertices
        if not any(_is_ball_component(G, w, R, c.vertices) for w in cands):
            return False
    return True


def _is_ball_component(G, w, R, C) -> bool:
    B = ball(G, w, R)
    if C & B:
        return False
    return neighborhood(G, C) <= B


def make_ball_componental(G: Graph, D: PartialDecomposition, R, with_centres: bool = False, cache=None):
    """Absorb into the support the part of each leftover component near its host bag.

    Each component C of G - Y picks the least node h with N(C) inside V_h and
    rad V_h <= R; V_h then also takes B(v_h, R) ∩ C, with v_h a least-id
    centre of V_h. Every new leftover component is then a component of
    G - B(v_h, R).
    """
    comps = components(G, D.support)
    centres = _centres(G, D, R, cache)
    hosts = _choose_hosts(G, D, R, comps, centres)
    bags = dict(D.bags)
    support = set(D.support)
    host_centre = {}
    for c in comps:
        h = hosts[min(c.vertices)]
        if h is None:
            raise DecompositionError(f"component with minimal vertex {min(c.vertices)} has no host bag of radius <= {R}")
        v_h = centres[h][1]
        add = ball(G, v_h, R) & c.vertices
        bags[h] = bags[h] | add
        support |= add
        host_centre[min(c.vertices)] = (c.vertices, v_h)
    out = PartialDecomposition.make(D.H, bags, support)
    if not with_centres:
        return out
    new_centres = {}
    for c in components(G, out.support):
        for key, (verts, v_h) in host_centre.items():
            if c.vertices <= verts:
                new_centres[min(c.vertices)] = v_h
                break
    return out, new_centres


# --- the extension driver --------------------------------------------------


class Ball(NamedTuple):
    centre: int
    radius: int
    vertices: frozenset


class StepResult(NamedTuple):
    decomposition: PartialDecomposition
    anchor: int


@dataclass
class DriverBounds:
    R: int
    f0: int
    f1p: int
    f1pp: int

    @property
    def f1(self):
        return self.f1p + 2 * self.f1pp + 1


def check_step_contract(G: Graph, B: Ball, C, res: StepResult, bounds: DriverBounds, X, *, full: bool = True):
    """Verify the single-step guarantees; raise ContractViolation on failure."""
    C = frozenset(C)
    D = res.decomposition
    NC = neighborhood(G, C)
    dC = frozenset(v for v in C if not G.adj(v) <= C)
    ctx = {"ball": (B.centre, B.radius), "component_min": min(C), "component_size": len(C)}
    problems = []
    if D.bags.get(res.anchor) != NC:
        problems.append("anchor bag is not the component's neighbourhood")
    if not (NC | dC) <= D.support:
        problems.append("support misses the neighbourhood or boundary")
    if not D.support <= C | NC:
        problems.append("support leaves the closed neighbourhood")
    try:
        rep = validate(G, D)
    except DecompositionError as exc:
        raise ContractViolation(f"step output malformed: {exc}", ctx) from exc
    if not rep.ok:
        problems.append("not a decomposition: " + "; ".join(rep.violations[:3]))
    if not rep.honest:
        problems.append("dishonest: " + "; ".join(v for v in rep.violations if "disjoint bags" in v)[:200])
    if rep.orw > bounds.f0:
        problems.append(f"bag radius {rep.orw} exceeds {bounds.f0}")
    if rep.irs > bounds.f1p:
        problems.append(f"spread {rep.irs} exceeds {bounds.f1p}")
    worst = max((rep.spread.get(v, 0) for v in NC), default=0)
    if worst > bounds.f1pp:
        problems.append(f"spread {worst} on the neighbourhood exceeds {bounds.f1pp}")
    if full:
        if not is_component_feasible(G, D, bounds.R):
            problems.append(f"not {bounds.R}-component-feasible")
        if X is not None and not is_minor_free(D.H, X):
            problems.append(f"decomposition graph has a {X} minor")
    if problems:
        ctx["problems"] = problems
        raise ContractViolation("step contract violated: " + problems[0], ctx)
    return rep


StarStep = Callable[[Graph, Ball, frozenset, int], "StepResult | MinorModel"]


@dataclass
class DriverResult:
    decomposition: PartialDecomposition | None = None
    witness: MinorModel | None = None
    rounds: int = 0
    steps: int = 0

    @property
    def branch(self):
        return "decomposition" if self.witness is None else "witness"


def extension_driver(
    G: Graph,
    K: int,
    star_step: StarStep,
    bounds: DriverBounds,
    X=None,
    on_round=None,
    check_steps: bool = True,
) -> DriverResult:
    """Grow a decomposition round by round until it covers G.

    Each connected component of G is handled on its own and the results are
    combined by disjoint union. The first witness any step reports is
    returned instead.
    """
    parts = []
    total_rounds = total_steps = 0
    for comp in components(G):
        Gc = G.induced(comp.vertices) if len(comp.vertices) < G.n else G
        res = _drive_connected(Gc, K, star_step, bounds, X, on_round, check_steps)
        total_rounds = max(total_rounds, res.rounds)
        total_steps += res.steps
        if res.witness is not None:
            res.rounds, res.steps = total_rounds, total_steps
            return res
        parts.append(res.decomposition)
    D = disjoint_union(parts) if parts else PartialDecomposition.make(Graph(), {}, frozenset())
    rep = validate(G, D)
    problems = []
    if not rep.ok or D.support != G.vertex_set():
        problems.append("final result is not a decomposition of G")
    if not rep.honest:
        problems.append("final result is dishonest")
    if rep.orw > bounds.f0:
        problems.append(f"final bag radius {rep.orw} exceeds {bounds.f0}")
    if rep.irs > bounds.f1:
        problems.append(f"final spread {rep.irs} exceeds {bounds.f1}")
    if X is not None and not is_minor_free(D.H, X):
        problems.append(f"final decomposition graph has a {X} minor")
    if problems:
        raise ContractViolation(problems[0], {"problems": problems, "violations": rep.violations[:10]})
    return DriverResult(D, None, total_rounds, total_steps)


def _drive_connected(G, K, star_step, bounds, X, on_round, check_steps) -> DriverResult:
    R = bounds.R
    v = G.vertices[0]
    Y0 = ball(G, v, R)
    D = single_bag(Y0)
    centres = {min(c.vertices): v for c in components(G, D.support)}
    rounds = steps = 0
    limit = G.n + 1
    cache: dict = {}
    while D.support != G.vertex_set():
        if rounds >= limit:
            raise ContractViolation("driver exceeded its round limit", {"rounds": rounds})
        rounds += 1
        family = []
        comps = components(G, D.support)
        hosts = _choose_hosts(G, D, R, comps, _centres(G, D, R, cache))
        for c in comps:
            w = centres[min(c.vertices)]
            B = Ball(w, R, ball(G, w, R))
            if B.vertices & c.vertices or not c.neighborhood <= B.vertices:
                raise ContractViolation("leftover component is not cut off by its ball", {"centre": w})
            out = star_step(G, B, c.vertices, K)
            steps += 1
            if isinstance(out, MinorModel):
                return DriverResult(None, out, rounds, steps)
            if check_steps:
                check_step_contract(G, B, c.vertices, out, bounds, X)
            host = hosts[min(c.vertices)]
            if host is None:
                raise ContractViolation("support is not component-feasible", {"component_min": min(c.vertices)})
            family.append(FamilyEntry(c.vertices, out.decomposition, out.anchor, host))
        prev = D
        D = glue(G, D, family).decomposition
        D, centres = make_ball_componental(G, D, R, with_centres=True, cache=cache)
        if on_round is not None:
            on_round(prev, D)
        log.debug("round %d: support %d of %d", rounds, len(D.support), G.n)
    return DriverResult(D, None, rounds, steps)


def extends(old: PartialDecomposition, new: PartialDecomposition) -> bool:
    """H grows, support grows, and every old bag is inside its new version."""
    if not set(old.H.vertices) <= set(new.H.vertices):
        return False
    if not all(new.H.has_edge(a, b) for a, b in old.H.edges()):
        return False
    if not old.support <= new.support:
        return False
    return all(b <= new.bags.get(h, frozenset()) for h, b in old.bags.items())


# --- serialisation ---------------------------------------------------------


def format_decomposition(D: PartialDecomposition) -> str:
    lines = []
    covered = set()
    for a, b in D.H.edges():
        lines.append(f"{a} {b}")
        covered |= {a, b}
    for h in D.H.vertices:
        if h not in covered:
            lines.append(f"{h}")
    for h in D.H.vertices:
        lines.append(f"bag {h}: " + " ".join(map(str, sorted(D.bags.get(h, ())))))
    return "\n".join(lines) + "\n"


def parse_decomposition(text: str, support=None) -> PartialDecomposition:
    """Parse the H edge list followed by `bag h: v...` lines.

    Nodes mentioned only by a bag line are added to H. The support defaults
    to the union of the bags.
    """
    nodes, edges, bags = set(), [], {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("bag"):
                head, body = line.split(":", 1)
                h = int(head.split()[1])
                if h in bags:
                    raise DecompositionError(f"line {lineno}: repeated bag {h}")
                bags[h] = frozenset(int(t) for t in body.split())
                nodes.add(h)
            else:
                ids = [int(t) for t in line.split()]
                if len(ids) == 1:
                    nodes.add(ids[0])
                elif len(ids) == 2:
                    if ids[0] == ids[1]:
                        raise ValueError
                    edges.append(tuple(ids))
                else:
                    raise ValueError
        except (ValueError, IndexError):
            raise DecompositionError(f"line {lineno}: cannot parse {line!r}") from None
    H = Graph(nodes, edges)
    for h in H.vertices:
        bags.setdefault(h, frozenset())
    return PartialDecomposition.make(H, bags, support)
