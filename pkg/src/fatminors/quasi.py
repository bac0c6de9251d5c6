"""Quasi-isometries read off from honest radial decompositions.

Constants are exact rationals throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .decomp import PartialDecomposition, validate
from .graph import INF, Graph, GraphError, bfs_layers, radius_and_centre


class QIError(GraphError):
    pass


@dataclass
class QuasiIsometry:
    map: dict
    M: Fraction
    A: Fraction

    def __post_init__(self):
        self.M = Fraction(self.M)
        self.A = Fraction(self.A)
        if self.M < 1 or self.A < 0:
            raise QIError("need M >= 1 and A >= 0")


@dataclass
class QIReport:
    ok: bool
    failure: str | None = None
    pair: tuple | None = None

    def __bool__(self):
        return self.ok


def qi_constants(orw_value, irs_value) -> tuple[Fraction, Fraction]:
    """(M, A) from outer width and spread; M is clamped to at least 1."""
    if orw_value is INF or irs_value is INF:
        raise QIError("unbounded decomposition")
    a = Fraction(max(2 * orw_value, 2 * irs_value))
    return max(Fraction(1), a), a


def from_decomposition(G: Graph, D: PartialDecomposition) -> QuasiIsometry:
    """Map every node to a least-id centre of its bag."""
    rep = validate(G, D)
    if not rep.ok or not rep.honest or D.support != G.vertex_set():
        raise QIError("needs an honest decomposition of the whole graph: " + "; ".join(rep.violations[:3]))
    phi = {}
    for h in D.H.vertices:
        r, c = radius_and_centre(G, D.bags[h])
        if c is None:
            raise QIError(f"bag {h} has infinite radius")
        phi[h] = c
    M, A = qi_constants(rep.orw, rep.irs)
    return QuasiIsometry(phi, M, A)


def verify_qi(H: Graph, G: Graph, q: QuasiIsometry) -> QIReport:
    """Exhaustive check of both quasi-isometry conditions."""
    if set(q.map) != set(H.vertices):
        return QIReport(False, "map is not total on the nodes")
    if any(v not in G for v in q.map.values()):
        return QIReport(False, "map leaves the graph")
    M, A = q.M, q.A
    nodes = H.vertices
    gcache: dict = {}
    for i, h in enumerate(nodes):
        dH = bfs_layers(H, h)
        src = q.map[h]
        if src not in gcache:
            gcache[src] = bfs_layers(G, src)
        dG = gcache[src]
        for h2 in nodes[i:]:
            a = dH.get(h2, INF)
            b = dG.get(q.map[h2], INF)
            if a is INF or b is INF:
                if a is not b:
                    return QIReport(False, f"(Q1) fails for nodes {h} {h2}: one distance infinite", (h, h2))
                continue
            if Fraction(a) / M - A > b:
                return QIReport(False, f"(Q1) lower bound fails for nodes {h} {h2}", (h, h2))
            if b > M * a + A:
                return QIReport(False, f"(Q1) upper bound fails for nodes {h} {h2}", (h, h2))
    if G.n:
        if not nodes:
            return QIReport(False, "(Q2) fails: no nodes")
        d = bfs_layers(G, set(q.map.values()))
        for v in G.vertices:
            if v not in d or d[v] > A:
                return QIReport(False, f"(Q2) fails at vertex {v}", (v,))
    return QIReport(True)


def invert_constants(M, A) -> tuple[Fraction, Fraction]:
    M, A = Fraction(M), Fraction(A)
    if M < 1 or A < 0:
        raise QIError("need M >= 1 and A >= 0")
    return M, 3 * A * M


def format_qi(q: QuasiIsometry) -> str:
    lines = [f"{q.M} {q.A}"]
    lines += [f"{h} -> {v}" for h, v in sorted(q.map.items())]
    return "\n".join(lines) + "\n"


def parse_qi(text: str) -> QuasiIsometry:
    rows = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    rows = [(i, r) for i, r in enumerate(rows, 1) if r]
    if not rows:
        raise QIError("empty quasi-isometry file")
    try:
        M, A = (Fraction(t) for t in rows[0][1].split())
    except ValueError:
        raise QIError(f"line {rows[0][0]}: expected 'M A'") from None
    phi = {}
    for lineno, r in rows[1:]:
        try:
            h, v = r.split("->")
            phi[int(h)] = int(v)
        except ValueError:
            raise QIError(f"line {lineno}: expected 'h -> v'") from None
    return QuasiIsometry(phi, M, A)
