"""Graph generators for tests, the acceptance suite and the corpus command."""
from __future__ import annotations

import random

import networkx as nx

from .graph import Graph, cycle_graph, grid_graph, path_graph


def from_nx(g) -> Graph:
    g = nx.convert_node_labels_to_integers(g, ordering="sorted")
    return Graph(g.nodes(), g.edges())


def theta_graph(*lengths: int) -> Graph:
    """Hubs 0 and 1 joined by internally disjoint paths of the given lengths."""
    edges = []
    nxt = 2
    for L in lengths:
        if L < 1:
            raise ValueError("arc lengths must be positive")
        prev = 0
        for _ in range(L - 1):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
        edges.append((prev, 1))
    return Graph(range(nxt), edges)


def subdivide(G: Graph, k: int) -> Graph:
    """Replace every edge by a path of length k."""
    if k < 1:
        raise ValueError("k must be positive")
    edges = []
    nxt = max(G.vertices) + 1 if G.n else 0
    for u, v in G.edges():
        prev = u
        for _ in range(k - 1):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
        edges.append((prev, v))
    return Graph(range(nxt), edges)


def k4_trap(k: int) -> Graph:
    return subdivide(Graph(range(4), [(a, b) for a in range(4) for b in range(a + 1, 4)]), k)


def k4minus_trap(k: int) -> Graph:
    return subdivide(Graph(range(4), [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]), k)


def random_tree(n: int, seed: int) -> Graph:
    if n == 1:
        return Graph([0])
    rng = random.Random(seed)
    return Graph(range(n), [(v, rng.randrange(v)) for v in range(1, n)])


def gnp(n: int, p: float, seed: int) -> Graph:
    return from_nx(nx.gnp_random_graph(n, p, seed=seed))


def named_corpus(scale: str = "full", traps=("k4minus",)):
    """(name, graph) pairs covering paths, cycles, trees, thetas, grids, random graphs and traps."""
    full = scale == "full"
    out = []
    for n in ((1, 2, 5, 50, 200, 500) if full else (1, 5, 40)):
        out.append((f"path{n}", path_graph(n)))
    for n in ((3, 10, 60, 150, 300, 500) if full else (3, 12, 60)):
        out.append((f"cycle{n}", cycle_graph(n)))
    for n, seed in (((10, 1), (100, 2), (300, 3)) if full else ((10, 1), (60, 2))):
        out.append((f"tree{n}s{seed}", random_tree(n, seed)))
    for lens in (((3, 3, 3), (10, 20, 30), (60, 60, 60), (100, 100, 100), (5, 150, 150)) if full else ((3, 3, 3), (40, 40, 40))):
        out.append(("theta" + "-".join(map(str, lens)), theta_graph(*lens)))
    for r, c in (((2, 2), (5, 5), (3, 12), (12, 12)) if full else ((3, 3), (6, 6))):
        out.append((f"grid{r}x{c}", grid_graph(r, c)))
    for n, p, seed in (((10, 0.3, 1), (20, 0.15, 2), (30, 0.1, 3), (40, 0.08, 4), (40, 0.2, 5)) if full else ((12, 0.25, 1), (25, 0.12, 2))):
        out.append((f"gnp{n}p{p}s{seed}", gnp(n, p, seed)))
    for t in traps:
        for k in ((1, 5, 20, 40) if full else (1, 20)):
            make = k4minus_trap if t == "k4minus" else k4_trap
            out.append((f"{t}trap{k}", make(k)))
    return out


def connected_graphs(max_n: int = 8) -> list[Graph]:
    """Every connected graph on 1..max_n vertices, one per isomorphism class.

    Up to seven vertices this is the networkx atlas; each larger order comes
    from adding a vertex to every graph of the previous order in all ways and
    keeping one representative per class. Every connected graph has a vertex
    whose removal leaves it connected, so nothing is missed.
    """
    from networkx.generators.atlas import graph_atlas_g

    layer = {}
    for g in graph_atlas_g():
        if g.number_of_nodes() and nx.is_connected(g):
            layer.setdefault(g.number_of_nodes(), []).append(g)
    for n in range(8, max_n + 1):
        buckets: dict = {}
        for g in layer[n - 1]:
            for mask in range(1, 1 << (n - 1)):
                h = g.copy()
                h.add_edges_from((n - 1, i) for i in range(n - 1) if mask >> i & 1)
                key = (h.number_of_edges(), tuple(sorted(d for _, d in h.degree())),
                       nx.weisfeiler_lehman_graph_hash(h, iterations=3))
                reps = buckets.setdefault(key, [])
                if not any(nx.is_isomorphic(h, o) for o in reps):
                    reps.append(h)
        layer[n] = [h for reps in buckets.values() for h in reps]
    return [Graph(g.nodes(), g.edges()) for n in sorted(layer) if n <= max_n for g in layer[n]]
