import networkx as nx
from hypothesis import strategies as st

from fatminors.graph import Graph


def from_nx(g):
    g = nx.convert_node_labels_to_integers(g, ordering="sorted")
    return Graph(g.nodes(), g.edges())


def to_nx(G):
    g = nx.Graph()
    g.add_nodes_from(G.vertices)
    g.add_edges_from(G.edges())
    return g


@st.composite
def graphs(draw, min_n=1, max_n=12, connected=False):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=2 * n)) if pairs else []
    edges = list(chosen)
    if connected:
        # random spanning tree first
        for v in range(1, n):
            u = draw(st.integers(0, v - 1))
            edges.append((u, v))
    return Graph(range(n), edges)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
