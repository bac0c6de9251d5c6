import itertools

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import from_nx, graphs
from fatminors.graph import INF, Graph, complete_graph, cycle_graph, path_graph, set_checks
from fatminors.minors import (
    K3,
    K4,
    BudgetExceeded,
    MinorModel,
    StructuralError,
    TerminalMismatch,
    TwoTerminalGraph,
    K4minus,
    blocks,
    brute_force_fat_minor,
    edge_tt,
    fatness,
    format_model,
    hsp_build,
    in_HSP,
    is_minor_free,
    parse_model,
    validate_model,
)


def c12_model():
    paths = {(0, 1): (1, 2, 3), (1, 2): (5, 6, 7), (0, 2): (11, 10, 9)}
    return MinorModel(K3(), {0: {11, 0, 1}, 1: {3, 4, 5}, 2: {7, 8, 9}}, paths)


def k4_in_k4():
    return MinorModel(K4(), {i: {i} for i in range(4)}, {e: e for e in K4().edges()})


def test_validate_examples():
    K = complete_graph(4)
    tri = MinorModel(K3(), {0: {0}, 1: {1}, 2: {2}}, {(0, 1): (0, 1), (1, 2): (1, 2), (0, 2): (0, 2)})
    assert validate_model(K, tri)
    shared = MinorModel(K3(), {0: {0, 1}, 1: {1}, 2: {2}}, {(0, 1): (0, 1), (1, 2): (1, 2), (0, 2): (0, 2)})
    rep = validate_model(K, shared)
    assert not rep and "not disjoint" in rep.violation
    assert validate_model(cycle_graph(12), c12_model())


def test_validate_structural_errors():
    bad = MinorModel(K3(), {0: {0}, 1: {1}, 2: {99}}, {(0, 1): (0, 1), (1, 2): (1, 99), (0, 2): (0, 99)})
    with pytest.raises(StructuralError):
        validate_model(complete_graph(4), bad)
    missing = MinorModel(K3(), {0: {0}, 1: {1}}, {})
    with pytest.raises(StructuralError):
        validate_model(complete_graph(4), missing)


def test_validate_path_clauses():
    C = cycle_graph(12)
    m = c12_model()
    m.branch_paths[(0, 1)] = (1, 2)
    assert "not a path between" in validate_model(C, m).violation
    m = c12_model()
    m.branch_paths[(0, 1)] = (0, 1, 2, 3)
    assert not validate_model(C, m)
    # a path through a third branch set
    G = Graph(range(4), [(0, 1), (1, 2), (0, 2), (2, 3), (0, 3)])
    m = MinorModel(K3(), {0: {0}, 1: {1}, 2: {3}}, {(0, 1): (0, 2, 1), (1, 2): (1, 2, 3), (0, 2): (0, 3)})
    assert "not internally disjoint" in validate_model(G, m).violation


def test_fatness_examples():
    # verified against direct BFS below
    assert fatness(cycle_graph(12), c12_model()) == 2
    # paths 01 and 02 share the vertex 0, so this model is only 0-fat
    assert fatness(complete_graph(4), k4_in_k4()) == 0
    single = MinorModel(Graph([0]), {0: {5}}, {})
    assert fatness(Graph([5]), single) is INF


def test_fatness_against_direct_distances():
    C = cycle_graph(12)
    m = c12_model()
    dist = dict(nx.all_pairs_shortest_path_length(nx.cycle_graph(12)))
    members = [("V", x, m.branch_sets[x]) for x in m.branch_sets] + [("E", e, set(p)) for e, p in m.branch_paths.items()]
    best = INF
    for (ka, a, A), (kb, b, B) in itertools.combinations(members, 2):
        if ka == "E" and kb == "V" and b in a or ka == "V" and kb == "E" and a in b:
            continue
        best = min(best, min(dist[u][v] for u in A for v in B))
    assert fatness(C, m) == best


def test_brute_force_examples():
    m = brute_force_fat_minor(complete_graph(4), K4(), 0)
    assert m is not None and validate_model(complete_graph(4), m)
    tree = from_nx(nx.balanced_tree(2, 3))
    assert brute_force_fat_minor(tree, K3(), 0) is None
    m = brute_force_fat_minor(cycle_graph(12), K3(), 2)
    assert m is not None and fatness(cycle_graph(12), m) >= 2
    assert brute_force_fat_minor(cycle_graph(8), K3(), 3) is None


def test_brute_force_budget_is_explicit():
    with pytest.raises(BudgetExceeded):
        brute_force_fat_minor(from_nx(nx.grid_2d_graph(4, 4)), K4(), 1, budget=50)


def test_is_minor_free_examples():
    assert is_minor_free(from_nx(nx.random_labeled_tree(20, seed=3)), "k4")
    assert not is_minor_free(complete_graph(4), "k4")
    bowtie = Graph(range(5), [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)])
    diamond = Graph(range(4), [(0, 1), (1, 2), (0, 2), (1, 3), (2, 3)])
    assert is_minor_free(bowtie, "k4minus")
    assert not is_minor_free(diamond, "k4minus")
    assert brute_force_fat_minor(bowtie, K4minus(), 0) is None
    assert brute_force_fat_minor(diamond, K4minus(), 0) is not None
    assert not is_minor_free(from_nx(nx.petersen_graph()), "k4")


def test_blocks_of_bowtie():
    bowtie = Graph(range(5), [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)])
    assert sorted(blocks(bowtie), key=lambda b: min(b[0])) == [({0, 1, 2}, 3), ({2, 3, 4}, 3)]


@settings(max_examples=80, deadline=None)
@given(graphs(max_n=7))
def test_oracle_agrees_with_recognition(G):
    for name, X in (("k4", K4()), ("k4minus", K4minus())):
        assert (brute_force_fat_minor(G, X, 0) is None) == is_minor_free(G, name)


@settings(max_examples=60, deadline=None)
@given(graphs(max_n=10))
def test_recognition_against_networkx_treewidth(G):
    # K4-minor-free is treewidth at most 2; the min-degree heuristic is exact there
    g = nx.Graph(G.edges())
    g.add_nodes_from(G.vertices)
    if is_minor_free(G, "k4"):
        from networkx.algorithms.approximation import treewidth_min_degree

        assert treewidth_min_degree(g)[0] <= 2
    cactus = all(
        len(c) <= 2 or g.subgraph(c).number_of_edges() == len(c) for c in nx.biconnected_components(g)
    )
    assert cactus == is_minor_free(G, "k4minus")


def test_hsp_examples():
    assert in_HSP(edge_tt())
    k4e = Graph(range(4), [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
    assert not in_HSP(TwoTerminalGraph(k4e, 2, 3))
    assert in_HSP(TwoTerminalGraph(cycle_graph(6), 0, 3))


def test_hsp_build_examples():
    par = hsp_build("parallel", edge_tt(), edge_tt())
    assert par.graph.n == 2 and par.graph.m == 1
    ser = hsp_build("series", edge_tt(), edge_tt())
    assert ser.graph == path_graph(3) and (ser.source, ser.sink) == (0, 2)
    c3 = TwoTerminalGraph(cycle_graph(3), 0, 0)
    glued = hsp_build("one_sum", c3, cycle_graph(3), 0, 1)
    assert glued.graph.n == 5 and is_minor_free(glued.graph, "k4minus")
    with pytest.raises(TerminalMismatch):
        hsp_build("parallel", edge_tt(), TwoTerminalGraph(Graph([0]), 0, 0))


@st.composite
def hsp_terms(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return edge_tt()
    op = draw(st.sampled_from(["parallel", "series", "subdivide", "long_path", "one_sum"]))
    T = draw(hsp_terms(depth=depth - 1))
    if op in ("parallel", "series"):
        return hsp_build(op, T, draw(hsp_terms(depth=depth - 1)))
    if op == "one_sum":
        other = draw(hsp_terms(depth=depth - 1))
        v = draw(st.sampled_from(T.graph.vertices))
        return hsp_build(op, T, other.graph, v, other.source)
    u, v = draw(st.sampled_from(T.graph.edges()))
    if op == "subdivide":
        return hsp_build(op, T, u, v)
    return hsp_build(op, T, u, v, draw(st.integers(2, 4)))


@settings(max_examples=200, deadline=None)
@given(hsp_terms())
def test_compositions_stay_in_class(T):
    assert in_HSP(T)


def test_model_roundtrip():
    m = c12_model()
    back = parse_model(format_model(m))
    assert back.branch_sets == m.branch_sets and back.branch_paths == m.branch_paths
    assert back.pattern == m.pattern


def test_checks_mode_runs():
    set_checks(True)
    try:
        assert brute_force_fat_minor(cycle_graph(12), K3(), 2) is not None
        hsp_build("series", edge_tt(), edge_tt())
    finally:
        set_checks(False)
