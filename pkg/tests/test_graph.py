import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import graphs, to_nx
from fatminors.graph import (
    INF,
    DomainError,
    EdgeListError,
    Graph,
    GraphError,
    Path,
    ball,
    components,
    cycle_graph,
    diameter_pair,
    dist,
    far_triple,
    format_edge_list,
    is_path,
    parse_edge_list,
    path_graph,
    rad_of_set,
    radius_and_centre,
    shortest_path,
)


def test_dist_examples():
    C6 = cycle_graph(6)
    assert dist(C6, {0}, {0}) == 0
    assert dist(C6, {0}, {3}) == 3
    two = Graph(range(4), [(0, 1), (2, 3)])
    assert dist(two, {0}, {2}) is INF


def test_dist_empty_is_domain_error():
    with pytest.raises(DomainError):
        dist(cycle_graph(6), set(), {1})


def test_inf_sentinel():
    assert INF > 10**100
    assert not INF < 5
    assert INF + 3 is INF
    assert max(3, INF) is INF
    assert min(3, INF) == 3


def test_ball_examples():
    C6 = cycle_graph(6)
    assert ball(C6, {2, 4}, 0) == {2, 4}
    assert ball(C6, {0}, 1) == {5, 0, 1}
    assert ball(path_graph(5), {0}, 4) == set(range(5))


def test_radius_examples():
    assert rad_of_set(path_graph(5), set()) == 0
    assert rad_of_set(Graph([0, 1]), {0, 1}) is INF
    assert rad_of_set(path_graph(5), range(5)) == 2
    assert radius_and_centre(path_graph(5), range(5)) == (2, 2)
    # the centre may lie outside the set
    assert radius_and_centre(cycle_graph(8), {1, 3}) == (1, 2)


def test_components_examples():
    comps = components(cycle_graph(6), {0})
    assert len(comps) == 1
    assert comps[0].vertices == {1, 2, 3, 4, 5}
    assert comps[0].boundary == {1, 5}
    assert comps[0].neighborhood == {0}
    star = Graph(range(4), [(0, 1), (0, 2), (0, 3)])
    leaves = components(star, {0})
    assert [c.vertices for c in leaves] == [{1}, {2}, {3}]
    assert all(c.boundary == c.vertices for c in leaves)
    plain = components(Graph(range(4), [(0, 1), (2, 3)]))
    assert all(not c.boundary for c in plain)


def test_shortest_path_examples():
    C6 = cycle_graph(6)
    p = shortest_path(C6, {0}, {3})
    assert p == (0, 1, 2, 3)
    assert shortest_path(C6, {4}, {4}) == (4,)
    assert shortest_path(Graph(range(4), [(0, 1), (2, 3)]), {0}, {2}) is None


def test_shortest_path_allowed_interior():
    C6 = cycle_graph(6)
    assert shortest_path(C6, {0}, {3}, allowed={4, 5}) == (0, 5, 4, 3)
    assert shortest_path(C6, {0}, {3}, allowed=set()) is None


def test_path_helpers():
    p = Path((4, 5, 6, 7))
    assert p.sub(1, 3) == (5, 6, 7)
    assert p.sub(3, 1) == (7, 6, 5)
    assert p.reverse() == (7, 6, 5, 4)
    assert p.interior() == (5, 6)
    assert p.length == 3


def test_graph_rejects_loops_and_bad_ids():
    with pytest.raises(GraphError):
        Graph([0], [(0, 0)])
    with pytest.raises(GraphError):
        Graph([-1])


def test_edge_list_roundtrip_and_errors():
    text = "# demo\n0 1\n1 2  # trailing\n\n5\n"
    G = parse_edge_list(text)
    assert G.vertices == (0, 1, 2, 5)
    assert parse_edge_list(format_edge_list(G)) == G
    with pytest.raises(EdgeListError, match="line 2"):
        parse_edge_list("0 1\n1 1\n")
    with pytest.raises(EdgeListError, match="line 3.*duplicate"):
        parse_edge_list("0 1\n1 2\n1 0\n")
    with pytest.raises(EdgeListError, match="line 1"):
        parse_edge_list("a b\n")


def test_far_triple_and_diameter():
    C = cycle_graph(30)
    assert diameter_pair(C, range(30))[1] == 15
    t = far_triple(C, range(30), 10)
    assert t is not None
    a, b, c = t
    assert min(dist(C, a, b), dist(C, b, c), dist(C, a, c)) >= 10
    assert far_triple(C, range(30), 11) is None


@settings(max_examples=60, deadline=None)
@given(graphs(max_n=14), st.data())
def test_triangle_inequality(G, data):
    u, v, w = (data.draw(st.sampled_from(G.vertices)) for _ in range(3))
    assert dist(G, u, w) <= dist(G, u, v) + dist(G, v, w)


@settings(max_examples=60, deadline=None)
@given(graphs(max_n=14), st.data())
def test_ball_grows_one_step_at_a_time(G, data):
    U = data.draw(st.sets(st.sampled_from(G.vertices), min_size=1, max_size=4))
    r = data.draw(st.integers(0, 5))
    assert ball(G, U, r + 1) == ball(G, ball(G, U, r), 1)
    assert ball(G, U, r) <= ball(G, U, r + 1)


@settings(max_examples=60, deadline=None)
@given(graphs(max_n=14), st.data())
def test_components_partition(G, data):
    removed = data.draw(st.sets(st.sampled_from(G.vertices), max_size=4))
    comps = components(G, removed)
    seen = set()
    for c in comps:
        assert not (c.vertices & seen)
        seen |= c.vertices
        assert nx.is_connected(to_nx(G).subgraph(c.vertices))
        # maximal: nothing outside is adjacent except removed vertices
        assert all(w in removed for v in c.vertices for w in G.adj(v) if w not in c.vertices)
    assert seen | set(removed) == set(G.vertices)
    assert [min(c.vertices) for c in comps] == sorted(min(c.vertices) for c in comps)


@settings(max_examples=60, deadline=None)
@given(graphs(max_n=14), st.data())
def test_shortest_path_matches_dist(G, data):
    u = data.draw(st.sampled_from(G.vertices))
    v = data.draw(st.sampled_from(G.vertices))
    p = shortest_path(G, {u}, {v})
    d = dist(G, u, v)
    if d is INF:
        assert p is None
    else:
        assert is_path(G, p) and p.first == u and p.last == v and p.length == d


@settings(max_examples=40, deadline=None)
@given(graphs(max_n=12, connected=True), st.data())
def test_radius_against_networkx(G, data):
    U = data.draw(st.sets(st.sampled_from(G.vertices), min_size=1))
    lengths = dict(nx.all_pairs_shortest_path_length(to_nx(G)))
    expect = min(max(lengths[v][u] for u in U) for v in G.vertices)
    r, c = radius_and_centre(G, U)
    assert r == expect
    assert c == min(v for v in G.vertices if max(lengths[v][u] for u in U) == expect)
