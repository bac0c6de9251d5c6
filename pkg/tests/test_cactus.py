import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fatminors.cactus import (
    PreconditionError,
    cactus_star_step,
    decompose_cactus,
    fat_k4minus_from_triple,
    path_ball_decomposition,
    path_decomposition_step,
)
from fatminors.corpus import k4minus_trap, random_tree, theta_graph
from fatminors.decomp import Ball, PartialDecomposition, StepResult, validate
from fatminors.graph import (
    Graph,
    ball,
    components,
    cycle_graph,
    dist,
    grid_graph,
    neighborhood,
    path_graph,
    shortest_path,
)
from fatminors.minors import MinorModel, fatness, is_minor_free
from fatminors.quasi import from_decomposition, verify_qi


def spokes(r, tail):
    """Hub 0 with three spokes of length r+1 whose ends meet at a far vertex via paths of length `tail`."""
    edges, nxt, ends = [], 1, []
    for _ in range(3):
        prev = 0
        for _ in range(r + 1):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
        ends.append(prev)
    z = nxt
    nxt += 1
    for u in ends:
        prev = u
        for _ in range(tail - 1):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
        edges.append((prev, z))
    return Graph(range(nxt), edges), ends


@pytest.mark.parametrize("K", [1, 2])
def test_triple_constructor_on_spokes(K):
    r = 4 * K
    G, ends = spokes(r, 4 * K)
    (C,) = [c for c in components(G, ball(G, 0, r))]
    m = fat_k4minus_from_triple(G, 0, r, C.vertices, *ends, K)
    assert fatness(G, m) >= K


def test_triple_constructor_preconditions():
    G, ends = spokes(4, 4)
    C = components(G, ball(G, 0, 4))[0].vertices
    u = next(v for v in C if v not in ends)
    with pytest.raises(PreconditionError):
        fat_k4minus_from_triple(G, 0, 4, C, ends[0], ends[1], u, 1)
    G2 = Graph(range(3), [(0, 1), (1, 2)])
    with pytest.raises(PreconditionError):
        fat_k4minus_from_triple(G2, 0, 0, {1, 2}, 1, 1, 2, 1)


def test_triple_constructor_on_theta():
    G = theta_graph(10, 10, 10)
    # the ball of radius 4 around hub 0 leaves one component with three boundary vertices
    (C,) = components(G, ball(G, 0, 4))
    assert len(C.boundary) == 3
    m = fat_k4minus_from_triple(G, 0, 4, C.vertices, *sorted(C.boundary), 1)
    assert fatness(G, m) >= 1


def test_path_ball_examples():
    P10 = path_graph(10)
    D = path_ball_decomposition(P10, tuple(range(10)), 2)
    rep = validate(P10, D)
    assert D.support == P10.vertex_set() and rep.ok and rep.honest and rep.orw <= 5
    D0 = path_ball_decomposition(P10, tuple(range(10)), 0)
    assert validate(P10, D0).orw <= 1
    G = grid_graph(10, 10)
    P = shortest_path(G, {0}, {99})
    D = path_ball_decomposition(G, P, 3)
    rep = validate(G, D)
    assert rep.ok and rep.orw <= 7 and rep.irs <= 7
    with pytest.raises(PreconditionError):
        path_ball_decomposition(cycle_graph(8), (0, 1, 2, 3, 4, 5), 1)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.integers(2, 12), st.integers(0, 5), st.data())
def test_path_ball_bounds(rows, cols, r, data):
    G = grid_graph(rows, cols)
    a = data.draw(st.sampled_from(G.vertices))
    b = data.draw(st.sampled_from(G.vertices))
    P = shortest_path(G, {a}, {b})
    D = path_ball_decomposition(G, P, r)
    rep = validate(G, D)
    assert rep.ok and rep.honest
    assert rep.orw <= 2 * r + 1 and rep.irs <= 2 * r + 1
    for j, p in enumerate(P):
        assert D.bags[j] <= ball(G, p, 2 * r + 1)


def handle_cycle(arc, handle):
    """A cycle made of an arc a_0..a_arc (the ball) and a handle of `handle` more vertices."""
    n = arc + 1 + handle
    return cycle_graph(n)


def test_path_step_on_long_handle():
    G = handle_cycle(100, 200)
    w, r = 50, 50
    (C,) = components(G, ball(G, w, r))
    res = path_decomposition_step(G, w, r, C.vertices, 1)
    assert not isinstance(res, MinorModel)
    D = res.decomposition
    rep = validate(G, D)
    assert rep.ok and rep.honest and rep.orw <= 29 and rep.irs <= 29
    n = len(res.path) - 1
    NC = neighborhood(G, C.vertices)
    assert (NC | C.boundary) <= D.bags[0] | D.bags[n]
    assert all(not (D.bags[j] & NC) for j in range(1, n))
    for c in components(G, D.support, within=C.vertices):
        assert any(c.neighborhood <= b for b in D.bags.values())


def test_path_step_precondition():
    G = cycle_graph(30)
    (C,) = components(G, ball(G, 0, 3))
    with pytest.raises(PreconditionError):
        path_decomposition_step(G, 0, 3, C.vertices, 1)


def test_star_step_branches():
    G = path_graph(3)
    out = cactus_star_step(G, Ball(0, 1, ball(G, 0, 1)), frozenset({2}), 1)
    assert isinstance(out, StepResult)
    assert out.decomposition.bags[out.anchor] == {1}
    G = handle_cycle(100, 200)
    (C,) = components(G, ball(G, 50, 43))
    out = cactus_star_step(G, Ball(50, 43, ball(G, 50, 43)), C.vertices, 1)
    assert isinstance(out, StepResult)
    assert is_minor_free(out.decomposition.H, "k4minus")
    G = theta_graph(100, 100, 100)
    (C,) = components(G, ball(G, 0, 43))
    out = cactus_star_step(G, Ball(0, 43, ball(G, 0, 43)), C.vertices, 1)
    assert isinstance(out, MinorModel) and fatness(G, out) >= 1


def check_dichotomy(G, K):
    res = decompose_cactus(G, K)
    if res.witness is not None:
        assert fatness(G, res.witness) >= K
        return "witness"
    D = res.decomposition
    rep = validate(G, D)
    assert rep.ok and rep.honest and D.support == G.vertex_set()
    assert rep.orw <= 42 * K + 1 and rep.irs <= 28 * K + 3
    assert is_minor_free(D.H, "k4minus")
    q = from_decomposition(G, D)
    assert verify_qi(D.H, G, q)
    return "decomposition"


def test_decompose_examples():
    assert check_dichotomy(random_tree(80, 4), 1) == "decomposition"
    assert check_dichotomy(cycle_graph(60), 1) == "decomposition"
    assert check_dichotomy(path_graph(100), 1) == "decomposition"
    check_dichotomy(grid_graph(12, 12), 1)
    assert check_dichotomy(k4minus_trap(60), 1) == "witness"


def test_long_cycle_runs_the_path_branch():
    G = cycle_graph(300)
    res = decompose_cactus(G, 1)
    D = res.decomposition
    assert D.H.n > 2
    rep = validate(G, D)
    assert rep.orw <= 43 and rep.irs <= 31


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 60), st.integers(0, 10**6), st.integers(1, 2))
def test_dichotomy_on_random_cacti_and_thetas(n, seed, K):
    import random

    rng = random.Random(seed)
    lens = [rng.randint(1, n) for _ in range(3)]
    if sorted(lens)[1] < 2:
        lens[0] = lens[1] = 2
    check_dichotomy(theta_graph(*lens), K)
