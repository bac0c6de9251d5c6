import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import graphs
from fatminors.decomp import (
    Ball,
    ContractViolation,
    DecompositionError,
    DriverBounds,
    FamilyEntry,
    PartialDecomposition,
    StepResult,
    extends,
    extension_driver,
    format_decomposition,
    glue,
    irs,
    irs_at,
    is_ball_componental,
    is_component_feasible,
    make_ball_componental,
    orw,
    parse_decomposition,
    prune,
    restrict,
    single_bag,
    validate,
)
from fatminors.graph import Graph, ball, components, cycle_graph, neighborhood, path_graph, set_checks


def K2_decomp(b0, b1, support=None):
    return PartialDecomposition.make(Graph([0, 1], [(0, 1)]), {0: b0, 1: b1}, support)


def test_validate_examples():
    G = cycle_graph(7)
    rep = validate(G, single_bag(G.vertices))
    assert rep.ok and rep.honest and not rep.violations
    P3 = path_graph(3)
    rep = validate(P3, K2_decomp({0, 1}, {2}))
    assert not rep.h1_ok and not rep.honest
    assert any("edge 1 2" in v for v in rep.violations)
    rep = validate(P3, K2_decomp({0, 1}, {1, 2}))
    assert rep.ok and rep.honest


def test_validate_reports_all_violations():
    P4 = path_graph(4)
    D = PartialDecomposition.make(Graph([0, 1, 2], [(0, 1), (1, 2)]), {0: {0, 1}, 1: {2, 3}, 2: {1}})
    rep = validate(P4, D)
    assert not rep.h1_ok and not rep.h2_ok and not rep.honest
    assert len(rep.violations) >= 3


def test_validate_structural_error():
    D = PartialDecomposition.make(Graph([0]), {0: {0, 1}}, {0})
    with pytest.raises(DecompositionError):
        validate(path_graph(3), D)


def test_metric_examples():
    P5 = path_graph(5)
    D = single_bag(P5.vertices)
    assert orw(P5, D) == 2 and irs(D) == 0
    ident = PartialDecomposition.make(P5, {v: {v} for v in P5.vertices})
    assert orw(P5, ident) == 0


def test_spread_uses_induced_node_graph():
    # a vertex in the bags of both ends of a path of nodes: H_v is disconnected
    H = path_graph(3)
    D = PartialDecomposition.make(H, {0: {0}, 1: {1}, 2: {0}})
    assert irs_at(D, 0).__class__.__name__ == "_Infinity"
    D2 = PartialDecomposition.make(H, {0: {0}, 1: {0, 1}, 2: {0}})
    assert irs_at(D2, 0) == 1


def test_restrict_examples():
    P3 = path_graph(3)
    D = K2_decomp({0, 1}, {1, 2})
    assert restrict(D, P3.vertices).bags == D.bags
    r = restrict(D, {0, 1})
    assert r.bags == {0: {0, 1}, 1: {1}} and validate(path_graph(2), r).ok
    empty = restrict(D, set())
    assert empty.support == frozenset()
    assert not validate(P3, empty).nonempty


def test_prune_keeps_metrics():
    H = Graph(range(4), [(0, 1), (1, 2), (1, 3)])
    D = PartialDecomposition.make(H, {0: {0, 1}, 1: {1, 2}, 2: set(), 3: {2}}, {0, 1, 2})
    p = prune(D)
    assert 2 not in p.H
    G = path_graph(3)
    assert validate(G, p).ok and irs(p) == irs(restrict(D, {0, 1, 2}))


def test_glue_empty_family_is_identity():
    G = cycle_graph(6)
    D = single_bag(G.vertices)
    out = glue(G, D, []).decomposition
    assert out.bags == D.bags and out.H == D.H


def test_glue_attaches_and_checks_feasibility():
    G = path_graph(6)
    D = single_bag({0, 1, 2})
    (C,) = components(G, D.support)
    sub = K2_decomp({2}, {2, 3, 4, 5})
    out = glue(G, D, [FamilyEntry(C.vertices, sub, 0, 0)])
    rep = validate(G, out.decomposition)
    assert rep.ok and rep.honest and out.decomposition.support == set(range(6))
    assert restrict(out.decomposition, D.support).bags[0] == D.bags[0]
    bad = K2_decomp({2, 3}, {3, 4, 5})
    with pytest.raises(DecompositionError, match="neighbourhood"):
        glue(G, D, [FamilyEntry(C.vertices, bad, 0, 0)])


def test_component_feasible_examples():
    G = cycle_graph(8)
    D = single_bag(G.vertices)
    assert is_component_feasible(G, D, 0)
    D = single_bag(ball(G, 0, 2))
    assert is_component_feasible(G, D, 2)
    split = K2_decomp({0, 1, 2}, {2, 3, 4})
    assert not is_component_feasible(G, split, 3)
    assert is_component_feasible(G, K2_decomp({0, 1, 2, 3, 4}, {2, 3, 4}), 3)


def test_make_ball_componental_examples():
    G = cycle_graph(12)
    D = single_bag(ball(G, 0, 2))
    assert make_ball_componental(G, D, 2).bags == D.bags
    D = K2_decomp({0, 1, 2}, {2, 3, 4}, {0, 1, 2, 3, 4})
    # the leftover arc 5..11 has neighbourhood {0, 4}: no bag holds it at radius 2
    with pytest.raises(DecompositionError):
        make_ball_componental(G, D, 2)
    D = K2_decomp({0, 1, 2, 3, 4}, {2, 3, 4}, {0, 1, 2, 3, 4})
    out, centres = make_ball_componental(G, D, 3, with_centres=True)
    assert out.support > D.support
    assert validate(G, out).ok and is_component_feasible(G, out, 3)
    assert is_ball_componental(G, out.support, 3, centres)


def whole_component_step(G, B, C, K):
    NC = neighborhood(G, C)
    D = K2_decomp(NC, NC | C)
    return StepResult(D, 0)


def layer_step(G, B, C, K):
    NC = neighborhood(G, C)
    dC = frozenset(v for v in C if not G.adj(v) <= C)
    return StepResult(K2_decomp(NC, NC | dC), 0)


def test_driver_trivial_cases():
    bounds = DriverBounds(R=2, f0=10, f1p=1, f1pp=1)
    res = extension_driver(Graph([0]), 1, whole_component_step, bounds)
    assert res.decomposition.H.n == 1 and res.rounds == 0
    res = extension_driver(cycle_graph(5), 1, whole_component_step, bounds)
    assert res.rounds == 0


def test_driver_layers_on_a_path():
    G = path_graph(30)
    bounds = DriverBounds(R=1, f0=1, f1p=1, f1pp=1)
    history = []
    res = extension_driver(G, 1, layer_step, bounds, X="k4minus", on_round=lambda a, b: history.append((a, b)))
    D = res.decomposition
    rep = validate(G, D)
    assert rep.ok and rep.honest and rep.orw <= 1 and rep.irs <= 3
    assert all(extends(a, b) for a, b in history)
    assert res.rounds == len(history) > 5


def test_driver_rejects_broken_steps():
    def broken(G, B, C, K):
        NC = neighborhood(G, C)
        return StepResult(K2_decomp(NC, set(C)), 0)

    with pytest.raises(ContractViolation):
        extension_driver(path_graph(10), 1, broken, DriverBounds(R=1, f0=20, f1p=5, f1pp=5))


@settings(max_examples=40, deadline=None)
@given(graphs(max_n=12), st.integers(0, 2))
def test_driver_extension_property(G, R):
    set_checks(True)
    try:
        history = []
        bounds = DriverBounds(R=R, f0=G.n, f1p=1, f1pp=1)
        try:
            res = extension_driver(G, 1, whole_component_step, bounds, on_round=lambda a, b: history.append((a, b)))
        except ContractViolation as exc:
            # only the radius budget may legitimately fail for this crude step
            assert "radius" in str(exc) or "feasible" in str(exc)
            return
        rep = validate(G, res.decomposition)
        assert rep.ok and rep.honest
        for a, b in history:
            assert extends(a, b)
            assert validate(G, b).honest
    finally:
        set_checks(False)


def test_serialisation_roundtrip():
    D = K2_decomp({0, 1}, {1, 2})
    back = parse_decomposition(format_decomposition(D))
    assert back.H == D.H and back.bags == D.bags
    single = single_bag({3, 4})
    assert parse_decomposition(format_decomposition(single)).bags == single.bags
