import pytest

from arrowreal.errors import ArmsNotDistinct, DegreeSeparationViolated, FewerThanTwoVertices, NotStronglyConnected, SearchBudgetExceeded
from arrowreal.goursat import generating_data, goursat_decompose
from arrowreal.graphs import (
    Digraph,
    GadgetVertex,
    SimpleGraph,
    arm_triples,
    arrow_automorphism_group_graph,
    directed_cycle,
    enumerate_graph_automorphisms,
    enumerate_graph_homomorphisms,
    find_graph_isomorphism,
    frucht_tree,
    lift_morphism,
    parse_digraph,
    replace,
    restrict_to_original,
    tree_family,
)
from arrowreal.groups import cyclic, direct_product, isomorphism_search, subgroup_as_group, subgroup_closure
from arrowreal.relsys import RelMorphism, RelSystem, automorphism_group, build_arrow, enumerate_rel_automorphisms

from oracles import digraph_homs, graph_automorphisms


def test_path_and_cycle():
    assert len(enumerate_graph_automorphisms(SimpleGraph(range(3), [(0, 1), (1, 2)]))) == 2
    c4 = [(0, 1), (1, 2), (2, 3), (3, 0)]
    auts = enumerate_graph_automorphisms(SimpleGraph(range(4), c4))
    assert len(auts) == 8
    assert sorted(auts) == sorted(graph_automorphisms(4, c4))


@pytest.mark.parametrize(
    "n,edges",
    [
        (5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]),
        (6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]),
        (6, [(0, 1), (0, 2), (0, 3), (3, 4), (4, 5)]),
        (4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
        (6, [(0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5)]),
        (5, []),
    ],
)
def test_automorphisms_match_brute_force(n, edges):
    assert sorted(enumerate_graph_automorphisms(SimpleGraph(range(n), edges))) == sorted(graph_automorphisms(n, edges))


def test_petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    assert len(enumerate_graph_automorphisms(SimpleGraph(range(10), outer + inner + spokes))) == 120


def test_simple_graph_validation():
    with pytest.raises(ValueError):
        SimpleGraph([0], [(0, 0)])
    with pytest.raises(ValueError):
        SimpleGraph([0, 1], [(0, 1), (1, 0)])


def test_frucht_tree_123():
    t = frucht_tree((1, 2, 3))
    assert len(t.graph.vertices) == 7
    assert len(graph_automorphisms(7, [tuple(e) for e in t.graph.edges])) == 1
    assert t.graph.degree(t.root) == 3 and t.graph.degree(t.leaf) == 1


def test_frucht_tree_124():
    a, b = frucht_tree((1, 2, 4)), frucht_tree((1, 2, 3))
    assert len(a.graph.vertices) == 8
    assert len(enumerate_graph_automorphisms(a.graph)) == 1
    assert find_graph_isomorphism(a.graph, b.graph) is None


def test_frucht_tree_rejects_repeats():
    with pytest.raises(ArmsNotDistinct):
        frucht_tree((1, 1, 2))


def test_tree_family():
    assert tree_family([]) == {}
    assert tree_family(["a"])["a"].arms == (1, 2, 3)
    fam = tree_family(["a", "b"])
    assert [len(t.graph.vertices) for t in fam.values()] == [7, 8]
    triples = arm_triples()
    first = [next(triples) for _ in range(6)]
    assert first == [(1, 2, 3), (1, 2, 4), (1, 2, 5), (1, 3, 4), (1, 2, 6), (1, 3, 5)]


@pytest.fixture(scope="module")
def example():
    g1, g2 = cyclic(8), cyclic(4)
    p = direct_product(g1, g2)
    h = subgroup_closure(p, [p.pair(2, 2)])
    gd = generating_data(goursat_decompose(g1, g2, h))
    phi = build_arrow(gd)
    fam = tree_family(gd.labels)
    r1, r2 = replace(phi.source, fam), replace(phi.target, fam)
    return gd, h, phi, r1, r2


def test_replacement_degrees(example):
    gd, h, phi, r1, r2 = example
    for v in phi.source.vertices:
        assert r1.graph.degree(v) == 8
    for x in r1.graph.vertices:
        if isinstance(x, GadgetVertex):
            if x.part == "r":
                assert r1.graph.degree(x) == 2 and r1.graph.has_edge(x, x.source)
            elif x.part == "p":
                assert r1.graph.degree(x) == 3 and r1.graph.has_edge(x, x.target)
            else:
                assert r1.graph.degree(x) <= 3
    assert len(r1.gadget_of) == 32


def test_replacement_automorphisms(example):
    gd, h, phi, r1, r2 = example
    a1 = enumerate_graph_automorphisms(r1.graph)
    a2 = enumerate_graph_automorphisms(r2.graph)
    assert len(a1) == 8 and len(a2) == 4
    assert isomorphism_search(automorphism_group(a1), cyclic(8)) is not None
    assert sorted(restrict_to_original(r1, p) for p in a1) == sorted(enumerate_rel_automorphisms(phi.source))
    assert sorted(restrict_to_original(r2, p) for p in a2) == sorted(enumerate_rel_automorphisms(phi.target))


def test_lifted_arrow(example):
    gd, h, phi, r1, r2 = example
    f = lift_morphism(phi, r1, r2)
    g = arrow_automorphism_group_graph(f)
    assert g.order == 4
    hg, _ = subgroup_as_group(h)
    assert isomorphism_search(g.group, hg) is not None
    # fibres over gadgets: each target gadget receives as many gadgets as edges of phi land on it
    counts = {}
    for (label, v, w) in r1.gadget_of:
        key = (label, phi.map[v], phi.map[w])
        counts[key] = counts.get(key, 0) + 1
    for key, c in counts.items():
        p_vertex = GadgetVertex(key[0], key[1], key[2], "p")
        assert sum(1 for x, y in f.map.items() if y == p_vertex) == c


def test_lift_identity():
    s = RelSystem(range(2), ["a", "b"], {"a": [(0, 0), (1, 1), (0, 1), (1, 0)], "b": [(0, 0), (1, 1)]})
    fam = tree_family(s.labels)
    r = replace(s, fam)
    f = lift_morphism(RelMorphism(s, s, {0: 0, 1: 1}), r, r)
    assert all(f.map[x] == x for x in r.graph.vertices)


def test_loop_gadget():
    s = RelSystem([0, 1], ["a"], {"a": [(0, 0), (1, 1), (0, 1), (1, 0)]})
    r = replace(s, tree_family(s.labels))
    assert r.graph.degree(0) == 4
    assert len(enumerate_graph_automorphisms(r.graph)) == len(enumerate_rel_automorphisms(s)) == 2


def test_degree_separation_violation():
    s = RelSystem([0, 1], ["a"], {"a": [(0, 1)]})
    with pytest.raises(DegreeSeparationViolated):
        replace(s, tree_family(s.labels))


def test_rigid_target():
    # arrow into a rigid system: every source automorphism preserves the single fibre
    src = RelSystem([0, 1], ["a", "b"], {"a": [(0, 0), (1, 1), (0, 1), (1, 0)]})
    tgt = RelSystem(
        ["u", "w"],
        ["a", "b"],
        {"a": [("u", "u"), ("w", "w"), ("u", "w"), ("w", "u")], "b": [("u", "u"), ("u", "w"), ("w", "u")]},
    )
    fam = tree_family(["a", "b"])
    r1, r2 = replace(src, fam), replace(tgt, fam)
    f = lift_morphism(RelMorphism(src, tgt, {0: "u", 1: "u"}), r1, r2)
    assert len(enumerate_graph_automorphisms(r2.graph)) == 1
    g = arrow_automorphism_group_graph(f)
    assert g.order == len(enumerate_graph_automorphisms(r1.graph)) == 2


def test_graph_budget(example):
    with pytest.raises(SearchBudgetExceeded):
        enumerate_graph_automorphisms(example[3].graph, budget=1)


def test_digraph_homs():
    c2, c3 = directed_cycle(2), directed_cycle(3)
    assert len(enumerate_graph_homomorphisms(c2, c2)) == 2
    assert len(enumerate_graph_homomorphisms(c3, c3)) == 3
    with pytest.raises(FewerThanTwoVertices):
        enumerate_graph_homomorphisms(c2, Digraph([0], [(0, 0)]))
    with pytest.raises(NotStronglyConnected):
        enumerate_graph_homomorphisms(Digraph([0, 1], [(0, 1)]), c2)


DIGRAPHS = ["cycle:2", "cycle:3", "cycle:4", "cycle-chord:3", "bipath:3", "complete:3"]


@pytest.mark.parametrize("a", DIGRAPHS)
@pytest.mark.parametrize("b", DIGRAPHS)
def test_digraph_homs_match_brute_force(a, b):
    ga, gb = parse_digraph(a), parse_digraph(b)
    got = enumerate_graph_homomorphisms(ga, gb)
    want = digraph_homs(ga.vertices, ga.edges, gb.vertices, gb.edges)
    key = lambda m: tuple(m[v] for v in ga.vertices)
    assert sorted(map(key, got)) == sorted(map(key, want))


def test_simple_graph_homs():
    k2 = SimpleGraph([0, 1], [(0, 1)])
    c5 = SimpleGraph(range(5), [(i, (i + 1) % 5) for i in range(5)])
    assert len(enumerate_graph_homomorphisms(c5, k2)) == 0
    assert len(enumerate_graph_homomorphisms(k2, c5)) == 10


def test_json_round_trip(example):
    g = example[3].graph
    back = SimpleGraph.from_json(g.to_json())
    assert len(back.vertices) == len(g.vertices) and len(back.edges) == len(g.edges)
    assert example[3].graph.to_dot().startswith("graph")
