import pytest

from arrowreal.errors import MorphismCheckFailed, NotGenerating, SearchBudgetExceeded
from arrowreal.goursat import generating_data, goursat_decompose
from arrowreal.groups import cyclic, direct_product, isomorphism_search, klein4, subgroup_as_group, subgroup_closure
from arrowreal.relsys import (
    Cls,
    Copy,
    Elem,
    RelMorphism,
    RelSystem,
    Star,
    arrow_automorphism_group,
    automorphism_group,
    build_arrow,
    build_aux_system,
    build_target_system,
    cayley_diagram,
    degree_report,
    enumerate_rel_automorphisms,
    induced_target_automorphism,
    parse_vertex,
)

from oracles import relsys_automorphisms


@pytest.fixture(scope="module")
def gd():
    g1, g2 = cyclic(8), cyclic(4)
    p = direct_product(g1, g2)
    return generating_data(goursat_decompose(g1, g2, subgroup_closure(p, [p.pair(2, 2)])))


@pytest.fixture(scope="module")
def phi(gd):
    return build_arrow(gd)


def test_cayley_example(phi):
    s = phi.source
    assert len(s.vertices) == 8
    for label in ("r1", "r2", "r3", "r4"):
        assert len(s.edges[label]) == 8


def test_cayley_trivial_group():
    s = cayley_diagram(cyclic(1), [("e", 0)])
    assert s.edges["e"] == frozenset({(Elem(0), Elem(0))})


def test_cayley_z4():
    s = cayley_diagram(cyclic(4), [("s1", 1), ("s2", 2)])
    assert len(s.vertices) == 4 and s.edge_count() == 8


def test_cayley_not_generating():
    with pytest.raises(NotGenerating):
        cayley_diagram(cyclic(4), [("a", 2)])


def test_aux_example(gd):
    aux = build_aux_system(gd)
    assert aux.vertices == (Cls(0), Cls(2), Star())
    deg = degree_report(aux)
    assert deg[Star()][2] == 16
    assert all(not aux.edges[l] for l in ("s1", "s2", "theta"))


def test_aux_without_star():
    # G1 = pi1(H): the diagonal in Z2 x Z2
    g = cyclic(2)
    p = direct_product(g, g)
    gd = generating_data(goursat_decompose(g, g, subgroup_closure(p, [p.pair(1, 1)])))
    aux = build_aux_system(gd)
    assert Star() not in aux.vertices
    assert len(aux.vertices) == 2


def test_aux_single_class():
    g1, g2 = cyclic(2), cyclic(3)
    p = direct_product(g1, g2)
    gd = generating_data(goursat_decompose(g1, g2, subgroup_closure(p, [p.pair(1, 0)])))
    aux = build_aux_system(gd)
    assert aux.vertices == (Cls(0),)


def test_target_example(gd, phi):
    t = phi.target
    assert len(t.vertices) == 10
    theta = {v: w for v, w in t.edges["theta"]}
    assert theta == {
        Elem(0): Copy(0, Cls(0)),
        Elem(1): Copy(1, Cls(0)),
        Elem(2): Copy(0, Cls(2)),
        Elem(3): Copy(1, Cls(2)),
    }
    deg = degree_report(t)
    assert all(deg[Elem(x)][2] == 5 for x in range(4))
    assert all(deg[Copy(j, Cls(c))][2] == 9 for j in (0, 1) for c in (0, 2))


def test_arrow_example(phi):
    images = {v.g: phi.map[v] for v in phi.source.vertices}
    assert images[0] == Copy(0, Cls(0)) and images[2] == Copy(0, Cls(2)) and images[1] == Copy(0, Star())
    fibres = {}
    for g, w in images.items():
        fibres.setdefault(w, set()).add(g)
    assert sorted(map(sorted, fibres.values())) == [[0, 4], [1, 3, 5, 7], [2, 6]]


def test_morphism_check_rejects():
    s = cayley_diagram(cyclic(2), [("a", 1)])
    with pytest.raises(MorphismCheckFailed):
        RelMorphism(s, s, {Elem(0): Elem(0), Elem(1): Elem(0)})


def test_induced_identity(gd, phi):
    m = induced_target_automorphism(gd, 0, phi.target)
    assert all(m.map[v] == v for v in phi.target.vertices)


def test_induced_shift(gd, phi):
    m = induced_target_automorphism(gd, 2, phi.target)
    assert m.map[Elem(0)] == Elem(2)
    assert m.map[Copy(0, Cls(0))] == Copy(0, Cls(2))
    assert m.as_index_map() in set(enumerate_rel_automorphisms(phi.target))


def test_induced_is_homomorphism(gd, phi):
    g2 = gd.g2
    maps = {x: induced_target_automorphism(gd, x, phi.target).map for x in g2}
    for a in g2:
        for b in g2:
            ab = maps[g2.table[a][b]]
            assert all(ab[v] == maps[a][maps[b][v]] for v in phi.target.vertices)


def test_enumeration_example(phi):
    a1 = enumerate_rel_automorphisms(phi.source)
    a2 = enumerate_rel_automorphisms(phi.target)
    assert len(a1) == 8 and len(a2) == 4
    assert isomorphism_search(automorphism_group(a1), cyclic(8)) is not None
    assert isomorphism_search(automorphism_group(a2), cyclic(4)) is not None


def test_enumeration_matches_brute_force_aux(gd):
    aux = build_aux_system(gd)
    assert sorted(enumerate_rel_automorphisms(aux)) == sorted(relsys_automorphisms(aux))


def test_enumeration_matches_brute_force_small():
    s = cayley_diagram(klein4(), [("a", 1), ("b", 2)])
    assert sorted(enumerate_rel_automorphisms(s)) == sorted(relsys_automorphisms(s))
    assert len(relsys_automorphisms(s)) == 4


def test_single_vertex():
    s = RelSystem(["v"], ["a"], {})
    assert enumerate_rel_automorphisms(s) == [(0,)]


def test_enumeration_budget(phi):
    with pytest.raises(SearchBudgetExceeded):
        enumerate_rel_automorphisms(phi.source, budget=2)


def test_arrow_group_example(phi):
    g = arrow_automorphism_group(phi)
    assert g.order == 4
    p = direct_product(cyclic(8), cyclic(4))
    hg, _ = subgroup_as_group(subgroup_closure(p, [p.pair(2, 2)]))
    assert isomorphism_search(g.group, hg) is not None


def test_arrow_group_identity_morphism():
    s = cayley_diagram(cyclic(3), [("a", 1), ("b", 0)])
    ident = RelMorphism(s, s, {v: v for v in s.vertices})
    g = arrow_automorphism_group(ident)
    assert g.order == 3 and all(a == b for a, b in g.pairs)


def test_arrow_group_full_product():
    g1, g2 = cyclic(2), cyclic(3)
    p = direct_product(g1, g2)
    gd = generating_data(goursat_decompose(g1, g2, subgroup_closure(p, range(6))))
    assert arrow_automorphism_group(build_arrow(gd)).order == 6


def test_degree_report_cases(gd, phi):
    assert all(d == (4, 4, 8) for d in degree_report(phi.source).values())
    assert degree_report(RelSystem(["v"], [], {})) == {"v": (0, 0, 0)}


def test_json_round_trip(phi):
    t = phi.target
    back = RelSystem.from_json(t.to_json())
    assert back.vertices == t.vertices and back.edges == t.edges
    assert parse_vertex("(1,[2])") == Copy(1, Cls(2))
    assert parse_vertex("(0,s)") == Copy(0, Star())


def test_dot_has_colours(phi):
    dot = phi.target.to_dot()
    assert dot.startswith("digraph") and "color=" in dot
