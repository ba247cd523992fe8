"""End-to-end acceptance criteria, one PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -v`` and look for the
"acceptance criteria" section of the terminal summary.
"""

import itertools
import time

import pytest

from arrowreal.cdga.sullivan import (
    basis_at_degree,
    check_d_squared,
    check_degree_shift,
    check_ellipticity_witnesses,
    enumerate_morphisms_constrained,
    expected_basis,
    induced_algebra_morphism,
    linear_part_key,
    sullivan_presentation,
    vertex_name,
    zero_morphism,
)
from arrowreal.goursat import factorization_violations, generating_data, goursat_decompose
from arrowreal.graphs import Digraph, enumerate_graph_homomorphisms, parse_digraph
from arrowreal.groups import as_subgroup, cyclic, direct_product, parse_group
from arrowreal.pipeline import run_sweep, section5_instance, sweep_instances, verify_instance
from arrowreal.relsys import Cls, Copy, Elem, automorphism_group, build_source_system, build_target_system, degree_report

from oracles import all_group_isomorphisms, digraph_homs

# wall-clock limits in seconds
LIMIT_SEC5_REL = 5.0
LIMIT_SEC5_GRAPH = 60.0
LIMIT_SWEEP = 600.0
LIMIT_CDGA = 60.0
LIMIT_CORRESPONDENCE = 300.0

CORRESPONDENCE_GRAPHS = ("cycle:2", "cycle:3", "cycle-chord:3", "bipath:3")


def _iso_to(perms, reference):
    return bool(all_group_isomorphisms(automorphism_group(perms).table, reference.table))


def _sec5_claims(level: dict) -> tuple[list, bool]:
    orders = [level["aut_G1"]["order"], level["aut_G2"]["order"], level["aut_phi"]["order"]]
    witnesses = all(level[k]["witness"] is not None for k in ("aut_G1", "aut_G2", "aut_phi"))
    return orders, witnesses


def test_criterion_1_sec5_relational(record):
    t = time.perf_counter()
    rep = verify_instance(*section5_instance(), graph_level=False)
    elapsed = time.perf_counter() - t
    rel = rep.relational
    orders, witnesses = _sec5_claims(rel)
    # independent isomorphism check against brute-force enumeration of group isomorphisms
    iso1 = _iso_to([tuple(p) for p in rel["aut_G1"]["automorphisms"]], cyclic(8))
    iso2 = _iso_to([tuple(p) for p in rel["aut_G2"]["automorphisms"]], cyclic(4))
    ok = rep.passed and orders == [8, 4, 4] and witnesses and iso1 and iso2 and elapsed < LIMIT_SEC5_REL
    record(1, ok, f"orders {orders}, witnesses {witnesses}, {elapsed:.2f}s < {LIMIT_SEC5_REL}s")
    assert ok


def test_criterion_2_sec5_graph(record):
    t = time.perf_counter()
    rep = verify_instance(*section5_instance(), graph_level=True)
    elapsed = time.perf_counter() - t
    g = rep.graph
    orders, witnesses = _sec5_claims(g)
    iso1 = _iso_to([tuple(p) for p in g["aut_G1"]["automorphisms"]], cyclic(8))
    iso2 = _iso_to([tuple(p) for p in g["aut_G2"]["automorphisms"]], cyclic(4))
    ok = rep.passed and orders == [8, 4, 4] and witnesses and iso1 and iso2 and elapsed < LIMIT_SEC5_GRAPH
    record(2, ok, f"orders {orders}, graphs of {g['vertices']} vertices, {elapsed:.2f}s < {LIMIT_SEC5_GRAPH}s")
    assert ok


def test_criterion_3_sweep(record):
    t = time.perf_counter()
    data = run_sweep()
    elapsed = time.perf_counter() - t
    bad = [r for r in data["results"] if not r["passed"]]
    ok = data["instances"] > 0 and not bad and elapsed < LIMIT_SWEEP
    record(3, ok, f"{data['instances']} instances, {len(bad)} failures, {elapsed:.1f}s < {LIMIT_SWEEP:.0f}s")
    assert ok, bad[:3]


@pytest.fixture(scope="module")
def sweep_objects():
    out = []
    groups = {}
    for s1, s2, pairs in sweep_instances():
        g1 = groups.setdefault(s1, parse_group(s1))
        g2 = groups.setdefault(s2, parse_group(s2))
        out.append((g1, g2, frozenset(pairs)))
    return out


def test_criterion_4_goursat(record, sweep_objects):
    failures = []
    checked = 0
    for g1, g2, pairs in sweep_objects:
        p = direct_product(g1, g2)
        h_members = [p.pair(a, b) for a, b in pairs]
        d = goursat_decompose(g1, g2, as_subgroup(p, h_members))
        for a in g1:
            for b in g2:
                member = a in d.pi1_h and b in d.pi2_h and d.theta[d.q1_cosets.class_of[a]] == d.q2_cosets.class_of[b]
                checked += 1
                if member != ((a, b) in pairs):
                    failures.append((g1.name, g2.name, a, b))
        bad = factorization_violations(generating_data(d), limit=1)
        if bad:
            failures.append((g1.name, g2.name, bad[0]))
    ok = not failures
    record(4, ok, f"{len(sweep_objects)} instances, {checked} membership tests, {len(failures)} violations")
    assert ok, failures[:3]


def test_criterion_5_degree_lemma(record, sweep_objects):
    failures = []
    vertices = 0
    for g1, g2, pairs in sweep_objects:
        p = direct_product(g1, g2)
        gd = generating_data(goursat_decompose(g1, g2, as_subgroup(p, [p.pair(a, b) for a, b in pairs])))
        n1, n2 = len(gd.I1), len(gd.I2)
        # |iota2^-1(H)|: elements h of G2 with (e, h) in H
        k2 = sum(1 for a, b in pairs if a == g1.identity)
        for v, (_, _, deg) in degree_report(build_source_system(gd)).items():
            vertices += 1
            if deg != 2 * n1:
                failures.append((g1.name, g2.name, str(v), deg))
        for v, (_, _, deg) in degree_report(build_target_system(gd)).items():
            if isinstance(v, Elem):
                want = 2 * n2 + 1
            elif isinstance(v, Copy) and isinstance(v.v, Cls):
                want = 2 * n1 + k2
            else:
                continue
            vertices += 1
            if deg != want:
                failures.append((g1.name, g2.name, str(v), deg, want))
    ok = not failures
    record(5, ok, f"{len(sweep_objects)} instances, {vertices} vertex degrees, {len(failures)} mismatches")
    assert ok, failures[:3]


def _strongly_connected(k, edges):
    fwd = {v: [w for a, w in edges if a == v] for v in range(k)}
    bwd = {v: [a for a, w in edges if w == v] for v in range(k)}
    return len(_reach(fwd)) == k and len(_reach(bwd)) == k


def _reach(adj):
    seen, stack = {0}, [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def small_digraphs(max_vertices=4):
    """Strongly connected loopless digraphs on 2..max_vertices vertices, one per isomorphism class."""
    out = []
    for k in range(2, max_vertices + 1):
        arcs = [(a, b) for a in range(k) for b in range(k) if a != b]
        seen = set()
        for mask in range(1 << len(arcs)):
            edges = [arcs[i] for i in range(len(arcs)) if mask >> i & 1]
            if not _strongly_connected(k, edges):
                continue
            canon = min(tuple(sorted((p[a], p[b]) for a, b in edges)) for p in itertools.permutations(range(k)))
            if canon in seen:
                continue
            seen.add(canon)
            out.append(Digraph(list(range(k)), list(canon), name=f"k{k}#{len(seen)}"))
    return out


def test_criterion_6_cdga_structure(record):
    graphs = small_digraphs(4)
    t = time.perf_counter()
    failures = []
    for g in graphs:
        for n in (1, 2, 3):
            pres = sullivan_presentation(g, n)
            if check_d_squared(pres):
                failures.append((g.name, n, "d^2"))
            if check_degree_shift(pres):
                failures.append((g.name, n, "degree"))
            vdeg = pres.degree(vertex_name(g.vertices[0]))
            if set(basis_at_degree(pres, vdeg)) != expected_basis(pres, "xv"):
                failures.append((g.name, n, "basis x_v"))
            if set(basis_at_degree(pres, pres.degree("z"))) != expected_basis(pres, "z"):
                failures.append((g.name, n, "basis z"))
            if not check_ellipticity_witnesses(pres).ok:
                failures.append((g.name, n, "witness"))
    elapsed = time.perf_counter() - t
    ok = not failures and elapsed < LIMIT_CDGA
    record(6, ok, f"{len(graphs)} digraphs x n=1,2,3, {len(failures)} failures, {elapsed:.1f}s < {LIMIT_CDGA:.0f}s")
    assert ok, failures[:5]


@pytest.fixture(scope="module")
def correspondence():
    graphs = {s: parse_digraph(s) for s in CORRESPONDENCE_GRAPHS}
    pres = {s: sullivan_presentation(g, 1) for s, g in graphs.items()}
    t = time.perf_counter()
    found = {(a, b): enumerate_morphisms_constrained(pres[a], pres[b]) for a in graphs for b in graphs}
    return graphs, pres, found, time.perf_counter() - t


def test_criterion_7_correspondence(record, correspondence):
    graphs, pres, found, elapsed = correspondence
    failures = []
    for (a, b), maps in found.items():
        ga, gb = graphs[a], graphs[b]
        sigmas = digraph_homs(ga.vertices, ga.edges, gb.vertices, gb.edges)
        want = {zero_morphism(pres[a], pres[b]).key()} | {induced_algebra_morphism(s, pres[a], pres[b]).key() for s in sigmas}
        if {f.key() for f in maps} != want or len(maps) != len(want):
            failures.append((a, b, len(maps), len(want)))
    c2 = len(found[("cycle:2", "cycle:2")]) - 1
    ok = not failures and c2 == 2 and elapsed < LIMIT_CORRESPONDENCE
    record(7, ok, f"{len(found)} pairs, cycle:2->cycle:2 has {c2} nonzero, {len(failures)} mismatches, {elapsed:.1f}s < {LIMIT_CORRESPONDENCE:.0f}s")
    assert ok, failures


def test_criterion_8_functor(record, correspondence):
    graphs, pres, found, _ = correspondence
    failures = []
    homs = {(a, b): enumerate_graph_homomorphisms(graphs[a], graphs[b]) for a in graphs for b in graphs}
    ind = {
        (a, b): [induced_algebra_morphism(s, pres[a], pres[b]) for s in homs[(a, b)]] for a in graphs for b in graphs
    }
    # injectivity on morphisms: distinct sigma give distinct, nonzero algebra maps
    for key, maps in ind.items():
        if len({m.key() for m in maps}) != len(maps) or any(m.is_zero() for m in maps):
            failures.append(("injective", key))
    # functoriality on every composable pair, and identities
    compositions = 0
    for a, b, c in itertools.product(graphs, repeat=3):
        for s, ms in zip(homs[(a, b)], ind[(a, b)]):
            for t, mt in zip(homs[(b, c)], ind[(b, c)]):
                ts = {v: t[s[v]] for v in graphs[a].vertices}
                compositions += 1
                if induced_algebra_morphism(ts, pres[a], pres[c]) != mt.compose(ms):
                    failures.append(("compose", a, b, c))
    for a in graphs:
        ident = induced_algebra_morphism({v: v for v in graphs[a].vertices}, pres[a], pres[a])
        if any(ident.images[nm] != pres[a].gen(nm) for nm in pres[a].names):
            failures.append(("identity", a))
    # pairwise distinct linear parts among verified morphisms, zero included
    for key, maps in found.items():
        if len({linear_part_key(f) for f in maps}) != len(maps):
            failures.append(("linear parts", key))
    ok = not failures
    record(8, ok, f"{compositions} compositions, {sum(map(len, found.values()))} verified morphisms, {len(failures)} failures")
    assert ok, failures[:5]
