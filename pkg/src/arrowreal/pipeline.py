"""End-to-end construction and verification of one (G1, G2, H) instance, and sweeps."""

from __future__ import annotations

import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .errors import ArrowRealError, MorphismCheckFailed
from .goursat import GeneratingData, factorization_violations, generating_data, goursat_decompose
from .graphs import (
    GadgetVertex,
    ReplacementMap,
    arrow_automorphism_group_graph,
    enumerate_graph_automorphisms,
    lift_morphism,
    replace,
    restrict_to_original,
    tree_family,
)
from .groups import (
    DEFAULT_BUDGET,
    ElementSubset,
    FiniteGroup,
    as_subgroup,
    direct_product,
    enumerate_subgroups,
    group_from_json,
    group_from_permutations,
    isomorphism_search,
    parse_group,
    subgroup_as_group,
    subgroup_closure,
)
from .relsys import (
    Cls,
    Copy,
    Elem,
    RelMorphism,
    RelSystem,
    Star,
    arrow_automorphism_group,
    build_arrow,
    build_aux_system,
    build_source_system,
    build_target_system,
    degree_report,
    enumerate_rel_automorphisms,
    induced_target_automorphism,
    morphism_from_json,
)

SWEEP_GROUPS = ("cyclic:2", "cyclic:3", "cyclic:4", "klein4", "sym:3")
SWEEP_MAX_ORDER = 24


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class PipelineReport:
    input: dict
    claims: dict = field(default_factory=dict)
    relational: dict = field(default_factory=dict)
    graph: dict | None = None
    checks: list[Check] = field(default_factory=list)
    timings: dict | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(ok), detail))
        return bool(ok)

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "input": self.input,
            "claims": self.claims,
            "relational": self.relational,
        }
        if self.graph is not None:
            out["graph"] = self.graph
        out["checks"] = [c.to_json() for c in self.checks]
        out["passed"] = self.passed
        if self.timings is not None:
            out["timings"] = self.timings
        return out


# -- input parsing ------------------------------------------------------------

_PAIR_RE = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def parse_pairs(text: str) -> list[tuple[int, int]]:
    """``"(2,2),(4,0)"`` -> [(2, 2), (4, 0)]; an empty string means no generators."""
    pairs = [(int(a), int(b)) for a, b in _PAIR_RE.findall(text)]
    rest = _PAIR_RE.sub("", text).replace(",", "").strip()
    if rest:
        raise ValueError(f"cannot parse subgroup generators {text!r}")
    return pairs


def subgroup_from_pairs(g1: FiniteGroup, g2: FiniteGroup, gens: Iterable[tuple[int, int]], product: FiniteGroup | None = None) -> ElementSubset:
    prod = product if product is not None else direct_product(g1, g2)
    elems = []
    for a, b in gens:
        if not (0 <= a < g1.order and 0 <= b < g2.order):
            raise ValueError(f"pair ({a}, {b}) out of range")
        elems.append(prod.pair(a, b))
    return subgroup_closure(prod, elems)


def instance_input(g1: FiniteGroup, g2: FiniteGroup, h: ElementSubset) -> dict:
    prod = h.parent
    return {
        "g1": g1.to_json(),
        "g2": g2.to_json(),
        "h": [list(prod.unpair(x)) for x in h],
    }


def load_instance(data: Mapping) -> tuple[FiniteGroup, FiniteGroup, ElementSubset]:
    def grp(x) -> FiniteGroup:
        return parse_group(x) if isinstance(x, str) else group_from_json(x)

    g1, g2 = grp(data["g1"]), grp(data["g2"])
    prod = direct_product(g1, g2)
    h = as_subgroup(prod, [prod.pair(a, b) for a, b in data["h"]])
    return g1, g2, h


# -- verification pieces ------------------------------------------------------


def _iso_entry(perms: Sequence[tuple[int, ...]], reference: FiniteGroup, budget: int) -> tuple[dict, bool]:
    """Group of the enumerated permutations and a witness isomorphism to ``reference``."""
    group, elems = group_from_permutations(perms)
    iso = isomorphism_search(group, reference, budget) if group.order == reference.order else None
    entry = {
        "order": group.order,
        "automorphisms": [list(p) for p in elems],
        "witness": list(iso) if iso is not None else None,
    }
    return entry, iso is not None


def degree_lemma_violations(gd: GeneratingData, source: RelSystem, target: RelSystem) -> list[str]:
    n1, n2 = len(gd.I1), len(gd.I2)
    iota2 = len(gd.decomposition.iota2_h)
    bad = []
    for v, (_, _, deg) in degree_report(source).items():
        if deg != 2 * n1:
            bad.append(f"source vertex {v}: degree {deg} != 2|I1| = {2 * n1}")
    for v, (_, _, deg) in degree_report(target).items():
        if isinstance(v, Elem):
            want = 2 * n2 + 1
        elif isinstance(v, Copy) and isinstance(v.v, Cls):
            want = 2 * n1 + iota2
        elif isinstance(v, Copy) and isinstance(v.v, Star):
            if deg < 2 * n1:
                bad.append(f"target vertex {v}: degree {deg} < 2|I1| = {2 * n1}")
            continue
        else:
            bad.append(f"unexpected vertex {v}")
            continue
        if deg != want:
            bad.append(f"target vertex {v}: degree {deg} != {want}")
    return bad


def _theta_edge_violations(gd: GeneratingData, target: RelSystem) -> list[str]:
    d = gd.decomposition
    th_inv = d.theta_inverse
    got: dict = {}
    for v, w in target.edges.get(gd.theta_label, ()):
        got.setdefault(v, []).append(w)
    bad = []
    for x in d.g2:
        k, j = gd.factor(2, x)
        want = Copy(j, Cls(d.q1_cosets.reps[th_inv[d.q2_cosets.class_of[k]]]))
        if got.get(Elem(x), []) != [want]:
            bad.append(f"theta-edges at {x}: {[str(w) for w in got.get(Elem(x), [])]} != [{want}]")
    extra = [str(v) for v in got if not isinstance(v, Elem)]
    if extra:
        bad.append(f"theta-edges leave non-group vertices {extra}")
    return bad


def _same_system(a: RelSystem, b: RelSystem) -> str:
    if a.vertices != b.vertices:
        return "vertex lists differ"
    if a.labels != b.labels:
        return "label lists differ"
    for l in a.labels:
        if a.edges[l] != b.edges[l]:
            missing = len(b.edges[l] - a.edges[l])
            extra = len(a.edges[l] - b.edges[l])
            return f"label {l!r}: {missing} edges missing, {extra} unexpected"
    return ""


def _phi_group_checks(report: PipelineReport, gd: GeneratingData, target: RelSystem, aut2: Sequence[tuple[int, ...]]) -> None:
    g2 = gd.g2
    try:
        perms = [induced_target_automorphism(gd, x, target).as_index_map() for x in g2]
    except MorphismCheckFailed as exc:
        report.check("relsys.Phi_is_isomorphism", False, f"Phi_g is not a morphism: {exc}")
        return
    injective = len(set(perms)) == g2.order
    onto = set(perms) == set(aut2)
    hom = all(
        perms[g2.table[a][b]] == tuple(perms[a][x] for x in perms[b]) for a in g2 for b in g2
    )
    report.check(
        "relsys.Phi_is_isomorphism",
        injective and onto and hom,
        f"injective={injective} onto={onto} homomorphism={hom}",
    )


def _regular_check(perms: Sequence[tuple[int, ...]], base: int) -> bool:
    """Every automorphism fixing ``base`` is the identity (images of base are distinct)."""
    return len({p[base] for p in perms}) == len(perms)


def verify_instance(
    g1: FiniteGroup,
    g2: FiniteGroup,
    h: ElementSubset,
    graph_level: bool = False,
    budget: int = DEFAULT_BUDGET,
    timings: bool = False,
    loaded: Mapping[str, Any] | None = None,
) -> PipelineReport:
    """Build every object for (G1, G2, H) and verify all claimed isomorphisms.

    ``loaded`` may carry previously emitted ``source``/``target`` systems
    and a ``phi`` JSON map; they are then checked against a fresh
    construction and used for the enumeration checks instead of it.
    """
    report = PipelineReport(instance_input(g1, g2, h))
    clock: dict[str, float] = {}
    t0 = time.perf_counter()

    def lap(stage: str) -> None:
        nonlocal t0
        now = time.perf_counter()
        clock[stage] = round(now - t0, 6)
        t0 = now

    report.claims = {"aut_G1": g1.order, "aut_G2": g2.order, "aut_phi": len(h)}

    d = goursat_decompose(g1, g2, h)
    gd = generating_data(d)
    report.check("goursat.reconstruction", d.reconstruct() == h.as_set())
    report.check(
        "goursat.theta_multiplicative",
        all(d.theta[d.q1_mul(a, b)] == d.q2_mul(d.theta[a], d.theta[b]) for a in range(len(d.theta)) for b in range(len(d.theta))),
    )
    bad = factorization_violations(gd)
    report.check("goursat.factorization", not bad, "; ".join(bad[:3]))
    report.check(
        "goursat.generation",
        len(subgroup_closure(g1, [x for _, x in gd.I1])) == g1.order and len(subgroup_closure(g2, [x for _, x in gd.I2])) == g2.order,
    )
    report.relational["generating_data"] = gd.to_json()
    lap("goursat")

    source = build_source_system(gd)
    aux = build_aux_system(gd)
    target = build_target_system(gd, aux)
    phi = build_arrow(gd, source, target)
    if loaded:
        if "source" in loaded:
            diff = _same_system(loaded["source"], source)
            report.check("relsys.source_matches_construction", not diff, diff)
            source = loaded["source"]
        if "target" in loaded:
            diff = _same_system(loaded["target"], target)
            report.check("relsys.target_matches_construction", not diff, diff)
            target = loaded["target"]
        try:
            phi = morphism_from_json(loaded["phi"], source, target) if "phi" in loaded else RelMorphism(source, target, phi.map)
            report.check("relsys.phi_is_morphism", True)
        except MorphismCheckFailed as exc:
            report.check("relsys.phi_is_morphism", False, str(exc))
            report.timings = clock if timings else None
            return report
    tbad = _theta_edge_violations(gd, target)
    report.check("relsys.theta_edges", not tbad, "; ".join(tbad[:3]))
    dbad = degree_lemma_violations(gd, source, target)
    report.check("relsys.degree_lemma", not dbad, "; ".join(dbad[:3]))
    lap("build")

    aut1 = enumerate_rel_automorphisms(source, budget)
    aut2 = enumerate_rel_automorphisms(target, budget)
    aut_aux = enumerate_rel_automorphisms(aux, budget)
    lap("enumerate")

    e1, ok1 = _iso_entry(aut1, g1, budget)
    e2, ok2 = _iso_entry(aut2, g2, budget)
    report.relational["aut_G1"] = e1
    report.relational["aut_G2"] = e2
    report.check("relsys.aut_G1_order", e1["order"] == g1.order, f"{e1['order']} vs {g1.order}")
    report.check("relsys.aut_G1_isomorphic", ok1)
    report.check("relsys.aut_G2_order", e2["order"] == g2.order, f"{e2['order']} vs {g2.order}")
    report.check("relsys.aut_G2_isomorphic", ok2)
    report.check("relsys.cayley_regular", _regular_check(aut1, source.index[Elem(g1.identity)]))

    e_cls = Cls(g1.identity)
    classes = [i for i, v in enumerate(aux.vertices) if isinstance(v, Cls)]
    hits = [sum(1 for p in aut_aux if p[aux.index[e_cls]] == c) for c in classes]
    report.check("relsys.aux_rigidity", all(x == 1 for x in hits), f"automorphisms per class image: {hits}")
    _phi_group_checks(report, gd, target, aut2)

    hgroup, embed = subgroup_as_group(h)
    arrow = arrow_automorphism_group(phi, aut1, aut2, budget)
    iso = isomorphism_search(arrow.group, hgroup, budget) if arrow.order == len(h) else None
    report.relational["aut_phi"] = {
        "order": arrow.order,
        "pairs": [[list(a), list(b)] for a, b in arrow.pairs],
        "witness": [list(h.parent.unpair(embed[x])) for x in iso] if iso is not None else None,
    }
    report.check("relsys.aut_phi_order", arrow.order == len(h), f"{arrow.order} vs {len(h)}")
    report.check("relsys.aut_phi_isomorphic", iso is not None)
    lap("arrow")

    if graph_level:
        _graph_level(report, gd, phi, aut1, aut2, h, hgroup, embed, budget)
        lap("graph")
    report.timings = clock if timings else None
    return report


def gadget_violations(rep: ReplacementMap) -> list[str]:
    g = rep.graph
    bad = []
    for v in rep.system.vertices:
        if g.degree(v) < 4:
            bad.append(f"original vertex {v} has degree {g.degree(v)}")
    for x in g.vertices:
        if isinstance(x, GadgetVertex):
            deg = g.degree(x)
            if deg > 3:
                bad.append(f"gadget vertex {x} has degree {deg}")
            if x.part == "r" and (deg != 2 or not g.has_edge(x, x.source)):
                bad.append(f"source connector {x} is miswired")
            if x.part == "p" and (deg != 3 or not g.has_edge(x, x.target)):
                bad.append(f"sink connector {x} is miswired")
    return bad


def _graph_level(report, gd, phi, aut1, aut2, hsub, hgroup, embed, budget) -> None:
    family = tree_family(gd.labels)
    report.check("graph.tree_family", True, ", ".join(f"{l}:{t.arms}" for l, t in family.items()))
    r1 = replace(phi.source, family)
    r2 = replace(phi.target, family)
    bad = gadget_violations(r1) + gadget_violations(r2)
    report.check("graph.degree_separation", not bad, "; ".join(bad[:3]))
    lifted = lift_morphism(phi, r1, r2)
    gaut1 = enumerate_graph_automorphisms(r1.graph, budget)
    gaut2 = enumerate_graph_automorphisms(r2.graph, budget)
    g1, g2 = gd.g1, gd.g2
    e1, ok1 = _iso_entry(gaut1, g1, budget)
    e2, ok2 = _iso_entry(gaut2, g2, budget)
    res1 = [restrict_to_original(r1, p) for p in gaut1]
    res2 = [restrict_to_original(r2, p) for p in gaut2]
    report.check("graph.aut_G1_order", e1["order"] == g1.order, f"{e1['order']} vs {g1.order}")
    report.check("graph.aut_G1_isomorphic", ok1)
    report.check("graph.aut_G2_order", e2["order"] == g2.order, f"{e2['order']} vs {g2.order}")
    report.check("graph.aut_G2_isomorphic", ok2)
    report.check(
        "graph.restriction_bijection",
        len(set(res1)) == len(res1) and set(res1) == set(aut1) and len(set(res2)) == len(res2) and set(res2) == set(aut2),
    )
    arrow = arrow_automorphism_group_graph(lifted, gaut1, gaut2, budget)
    h = report.claims["aut_phi"]
    iso = isomorphism_search(arrow.group, hgroup, budget) if arrow.order == h else None
    report.graph = {
        "vertices": [len(r1.graph.vertices), len(r2.graph.vertices)],
        "edges": [len(r1.graph.edges), len(r2.graph.edges)],
        "trees": {l: list(t.arms) for l, t in family.items()},
        "aut_G1": e1,
        "aut_G2": e2,
        "aut_phi": {
            "order": arrow.order,
            "pairs_restricted": [
                [list(restrict_to_original(r1, a)), list(restrict_to_original(r2, b))] for a, b in arrow.pairs
            ],
            "witness": [list(hsub.parent.unpair(embed[x])) for x in iso] if iso is not None else None,
        },
    }
    report.check("graph.aut_phi_order", arrow.order == h, f"{arrow.order} vs {h}")
    report.check("graph.aut_phi_isomorphic", iso is not None)


# -- sweep --------------------------------------------------------------------


def sweep_instances(groups: Sequence[str] = SWEEP_GROUPS, max_order: int = SWEEP_MAX_ORDER, max_gens: int = 2):
    """(spec1, spec2, H members as pairs) for every ordered pair and every subgroup."""
    out = []
    parsed = [(s, parse_group(s)) for s in groups]
    for s1, g1 in parsed:
        for s2, g2 in parsed:
            if g1.order * g2.order > max_order:
                continue
            prod = direct_product(g1, g2)
            for sub in enumerate_subgroups(prod, max_gens):
                out.append((s1, s2, tuple(prod.unpair(x) for x in sub)))
    return out


def run_sweep_instance(args: tuple[str, str, tuple[tuple[int, int], ...], int]) -> dict:
    s1, s2, pairs, budget = args
    g1, g2 = parse_group(s1), parse_group(s2)
    prod = direct_product(g1, g2)
    h = as_subgroup(prod, [prod.pair(a, b) for a, b in pairs])
    try:
        rep = verify_instance(g1, g2, h, budget=budget)
        failed = [c.name for c in rep.failed()]
        orders = [rep.relational["aut_G1"]["order"], rep.relational["aut_G2"]["order"], rep.relational["aut_phi"]["order"]]
    except ArrowRealError as exc:
        failed = [f"{type(exc).__name__}: {exc}"]
        orders = None
    return {
        "g1": g1.name,
        "g2": g2.name,
        "h": [list(p) for p in pairs],
        "orders": orders,
        "passed": not failed,
        "failed": failed,
    }


def run_sweep(
    groups: Sequence[str] = SWEEP_GROUPS,
    max_order: int = SWEEP_MAX_ORDER,
    jobs: int = 1,
    budget: int = DEFAULT_BUDGET,
) -> dict:
    tasks = [(s1, s2, pairs, budget) for s1, s2, pairs in sweep_instances(groups, max_order)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(run_sweep_instance, tasks, chunksize=8))
    else:
        results = [run_sweep_instance(t) for t in tasks]
    return {
        "groups": list(groups),
        "max_order": max_order,
        "instances": len(results),
        "failures": sum(1 for r in results if not r["passed"]),
        "results": results,
    }


def section5_instance() -> tuple[FiniteGroup, FiniteGroup, ElementSubset]:
    g1, g2 = parse_group("cyclic:8"), parse_group("cyclic:4")
    return g1, g2, subgroup_from_pairs(g1, g2, [(2, 2)])
