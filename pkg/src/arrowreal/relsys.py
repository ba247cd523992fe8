"""Binary relational systems (edge-labelled digraphs) and the arrow construction.

Builds the Cayley diagram of G1, the auxiliary system on pi1(H)/iota1^{-1}(H),
the target system containing Cay(G2, S) plus one copy of the auxiliary system
per coset of pi2(H), and the morphism between them. Automorphism groups are
always recomputed by exhaustive search rather than taken from theory.
"""

from __future__ import annotations

import json
import re
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import MorphismCheckFailed, NotGenerating, SearchBudgetExceeded
from .goursat import GeneratingData
from .groups import DEFAULT_BUDGET, FiniteGroup, group_from_permutations, subgroup_closure

Vertex = Hashable
Label = str


# -- vertex tags --------------------------------------------------------------


@dataclass(frozen=True)
class Elem:
    """A group element used directly as a vertex."""

    g: int

    def __str__(self) -> str:
        return str(self.g)


@dataclass(frozen=True)
class Cls:
    """A class of pi1(H)/iota1^{-1}(H), tagged by its representative."""

    rep: int

    def __str__(self) -> str:
        return f"[{self.rep}]"


@dataclass(frozen=True)
class Star:
    """The extra vertex ``s`` present when pi1(H) is a proper subgroup of G1."""

    def __str__(self) -> str:
        return "s"


@dataclass(frozen=True)
class Copy:
    j: int
    v: Cls | Star

    def __str__(self) -> str:
        return f"({self.j},{self.v})"


_COPY_RE = re.compile(r"^\((\d+),(.*)\)$")


def parse_vertex(text: str) -> Vertex:
    """Inverse of ``str`` on the vertex tags; unknown strings are kept as-is."""
    if text.isdigit():
        return Elem(int(text))
    if text == "s":
        return Star()
    if text.startswith("[") and text.endswith("]") and text[1:-1].isdigit():
        return Cls(int(text[1:-1]))
    m = _COPY_RE.match(text)
    if m:
        inner = parse_vertex(m.group(2))
        if isinstance(inner, (Cls, Star)):
            return Copy(int(m.group(1)), inner)
    return text


# -- systems and morphisms ----------------------------------------------------


class RelSystem:
    def __init__(
        self,
        vertices: Iterable[Vertex],
        labels: Iterable[Label],
        edges: Mapping[Label, Iterable[tuple[Vertex, Vertex]]],
    ):
        self.vertices: tuple[Vertex, ...] = tuple(vertices)
        self.labels: tuple[Label, ...] = tuple(labels)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate labels")
        vset, lset = set(self.vertices), set(self.labels)
        rel: dict[Label, frozenset[tuple[Vertex, Vertex]]] = {}
        for label, pairs in edges.items():
            if label not in lset:
                raise ValueError(f"undeclared label {label!r}")
            pairs = list(pairs)
            for v, w in pairs:
                if v not in vset or w not in vset:
                    raise ValueError(f"edge ({v}, {w}) with label {label!r} has an undeclared endpoint")
            if len(set(pairs)) != len(pairs):
                raise ValueError(f"duplicate edge under label {label!r}")
            rel[label] = frozenset(pairs)
        self.edges: dict[Label, frozenset[tuple[Vertex, Vertex]]] = {l: rel.get(l, frozenset()) for l in self.labels}

    def __repr__(self) -> str:
        return f"RelSystem({len(self.vertices)} vertices, {len(self.labels)} labels, {self.edge_count()} edges)"

    def edge_count(self) -> int:
        return sum(len(e) for e in self.edges.values())

    def has_edge(self, label: Label, v: Vertex, w: Vertex) -> bool:
        return (v, w) in self.edges[label]

    @cached_property
    def index(self) -> dict[Vertex, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def _adj(self) -> tuple[list[dict[int, set[int]]], list[dict[int, set[int]]]]:
        """Per label index: out[l][i] / inn[l][i] as sets of vertex indices."""
        idx = self.index
        out: list[dict[int, set[int]]] = []
        inn: list[dict[int, set[int]]] = []
        for label in self.labels:
            o: dict[int, set[int]] = defaultdict(set)
            n: dict[int, set[int]] = defaultdict(set)
            for v, w in self.edges[label]:
                o[idx[v]].add(idx[w])
                n[idx[w]].add(idx[v])
            out.append(o)
            inn.append(n)
        return out, inn

    def to_json(self) -> dict:
        return {
            "vertices": [str(v) for v in self.vertices],
            "labels": list(self.labels),
            "edges": [
                {"label": l, "from": str(v), "to": str(w)}
                for l in self.labels
                for v, w in sorted(self.edges[l], key=lambda e: (self.index[e[0]], self.index[e[1]]))
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "RelSystem":
        verts = [parse_vertex(v) for v in data["vertices"]]
        edges: dict[Label, list] = defaultdict(list)
        for e in data["edges"]:
            edges[e["label"]].append((parse_vertex(e["from"]), parse_vertex(e["to"])))
        return cls(verts, data["labels"], edges)

    def to_dot(self, name: str = "S") -> str:
        palette = ["blue", "black", "red", "green", "purple", "orange", "gold", "brown", "cyan", "magenta"]
        colour = {l: palette[i % len(palette)] for i, l in enumerate(self.labels)}
        lines = [f'digraph "{name}" {{']
        for v in self.vertices:
            lines.append(f'  "{v}";')
        for l in self.labels:
            for v, w in sorted(self.edges[l], key=lambda e: (self.index[e[0]], self.index[e[1]])):
                lines.append(f'  "{v}" -> "{w}" [color={colour[l]}, label="{l}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


class RelMorphism:
    """A label-preserving vertex map; the morphism property is checked on construction."""

    def __init__(self, source: RelSystem, target: RelSystem, mapping: Mapping[Vertex, Vertex]):
        self.source = source
        self.target = target
        self.map = dict(mapping)
        missing = [v for v in source.vertices if v not in self.map]
        if missing:
            raise MorphismCheckFailed(f"map undefined on {missing[:3]}")
        tv = set(target.vertices)
        for v in source.vertices:
            if self.map[v] not in tv:
                raise MorphismCheckFailed(f"image of {v} is not a target vertex")
        for label in source.labels:
            if label not in target.edges:
                raise MorphismCheckFailed(f"label {label!r} missing from target")
            for v, w in source.edges[label]:
                if (self.map[v], self.map[w]) not in target.edges[label]:
                    raise MorphismCheckFailed(
                        f"edge ({v}, {w}) with label {label!r} maps to non-edge ({self.map[v]}, {self.map[w]})"
                    )

    def __call__(self, v: Vertex) -> Vertex:
        return self.map[v]

    def as_index_map(self) -> tuple[int, ...]:
        idx = self.target.index
        return tuple(idx[self.map[v]] for v in self.source.vertices)

    def to_json(self) -> dict:
        return {"map": {str(v): str(self.map[v]) for v in self.source.vertices}}


@dataclass(frozen=True, eq=False)
class ArrowAutGroup:
    """Pairs (a, b) of automorphisms with b o phi = phi o a, as index permutations."""

    pairs: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    group: FiniteGroup

    @property
    def order(self) -> int:
        return len(self.pairs)


def arrow_group_from_pairs(pairs: Iterable[tuple[Sequence[int], Sequence[int]]], n_src: int) -> ArrowAutGroup:
    pairs = sorted((tuple(a), tuple(b)) for a, b in pairs)
    # encode (a, b) as one permutation of the disjoint union of both vertex sets
    perms = [a + tuple(n_src + x for x in b) for a, b in pairs]
    group, elems = group_from_permutations(perms, name="Aut(arrow)")
    ordered = tuple((p[:n_src], tuple(x - n_src for x in p[n_src:])) for p in elems)
    return ArrowAutGroup(ordered, group)


# -- constructions ------------------------------------------------------------


def cayley_diagram(g: FiniteGroup, labelled_gens: Sequence[tuple[Label, int]], extra_labels: Sequence[Label] = ()) -> RelSystem:
    """Edge (x, s_i x) with label i for every generator s_i and element x."""
    if len(subgroup_closure(g, [s for _, s in labelled_gens])) != g.order:
        raise NotGenerating(f"{[s for _, s in labelled_gens]} does not generate {g.name or 'the group'}")
    vertices = [Elem(x) for x in g]
    edges = {label: [(Elem(x), Elem(g.table[s][x])) for x in g] for label, s in labelled_gens}
    labels = [l for l, _ in labelled_gens] + [l for l in extra_labels if l not in edges]
    return RelSystem(vertices, labels, edges)


def build_aux_system(gd: GeneratingData) -> RelSystem:
    d = gd.decomposition
    g1, q1 = d.g1, d.q1_cosets
    classes = [Cls(r) for r in q1.reps]
    has_star = len(d.pi1_h) != g1.order
    vertices: list = classes + ([Star()] if has_star else [])
    edges: dict[Label, list] = defaultdict(list)
    for label, _ in gd.I_iota1:
        edges[label] += [(c, c) for c in classes]
    for j in gd.J_pi1:
        if j == 0:
            continue
        r = gd.J1[j]
        label = gd.label_of_j1(j)
        edges[label] += [(Cls(c), Cls(q1.rep_of(g1.table[r][c]))) for c in q1.reps]
    if has_star:
        s = Star()
        for label, _ in gd.I1:
            edges[label].append((s, s))
        for j in range(1, len(gd.J1)):
            if j in gd.J_pi1:
                continue
            label = gd.label_of_j1(j)
            for c in classes:
                edges[label] += [(c, s), (s, c)]
    return RelSystem(vertices, gd.labels, edges)


def build_target_system(gd: GeneratingData, aux: RelSystem | None = None) -> RelSystem:
    d = gd.decomposition
    g2 = d.g2
    aux = aux if aux is not None else build_aux_system(gd)
    th_inv = d.theta_inverse
    vertices: list = [Elem(x) for x in g2]
    for j in range(len(gd.J2)):
        vertices += [Copy(j, v) for v in aux.vertices]
    edges: dict[Label, list] = defaultdict(list)
    for label, s in gd.I2:
        edges[label] += [(Elem(x), Elem(g2.table[s][x])) for x in g2]
    for x in g2:
        k, j = gd.factor(2, x)
        c = th_inv[d.q2_cosets.class_of[k]]
        edges[gd.theta_label].append((Elem(x), Copy(j, Cls(d.q1_cosets.reps[c]))))
    i1_labels = {l for l, _ in gd.I1}
    for label in aux.labels:
        if label not in i1_labels:
            continue
        for v, w in aux.edges[label]:
            edges[label] += [(Copy(j, v), Copy(j, w)) for j in range(len(gd.J2))]
    return RelSystem(vertices, gd.labels, edges)


def build_source_system(gd: GeneratingData) -> RelSystem:
    """Cay(G1, R), declared over the full label set I."""
    return cayley_diagram(gd.g1, gd.I1, extra_labels=gd.labels)


def phi0(gd: GeneratingData, g: int) -> Cls | Star:
    d = gd.decomposition
    if g in d.pi1_h:
        return Cls(d.q1_cosets.rep_of(g))
    return Star()


def build_arrow(gd: GeneratingData, source: RelSystem | None = None, target: RelSystem | None = None) -> RelMorphism:
    source = source if source is not None else build_source_system(gd)
    target = target if target is not None else build_target_system(gd)
    return RelMorphism(source, target, {Elem(g): Copy(0, phi0(gd, g)) for g in gd.g1})


def induced_target_automorphism(gd: GeneratingData, gt: int, target: RelSystem | None = None) -> RelMorphism:
    """Right multiplication by gt^{-1} on G2, transported to the auxiliary copies."""
    d = gd.decomposition
    g2, q1 = d.g2, d.q1_cosets
    target = target if target is not None else build_target_system(gd)
    gt_inv = g2.inverse[gt]
    th_inv = d.theta_inverse
    mapping: dict = {}
    for x in g2:
        mapping[Elem(x)] = Elem(g2.table[x][gt_inv])
    for v in target.vertices:
        if not isinstance(v, Copy):
            continue
        t = g2.table[gd.J2[v.j]][gt_inv]
        k, j_new = gd.factor(2, t)
        if isinstance(v.v, Star):
            mapping[v] = Copy(j_new, Star())
        else:
            shift = q1.reps[th_inv[d.q2_cosets.class_of[k]]]
            mapping[v] = Copy(j_new, Cls(q1.rep_of(d.g1.table[v.v.rep][shift])))
    return RelMorphism(target, target, mapping)


# -- degrees and automorphisms ------------------------------------------------


def degree_report(s: RelSystem) -> dict[Vertex, tuple[int, int, int]]:
    """Per vertex (indegree, outdegree, degree); a loop adds one to each side."""
    indeg: dict[Vertex, int] = {v: 0 for v in s.vertices}
    outdeg: dict[Vertex, int] = {v: 0 for v in s.vertices}
    for label in s.labels:
        for v, w in s.edges[label]:
            outdeg[v] += 1
            indeg[w] += 1
    return {v: (indeg[v], outdeg[v], indeg[v] + outdeg[v]) for v in s.vertices}


def _signature(s: RelSystem, i: int) -> tuple:
    out, inn = s._adj
    return tuple((len(out[l].get(i, ())), len(inn[l].get(i, ())), i in out[l].get(i, ())) for l in range(len(s.labels)))


def _search_order(s: RelSystem, sig: list[tuple], classes: dict[tuple, list[int]]) -> list[int]:
    """Rarest signature first, then breadth-first along edges of any label."""
    out, inn = s._adj
    n = len(s.vertices)
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for l in range(len(s.labels)):
        for i, ws in out[l].items():
            for w in ws:
                if w != i:
                    nbrs[i].add(w)
                    nbrs[w].add(i)
    placed = [False] * n
    order: list[int] = []
    while len(order) < n:
        start = min((i for i in range(n) if not placed[i]), key=lambda i: (len(classes[sig[i]]), i))
        placed[start] = True
        queue = [start]
        while queue:
            v = queue.pop(0)
            order.append(v)
            for w in sorted(nbrs[v], key=lambda w: (len(classes[sig[w]]), w)):
                if not placed[w]:
                    placed[w] = True
                    queue.append(w)
    return order


def enumerate_rel_automorphisms(s: RelSystem, budget: int = DEFAULT_BUDGET) -> list[tuple[int, ...]]:
    """All label-preserving vertex bijections, as permutations of vertex indices (sorted)."""
    n = len(s.vertices)
    if n == 0:
        return [()]
    out, inn = s._adj
    L = len(s.labels)
    sig = [_signature(s, i) for i in range(n)]
    classes: dict[tuple, list[int]] = defaultdict(list)
    for i, g in enumerate(sig):
        classes[g].append(i)
    order = _search_order(s, sig, classes)
    pos = {v: k for k, v in enumerate(order)}
    # for each vertex: labelled edges to vertices placed earlier in the order
    back: list[list[tuple[int, int, bool]]] = [[] for _ in range(n)]
    for l in range(L):
        for v, ws in out[l].items():
            for w in ws:
                if w == v:
                    continue
                if pos[w] < pos[v]:
                    back[v].append((l, w, True))  # v -> w
                elif pos[v] < pos[w]:
                    back[w].append((l, v, False))  # v -> w seen from w: w has in-edge from v
    img = [-1] * n
    used = [False] * n
    results: list[tuple[int, ...]] = []
    nodes = 0

    def consistent(v: int, x: int) -> bool:
        for l, w, forward in back[v]:
            y = img[w]
            if forward:
                if y not in out[l].get(x, ()):
                    return False
            elif y not in inn[l].get(x, ()):
                return False
        # non-edges must map to non-edges: compare edge counts to placed vertices
        cnt_src = len(back[v])
        cnt_img = 0
        for l in range(L):
            for y in out[l].get(x, ()):
                if y != x and used[y]:
                    cnt_img += 1
            for y in inn[l].get(x, ()):
                if y != x and used[y]:
                    cnt_img += 1
        return cnt_src == cnt_img

    def rec(k: int) -> None:
        nonlocal nodes
        if k == n:
            results.append(tuple(img))
            return
        v = order[k]
        cands = classes[sig[v]]
        if back[v]:
            l, w, forward = back[v][0]
            pool = inn[l].get(img[w], ()) if forward else out[l].get(img[w], ())
            cands = [x for x in cands if x in pool]
        for x in cands:
            if used[x]:
                continue
            nodes += 1
            if nodes > budget:
                raise SearchBudgetExceeded("relational automorphism search", budget)
            if not consistent(v, x):
                continue
            img[v] = x
            used[x] = True
            rec(k + 1)
            used[x] = False
            img[v] = -1

    rec(0)
    results.sort()
    _assert_closed(results)
    return results


def _assert_closed(perms: list[tuple[int, ...]]) -> None:
    pset = set(perms)
    for p in perms:
        for q in perms:
            if tuple(p[x] for x in q) not in pset:
                raise AssertionError("enumerated automorphisms are not closed under composition")


def automorphism_group(perms: Sequence[Sequence[int]], name: str = "Aut") -> FiniteGroup:
    g, _ = group_from_permutations(perms, name=name)
    return g


def arrow_automorphism_group(
    phi: RelMorphism,
    aut_src: Sequence[tuple[int, ...]] | None = None,
    aut_tgt: Sequence[tuple[int, ...]] | None = None,
    budget: int = DEFAULT_BUDGET,
) -> ArrowAutGroup:
    aut_src = aut_src if aut_src is not None else enumerate_rel_automorphisms(phi.source, budget)
    aut_tgt = aut_tgt if aut_tgt is not None else enumerate_rel_automorphisms(phi.target, budget)
    f = phi.as_index_map()
    pairs = [(a, b) for a in aut_src for b in aut_tgt if all(b[f[x]] == f[a[x]] for x in range(len(f)))]
    return arrow_group_from_pairs(pairs, len(phi.source.vertices))


def morphism_from_json(data: Mapping, source: RelSystem, target: RelSystem) -> RelMorphism:
    return RelMorphism(source, target, {parse_vertex(k): parse_vertex(v) for k, v in data["map"].items()})


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)
