"""Simple graphs, Frucht-tree edge replacement, digraphs and homomorphism search.

Every labelled edge (v, w) of a relational system becomes a gadget

    v -- r -- p -- w,   p -- leaf of the label's starlike tree

so r has degree 2, p degree 3 and tree vertices at most 3, while original
vertices keep their relational degree (>= 4). Automorphisms therefore fix
the original/gadget split, and the asymmetric, pairwise distinct trees pin
down both the label and the direction of each edge.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

from .errors import (
    ArmsNotDistinct,
    DegreeSeparationViolated,
    FewerThanTwoVertices,
    MorphismCheckFailed,
    NotStronglyConnected,
    SearchBudgetExceeded,
)
from .groups import DEFAULT_BUDGET
from .relsys import ArrowAutGroup, RelMorphism, RelSystem, arrow_group_from_pairs, degree_report

Vertex = Hashable


class SimpleGraph:
    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[tuple[Vertex, Vertex]]):
        self.vertices: tuple[Vertex, ...] = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        vset = set(self.vertices)
        es: set[frozenset] = set()
        for v, w in edges:
            if v == w:
                raise ValueError(f"loop at {v!r}")
            if v not in vset or w not in vset:
                raise ValueError(f"edge ({v!r}, {w!r}) has an undeclared endpoint")
            e = frozenset((v, w))
            if e in es:
                raise ValueError(f"multi-edge between {v!r} and {w!r}")
            es.add(e)
        self.edges: frozenset[frozenset] = frozenset(es)

    def __repr__(self) -> str:
        return f"SimpleGraph({len(self.vertices)} vertices, {len(self.edges)} edges)"

    @cached_property
    def index(self) -> dict[Vertex, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def adj(self) -> tuple[frozenset[int], ...]:
        idx = self.index
        nb: list[set[int]] = [set() for _ in self.vertices]
        for e in self.edges:
            v, w = tuple(e)
            nb[idx[v]].add(idx[w])
            nb[idx[w]].add(idx[v])
        return tuple(frozenset(s) for s in nb)

    def degree(self, v: Vertex) -> int:
        return len(self.adj[self.index[v]])

    def has_edge(self, v: Vertex, w: Vertex) -> bool:
        return frozenset((v, w)) in self.edges

    def is_tree(self) -> bool:
        return len(self.edges) == len(self.vertices) - 1 and _connected(self.adj)

    def to_json(self) -> dict:
        idx = self.index
        edges = sorted((sorted((idx[v], idx[w])) for v, w in map(tuple, self.edges)))
        return {"vertices": [str(v) for v in self.vertices], "edges": [[str(self.vertices[a]), str(self.vertices[b])] for a, b in edges]}

    @classmethod
    def from_json(cls, data: Mapping) -> "SimpleGraph":
        return cls(data["vertices"], [tuple(e) for e in data["edges"]])

    def to_dot(self, name: str = "G") -> str:
        idx = self.index
        lines = [f'graph "{name}" {{']
        lines += [f'  "{v}";' for v in self.vertices]
        for a, b in sorted(sorted((idx[v], idx[w])) for v, w in map(tuple, self.edges)):
            lines.append(f'  "{self.vertices[a]}" -- "{self.vertices[b]}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _connected(adj: Sequence[Iterable[int]]) -> bool:
    if not adj:
        return True
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(adj)


class GraphMorphism:
    def __init__(self, source: SimpleGraph, target: SimpleGraph, mapping: Mapping[Vertex, Vertex]):
        self.source = source
        self.target = target
        self.map = dict(mapping)
        for v in source.vertices:
            if v not in self.map:
                raise MorphismCheckFailed(f"map undefined on {v!r}")
            if self.map[v] not in target.index:
                raise MorphismCheckFailed(f"image of {v!r} is not a target vertex")
        for e in source.edges:
            v, w = tuple(e)
            if not target.has_edge(self.map[v], self.map[w]):
                raise MorphismCheckFailed(f"edge {v!r}--{w!r} maps to a non-edge")

    def as_index_map(self) -> tuple[int, ...]:
        idx = self.target.index
        return tuple(idx[self.map[v]] for v in self.source.vertices)

    def to_json(self) -> dict:
        return {"map": {str(v): str(self.map[v]) for v in self.source.vertices}}


# -- colour refinement search -------------------------------------------------


def _refine_pair(adj_a, adj_b, col_a: list[int], col_b: list[int]):
    """Refine two colourings in lockstep; None if their histories diverge."""
    ncol = len(set(col_a))
    while True:
        sig_a = [(col_a[i], tuple(sorted(col_a[j] for j in adj_a[i]))) for i in range(len(adj_a))]
        sig_b = [(col_b[i], tuple(sorted(col_b[j] for j in adj_b[i]))) for i in range(len(adj_b))]
        if Counter(sig_a) != Counter(sig_b):
            return None
        rank = {s: k for k, s in enumerate(sorted(set(sig_a)))}
        col_a = [rank[s] for s in sig_a]
        col_b = [rank[s] for s in sig_b]
        if len(rank) == ncol:
            return col_a, col_b
        ncol = len(rank)


def _isomorphisms(
    adj_a: Sequence[frozenset[int]],
    adj_b: Sequence[frozenset[int]],
    col_a: list[int],
    col_b: list[int],
    budget: int,
    first_only: bool,
    what: str,
) -> list[tuple[int, ...]]:
    n = len(adj_a)
    if n != len(adj_b):
        return []
    if n == 0:
        return [()]
    results: list[tuple[int, ...]] = []
    nodes = 0

    def rec(ca: list[int], cb: list[int]) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise SearchBudgetExceeded(what, budget)
        refined = _refine_pair(adj_a, adj_b, ca, cb)
        if refined is None:
            return False
        ca, cb = refined
        cells: dict[int, list[int]] = defaultdict(list)
        for i, c in enumerate(ca):
            cells[c].append(i)
        if len(cells) == n:
            where = {c: i for i, c in enumerate(cb)}
            f = tuple(where[ca[i]] for i in range(n))
            if all(adj_b[f[i]] == frozenset(f[j] for j in adj_a[i]) for i in range(n)):
                results.append(f)
                return first_only
            return False
        target = min((c for c in cells if len(cells[c]) > 1), key=lambda c: (len(cells[c]), c))
        v = cells[target][0]
        fresh = len(cells)
        for w in (i for i, c in enumerate(cb) if c == target):
            na, nb = list(ca), list(cb)
            na[v] = fresh
            nb[w] = fresh
            if rec(na, nb):
                return True
        return False

    rec(list(col_a), list(col_b))
    results.sort()
    return results


def enumerate_graph_automorphisms(g: SimpleGraph, budget: int = DEFAULT_BUDGET) -> list[tuple[int, ...]]:
    """All adjacency-preserving bijections as permutations of vertex indices (sorted)."""
    deg = [len(a) for a in g.adj]
    return _isomorphisms(g.adj, g.adj, deg, list(deg), budget, False, "graph automorphism search")


def find_graph_isomorphism(a: SimpleGraph, b: SimpleGraph, budget: int = DEFAULT_BUDGET) -> tuple[int, ...] | None:
    if len(a.vertices) != len(b.vertices) or len(a.edges) != len(b.edges):
        return None
    found = _isomorphisms(a.adj, b.adj, [len(x) for x in a.adj], [len(x) for x in b.adj], budget, True, "graph isomorphism search")
    return found[0] if found else None


# -- Frucht trees -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FruchtTree:
    """Starlike tree: root 0 with three pendant paths of distinct lengths."""

    arms: tuple[int, int, int]
    graph: SimpleGraph
    root: int
    leaf: int


def frucht_tree(arms: Sequence[int], verify: bool = True) -> FruchtTree:
    arms_t = tuple(int(a) for a in arms)
    if len(arms_t) != 3 or min(arms_t) < 1 or len(set(arms_t)) != 3:
        raise ArmsNotDistinct(f"arm lengths must be three distinct positive integers, got {arms_t}")
    edges = []
    nxt = 1
    ends = []
    for length in arms_t:
        prev = 0
        for _ in range(length):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
        ends.append(prev)
    g = SimpleGraph(range(nxt), edges)
    leaf = ends[arms_t.index(max(arms_t))]
    tree = FruchtTree(arms_t, g, 0, leaf)  # type: ignore[arg-type]
    if verify:
        if not g.is_tree() or max(len(a) for a in g.adj) > 3 or g.degree(leaf) != 1:
            raise AssertionError(f"malformed starlike tree {arms_t}")
        if len(enumerate_graph_automorphisms(g)) != 1:
            raise AssertionError(f"starlike tree {arms_t} is not asymmetric")
    return tree


def arm_triples() -> Iterator[tuple[int, int, int]]:
    """Distinct triples a < b < c by increasing a+b+c, then lexicographically."""
    total = 6
    while True:
        for a in range(1, total):
            for b in range(a + 1, total):
                c = total - a - b
                if c > b:
                    yield (a, b, c)
        total += 1


def tree_family(labels: Sequence[Hashable], verify: bool = True) -> dict[Hashable, FruchtTree]:
    triples = arm_triples()
    family = {label: frucht_tree(next(triples), verify=verify) for label in labels}
    if verify:
        trees = list(family.values())
        for i in range(len(trees)):
            for j in range(i + 1, len(trees)):
                if find_graph_isomorphism(trees[i].graph, trees[j].graph) is not None:
                    raise AssertionError(f"trees {trees[i].arms} and {trees[j].arms} are isomorphic")
    return family


# -- replacement --------------------------------------------------------------


@dataclass(frozen=True)
class GadgetVertex:
    label: str
    source: Vertex
    target: Vertex
    part: object  # "r", "p" or a tree vertex index

    def __str__(self) -> str:
        return f"<{self.label}:{self.source}>{self.target}:{self.part}>"


@dataclass(frozen=True, eq=False)
class ReplacementMap:
    system: RelSystem
    graph: SimpleGraph
    family: Mapping[Hashable, FruchtTree]
    original_of: Mapping[Vertex, Vertex]
    gadget_of: Mapping[tuple, tuple[GadgetVertex, ...]]

    def r(self, label: str, v: Vertex, w: Vertex) -> GadgetVertex:
        return GadgetVertex(label, v, w, "r")

    def p(self, label: str, v: Vertex, w: Vertex) -> GadgetVertex:
        return GadgetVertex(label, v, w, "p")

    def to_json(self) -> dict:
        return {
            "graph": self.graph.to_json(),
            "trees": {str(l): list(t.arms) for l, t in self.family.items()},
            "original": [str(v) for v in self.original_of],
            "gadgets": [
                {"label": l, "from": str(v), "to": str(w), "vertices": [str(x) for x in verts]}
                for (l, v, w), verts in self.gadget_of.items()
            ],
        }


def replace(s: RelSystem, family: Mapping[Hashable, FruchtTree]) -> ReplacementMap:
    used = [l for l in s.labels if s.edges[l]]
    missing = [l for l in used if l not in family]
    if missing:
        raise ValueError(f"no tree for labels {missing}")
    for v, (_, _, deg) in degree_report(s).items():
        if deg <= 3:
            raise DegreeSeparationViolated(f"vertex {v} has degree {deg}; replacement needs >= 4")

    vertices: list = list(s.vertices)
    edges: list = []
    gadget_of: dict = {}
    for label in s.labels:
        tree = family.get(label)
        for v, w in sorted(s.edges[label], key=lambda e: (s.index[e[0]], s.index[e[1]])):
            assert tree is not None
            r = GadgetVertex(label, v, w, "r")
            p = GadgetVertex(label, v, w, "p")
            tv = [GadgetVertex(label, v, w, t) for t in tree.graph.vertices]
            vertices += [r, p] + tv
            edges += [(v, r), (r, p), (p, w), (p, tv[tree.leaf])]
            edges += [(tv[a], tv[b]) for a, b in (tuple(e) for e in tree.graph.edges)]
            gadget_of[(label, v, w)] = (r, p, *tv)
    graph = SimpleGraph(vertices, edges)
    return ReplacementMap(s, graph, dict(family), {v: v for v in s.vertices}, gadget_of)


def lift_morphism(phi: RelMorphism, src: ReplacementMap, dst: ReplacementMap) -> GraphMorphism:
    if src.system is not phi.source or dst.system is not phi.target:
        raise ValueError("replacement maps were not built from phi's source and target")
    mapping: dict = {v: phi.map[v] for v in phi.source.vertices}
    for (label, v, w), verts in src.gadget_of.items():
        fv, fw = phi.map[v], phi.map[w]
        if (label, fv, fw) not in dst.gadget_of:
            raise MorphismCheckFailed(f"no gadget for image edge ({fv}, {fw}) with label {label!r}")
        for x in verts:
            mapping[x] = GadgetVertex(label, fv, fw, x.part)
    return GraphMorphism(src.graph, dst.graph, mapping)


def restrict_to_original(rep: ReplacementMap, perm: Sequence[int]) -> tuple[int, ...]:
    """Graph automorphism (index form) restricted to the relational vertices, in system indices."""
    g, s = rep.graph, rep.system
    out = []
    for v in s.vertices:
        image = g.vertices[perm[g.index[v]]]
        if image not in s.index:
            raise AssertionError(f"automorphism sends original vertex {v} to gadget vertex {image}")
        out.append(s.index[image])
    return tuple(out)


def arrow_automorphism_group_graph(
    f: GraphMorphism,
    aut_src: Sequence[tuple[int, ...]] | None = None,
    aut_tgt: Sequence[tuple[int, ...]] | None = None,
    budget: int = DEFAULT_BUDGET,
) -> ArrowAutGroup:
    aut_src = aut_src if aut_src is not None else enumerate_graph_automorphisms(f.source, budget)
    aut_tgt = aut_tgt if aut_tgt is not None else enumerate_graph_automorphisms(f.target, budget)
    m = f.as_index_map()
    pairs = [(a, b) for a in aut_src for b in aut_tgt if all(b[m[x]] == m[a[x]] for x in range(len(m)))]
    return arrow_group_from_pairs(pairs, len(f.source.vertices))


# -- digraphs -----------------------------------------------------------------


class Digraph:
    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[tuple[Vertex, Vertex]], name: str = ""):
        self.vertices: tuple[Vertex, ...] = tuple(vertices)
        self.name = name
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        vset = set(self.vertices)
        es = []
        for v, w in edges:
            if v not in vset or w not in vset:
                raise ValueError(f"edge ({v!r}, {w!r}) has an undeclared endpoint")
            es.append((v, w))
        if len(set(es)) != len(es):
            raise ValueError("duplicate edge")
        self.edges: tuple[tuple[Vertex, Vertex], ...] = tuple(es)

    def __repr__(self) -> str:
        return f"Digraph({self.name or '?'}: {len(self.vertices)} vertices, {len(self.edges)} edges)"

    @cached_property
    def index(self) -> dict[Vertex, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def edge_set(self) -> frozenset[tuple[Vertex, Vertex]]:
        return frozenset(self.edges)

    @cached_property
    def out_nbrs(self) -> dict[Vertex, tuple[Vertex, ...]]:
        out: dict = {v: [] for v in self.vertices}
        for v, w in self.edges:
            out[v].append(w)
        return {v: tuple(ws) for v, ws in out.items()}

    @cached_property
    def in_nbrs(self) -> dict[Vertex, tuple[Vertex, ...]]:
        inn: dict = {v: [] for v in self.vertices}
        for v, w in self.edges:
            inn[w].append(v)
        return {v: tuple(ws) for v, ws in inn.items()}

    def has_loops(self) -> bool:
        return any(v == w for v, w in self.edges)

    def is_strongly_connected(self) -> bool:
        if not self.vertices:
            return False

        def reach(nbrs) -> set:
            start = self.vertices[0]
            seen = {start}
            stack = [start]
            while stack:
                v = stack.pop()
                for w in nbrs[v]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            return seen

        n = len(self.vertices)
        return len(reach(self.out_nbrs)) == n and len(reach(self.in_nbrs)) == n

    def to_json(self) -> dict:
        return {"name": self.name, "vertices": list(self.vertices), "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json(cls, data: Mapping) -> "Digraph":
        return cls(data["vertices"], [tuple(e) for e in data["edges"]], data.get("name", ""))

    @classmethod
    def from_graph(cls, g: SimpleGraph) -> "Digraph":
        """Symmetric digraph with both orientations of every edge."""
        idx = g.index
        edges = []
        for e in sorted(g.edges, key=lambda e: sorted(idx[x] for x in e)):
            v, w = sorted(e, key=idx.__getitem__)
            edges += [(v, w), (w, v)]
        return cls(g.vertices, edges)


def check_sdig(g: Digraph) -> None:
    """Standing hypothesis for the algebra functor: strongly connected, more than one vertex."""
    if len(g.vertices) < 2:
        raise FewerThanTwoVertices(f"{g!r} has fewer than two vertices")
    if not g.is_strongly_connected():
        raise NotStronglyConnected(f"{g!r} is not strongly connected")


def directed_cycle(k: int) -> Digraph:
    return Digraph(range(k), [(i, (i + 1) % k) for i in range(k)], name=f"C{k}")


def _as_digraph(x: Digraph | SimpleGraph) -> tuple[Digraph, bool]:
    if isinstance(x, SimpleGraph):
        return Digraph.from_graph(x), False
    return x, True


def enumerate_graph_homomorphisms(
    a: Digraph | SimpleGraph, b: Digraph | SimpleGraph, budget: int = DEFAULT_BUDGET
) -> list[dict[Vertex, Vertex]]:
    """All edge-preserving vertex maps a -> b, found by backtracking in DFS order."""
    da, directed_a = _as_digraph(a)
    db, directed_b = _as_digraph(b)
    if directed_a != directed_b:
        raise TypeError("both arguments must be digraphs or both simple graphs")
    if directed_a:
        check_sdig(da)
        check_sdig(db)

    order: list = []
    seen: set = set()
    for start in da.vertices:
        if start in seen:
            continue
        stack = [start]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            order.append(v)
            nb = list(da.out_nbrs[v]) + list(da.in_nbrs[v])
            stack += [w for w in reversed(nb) if w not in seen]
    pos = {v: k for k, v in enumerate(order)}
    checks: dict = {v: [] for v in order}
    for v, w in da.edges:
        later = v if pos[v] >= pos[w] else w
        checks[later].append((v, w))

    tgt_edges = db.edge_set
    img: dict = {}
    results: list[dict] = []
    nodes = 0

    def rec(k: int) -> None:
        nonlocal nodes
        if k == len(order):
            results.append(dict(img))
            return
        v = order[k]
        for x in db.vertices:
            nodes += 1
            if nodes > budget:
                raise SearchBudgetExceeded("graph homomorphism search", budget)
            img[v] = x
            if all((img[p], img[q]) in tgt_edges for p, q in checks[v]):
                rec(k + 1)
            del img[v]

    rec(0)
    idx = db.index
    results.sort(key=lambda m: tuple(idx[m[v]] for v in da.vertices))
    return results


def dumps(obj) -> str:
    return json.dumps(obj, indent=2)


def parse_digraph(text: str) -> Digraph:
    """``cycle:k``, ``cycle-chord:k`` (k-cycle plus the back edge k-1 -> k-2),
    ``bipath:k`` (path with both orientations), ``complete:k`` or a JSON file path."""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if arg:
        k = int(arg)
        if kind == "cycle":
            return directed_cycle(k)
        if kind == "cycle-chord":
            if k < 3:
                raise ValueError("cycle-chord needs k >= 3")
            c = directed_cycle(k)
            return Digraph(c.vertices, c.edges + ((k - 1, k - 2),), name=f"C{k}+chord")
        if kind == "bipath":
            edges = []
            for i in range(k - 1):
                edges += [(i, i + 1), (i + 1, i)]
            return Digraph(range(k), edges, name=f"P{k}<->")
        if kind == "complete":
            return Digraph(range(k), [(i, j) for i in range(k) for j in range(k) if i != j], name=f"K{k}<->")
    path = Path(text)
    if path.exists():
        return Digraph.from_json(json.loads(path.read_text()))
    raise ValueError(f"unrecognised digraph spec {text!r}")
