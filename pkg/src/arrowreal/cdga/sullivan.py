"""The algebras M_n(G) attached to strongly connected digraphs, and their morphisms."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

from ..errors import CommutationFailed, DegreeOverflow, MixedPresentation, SearchBudgetExceeded
from ..graphs import Digraph, check_sdig
from .poly import (
    INT64_MAX,
    GradedAlgebra,
    GradedPoly,
    Monomial,
    check_degree,
    derivation,
    linear_combination,
    monomials_of_degree,
)

BASE = ("x1", "x2", "y1", "y2", "y3", "z")
DEFAULT_COEFFS = (Fraction(-1), Fraction(0), Fraction(1))
DEFAULT_MORPHISM_BUDGET = 2_000_000


def base_degrees(n: int) -> dict[str, int]:
    return {
        "x1": 30 * n + 18,
        "x2": 36 * n + 22,
        "y1": 126 * n + 75,
        "y2": 132 * n + 79,
        "y3": 138 * n + 83,
        "z": 540 * n * n + 654 * n + 197,
        "xv": 180 * n * n + 218 * n + 66,
    }


def vertex_name(v: Hashable) -> str:
    return f"x[{v}]"


def edge_name(v: Hashable, w: Hashable) -> str:
    return f"z[{v},{w}]"


@dataclass(frozen=True)
class Origin:
    kind: str  # "base", "vertex" or "edge"
    data: tuple = ()


@dataclass(eq=False)
class SullivanPresentation:
    n: int
    graph: Digraph
    algebra: GradedAlgebra
    origins: tuple[Origin, ...]
    differential: dict[int, GradedPoly]
    pure: bool = False

    @property
    def names(self) -> tuple[str, ...]:
        return self.algebra.names

    def degree(self, name: str) -> int:
        return self.algebra.degrees[self.algebra.index(name)]

    def parity(self, name: str) -> str:
        return "odd" if self.degree(name) % 2 else "even"

    def gen(self, name: str) -> GradedPoly:
        return self.algebra.gen(name)

    def x(self, v: Hashable) -> GradedPoly:
        return self.gen(vertex_name(v))

    def ze(self, v: Hashable, w: Hashable) -> GradedPoly:
        return self.gen(edge_name(v, w))

    def d_of(self, name: str) -> GradedPoly:
        return self.differential.get(self.algebra.index(name), self.algebra.zero())

    def d(self, p: GradedPoly) -> GradedPoly:
        if p.alg is not self.algebra:
            raise MixedPresentation("polynomial is not in this presentation")
        return derivation(self.algebra, self.differential, p)

    def to_json(self) -> dict:
        alg = self.algebra
        return {
            "n": self.n,
            "pure": self.pure,
            "generators": [
                {
                    "name": nm,
                    "degree": alg.degrees[i],
                    "parity": "odd" if alg.is_odd(i) else "even",
                    "origin": {"kind": self.origins[i].kind, "data": [str(x) for x in self.origins[i].data]},
                }
                for i, nm in enumerate(alg.names)
            ],
            "differential": {alg.names[i]: p.to_json() for i, p in sorted(self.differential.items()) if p},
        }

    def pretty(self) -> str:
        lines = []
        for i, nm in enumerate(self.names):
            lines.append(f"|{nm}| = {self.algebra.degrees[i]:<8} d{nm} = {self.differential.get(i, self.algebra.zero())}")
        return "\n".join(lines)


def sullivan_presentation(g: Digraph, n: int) -> SullivanPresentation:
    if not isinstance(n, int) or n < 1:
        raise ValueError("n must be a positive integer")
    check_sdig(g)
    if g.has_loops():
        # loops would put x_v^2 x2^(5n+3) into dz_(v,v); the construction assumes loop-free digraphs
        raise ValueError("digraphs with loops are not supported")
    deg = base_degrees(n)
    # the widest product formed anywhere is a cube of x_v times small factors; keep 4|z| in range
    if 4 * deg["z"] > INT64_MAX:
        raise DegreeOverflow(f"n = {n} pushes generator degrees past 64 bits")
    names = list(BASE) + [vertex_name(v) for v in g.vertices] + [edge_name(v, w) for v, w in g.edges]
    degrees = [deg[nm] for nm in BASE] + [deg["xv"]] * len(g.vertices) + [deg["z"]] * len(g.edges)
    origins = [Origin("base")] * len(BASE) + [Origin("vertex", (v,)) for v in g.vertices] + [
        Origin("edge", e) for e in g.edges
    ]
    alg = GradedAlgebra(tuple(names), tuple(degrees))
    x1, x2, y1, y2, y3 = (alg.gen(nm) for nm in ("x1", "x2", "y1", "y2", "y3"))
    ix = alg.index
    d = {
        ix("y1"): x1**3 * x2,
        ix("y2"): x1**2 * x2**2,
        ix("y3"): x1 * x2**3,
        ix("z"): x1 ** (18 * n) * (x2**2 * y1 * y2 - x1 * x2 * y1 * y3 + x1**2 * y2 * y3)
        + x1 ** (18 * n + 11)
        + x2 ** (15 * n + 9),
    }
    for v, w in g.edges:
        xv, xw = alg.gen(vertex_name(v)), alg.gen(vertex_name(w))
        d[ix(edge_name(v, w))] = xv**3 + xv * xw * x2 ** (5 * n + 3) + x1 ** (18 * n + 11)
    pres = SullivanPresentation(n, g, alg, tuple(origins), d)
    for i, nm in enumerate(names):
        p = d.get(i)
        if p is None:
            continue
        if p.degree() != degrees[i] + 1:
            raise AssertionError(f"d{nm} has degree {p.degree()}, expected {degrees[i] + 1}")
        if degrees[i] % 2 == 0:
            raise AssertionError(f"even generator {nm} has nonzero differential")
    return pres


def check_d_squared(pres: SullivanPresentation) -> dict[str, GradedPoly]:
    """d(d(g)) for every generator; an empty result means d^2 = 0."""
    out = {}
    for i, nm in enumerate(pres.names):
        dp = pres.differential.get(i)
        if dp is None:
            continue
        r = pres.d(dp)
        if r:
            out[nm] = r
    return out


def check_degree_shift(pres: SullivanPresentation) -> dict[str, str]:
    """Generators whose differential is not homogeneous of degree |g| + 1."""
    bad = {}
    for i, nm in enumerate(pres.names):
        dp = pres.differential.get(i)
        if dp is None:
            continue
        if not dp.is_homogeneous():
            bad[nm] = "inhomogeneous"
        elif dp.degree() != pres.algebra.degrees[i] + 1:
            bad[nm] = f"degree {dp.degree()} != {pres.algebra.degrees[i] + 1}"
    return bad


def basis_at_degree(pres: SullivanPresentation, d: int) -> list[Monomial]:
    check_degree(d)
    return monomials_of_degree(pres.algebra, d)


def expected_basis(pres: SullivanPresentation, which: str) -> set[Monomial]:
    """The bases claimed for degrees |x_v| and |z|, written out as monomials."""
    ix = pres.algebra.index
    if which == "xv":
        return {((ix("x2"), 5 * pres.n + 3),)} | {((ix(vertex_name(v)), 1),) for v in pres.graph.vertices}
    if which == "z":
        return {((ix("z"), 1),)} | {((ix(edge_name(v, w)), 1),) for v, w in pres.graph.edges}
    raise ValueError(which)


def pure_differential(pres: SullivanPresentation) -> SullivanPresentation:
    """Keep, in each differential, only the terms built from even generators."""
    alg = pres.algebra
    d = {}
    for i, p in pres.differential.items():
        kept = GradedPoly(alg, {m: c for m, c in p.terms.items() if not any(alg.is_odd(g) for g, _ in m)})
        if kept:
            d[i] = kept
    return SullivanPresentation(pres.n, pres.graph, alg, pres.origins, d, pure=True)


@dataclass
class WitnessReport:
    n: int
    residues: dict[str, GradedPoly] = field(default_factory=dict)
    checked: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.residues

    def to_json(self) -> dict:
        return {"n": self.n, "checked": self.checked, "ok": self.ok, "residues": {k: str(v) for k, v in self.residues.items()}}


def check_ellipticity_witnesses(pres: SullivanPresentation, exponents: Mapping[str, int] | None = None) -> WitnessReport:
    """Verify the identities showing that [x1], [x2] and [x_v]^3 are nilpotent under d_sigma.

    ``exponents`` overrides the witness exponents (keys "a" = 15n+6,
    "b" = 18n+8), which is only useful for mutation tests.
    """
    n = pres.n
    ds = pres if pres.pure else pure_differential(pres)
    exps = {"a": 15 * n + 6, "b": 18 * n + 8}
    exps.update(exponents or {})
    x1, x2, y1, y3, z = (ds.gen(nm) for nm in ("x1", "x2", "y1", "y3", "z"))
    rep = WitnessReport(n)

    def check(label: str, lhs: GradedPoly, rhs: GradedPoly) -> None:
        rep.checked.append(label)
        r = lhs - rhs
        if r:
            rep.residues[label] = r

    check("d(z x1 - y3 x2^(15n+6)) = x1^(18n+12)", ds.d(z * x1 - y3 * x2 ** exps["a"]), x1 ** (18 * n + 12))
    check("d(z x2 - y1 x1^(18n+8)) = x2^(15n+10)", ds.d(z * x2 - y1 * x1 ** exps["b"]), x2 ** (15 * n + 10))
    for v, w in pres.graph.edges:
        xv, xw = ds.x(v), ds.x(w)
        target = xv**3 + xv * xw * x2 ** (5 * n + 3) + x1 ** (18 * n + 11)
        check(f"d({edge_name(v, w)}) = {vertex_name(v)}^3 + ...", ds.d(ds.ze(v, w)), target)
    return rep


# -- morphisms ----------------------------------------------------------------


class AlgebraMorphism:
    """Morphism of free graded-commutative algebras, given on generators."""

    def __init__(self, source: SullivanPresentation, target: SullivanPresentation, images: Mapping[str, GradedPoly], check: bool = True):
        self.source = source
        self.target = target
        self.images: dict[str, GradedPoly] = {}
        for nm in source.names:
            p = images.get(nm, target.algebra.zero())
            if p.alg is not target.algebra:
                raise MixedPresentation(f"image of {nm} is not in the target algebra")
            if p and p.degree() != source.degree(nm):
                raise ValueError(f"image of {nm} has degree {p.degree()}, expected {source.degree(nm)}")
            self.images[nm] = p
        self._by_index = [self.images[nm] for nm in source.names]
        self._pow: dict[tuple[int, int], GradedPoly] = {}
        self.verified = False
        if check:
            self.verify()

    def _power(self, i: int, e: int) -> GradedPoly:
        key = (i, e)
        if key not in self._pow:
            self._pow[key] = self._by_index[i] ** e
        return self._pow[key]

    def apply(self, p: GradedPoly) -> GradedPoly:
        if p.alg is not self.source.algebra:
            raise MixedPresentation("polynomial is not in the source algebra")
        tgt = self.target.algebra
        out = tgt.zero()
        for m, c in p.terms.items():
            term = tgt.one(c)
            for i, e in m:
                term = term * self._power(i, e)
                if not term:
                    break
            out = out + term
        return out

    def commutation_defects(self) -> dict[str, GradedPoly]:
        out = {}
        for nm in self.source.names:
            r = self.apply(self.source.d_of(nm)) - self.target.d(self.images[nm])
            if r:
                out[nm] = r
        return out

    def verify(self) -> None:
        bad = self.commutation_defects()
        if bad:
            nm = next(iter(bad))
            raise CommutationFailed(f"f(d{nm}) != d(f({nm})): residue {bad[nm]}")
        self.verified = True

    def compose(self, inner: "AlgebraMorphism") -> "AlgebraMorphism":
        """self after inner."""
        if inner.target is not self.source:
            raise MixedPresentation("morphisms are not composable")
        return AlgebraMorphism(inner.source, self.target, {nm: self.apply(p) for nm, p in inner.images.items()}, check=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraMorphism):
            return NotImplemented
        return self.source is other.source and self.target is other.target and self.images == other.images

    def __hash__(self) -> int:
        return hash(tuple(self.images[nm] for nm in self.source.names))

    def key(self) -> tuple:
        return tuple(tuple(sorted(self.images[nm].terms.items())) for nm in self.source.names)

    def is_zero(self) -> bool:
        return all(not p for p in self.images.values())

    def to_json(self) -> dict:
        return {nm: self.images[nm].to_json() for nm in self.source.names}

    def __repr__(self) -> str:
        return "AlgebraMorphism(" + ", ".join(f"{nm} -> {p}" for nm, p in self.images.items()) + ")"


def identity_morphism(pres: SullivanPresentation) -> AlgebraMorphism:
    return AlgebraMorphism(pres, pres, {nm: pres.gen(nm) for nm in pres.names})


def zero_morphism(m1: SullivanPresentation, m2: SullivanPresentation) -> AlgebraMorphism:
    return AlgebraMorphism(m1, m2, {})


def induced_algebra_morphism(sigma: Mapping, m1: SullivanPresentation, m2: SullivanPresentation) -> AlgebraMorphism:
    """The morphism fixing base generators and sending x_v, z_(v,w) along sigma."""
    if m1.n != m2.n:
        raise ValueError("presentations use different n")
    g1, g2 = m1.graph, m2.graph
    for v, w in g1.edges:
        if (sigma[v], sigma[w]) not in g2.edge_set:
            raise ValueError(f"sigma does not preserve the edge ({v}, {w})")
    images = {nm: m2.gen(nm) for nm in BASE}
    for v in g1.vertices:
        images[vertex_name(v)] = m2.x(sigma[v])
    for v, w in g1.edges:
        images[edge_name(v, w)] = m2.ze(sigma[v], sigma[w])
    return AlgebraMorphism(m1, m2, images)


def linear_part(f: AlgebraMorphism) -> dict[str, dict[str, Fraction]]:
    """Coefficient of each target generator in the image of each source generator."""
    names = f.target.names
    out = {}
    for nm, p in f.images.items():
        out[nm] = {names[m[0][0]]: c for m, c in p.sorted_terms() if len(m) == 1 and m[0][1] == 1}
    return out


def linear_part_key(f: AlgebraMorphism) -> tuple:
    lp = linear_part(f)
    return tuple(tuple(sorted(lp[nm].items())) for nm in f.source.names)


def _generator_order(m1: SullivanPresentation) -> list[str]:
    """Base generators, then vertices in DFS order with each edge as soon as both ends are placed."""
    g = m1.graph
    order = list(BASE)
    placed: set = set()
    pending = list(g.edges)
    seen: set = set()
    stack = [g.vertices[0]]
    vorder = []
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        vorder.append(v)
        stack += [w for w in reversed(g.out_nbrs[v] + g.in_nbrs[v]) if w not in seen]
    vorder += [v for v in g.vertices if v not in seen]
    for v in vorder:
        order.append(vertex_name(v))
        placed.add(v)
        rest = []
        for e in pending:
            if e[0] in placed and e[1] in placed:
                order.append(edge_name(*e))
            else:
                rest.append(e)
        pending = rest
    return order


@dataclass
class EnumerationStats:
    candidates: dict[str, int] = field(default_factory=dict)
    nodes: int = 0
    coeff_set: tuple[Fraction, ...] = DEFAULT_COEFFS


def enumerate_morphisms_constrained(
    m1: SullivanPresentation,
    m2: SullivanPresentation,
    coeff_set: Iterable = DEFAULT_COEFFS,
    budget: int = DEFAULT_MORPHISM_BUDGET,
    stats: EnumerationStats | None = None,
) -> list[AlgebraMorphism]:
    """All morphisms whose generator images are coeff_set-combinations of degree-basis monomials.

    Equivalent to filtering the full product of candidate images by
    f(dg) = d(f(g)); candidates are grouped by their differential so each
    generator is looked up once its differential's generators are assigned.
    """
    if m1.n != m2.n:
        raise ValueError("presentations use different n")
    coeffs = tuple(sorted({Fraction(c) for c in coeff_set}))
    stats = stats if stats is not None else EnumerationStats()
    stats.coeff_set = coeffs
    alg2 = m2.algebra
    tables: dict[int, dict[frozenset, list[GradedPoly]]] = {}
    spent = 0

    def table_for(deg: int) -> dict[frozenset, list[GradedPoly]]:
        nonlocal spent
        if deg in tables:
            return tables[deg]
        basis = basis_at_degree(m2, deg)
        size = len(coeffs) ** len(basis)
        spent += size
        if spent > budget:
            raise SearchBudgetExceeded("candidate image table", budget)
        tab: dict[frozenset, list[GradedPoly]] = {}
        for combo in itertools.product(coeffs, repeat=len(basis)):
            p = linear_combination(alg2, combo, basis)
            tab.setdefault(m2.d(p).key(), []).append(p)
        tables[deg] = tab
        return tab

    order = _generator_order(m1)
    for nm in order:
        stats.candidates[nm] = sum(len(v) for v in table_for(m1.degree(nm)).values())

    images: dict[str, GradedPoly] = {}
    partial = AlgebraMorphism.__new__(AlgebraMorphism)
    partial.source, partial.target = m1, m2
    partial._pow = {}
    idx1 = m1.algebra.index
    by_index: list[GradedPoly] = [alg2.zero()] * len(m1.names)
    partial._by_index = by_index
    results: list[AlgebraMorphism] = []

    def rec(k: int) -> None:
        if k == len(order):
            results.append(AlgebraMorphism(m1, m2, dict(images)))
            return
        nm = order[k]
        i = idx1(nm)
        required = partial.apply(m1.d_of(nm))
        for cand in table_for(m1.degree(nm)).get(required.key(), ()):
            stats.nodes += 1
            if stats.nodes > budget:
                raise SearchBudgetExceeded("morphism enumeration", budget)
            images[nm] = cand
            by_index[i] = cand
            stale = [key for key in partial._pow if key[0] == i]
            for key in stale:
                del partial._pow[key]
            rec(k + 1)
        images.pop(nm, None)
        by_index[i] = alg2.zero()
        for key in [key for key in partial._pow if key[0] == i]:
            del partial._pow[key]

    rec(0)
    results.sort(key=AlgebraMorphism.key)
    return results


def presentation_from_json(data: Mapping, graph: Digraph) -> SullivanPresentation:
    """Rebuild a presentation emitted by ``to_json`` (graph supplied separately)."""
    gens = data["generators"]
    alg = GradedAlgebra(tuple(g["name"] for g in gens), tuple(int(g["degree"]) for g in gens))
    origins = []
    for g in gens:
        o = g.get("origin", {"kind": "base", "data": []})
        origins.append(Origin(o["kind"], tuple(o["data"])))
    d = {alg.index(nm): GradedPoly.from_json(alg, terms) for nm, terms in data["differential"].items()}
    return SullivanPresentation(int(data["n"]), graph, alg, tuple(origins), d, pure=bool(data.get("pure", False)))


def morphism_from_sigma_list(m1: SullivanPresentation, m2: SullivanPresentation, sigmas: Sequence[Mapping]) -> list[AlgebraMorphism]:
    return [induced_algebra_morphism(s, m1, m2) for s in sigmas]
