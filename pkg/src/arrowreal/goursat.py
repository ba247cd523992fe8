"""Goursat data for a subgroup H of G1 x G2, and the generating sets built from it."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .errors import InternalInconsistency, NotASubgroup
from .groups import (
    CosetDecomposition,
    ElementSubset,
    FiniteGroup,
    as_subgroup,
    direct_product,
    greedy_generators,
    is_subgroup,
    right_cosets,
    subgroup_closure,
)

THETA = "theta"
MIN_LABELS = 2


@dataclass(frozen=True, eq=False)
class GoursatDecomposition:
    g1: FiniteGroup
    g2: FiniteGroup
    product: FiniteGroup
    h: ElementSubset
    pi1_h: ElementSubset
    pi2_h: ElementSubset
    iota1_h: ElementSubset
    iota2_h: ElementSubset
    q1_cosets: CosetDecomposition  # iota1_h inside pi1_h
    q2_cosets: CosetDecomposition  # iota2_h inside pi2_h
    theta: tuple[int, ...]  # q1 class index -> q2 class index

    @property
    def theta_inverse(self) -> tuple[int, ...]:
        inv = [0] * len(self.theta)
        for c, d in enumerate(self.theta):
            inv[d] = c
        return tuple(inv)

    def q1_mul(self, a: int, b: int) -> int:
        reps = self.q1_cosets.reps
        return self.q1_cosets.class_of[self.g1.table[reps[a]][reps[b]]]

    def q2_mul(self, a: int, b: int) -> int:
        reps = self.q2_cosets.reps
        return self.q2_cosets.class_of[self.g2.table[reps[a]][reps[b]]]

    def reconstruct(self) -> frozenset[int]:
        """H rebuilt as {(a, b) in pi1 x pi2 : theta[a] = [b]}."""
        out = set()
        for a in self.pi1_h:
            for b in self.pi2_h:
                if self.theta[self.q1_cosets.class_of[a]] == self.q2_cosets.class_of[b]:
                    out.add(self.product.pair(a, b))
        return frozenset(out)

    def to_json(self) -> dict:
        def cosets(c: CosetDecomposition) -> list[list[int]]:
            return [list(c.coset(k)) for k in range(len(c))]

        return {
            "g1": self.g1.name,
            "g2": self.g2.name,
            "h": [list(self.product.unpair(x)) for x in self.h],
            "pi1_h": list(self.pi1_h),
            "pi2_h": list(self.pi2_h),
            "iota1_h": list(self.iota1_h),
            "iota2_h": list(self.iota2_h),
            "q1_reps": list(self.q1_cosets.reps),
            "q2_reps": list(self.q2_cosets.reps),
            "q1_classes": cosets(self.q1_cosets),
            "q2_classes": cosets(self.q2_cosets),
            "theta": list(self.theta),
        }


class Factorization(NamedTuple):
    k: int
    j: int


@dataclass(frozen=True, eq=False)
class GeneratingData:
    """Labelled generating sets R of G1 and S of G2.

    ``J1[j]`` is the coset representative r_j of iota1^{-1}(H) in G1 and
    ``J2[j]`` the representative s_j of pi2(H) in G2 (``J*[0]`` is the
    identity). ``I_iota1`` / ``I_pi2`` hold (label, element) pairs for the
    generators of iota1^{-1}(H) / pi2(H), identity padding included.
    """

    decomposition: GoursatDecomposition
    J1: tuple[int, ...]
    J2: tuple[int, ...]
    I_iota1: tuple[tuple[str, int], ...]
    I_pi2: tuple[tuple[str, int], ...]
    J1_labels: tuple[str, ...]  # label of r_j for j in J1*, aligned with J1[1:]
    J2_labels: tuple[str, ...]
    J_pi1: tuple[int, ...]
    cosets1: CosetDecomposition  # iota1_h in G1
    cosets2: CosetDecomposition  # pi2_h in G2
    theta_label: str = THETA

    @property
    def g1(self) -> FiniteGroup:
        return self.decomposition.g1

    @property
    def g2(self) -> FiniteGroup:
        return self.decomposition.g2

    @property
    def I1(self) -> tuple[tuple[str, int], ...]:
        return tuple(zip(self.J1_labels, self.J1[1:])) + self.I_iota1

    @property
    def I2(self) -> tuple[tuple[str, int], ...]:
        return tuple(zip(self.J2_labels, self.J2[1:])) + self.I_pi2

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(l for l, _ in self.I1) + tuple(l for l, _ in self.I2) + (self.theta_label,)

    def label_of_j1(self, j: int) -> str:
        return self.J1_labels[j - 1]

    def factor(self, side: int, g: int) -> Factorization:
        return factor(self, side, g)

    def to_json(self) -> dict:
        return {
            "J1": list(self.J1),
            "J2": list(self.J2),
            "I1": [[l, x] for l, x in self.I1],
            "I2": [[l, x] for l, x in self.I2],
            "I_iota1": [[l, x] for l, x in self.I_iota1],
            "I_pi2": [[l, x] for l, x in self.I_pi2],
            "J_pi1": list(self.J_pi1),
            "theta_label": self.theta_label,
        }


def goursat_decompose(g1: FiniteGroup, g2: FiniteGroup, h: ElementSubset, product: FiniteGroup | None = None) -> GoursatDecomposition:
    prod = product if product is not None else (h.parent if h.parent.factors else direct_product(g1, g2))
    if prod.factors is None or prod.order != g1.order * g2.order:
        raise ValueError("h must live in the direct product of g1 and g2")
    if not is_subgroup(prod, h):
        raise NotASubgroup("h is not a subgroup of g1 x g2")
    h = as_subgroup(prod, h)
    pairs = [prod.unpair(x) for x in h]
    pi1 = as_subgroup(g1, {a for a, _ in pairs})
    pi2 = as_subgroup(g2, {b for _, b in pairs})
    iota1 = as_subgroup(g1, {a for a, b in pairs if b == g2.identity})
    iota2 = as_subgroup(g2, {b for a, b in pairs if a == g1.identity})
    q1 = right_cosets(g1, iota1, within=pi1)
    q2 = right_cosets(g2, iota2, within=pi2)

    theta: list[int | None] = [None] * len(q1)
    for a, b in pairs:
        c, d = q1.class_of[a], q2.class_of[b]
        if theta[c] is None:
            theta[c] = d
        elif theta[c] != d:
            raise InternalInconsistency(f"theta not well defined on class {c}")
    if any(t is None for t in theta) or sorted(theta) != list(range(len(q2))):  # type: ignore[type-var]
        raise InternalInconsistency("theta is not a bijection of quotient classes")

    d = GoursatDecomposition(g1, g2, prod, h, pi1, pi2, iota1, iota2, q1, q2, tuple(theta))  # type: ignore[arg-type]
    for a in range(len(q1)):
        for b in range(len(q1)):
            if d.theta[d.q1_mul(a, b)] != d.q2_mul(d.theta[a], d.theta[b]):
                raise InternalInconsistency("theta does not respect quotient multiplication")
    if d.reconstruct() != h.as_set():
        raise InternalInconsistency("H is not recovered from its Goursat data")
    return d


def _labelled(prefix: str, start: int, elems: list[int]) -> tuple[tuple[str, int], ...]:
    return tuple((f"{prefix}{start + t}", x) for t, x in enumerate(elems))


def generating_data(d: GoursatDecomposition) -> GeneratingData:
    g1, g2 = d.g1, d.g2
    cosets1 = right_cosets(g1, d.iota1_h)
    cosets2 = right_cosets(g2, d.pi2_h)
    J1, J2 = cosets1.reps, cosets2.reps

    # |I1| >= 2 and |I2| >= 2 keeps every relational vertex at degree >= 4
    gens1 = greedy_generators(g1, d.iota1_h)
    gens1 += [g1.identity] * max(0, MIN_LABELS - (len(J1) - 1) - len(gens1))
    gens2 = greedy_generators(g2, d.pi2_h)
    gens2 += [g2.identity] * max(0, MIN_LABELS - (len(J2) - 1) - len(gens2))

    gd = GeneratingData(
        decomposition=d,
        J1=J1,
        J2=J2,
        I_iota1=_labelled("r", len(J1), gens1),
        I_pi2=_labelled("s", len(J2), gens2),
        J1_labels=tuple(f"r{j}" for j in range(1, len(J1))),
        J2_labels=tuple(f"s{j}" for j in range(1, len(J2))),
        J_pi1=tuple(j for j, r in enumerate(J1) if r in d.pi1_h),
        cosets1=cosets1,
        cosets2=cosets2,
    )
    if len(subgroup_closure(g1, [x for _, x in gd.I1])) != g1.order:
        raise InternalInconsistency("R does not generate G1")
    if len(subgroup_closure(g2, [x for _, x in gd.I2])) != g2.order:
        raise InternalInconsistency("S does not generate G2")
    return gd


def factor(gd: GeneratingData, side: int, g: int) -> Factorization:
    """Unique (k, j) with g = k * r_j (side 1) or g = k * s_j (side 2)."""
    if side == 1:
        grp, cos = gd.g1, gd.cosets1
    elif side == 2:
        grp, cos = gd.g2, gd.cosets2
    else:
        raise ValueError("side must be 1 or 2")
    if not 0 <= g < grp.order:
        raise IndexError(f"element {g} out of range")
    j = cos.class_of[g]
    k = grp.table[g][grp.inverse[cos.reps[j]]]
    return Factorization(k, j)


def factorization_violations(gd: GeneratingData, limit: int = 10) -> list[str]:
    """Check g = k r_j with k in the right subgroup, and the product rules

        j(g g') = j(r_j(g) g'),   k(g g') = k(g) k(r_j(g) g')

    for every element and every pair, on both sides.
    """
    bad: list[str] = []
    for side, grp, cos, reps in ((1, gd.g1, gd.cosets1, gd.J1), (2, gd.g2, gd.cosets2, gd.J2)):
        sub = cos.subgroup
        fac = [factor(gd, side, g) for g in grp]
        for g, (k, j) in enumerate(fac):
            if k not in sub or grp.table[k][reps[j]] != g:
                bad.append(f"side {side}: {g} != k*r_j with (k, j) = ({k}, {j})")
        for g in grp:
            kg, jg = fac[g]
            for h in grp:
                kgh, jgh = fac[grp.table[g][h]]
                kr, jr = fac[grp.table[reps[jg]][h]]
                if jgh != jr or kgh != grp.table[kg][kr]:
                    bad.append(f"side {side}: product rule fails for ({g}, {h})")
                    if len(bad) >= limit:
                        return bad
    return bad
