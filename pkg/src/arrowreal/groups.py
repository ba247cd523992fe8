"""Finite groups given by multiplication tables.

Elements are the integers ``0..order-1``; ``table[g][h]`` is the product
``g*h``. Everything downstream (cosets, Cayley diagrams, automorphism
groups) works on these indices, so lookups stay cheap for the small orders
this package targets.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter, deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import NotAGroup, NotASubgroup, SearchBudgetExceeded

MAX_ORDER = 1 << 16
DEFAULT_BUDGET = 1_000_000


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    table: tuple[tuple[int, ...], ...]
    identity: int
    inverse: tuple[int, ...]
    name: str = ""
    factors: tuple["FiniteGroup", "FiniteGroup"] | None = field(default=None, repr=False)

    @property
    def order(self) -> int:
        return len(self.table)

    def __len__(self) -> int:
        return len(self.table)

    def __iter__(self) -> Iterator[int]:
        return iter(range(len(self.table)))

    def mul(self, g: int, h: int) -> int:
        return self.table[g][h]

    def inv(self, g: int) -> int:
        return self.inverse[g]

    def product(self, elems: Iterable[int]) -> int:
        out = self.identity
        for g in elems:
            out = self.table[out][g]
        return out

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != self.identity:
            x = self.table[x][g]
            k += 1
        return k

    def order_profile(self) -> Counter:
        return Counter(self.element_order(g) for g in self)

    # pairing for direct products: (a, b) <-> a*|G2| + b
    def pair(self, a: int, b: int) -> int:
        if self.factors is None:
            raise TypeError(f"{self.name or 'group'} is not a direct product")
        return a * self.factors[1].order + b

    def unpair(self, x: int) -> tuple[int, int]:
        if self.factors is None:
            raise TypeError(f"{self.name or 'group'} is not a direct product")
        return divmod(x, self.factors[1].order)

    def to_json(self) -> dict:
        return {"order": self.order, "table": [list(r) for r in self.table], "name": self.name}


@dataclass(frozen=True, eq=False)
class ElementSubset:
    parent: FiniteGroup
    members: tuple[int, ...]
    is_subgroup: bool = False

    def __post_init__(self):
        object.__setattr__(self, "_set", frozenset(self.members))

    def __contains__(self, g: int) -> bool:
        return g in self._set  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def as_set(self) -> frozenset[int]:
        return self._set  # type: ignore[attr-defined]

    def same_elements(self, other: "ElementSubset") -> bool:
        return self.as_set() == other.as_set()


@dataclass(frozen=True, eq=False)
class CosetDecomposition:
    """Right cosets ``sub * r`` of a subgroup.

    ``class_of[g]`` is the position in ``reps`` of the coset containing ``g``,
    or -1 when ``g`` lies outside the ambient set the cosets were taken in.
    """

    subgroup: ElementSubset
    reps: tuple[int, ...]
    class_of: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.reps)

    def coset(self, c: int) -> tuple[int, ...]:
        return tuple(g for g, k in enumerate(self.class_of) if k == c)

    def rep_of(self, g: int) -> int:
        return self.reps[self.class_of[g]]


# -- construction -------------------------------------------------------------


def build_group(table: Sequence[Sequence[int]], name: str = "") -> FiniteGroup:
    n = len(table)
    if n == 0:
        raise NotAGroup("empty table")
    if n > MAX_ORDER:
        raise OverflowError(f"order {n} exceeds supported maximum {MAX_ORDER}")
    rows = tuple(tuple(int(x) for x in row) for row in table)
    full = frozenset(range(n))
    for g, row in enumerate(rows):
        if len(row) != n:
            raise NotAGroup(f"row {g} has length {len(row)}, expected {n}")
        if frozenset(row) != full:
            raise NotAGroup(f"row {g} is not a permutation of 0..{n - 1}")
    for h in range(n):
        if frozenset(rows[g][h] for g in range(n)) != full:
            raise NotAGroup(f"column {h} is not a permutation of 0..{n - 1}")

    identity = None
    for e in range(n):
        if all(rows[e][g] == g and rows[g][e] == g for g in range(n)):
            identity = e
            break
    if identity is None:
        raise NotAGroup("no identity element")

    for g, h, k in itertools.product(range(n), repeat=3):
        if rows[rows[g][h]][k] != rows[g][rows[h][k]]:
            raise NotAGroup(f"associativity fails for triple ({g}, {h}, {k})")

    inverse = tuple(rows[g].index(identity) for g in range(n))
    return FiniteGroup(rows, identity, inverse, name)


def direct_product(g1: FiniteGroup, g2: FiniteGroup) -> FiniteGroup:
    """Componentwise product; element ``(a, b)`` has index ``a*|G2| + b``."""
    n1, n2 = g1.order, g2.order
    if n1 * n2 > MAX_ORDER:
        raise OverflowError(f"product order {n1 * n2} exceeds supported maximum {MAX_ORDER}")
    pairs = [divmod(x, n2) for x in range(n1 * n2)]
    table = [[g1.table[a][c] * n2 + g2.table[b][d] for c, d in pairs] for a, b in pairs]
    g = build_group(table, name=f"{g1.name}x{g2.name}")
    return FiniteGroup(g.table, g.identity, g.inverse, g.name, factors=(g1, g2))


def subset(g: FiniteGroup, elems: Iterable[int]) -> ElementSubset:
    members = tuple(sorted(set(elems)))
    for x in members:
        if not 0 <= x < g.order:
            raise IndexError(f"element {x} out of range for group of order {g.order}")
    return ElementSubset(g, members, False)


def is_subgroup(g: FiniteGroup, elems: Iterable[int]) -> bool:
    s = set(elems)
    if g.identity not in s:
        return False
    return all(g.table[a][b] in s for a in s for b in s) and all(g.inverse[a] in s for a in s)


def as_subgroup(g: FiniteGroup, elems: Iterable[int]) -> ElementSubset:
    members = tuple(sorted(set(elems)))
    for x in members:
        if not 0 <= x < g.order:
            raise IndexError(f"element {x} out of range for group of order {g.order}")
    if not is_subgroup(g, members):
        raise NotASubgroup(f"{list(members)} is not a subgroup of {g.name or 'the group'}")
    return ElementSubset(g, members, True)


def subgroup_closure(g: FiniteGroup, generators: Iterable[int]) -> ElementSubset:
    gens = list(generators)
    for x in gens:
        if not 0 <= x < g.order:
            raise IndexError(f"generator {x} out of range for group of order {g.order}")
    seen = {g.identity}
    queue = deque([g.identity])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = g.table[s][x]
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return ElementSubset(g, tuple(sorted(seen)), True)


def greedy_generators(g: FiniteGroup, sub: Iterable[int]) -> list[int]:
    """Repeatedly add the smallest element not yet in the closure."""
    target = sorted(set(sub))
    gens: list[int] = []
    closure = {g.identity}
    for x in target:
        if x not in closure:
            gens.append(x)
            closure = set(subgroup_closure(g, gens))
    return gens


def right_cosets(
    g: FiniteGroup, sub: ElementSubset, within: ElementSubset | None = None
) -> CosetDecomposition:
    """Right cosets ``sub*r`` of ``sub`` in ``g`` (or in the subgroup ``within``).

    The subgroup's own coset is represented by the identity; every other
    coset by its smallest element index.
    """
    if not sub.is_subgroup and not is_subgroup(g, sub):
        raise NotASubgroup("right_cosets needs a subgroup")
    ambient = range(g.order) if within is None else within.members
    if within is not None and not sub.as_set() <= within.as_set():
        raise NotASubgroup("subgroup is not contained in the ambient subgroup")
    class_of = [-1] * g.order
    reps = [g.identity]
    for h in sub:
        class_of[h] = 0
    for x in sorted(ambient):
        if class_of[x] != -1:
            continue
        c = len(reps)
        reps.append(x)
        for h in sub:
            class_of[g.table[h][x]] = c
    return CosetDecomposition(sub, tuple(reps), tuple(class_of))


def subgroup_as_group(sub: ElementSubset, name: str = "") -> tuple[FiniteGroup, tuple[int, ...]]:
    """Relabel a subgroup as a standalone group; also return the embedding."""
    g = sub.parent
    members = sub.members
    pos = {x: i for i, x in enumerate(members)}
    try:
        table = [[pos[g.table[a][b]] for b in members] for a in members]
    except KeyError:
        raise NotASubgroup("subset is not closed under multiplication") from None
    return build_group(table, name=name), members


def group_from_permutations(perms: Iterable[Sequence[int]], name: str = "") -> tuple[FiniteGroup, list[tuple[int, ...]]]:
    """Group of permutations under composition ``(p*q)(x) = p[q[x]]``.

    Raises NotAGroup when the collection is not closed.
    """
    elems = sorted({tuple(p) for p in perms})
    if not elems:
        raise NotAGroup("no permutations")
    index = {p: i for i, p in enumerate(elems)}
    table = []
    for p in elems:
        row = []
        for q in elems:
            pq = tuple(p[x] for x in q)
            if pq not in index:
                raise NotAGroup("permutation set not closed under composition")
            row.append(index[pq])
        table.append(row)
    return build_group(table, name=name), elems


def enumerate_subgroups(g: FiniteGroup, max_gens: int = 2) -> list[ElementSubset]:
    """Subgroups generated by at most ``max_gens`` elements, deduplicated."""
    seen: dict[tuple[int, ...], ElementSubset] = {}
    for k in range(max_gens + 1):
        for gens in itertools.combinations(range(g.order), k):
            s = subgroup_closure(g, gens)
            seen.setdefault(s.members, s)
    return sorted(seen.values(), key=lambda s: (len(s), s.members))


# -- isomorphism --------------------------------------------------------------


def _words(g: FiniteGroup, gens: Sequence[int]) -> list[tuple[int, int, int]]:
    """BFS spanning tree: triples (x, s, y) with x = s*y, y reached earlier."""
    out = []
    seen = {g.identity}
    queue = deque([g.identity])
    while queue:
        y = queue.popleft()
        for s in gens:
            x = g.table[s][y]
            if x not in seen:
                seen.add(x)
                out.append((x, s, y))
                queue.append(x)
    return out


def _extend_hom(a: FiniteGroup, b: FiniteGroup, gens: Sequence[int], images: Sequence[int]) -> dict[int, int] | None:
    """Extend gens -> images to a homomorphism on <gens>, or None if impossible."""
    img = dict(zip(gens, images))
    f = {a.identity: b.identity}
    queue = deque([a.identity])
    while queue:
        y = queue.popleft()
        for s in gens:
            x = a.table[s][y]
            fx = b.table[img[s]][f[y]]
            if x in f:
                if f[x] != fx:
                    return None
            else:
                f[x] = fx
                queue.append(x)
    if len(set(f.values())) != len(f):
        return None
    return f


def isomorphism_search(a: FiniteGroup, b: FiniteGroup, budget: int = DEFAULT_BUDGET) -> tuple[int, ...] | None:
    """Return ``f`` with ``f[x*y] = f[x]*f[y]`` as a tuple indexed by ``a``'s elements, or None."""
    if a.order != b.order or a.order_profile() != b.order_profile():
        return None
    gens = greedy_generators(a, range(a.order))
    if not gens:
        return (b.identity,)
    orders_b: dict[int, list[int]] = {}
    for y in b:
        orders_b.setdefault(b.element_order(y), []).append(y)
    candidates = [orders_b.get(a.element_order(s), []) for s in gens]
    nodes = 0

    def rec(k: int, chosen: list[int]) -> dict[int, int] | None:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise SearchBudgetExceeded("group isomorphism search", budget)
        partial = _extend_hom(a, b, gens[:k], chosen)
        if partial is None:
            return None
        if k == len(gens):
            return partial if len(partial) == a.order else None
        for y in candidates[k]:
            found = rec(k + 1, chosen + [y])
            if found is not None:
                return found
        return None

    f = rec(0, [])
    if f is None:
        return None
    return tuple(f[x] for x in range(a.order))


def is_isomorphism(a: FiniteGroup, b: FiniteGroup, f: Sequence[int]) -> bool:
    if len(f) != a.order or sorted(f) != list(range(b.order)):
        return False
    return all(f[a.table[x][y]] == b.table[f[x]][f[y]] for x in a for y in a)


# -- presets and I/O ----------------------------------------------------------


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError("cyclic group needs n >= 1")
    return build_group([[(i + j) % n for j in range(n)] for i in range(n)], name=f"Z{n}")


def klein4() -> FiniteGroup:
    return build_group([[i ^ j for j in range(4)] for i in range(4)], name="V4")


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of the regular n-gon, order 2n: index ``k`` is rotation r^k, ``n+k`` is s*r^k."""
    if n < 1:
        raise ValueError("dihedral group needs n >= 1")

    def mul(x: int, y: int) -> int:
        fx, kx = divmod(x, n)
        fy, ky = divmod(y, n)
        # s r^a s r^b = r^{-a} r^b
        k = (kx * (-1 if fy else 1) + ky) % n
        return ((fx + fy) % 2) * n + k

    return build_group([[mul(x, y) for y in range(2 * n)] for x in range(2 * n)], name=f"D{n}")


def symmetric(k: int) -> FiniteGroup:
    perms = list(itertools.permutations(range(k)))
    g, _ = group_from_permutations(perms, name=f"S{k}")
    return g


def parse_group(text: str) -> FiniteGroup:
    """Accept ``cyclic:n``, ``klein4``, ``dihedral:n``, ``sym:k`` or a JSON file path."""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind in ("cyclic", "z") and arg:
        return cyclic(int(arg))
    if kind in ("klein4", "v4"):
        return klein4()
    if kind in ("dihedral", "d") and arg:
        return dihedral(int(arg))
    if kind in ("sym", "symmetric", "s") and arg:
        return symmetric(int(arg))
    path = Path(text)
    if path.exists():
        return group_from_json(json.loads(path.read_text()))
    raise ValueError(f"unrecognised group spec {text!r}")


def group_from_json(data: dict) -> FiniteGroup:
    g = build_group(data["table"], name=data.get("name", ""))
    if "order" in data and data["order"] != g.order:
        raise NotAGroup(f"declared order {data['order']} does not match table size {g.order}")
    return g
