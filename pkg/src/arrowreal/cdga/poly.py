"""Free graded-commutative algebras over Q with exact Koszul-sign arithmetic.

A monomial is a tuple of (generator index, exponent) pairs sorted by index;
odd generators carry exponent 1. Products are renormalised eagerly, so the
sign of reordering odd factors is folded into the coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from ..errors import DegreeOverflow, MixedPresentation

INT64_MAX = (1 << 63) - 1

Monomial = tuple[tuple[int, int], ...]
ONE: Monomial = ()


def check_degree(d: int) -> int:
    if d > INT64_MAX or d < -INT64_MAX:
        raise DegreeOverflow(f"degree {d} does not fit in 64 bits")
    return d


@dataclass(frozen=True, eq=False)
class GradedAlgebra:
    """Generator names and degrees of a free graded-commutative algebra."""

    names: tuple[str, ...]
    degrees: tuple[int, ...]

    def __post_init__(self):
        if len(self.names) != len(self.degrees):
            raise ValueError("names and degrees differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate generator names")
        for nm, d in zip(self.names, self.degrees):
            check_degree(d)
            if d < 0:
                raise ValueError(f"generator {nm} has negative degree")
        object.__setattr__(self, "_index", {nm: i for i, nm in enumerate(self.names)})

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self._index[name]  # type: ignore[attr-defined]

    def is_odd(self, i: int) -> bool:
        return self.degrees[i] % 2 == 1

    def mono_degree(self, m: Monomial) -> int:
        return check_degree(sum(self.degrees[i] * e for i, e in m))

    def gen(self, name: str, coeff=1) -> "GradedPoly":
        return GradedPoly(self, {((self.index(name), 1),): Fraction(coeff)})

    def one(self, coeff=1) -> "GradedPoly":
        return GradedPoly(self, {ONE: Fraction(coeff)})

    def zero(self) -> "GradedPoly":
        return GradedPoly(self, {})

    def mono(self, exps: Mapping[str, int], coeff=1) -> "GradedPoly":
        p = self.one(coeff)
        for nm, e in exps.items():
            p = p * self.gen(nm) ** e
        return p

    def mono_str(self, m: Monomial) -> str:
        if not m:
            return "1"
        return "*".join(self.names[i] if e == 1 else f"{self.names[i]}^{e}" for i, e in m)


def mono_mul(alg: GradedAlgebra, a: Monomial, b: Monomial) -> tuple[int, Monomial]:
    """Product of two normalised monomials: (sign, monomial); sign 0 if an odd square appears."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    out: list[tuple[int, int]] = []
    sign = 1
    ia = ib = 0
    while ia < len(a) and ib < len(b):
        ga, ea = a[ia]
        gb, eb = b[ib]
        if ga < gb:
            out.append(a[ia])
            ia += 1
        elif gb < ga:
            # b's factor jumps over the remaining odd factors of a
            if alg.is_odd(gb):
                if sum(1 for i, _ in a[ia:] if alg.is_odd(i)) % 2:
                    sign = -sign
            out.append(b[ib])
            ib += 1
        else:
            if alg.is_odd(ga):
                return 0, ONE
            out.append((ga, ea + eb))
            ia += 1
            ib += 1
    out.extend(a[ia:])
    out.extend(b[ib:])
    return sign, tuple(out)


class GradedPoly:
    """Element of a free graded-commutative algebra with Fraction coefficients."""

    __slots__ = ("alg", "terms", "_hash")

    def __init__(self, alg: GradedAlgebra, terms: Mapping[Monomial, Fraction] | None = None):
        self.alg = alg
        self.terms: dict[Monomial, Fraction] = {m: Fraction(c) for m, c in (terms or {}).items() if c != 0}
        self._hash = None

    def _same(self, other: "GradedPoly") -> None:
        if other.alg is not self.alg:
            raise MixedPresentation("operands belong to different algebras")

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.terms == ({ONE: Fraction(other)} if other else {})
        if not isinstance(other, GradedPoly):
            return NotImplemented
        return self.alg is other.alg and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def key(self) -> frozenset:
        return frozenset(self.terms.items())

    def __add__(self, other: "GradedPoly") -> "GradedPoly":
        self._same(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return GradedPoly(self.alg, out)

    def __neg__(self) -> "GradedPoly":
        return GradedPoly(self.alg, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "GradedPoly") -> "GradedPoly":
        return self + (-other)

    def scale(self, c) -> "GradedPoly":
        c = Fraction(c)
        return GradedPoly(self.alg, {m: c * v for m, v in self.terms.items()} if c else {})

    def __mul__(self, other) -> "GradedPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._same(other)
        out: dict[Monomial, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                s, m = mono_mul(self.alg, ma, mb)
                if s:
                    v = out.get(m, 0) + s * ca * cb
                    if v:
                        out[m] = v
                    else:
                        out.pop(m, None)
        return GradedPoly(self.alg, out)

    __rmul__ = scale

    def __pow__(self, e: int) -> "GradedPoly":
        if e < 0:
            raise ValueError("negative exponent")
        result = self.alg.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def degrees(self) -> set[int]:
        return {self.alg.mono_degree(m) for m in self.terms}

    def degree(self) -> int | None:
        """Common degree of all terms; None for zero. Raises if inhomogeneous."""
        ds = self.degrees()
        if not ds:
            return None
        if len(ds) > 1:
            raise ValueError(f"polynomial is not homogeneous (degrees {sorted(ds)})")
        return ds.pop()

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def generators_used(self) -> set[int]:
        return {i for m in self.terms for i, _ in m}

    def coefficient(self, m: Monomial) -> Fraction:
        return self.terms.get(m, Fraction(0))

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self.terms.items(), key=lambda t: t[0])

    def __repr__(self) -> str:
        return f"GradedPoly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            mono = self.alg.mono_str(m)
            if mono == "1":
                body = str(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}*{mono}"
            parts.append(("- " if c < 0 else "+ ") + body)
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    def to_json(self) -> list[dict]:
        return [
            {"coeff": str(c), "mono": {self.alg.names[i]: e for i, e in m}}
            for m, c in self.sorted_terms()
        ]

    @classmethod
    def from_json(cls, alg: GradedAlgebra, data: Iterable[Mapping]) -> "GradedPoly":
        p = alg.zero()
        for t in data:
            p = p + alg.mono(t["mono"], Fraction(t["coeff"]))
        return p


def poly_add(p: GradedPoly, q: GradedPoly) -> GradedPoly:
    return p + q


def poly_multiply(p: GradedPoly, q: GradedPoly) -> GradedPoly:
    return p * q


def linear_combination(alg: GradedAlgebra, coeffs: Sequence, monos: Sequence[Monomial]) -> GradedPoly:
    return GradedPoly(alg, {m: Fraction(c) for c, m in zip(coeffs, monos) if c})


def derivation(alg: GradedAlgebra, d: Mapping[int, GradedPoly], p: GradedPoly) -> GradedPoly:
    """Extend generator values d[i] to p by the graded Leibniz rule.

    Generators missing from ``d`` are treated as cycles.
    """
    out = alg.zero()
    for m, c in p.terms.items():
        odd_before = 0
        for pos, (i, e) in enumerate(m):
            di = d.get(i)
            if di is not None and di:
                prefix = GradedPoly(alg, {m[:pos]: Fraction(1)})
                suffix = GradedPoly(alg, {m[pos + 1 :]: Fraction(1)})
                # d(g^e) = e g^(e-1) dg for even g; odd g has e = 1
                local = di if e == 1 else GradedPoly(alg, {((i, e - 1),): Fraction(e)}) * di
                sign = -1 if odd_before % 2 else 1
                out = out + (prefix * local * suffix).scale(sign * c)
            if alg.is_odd(i):
                odd_before += 1
    return out


def exponent_vectors(degrees: Sequence[int], target: int) -> Iterator[tuple[int, ...]]:
    """Non-negative integer vectors e with sum e_i * degrees[i] == target (positive degrees)."""
    n = len(degrees)
    if any(d <= 0 for d in degrees):
        raise ValueError("exponent enumeration needs positive degrees")
    cur = [0] * n

    def rec(k: int, rest: int) -> Iterator[tuple[int, ...]]:
        if k == n - 1:
            if rest % degrees[k] == 0:
                cur[k] = rest // degrees[k]
                yield tuple(cur)
            return
        for e in range(rest // degrees[k] + 1):
            cur[k] = e
            yield from rec(k + 1, rest - e * degrees[k])
        cur[k] = 0

    if n == 0:
        if target == 0:
            yield ()
        return
    yield from rec(0, target)


def monomials_of_degree(alg: GradedAlgebra, target: int, allowed: Iterable[int] | None = None) -> list[Monomial]:
    """Every monomial of total degree ``target`` (sorted), via odd subsets times even exponent vectors."""
    check_degree(target)
    if target < 0:
        return []
    pool = sorted(allowed) if allowed is not None else list(range(len(alg)))
    if any(alg.degrees[i] == 0 for i in pool):
        raise ValueError("degree-zero generators make the degree pieces infinite")
    odd = [i for i in pool if alg.is_odd(i)]
    even = [i for i in pool if not alg.is_odd(i)]
    even_deg = [alg.degrees[i] for i in even]
    out: list[Monomial] = []

    def odd_subsets(k: int, chosen: list[int], deg: int) -> Iterator[tuple[list[int], int]]:
        if k == len(odd):
            yield chosen, deg
            return
        yield from odd_subsets(k + 1, chosen, deg)
        d = alg.degrees[odd[k]]
        if deg + d <= target:
            yield from odd_subsets(k + 1, chosen + [odd[k]], deg + d)

    for chosen, deg in odd_subsets(0, [], 0):
        for vec in exponent_vectors(even_deg, target - deg):
            factors = [(i, 1) for i in chosen] + [(g, e) for g, e in zip(even, vec) if e]
            out.append(tuple(sorted(factors)))
    return sorted(out)
