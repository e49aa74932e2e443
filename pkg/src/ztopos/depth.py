"""Depth functions and finite-index stabilizer subgroups of Z^inf.

The ambient group is the free abelian group of finitely-supported integer
sequences.  A depth function d names the finite-index sublattice
dZ = prod_i d(i)Z.  Subgroups H with dZ <= H <= Z^inf are described by a
base depth function together with generators of H/dZ inside the finite
quotient A_d = prod_i Z/d(i)Z.  Everything here is exact integer
arithmetic; all values are immutable and hashable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import gcd


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@dataclass(frozen=True, order=True)
class DepthFn:
    """Finitely-supported map coordinate -> depth, canonical (no stored 1s)."""

    items: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        coords = [i for i, _ in self.items]
        assert coords == sorted(coords) and len(set(coords)) == len(coords), self.items
        for i, v in self.items:
            assert i >= 0 and v >= 2, (i, v)

    @classmethod
    def of(cls, mapping=None, **kw) -> "DepthFn":
        entries = dict(mapping or {})
        entries.update({int(k): v for k, v in kw.items()})
        return cls(tuple(sorted((int(i), int(v)) for i, v in entries.items() if int(v) != 1)))

    def get(self, i: int) -> int:
        for j, v in self.items:
            if j == i:
                return v
        return 1

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.items)

    def is_trivial(self) -> bool:
        return not self.items

    def ambient_size(self) -> int:
        n = 1
        for _, v in self.items:
            n *= v
        return n

    def restrict_below(self, k: int) -> "DepthFn":
        """Forget all coordinates >= k."""
        return DepthFn(tuple((i, v) for i, v in self.items if i < k))

    def to_json(self) -> dict:
        return {str(i): v for i, v in self.items}

    @classmethod
    def from_json(cls, obj) -> "DepthFn":
        return cls.of({int(k): int(v) for k, v in obj.items()})

    def __str__(self):
        if not self.items:
            return "{}"
        return "{" + ", ".join(f"{i}:{v}" for i, v in self.items) + "}"


TRIVIAL_DEPTH = DepthFn()


def depth_meet(d1: DepthFn, d2: DepthFn) -> DepthFn:
    """Pointwise lcm: the depth function of the lattice d1Z intersect d2Z."""
    coords = sorted(set(d1.support) | set(d2.support))
    return DepthFn.of({i: _lcm(d1.get(i), d2.get(i)) for i in coords})


def depth_meet_all(ds) -> DepthFn:
    out = TRIVIAL_DEPTH
    for d in ds:
        out = depth_meet(out, d)
    return out


def depth_divides(d1: DepthFn, d2: DepthFn) -> bool:
    """True iff d2(i) | d1(i) everywhere, i.e. d1Z <= d2Z."""
    return all(d1.get(i) % v == 0 for i, v in d2.items)


def delta_depth(n: int, i: int) -> DepthFn:
    """Depth n concentrated at coordinate i; trivial when n = 1."""
    assert n >= 1, n
    return DepthFn.of({i: n}) if n >= 2 else TRIVIAL_DEPTH


@dataclass(frozen=True, order=True)
class ResidueVector:
    """Finitely-supported residue tuple; zero residues are never stored.

    Only meaningful relative to a DepthFn giving the modulus per
    coordinate; `reduce_vector` produces the canonical representative.
    """

    items: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        coords = [i for i, _ in self.items]
        assert coords == sorted(coords) and len(set(coords)) == len(coords), self.items
        assert all(v != 0 for _, v in self.items), self.items

    @classmethod
    def of(cls, mapping=None, **kw) -> "ResidueVector":
        entries = dict(mapping or {})
        entries.update({int(k): v for k, v in kw.items()})
        return cls(tuple(sorted((int(i), int(v)) for i, v in entries.items() if int(v) != 0)))

    def get(self, i: int) -> int:
        for j, v in self.items:
            if j == i:
                return v
        return 0

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.items)

    def is_zero(self) -> bool:
        return not self.items

    def key(self, d: DepthFn) -> tuple:
        """Total order on A_d used to pick canonical coset representatives."""
        return tuple(self.get(i) for i in d.support)

    def restrict_below(self, k: int) -> "ResidueVector":
        return ResidueVector(tuple((i, v) for i, v in self.items if i < k))

    def to_json(self) -> dict:
        return {str(i): v for i, v in self.items}

    @classmethod
    def from_json(cls, obj) -> "ResidueVector":
        return cls.of({int(k): int(v) for k, v in obj.items()})

    def __str__(self):
        if not self.items:
            return "0"
        return "(" + ", ".join(f"{i}:{v}" for i, v in self.items) + ")"


ZERO_VECTOR = ResidueVector()


def reduce_vector(v: ResidueVector, d: DepthFn) -> ResidueVector:
    """Reduce an integer vector modulo dZ; coordinates of depth 1 vanish."""
    return ResidueVector.of({i: r % d.get(i) for i, r in v.items})


def vector_add(*vs: ResidueVector) -> ResidueVector:
    acc: dict[int, int] = {}
    for v in vs:
        for i, r in v.items:
            acc[i] = acc.get(i, 0) + r
    return ResidueVector.of(acc)


def vector_neg(v: ResidueVector) -> ResidueVector:
    return ResidueVector(tuple((i, -r) for i, r in v.items))


def unit_vector(i: int, k: int = 1) -> ResidueVector:
    return ResidueVector.of({i: k})


def ambient_elements(d: DepthFn) -> list[ResidueVector]:
    """All of A_d = prod Z/d(i)Z in lexicographic order."""
    assert d.ambient_size() <= 10**6, f"ambient group too large: {d}"
    coords = d.support
    out = []
    for combo in itertools.product(*(range(d.get(i)) for i in coords)):
        out.append(ResidueVector.of(dict(zip(coords, combo))))
    return out


@lru_cache(maxsize=None)
def _span(base: DepthFn, generators: tuple[ResidueVector, ...]) -> frozenset[ResidueVector]:
    """Subgroup of A_base generated by `generators` (closure under addition)."""
    elems = {ZERO_VECTOR}
    frontier = [ZERO_VECTOR]
    while frontier:
        nxt = []
        for a in frontier:
            for g in generators:
                b = reduce_vector(vector_add(a, g), base)
                if b not in elems:
                    elems.add(b)
                    nxt.append(b)
        frontier = nxt
    return frozenset(elems)


@dataclass(frozen=True)
class StabilizerSpec:
    """Subgroup H of Z^inf with baseZ <= H, as base + generators of H/baseZ."""

    base: DepthFn = TRIVIAL_DEPTH
    generators: tuple[ResidueVector, ...] = ()

    def __post_init__(self):
        for g in self.generators:
            assert g == reduce_vector(g, self.base), f"generator {g} not reduced mod {self.base}"

    @classmethod
    def of(cls, base: DepthFn, generators=()) -> "StabilizerSpec":
        gens = tuple(sorted(set(reduce_vector(g, base) for g in generators) - {ZERO_VECTOR}))
        return cls(base, gens)

    def span(self) -> frozenset[ResidueVector]:
        return _span(self.base, self.generators)

    def is_product_form(self) -> bool:
        """True when H is itself a product lattice d'Z (after canonicalization)."""
        return not self.canonical().generators

    def to_json(self) -> dict:
        return {"base": self.base.to_json(), "generators": [g.to_json() for g in self.generators]}

    @classmethod
    def from_json(cls, obj) -> "StabilizerSpec":
        return cls.of(
            DepthFn.from_json(obj.get("base", {})),
            [ResidueVector.from_json(g) for g in obj.get("generators", [])],
        )

    def canonical(self) -> "StabilizerSpec":
        return _canonical_spec(self)

    def canonical_key(self) -> tuple:
        c = _canonical_spec(self)
        return (c.base, tuple(sorted(c.span())))

    def __str__(self):
        if not self.generators:
            return f"{self.base}Z"
        return f"<{self.base}Z, {', '.join(map(str, self.generators))}>"


@lru_cache(maxsize=None)
def _canonical_spec(spec: StabilizerSpec) -> StabilizerSpec:
    """Shrink the base to the largest product lattice inside H.

    For each coordinate the multiples k with k*e_i in H form a subgroup
    k0*Z of Z; the canonical base records k0.  Equal subgroups of Z^inf
    then get literally equal specs, so subgroup equality is map equality.
    """
    sub = spec.span()
    new_base = {}
    for i, v in spec.base.items:
        k0 = v
        for k in range(1, v):
            if v % k == 0 and reduce_vector(unit_vector(i, k), spec.base) in sub:
                k0 = k
                break
        if k0 != 1:
            new_base[i] = k0
    base = DepthFn.of(new_base)
    reduced = sorted(set(reduce_vector(g, base) for g in sub) - {ZERO_VECTOR})
    # greedy minimal-ish generating set, deterministic
    gens: list[ResidueVector] = []
    for g in reduced:
        if g not in _span(base, tuple(gens)):
            gens.append(g)
    out = StabilizerSpec(base, tuple(sorted(gens)))
    assert _span(base, out.generators) == frozenset(reduce_vector(h, base) for h in sub)
    return out


def subgroup_contains(spec: StabilizerSpec, v: ResidueVector) -> bool:
    """Membership of v (reduced mod spec.base) in H/baseZ, by enumeration."""
    return reduce_vector(v, spec.base) in spec.span()


def subgroup_index(spec: StabilizerSpec) -> int:
    """[A_base : H/baseZ]; the size of the coset space Z^inf/H."""
    n = spec.base.ambient_size()
    k = len(spec.span())
    assert n % k == 0, (n, k)
    return n // k


def stabilizes(spec: StabilizerSpec, g: ResidueVector) -> bool:
    """Does the integer vector g lie in H?  (g need not be reduced.)"""
    return subgroup_contains(spec, g)


def lattice_in_subgroup(d: DepthFn, spec: StabilizerSpec) -> bool:
    """Is dZ <= H?  Checked on the lattice generators d(i)*e_i."""
    coords = set(d.support) | set(spec.base.support)
    return all(subgroup_contains(spec, unit_vector(i, d.get(i))) for i in coords)


@dataclass(frozen=True)
class SearchBounds:
    """Finite box for every quantifier search: support size, coordinate
    range, depth values and orbit counts."""

    max_support: int = 1
    max_coord: int = 1
    max_depth: int = 2
    max_orbits: int = 1

    def __post_init__(self):
        assert self.max_support >= 1 and self.max_coord >= 1, self
        assert self.max_depth >= 1 and self.max_orbits >= 1, self

    def to_json(self) -> dict:
        return {
            "max_support": self.max_support,
            "max_coord": self.max_coord,
            "max_depth": self.max_depth,
            "max_orbits": self.max_orbits,
        }

    @classmethod
    def from_json(cls, obj) -> "SearchBounds":
        return cls(
            int(obj["max_support"]),
            int(obj["max_coord"]),
            int(obj["max_depth"]),
            int(obj["max_orbits"]),
        )
