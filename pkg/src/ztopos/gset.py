"""Finite continuous actions of Z^inf and their equivariant maps.

Objects are finite coproducts of coset spaces Z^inf/H for finite-index
subgroups H of bounded depth; each connected piece is stored as a
StabilizerSpec plus a distinguished basepoint (the coset of 0).  Because
the group is abelian, the stabilizer is constant along an orbit and a
map of connected objects is determined by the image of the basepoint,
which gives every morphism a unique normal form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from .depth import (
    DepthFn,
    ResidueVector,
    SearchBounds,
    StabilizerSpec,
    TRIVIAL_DEPTH,
    ZERO_VECTOR,
    depth_meet,
    depth_meet_all,
    ambient_elements,
    reduce_vector,
    subgroup_contains,
    subgroup_index,
    unit_vector,
    vector_add,
)


@lru_cache(maxsize=None)
def _coset_table(spec: StabilizerSpec) -> dict[ResidueVector, ResidueVector]:
    """Map every element of A_base to the canonical (minimal) coset rep."""
    base = spec.base
    span = sorted(spec.span())
    table = {}
    for v in ambient_elements(base):
        if v in table:
            continue
        coset = [reduce_vector(vector_add(v, h), base) for h in span]
        rep = min(coset, key=lambda w: w.key(base))
        for w in coset:
            table[w] = rep
    return table


@dataclass(frozen=True)
class TransitiveZSet:
    """One orbit: the coset space of Z^inf by the subgroup in `spec`."""

    spec: StabilizerSpec

    @property
    def base(self) -> DepthFn:
        return self.spec.base

    def size(self) -> int:
        return subgroup_index(self.spec)

    def carrier(self) -> tuple[ResidueVector, ...]:
        return _carrier(self.spec)

    def rep_of(self, v: ResidueVector) -> ResidueVector:
        """Canonical representative of the coset of v (v need not be reduced)."""
        return _coset_table(self.spec)[reduce_vector(v, self.base)]

    def basepoint_rep(self) -> ResidueVector:
        return self.rep_of(ZERO_VECTOR)


@lru_cache(maxsize=None)
def _carrier(spec: StabilizerSpec) -> tuple[ResidueVector, ...]:
    reps = sorted(set(_coset_table(spec).values()), key=lambda w: w.key(spec.base))
    assert len(reps) == subgroup_index(spec)
    return tuple(reps)


@dataclass(frozen=True, order=True)
class Element:
    orbit_label: str
    rep: ResidueVector

    def to_json(self) -> dict:
        return {"orbit": self.orbit_label, "rep": self.rep.to_json()}


@dataclass(frozen=True)
class ZSet:
    """Finite coproduct of orbits, with caller-visible labels."""

    orbits: tuple[tuple[str, TransitiveZSet], ...] = ()

    def __post_init__(self):
        labels = [lab for lab, _ in self.orbits]
        assert len(labels) == len(set(labels)), f"duplicate orbit labels: {labels}"

    @classmethod
    def of(cls, *pairs) -> "ZSet":
        out = []
        for lab, orb in pairs:
            if isinstance(orb, StabilizerSpec):
                orb = TransitiveZSet(orb)
            elif isinstance(orb, DepthFn):
                orb = TransitiveZSet(StabilizerSpec(orb))
            out.append((lab, orb))
        return cls(tuple(out))

    @classmethod
    def connected(cls, base: DepthFn, generators=(), label: str = "o0") -> "ZSet":
        return cls.of((label, StabilizerSpec.of(base, generators)))

    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.orbits)

    def orbit(self, label: str) -> TransitiveZSet:
        for lab, orb in self.orbits:
            if lab == label:
                return orb
        raise KeyError(label)

    def is_empty(self) -> bool:
        return not self.orbits

    def size(self) -> int:
        return sum(orb.size() for _, orb in self.orbits)

    def elements(self) -> list[Element]:
        out = []
        for lab, orb in self.orbits:
            out.extend(Element(lab, r) for r in orb.carrier())
        return out

    def ambient_base(self) -> DepthFn:
        return depth_meet_all(orb.base for _, orb in self.orbits)

    def iso_key(self) -> tuple:
        return tuple(sorted((orb.size(), orb.spec.canonical_key()) for _, orb in self.orbits))

    def is_isomorphic(self, other: "ZSet") -> bool:
        return self.iso_key() == other.iso_key()

    def relabel(self, mapping: dict[str, str]) -> "ZSet":
        return ZSet(tuple((mapping.get(lab, lab), orb) for lab, orb in self.orbits))

    def sub(self, labels) -> "ZSet":
        labels = set(labels)
        return ZSet(tuple((lab, orb) for lab, orb in self.orbits if lab in labels))

    def to_json(self) -> dict:
        return {"orbits": [{"label": lab, "stab": orb.spec.to_json()} for lab, orb in self.orbits]}

    @classmethod
    def from_json(cls, obj) -> "ZSet":
        return cls.of(
            *((o["label"], StabilizerSpec.from_json(o["stab"])) for o in obj["orbits"])
        )

    def __str__(self):
        if not self.orbits:
            return "0"
        return " + ".join(f"{lab}:Z/{orb.spec}" for lab, orb in self.orbits)


EMPTY = ZSet()


def terminal() -> ZSet:
    return ZSet.of(("*", TRIVIAL_DEPTH))


def initial() -> ZSet:
    return EMPTY


def pi0(X: ZSet) -> list[str]:
    """Connected components; one label per orbit."""
    return list(X.labels())


def act(g: ResidueVector, x: Element, X: ZSet) -> Element:
    """Translation action of the integer vector g."""
    return Element(x.orbit_label, X.orbit(x.orbit_label).rep_of(vector_add(g, x.rep)))


def point_stabilized_by(target_spec: StabilizerSpec, g: ResidueVector) -> bool:
    # abelian, so the stabilizer of every point in the orbit is H itself
    return subgroup_contains(target_spec, g)


def _stab_contains_stab(src: StabilizerSpec, tgt: StabilizerSpec) -> bool:
    """H_src <= H_tgt, checked on base lattice generators plus generators."""
    coords = set(src.base.support) | set(tgt.base.support)
    for i in coords:
        if not subgroup_contains(tgt, unit_vector(i, src.base.get(i))):
            return False
    return all(subgroup_contains(tgt, g) for g in src.generators)


def hom_assignments(X: TransitiveZSet, Y: ZSet) -> list[tuple[str, ResidueVector]]:
    """All equivariant maps out of the connected X, as basepoint images.

    A candidate image y is valid exactly when the stabilizer of the X
    basepoint is contained in the stabilizer of y.
    """
    out = []
    for lab, orb in Y.orbits:
        if _stab_contains_stab(X.spec, orb.spec):
            out.extend((lab, r) for r in orb.carrier())
    return out


@dataclass(frozen=True)
class EqMap:
    """Equivariant map, stored as basepoint images per source orbit."""

    source: ZSet
    target: ZSet
    assignment: tuple[tuple[str, tuple[str, ResidueVector]], ...]

    @classmethod
    def of(cls, source: ZSet, target: ZSet, assignment: dict, check: bool = True) -> "EqMap":
        norm = []
        for lab, _ in source.orbits:
            tlab, rep = assignment[lab]
            rep = target.orbit(tlab).rep_of(rep)
            norm.append((lab, (tlab, rep)))
        m = cls(source, target, tuple(norm))
        if check:
            m.check_well_defined()
        return m

    def check_well_defined(self):
        for lab, (tlab, rep) in self.assignment:
            src = self.source.orbit(lab).spec
            tgt = self.target.orbit(tlab).spec
            if not _stab_contains_stab(src, tgt):
                raise ValueError(
                    f"not equivariant: orbit {lab} (stab {src}) cannot map into "
                    f"orbit {tlab} (stab {tgt})"
                )

    def assigned(self) -> dict[str, tuple[str, ResidueVector]]:
        return dict(self.assignment)

    def apply(self, x: Element) -> Element:
        tlab, rep = self.assigned()[x.orbit_label]
        return Element(tlab, self.target.orbit(tlab).rep_of(vector_add(x.rep, rep)))

    def image_labels(self) -> set[str]:
        return {tlab for _, (tlab, _) in self.assignment}

    def compose(self, other: "EqMap") -> "EqMap":
        """self after other (other: A -> B, self: B -> C)."""
        assert other.target == self.source, "composition mismatch"
        assignment = {}
        for lab, _ in other.source.orbits:
            mid = other.assigned()[lab]
            y = self.apply(Element(mid[0], mid[1]))
            assignment[lab] = (y.orbit_label, y.rep)
        return EqMap.of(other.source, self.target, assignment, check=False)

    @classmethod
    def identity(cls, X: ZSet) -> "EqMap":
        return cls.of(X, X, {lab: (lab, orb.basepoint_rep()) for lab, orb in X.orbits}, check=False)

    def to_json(self) -> dict:
        return {
            "assignment": {
                lab: {"target": tlab, "image": rep.to_json()}
                for lab, (tlab, rep) in self.assignment
            }
        }

    @classmethod
    def from_json(cls, source: ZSet, target: ZSet, obj) -> "EqMap":
        return cls.of(
            source,
            target,
            {
                lab: (spec["target"], ResidueVector.from_json(spec["image"]))
                for lab, spec in obj["assignment"].items()
            },
        )

    def __str__(self):
        parts = ", ".join(f"{a}->{t}@{r}" for a, (t, r) in self.assignment)
        return f"[{parts}]"


def bang(X: ZSet) -> EqMap:
    one = terminal()
    return EqMap.of(X, one, {lab: ("*", ZERO_VECTOR) for lab, _ in X.orbits}, check=False)


def is_epi(f: EqMap) -> bool:
    """Epi iff surjective on components; orbit maps are automatically onto."""
    return f.image_labels() == set(f.target.labels())


def is_mono(f: EqMap) -> bool:
    """Injective on carriers: orbit-wise size match plus disjoint images."""
    hit = []
    for lab, (tlab, _) in f.assignment:
        if f.source.orbit(lab).size() != f.target.orbit(tlab).size():
            return False
        hit.append(tlab)
    return len(hit) == len(set(hit))


def is_surjective_on_carrier(f: EqMap) -> bool:
    """Brute-force surjectivity; exists to cross-check is_epi."""
    image = {f.apply(x) for x in f.source.elements()}
    return image == set(f.target.elements())


def eqmaps(X: ZSet, Y: ZSet) -> list[EqMap]:
    """Every equivariant map X -> Y, in deterministic order."""
    per_orbit = []
    for lab, orb in X.orbits:
        choices = hom_assignments(orb, Y)
        if not choices:
            return []
        per_orbit.append([(lab, c) for c in choices])
    out = []
    for combo in itertools.product(*per_orbit):
        out.append(EqMap.of(X, Y, dict(combo), check=False))
    return out


def coproduct(X: ZSet, Y: ZSet) -> tuple[ZSet, EqMap, EqMap]:
    """Disjoint union; labels kept when possible, disjointified otherwise."""
    used = set(X.labels())
    ren = {}
    for lab in Y.labels():
        new = lab
        k = 2
        while new in used:
            new = f"{lab}_{k}"
            k += 1
        ren[lab] = new
        used.add(new)
    Y2 = Y.relabel(ren)
    Z = ZSet(X.orbits + Y2.orbits)
    inj1 = EqMap.of(X, Z, {lab: (lab, orb.basepoint_rep()) for lab, orb in X.orbits}, check=False)
    inj2 = EqMap.of(
        Y, Z, {lab: (ren[lab], orb.basepoint_rep()) for lab, orb in Y.orbits}, check=False
    )
    return Z, inj1, inj2


def coproduct_all(parts: list[ZSet]) -> ZSet:
    out = EMPTY
    for p in parts:
        out, _, _ = coproduct(out, p)
    return out


@dataclass(frozen=True)
class PullbackResult:
    obj: ZSet
    proj1: EqMap
    proj2: EqMap
    pair_of: tuple[tuple[Element, tuple[Element, Element]], ...]

    def pairs(self) -> dict[Element, tuple[Element, Element]]:
        return dict(self.pair_of)

    def element_of(self) -> dict[tuple[Element, Element], Element]:
        return {pair: el for el, pair in self.pair_of}

    def mediate(self, u: EqMap, v: EqMap) -> EqMap:
        """Unique map W -> obj with proj1 . m = u and proj2 . m = v."""
        W = u.source
        assert v.source == W
        lookup = self.element_of()
        assignment = {}
        for lab, orb in W.orbits:
            w0 = Element(lab, orb.basepoint_rep())
            target = lookup[(u.apply(w0), v.apply(w0))]
            assignment[lab] = (target.orbit_label, target.rep)
        return EqMap.of(W, self.obj, assignment)


def pullback(f: EqMap, g: EqMap, use_lcm_shortcut: bool = True) -> PullbackResult:
    """Fibered product of f: X -> S and g: Y -> S with the diagonal action.

    Pairs are decomposed into orbits blockwise; for product-form blocks
    the stabilizer is written down directly as the pointwise lcm of the
    two bases, otherwise it is computed by enumeration.
    """
    assert f.target == g.target, "pullback needs a common codomain"
    X, Y = f.source, g.source
    orbits: list[tuple[str, TransitiveZSet]] = []
    assignment1 = {}
    assignment2 = {}
    pair_of = []
    for alab, aorb in X.orbits:
        for blab, borb in Y.orbits:
            m = depth_meet(aorb.base, borb.base)
            pairs = [
                (x, y)
                for x in (Element(alab, r) for r in aorb.carrier())
                for y in (Element(blab, r) for r in borb.carrier())
                if f.apply(x) == g.apply(y)
            ]
            remaining = sorted(pairs, key=lambda p: (p[0].rep.key(aorb.base), p[1].rep.key(borb.base)))
            gens = [unit_vector(i) for i in m.support]
            k = 0
            seen: set[tuple[Element, Element]] = set()
            for root in remaining:
                if root in seen:
                    continue
                orbit_pairs = {root}
                frontier = [root]
                while frontier:
                    nxt = []
                    for (x, y) in frontier:
                        for e in gens:
                            moved = (act(e, x, X), act(e, y, Y))
                            if moved not in orbit_pairs:
                                orbit_pairs.add(moved)
                                nxt.append(moved)
                    frontier = nxt
                seen |= orbit_pairs
                if use_lcm_shortcut and not aorb.spec.generators and not borb.spec.generators:
                    spec = StabilizerSpec(m)
                else:
                    stab = [
                        v
                        for v in ambient_elements(m)
                        if act(v, root[0], X) == root[0] and act(v, root[1], Y) == root[1]
                    ]
                    spec = StabilizerSpec.of(m, stab).canonical()
                orb = TransitiveZSet(spec)
                assert orb.size() == len(orbit_pairs), (spec, len(orbit_pairs))
                label = f"{alab}*{blab}" if k == 0 else f"{alab}*{blab}.{k}"
                k += 1
                orbits.append((label, orb))
                assignment1[label] = (alab, root[0].rep)
                assignment2[label] = (blab, root[1].rep)
                for r in orb.carrier():
                    pair_of.append(
                        (Element(label, r), (act(r, root[0], X), act(r, root[1], Y)))
                    )
    P = ZSet(tuple(orbits))
    return PullbackResult(
        P,
        EqMap.of(P, X, assignment1),
        EqMap.of(P, Y, assignment2),
        tuple(pair_of),
    )


def product(X: ZSet, Y: ZSet) -> PullbackResult:
    return pullback(bang(X), bang(Y))


def equalizer(f: EqMap, g: EqMap) -> tuple[ZSet, EqMap]:
    """Orbits of the common source where f and g agree (they agree on an
    orbit iff they agree at its basepoint)."""
    assert f.source == g.source and f.target == g.target
    labels = [lab for lab, _ in f.assignment if f.assigned()[lab] == g.assigned()[lab]]
    E = f.source.sub(labels)
    inc = EqMap.of(E, f.source, {lab: (lab, orb.basepoint_rep()) for lab, orb in E.orbits})
    return E, inc


def canonical_cover(X: ZSet) -> EqMap:
    """Product-form cover: replace each orbit's stabilizer by its base lattice."""
    src = ZSet(tuple((lab, TransitiveZSet(StabilizerSpec(orb.base))) for lab, orb in X.orbits))
    return EqMap.of(src, X, {lab: (lab, orb.basepoint_rep()) for lab, orb in X.orbits})


def eqmap_from_function(X: ZSet, Y: ZSet, fn) -> EqMap | None:
    """Package a carrier-level function as an EqMap if it is equivariant.

    Returns None when fn is not equivariant (checked exhaustively against
    the basepoint-determined map).
    """
    assignment = {}
    for lab, orb in X.orbits:
        y = fn(Element(lab, orb.basepoint_rep()))
        assignment[lab] = (y.orbit_label, y.rep)
    try:
        m = EqMap.of(X, Y, assignment)
    except ValueError:
        return None
    for x in X.elements():
        if m.apply(x) != fn(x):
            return None
    return m


def within_bounds(X: ZSet, b: SearchBounds) -> bool:
    if len(X.orbits) > b.max_orbits:
        return False
    for _, orb in X.orbits:
        d = orb.base
        if len(d.support) > b.max_support:
            return False
        if any(i >= b.max_coord for i in d.support):
            return False
        if any(v > b.max_depth for _, v in d.items):
            return False
    return True
