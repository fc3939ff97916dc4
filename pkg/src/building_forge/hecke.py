"""The orbit algebra of bi-invariant kernels, via intersection numbers.

With K the stabilizer of the base vertex x0 and G the universal group, the
double cosets of K in G correspond to G-orbits on ordered vertex pairs; for
a vertex-transitive G those are classified by the K-orbit of the second
coordinate after translating the first to x0.  The color-preserving
transports certify vertex transitivity of U(F) for every F (their local
permutations are all trivial), so the identification applies throughout.

Counting with the normalization mu(K) = 1 makes the convolution of orbit
indicators integer valued:

    N[i][j][k] = #{ y : (x, y) in O_i and (y, z) in O_j }

for any fixed pair (x, z) in O_k; independence of the representative is
re-verified at a second representative whenever one exists.  Budgets are
hard: a convolution either is computed exactly or refuses (OutOfBudget),
never silently truncated.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .group import LocalGroup, OrbitTable, orbit_table
from .tree import Word, reduce_word

FORMAT_VERSION = 1


class NotVertexTransitive(ValueError):
    """The pair-orbit model needs a vertex-transitive group action."""


class OutOfBudget(ValueError):
    """A requested entry or convolution exceeds the computed radius budget."""


@dataclass(frozen=True)
class PairOrbit:
    """A G-orbit on ordered vertex pairs, anchored at the base vertex."""

    id: int
    representative: Word
    valency: int
    distance: int


def _certify_vertex_transitive(F: LocalGroup) -> None:
    # the color-preserving transports lie in U(F) iff the identity does;
    # closures always contain it, so this cannot fail for a LocalGroup
    from .perms import identity

    if identity(F.degree) not in F:
        raise NotVertexTransitive(
            "U(F) is not certified vertex-transitive: identity not in F"
        )


def _transport(y: Word, z: Word) -> Word:
    """The word of z after the color-preserving move taking y to the base."""
    return reduce_word(tuple(reversed(y)), z)


def pair_orbits(F: LocalGroup, radius: int) -> list[PairOrbit]:
    """G-orbits on pairs at distance <= radius, sorted by (distance, rep)."""
    _certify_vertex_transitive(F)
    table = orbit_table(F, radius)
    return [
        PairOrbit(cls.id, cls.representative, cls.size, cls.distance)
        for cls in table.classes
    ]


class StructureConstants:
    """The intersection-number tensor of the orbit algebra, exact and sparse.

    Entries are computed for every (i, j) with distance(i) + distance(j)
    within the radius budget and stored sparsely; lookups outside the budget
    raise OutOfBudget rather than guessing.  Each entry count is independent
    of the others, and the assembled object is immutable and freely
    shareable.
    """

    def __init__(self, F: LocalGroup, radius: int):
        _certify_vertex_transitive(F)
        self.F = F
        self.radius_budget = radius
        self.table: OrbitTable = orbit_table(F, radius)
        self.orbits: list[PairOrbit] = [
            PairOrbit(c.id, c.representative, c.size, c.distance)
            for c in self.table.classes
        ]
        self._members = {c.id: sorted(c.members) for c in self.table.classes}
        self._tensor: dict[tuple[int, int, int], int] = {}
        self._by_pair: dict[tuple[int, int], list[tuple[int, int]]] = {}
        self._build()

    # -- construction -------------------------------------------------------
    def _count_at(self, i: int, j: int, z: Word) -> int:
        d_j = self.orbits[j].distance
        lookup = self.table.class_of
        count = 0
        for y in self._members[i]:
            t = _transport(y, z)
            if len(t) == d_j and lookup(t) == j:
                count += 1
        return count

    def _build(self):
        orbits = self.orbits
        R = self.radius_budget
        for i in orbits:
            for j in orbits:
                if i.distance + j.distance > R:
                    continue
                lo = abs(i.distance - j.distance)
                hi = min(R, i.distance + j.distance)
                for k in orbits:
                    if not (lo <= k.distance <= hi):
                        continue
                    n = self._count_at(i.id, j.id, k.representative)
                    members = self._members[k.id]
                    if len(members) > 1:
                        other = members[1] if members[0] == k.representative else members[0]
                        if self._count_at(i.id, j.id, other) != n:
                            raise RuntimeError(
                                "intersection number depends on the representative; "
                                "orbit table is inconsistent"
                            )
                    if n:
                        self._tensor[(i.id, j.id, k.id)] = n
                        self._by_pair.setdefault((i.id, j.id), []).append((k.id, n))

    # -- queries -------------------------------------------------------------
    def in_budget(self, i: int, j: int) -> bool:
        return self.orbits[i].distance + self.orbits[j].distance <= self.radius_budget

    def n(self, i: int, j: int, k: int) -> int:
        if not self.in_budget(i, j):
            raise OutOfBudget(
                f"entry ({i},{j},{k}) needs radius "
                f"{self.orbits[i].distance + self.orbits[j].distance} > {self.radius_budget}"
            )
        return self._tensor.get((i, j, k), 0)

    def products_of(self, i: int, j: int) -> list[tuple[int, int]]:
        if not self.in_budget(i, j):
            raise OutOfBudget(f"pair ({i},{j}) exceeds the radius budget")
        return list(self._by_pair.get((i, j), ()))

    def valency(self, i: int) -> int:
        return self.orbits[i].valency

    def distance(self, i: int) -> int:
        return self.orbits[i].distance

    def class_of_word(self, w: Word) -> int:
        try:
            return self.table.class_of(w)
        except KeyError:
            raise OutOfBudget(f"word at distance {len(w)} exceeds radius budget")

    def transpose(self, i: int) -> int:
        return self.class_of_word(tuple(reversed(self.orbits[i].representative)))

    def entries(self) -> list[tuple[int, int, int, int]]:
        return sorted((i, j, k, n) for (i, j, k), n in self._tensor.items())


def intersection_numbers(F: LocalGroup, radius: int) -> StructureConstants:
    return StructureConstants(F, radius)


@dataclass(frozen=True)
class KernelFunction:
    """A finitely supported kernel: exact rational coefficients per orbit."""

    coefficients: tuple[tuple[int, Fraction], ...]
    support_radius: int

    @classmethod
    def from_dict(cls, coeffs: dict[int, Fraction], sc: StructureConstants):
        clean = {i: Fraction(c) for i, c in coeffs.items() if c}
        radius = max((sc.distance(i) for i in clean), default=0)
        return cls(tuple(sorted(clean.items())), radius)

    @classmethod
    def unit(cls, sc: StructureConstants):
        return cls.from_dict({0: Fraction(1)}, sc)

    @classmethod
    def indicator(cls, sc: StructureConstants, orbit_id: int):
        return cls.from_dict({orbit_id: Fraction(1)}, sc)

    def coefficient(self, orbit_id: int) -> Fraction:
        for i, c in self.coefficients:
            if i == orbit_id:
                return c
        return Fraction(0)

    def __eq__(self, other) -> bool:
        return isinstance(other, KernelFunction) and self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)


def convolve(phi: KernelFunction, psi: KernelFunction, sc: StructureConstants) -> KernelFunction:
    """(phi * psi)(k) = sum_ij phi(i) psi(j) N[i][j][k]; exact or refused."""
    if phi.support_radius + psi.support_radius > sc.radius_budget:
        raise OutOfBudget(
            f"support radii {phi.support_radius}+{psi.support_radius} exceed "
            f"budget {sc.radius_budget}"
        )
    out: dict[int, Fraction] = {}
    for i, ci in phi.coefficients:
        for j, cj in psi.coefficients:
            for k, n in sc.products_of(i, j):
                out[k] = out.get(k, Fraction(0)) + ci * cj * n
    return KernelFunction.from_dict(out, sc)


@dataclass(frozen=True)
class HeckeVerdict:
    """Commutativity verdict, certified up to the computed radius."""

    radius: int
    commutative: bool
    witness: tuple[int, int, int, int, int] | None = None  # (i, j, k, n_ij, n_ji)

    def describe(self) -> str:
        if self.commutative:
            return f"commutative_up_to_{self.radius}"
        i, j, k, nij, nji = self.witness
        return f"noncommutative(i={i},j={j},k={k},N_ij^k={nij},N_ji^k={nji})"


def commutativity_of(sc: StructureConstants) -> HeckeVerdict:
    orbits = sc.orbits
    for i in orbits:
        for j in orbits:
            if j.id <= i.id or not sc.in_budget(i.id, j.id):
                continue
            for k in orbits:
                nij = sc._tensor.get((i.id, j.id, k.id), 0)
                nji = sc._tensor.get((j.id, i.id, k.id), 0)
                if nij != nji:
                    return HeckeVerdict(
                        sc.radius_budget, False, (i.id, j.id, k.id, nij, nji)
                    )
    return HeckeVerdict(sc.radius_budget, True)


def commutativity_report(F: LocalGroup, radius: int) -> HeckeVerdict:
    """Scan all in-budget triples; first asymmetry wins, else commutative."""
    if radius < 2:
        raise ValueError("commutativity scans need radius >= 2")
    return commutativity_of(intersection_numbers(F, radius))
