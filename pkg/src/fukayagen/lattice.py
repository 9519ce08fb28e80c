"""Charge lattice K₀ presented by arcs modulo signed face relations."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import gcd, lcm, prod
from typing import Any, Iterable, Sequence

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors, smith_normal_form

from fukayagen.errors import InvalidInputError, PreconditionError
from fukayagen.gentle import Products, is_proper, is_smooth
from fukayagen.surface import GradedRibbonGraph, validate
from fukayagen.twcx import TwistedComplex, hom_cohomology, single


@dataclass(frozen=True)
class ClassVector:
    generators: tuple[str, ...]
    coords: tuple[int, ...]

    def __add__(self, other: "ClassVector") -> "ClassVector":
        _same_generators(self, other)
        return ClassVector(self.generators, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "ClassVector":
        return ClassVector(self.generators, tuple(-a for a in self.coords))

    def __sub__(self, other: "ClassVector") -> "ClassVector":
        return self + (-other)

    def as_dict(self) -> dict[str, int]:
        return {g: c for g, c in zip(self.generators, self.coords) if c}


def _same_generators(a: ClassVector, b: ClassVector) -> None:
    if a.generators != b.generators:
        raise InvalidInputError("class vectors over different generator sets")


@dataclass(frozen=True, eq=False)
class ChargeLattice:
    generators: tuple[str, ...]
    relations: tuple[tuple[int, ...], ...]
    faces: tuple[str, ...] = field(default=())

    @cached_property
    def relation_matrix(self) -> Matrix:
        if not self.relations:
            return Matrix.zeros(0, len(self.generators))
        return Matrix(self.relations)

    @cached_property
    def smith_form(self) -> Matrix:
        m = self.relation_matrix
        if m.rows == 0 or m.cols == 0:
            return m
        return smith_normal_form(m, domain=ZZ)

    @property
    def rank(self) -> int:
        return len(self.generators) - self.relation_matrix.rank()

    def torsion(self) -> list[int]:
        """Invariant factors greater than one."""
        m = self.relation_matrix
        if m.rows == 0:
            return []
        return [int(abs(f)) for f in invariant_factors(m, domain=ZZ) if abs(f) > 1]

    def zero(self) -> ClassVector:
        return ClassVector(self.generators, (0,) * len(self.generators))

    def vector(self, counts: dict[str, int]) -> ClassVector:
        unknown = set(counts) - set(self.generators)
        if unknown:
            raise InvalidInputError(f"arcs {sorted(unknown)} are not generators of this lattice")
        return ClassVector(self.generators, tuple(int(counts.get(g, 0)) for g in self.generators))


def face_relation(g: GradedRibbonGraph, v: str) -> dict[str, int]:
    """±X_1 ± ... ± X_n = 0 for the polygon v.

    Walk the sides in cyclic order; the running sign flips after every corner
    of even degree.
    """
    coeffs: dict[str, int] = {}
    sign = 1
    for h in g.vertices[v]:
        arc = g.edge_of(h)
        coeffs[arc] = coeffs.get(arc, 0) + sign
        if g.degree(h) % 2 == 0:
            sign = -sign
    return {arc: c for arc, c in coeffs.items() if c}


def k0(g: GradedRibbonGraph) -> ChargeLattice:
    report = validate(g)
    if not report.ok:
        raise InvalidInputError(f"invalid ribbon graph: {report.issues[0]}")
    generators = tuple(g.arcs)
    rows = []
    faces = []
    for v, order in g.vertices.items():
        if any(g.is_boundary(g.edge_of(h)) for h in order):
            continue
        rel = face_relation(g, v)
        rows.append(tuple(rel.get(a, 0) for a in generators))
        faces.append(v)
    return ChargeLattice(generators, tuple(rows), tuple(faces))


def _arc_shifts(obj: Any) -> Iterable[tuple[str, int]]:
    if isinstance(obj, TwistedComplex):
        return [(s.arc, s.shift) for s in obj.summands]
    if hasattr(obj, "arc_shifts"):
        return obj.arc_shifts()
    raise InvalidInputError(f"no class for {type(obj).__name__}")


def class_of(lattice: ChargeLattice, obj: Any) -> ClassVector:
    """Signed count of summands: (-1)^shift per copy of each arc."""
    counts: dict[str, int] = {}
    for arc, shift in _arc_shifts(obj):
        counts[arc] = counts.get(arc, 0) + (-1 if shift % 2 else 1)
    return lattice.vector(counts)


def _index(m: Matrix) -> int:
    """Product of the non-zero invariant factors: the covolume of the row lattice."""
    return prod(int(abs(f)) for f in invariant_factors(m, domain=ZZ) if f)


def equivalent(lattice: ChargeLattice, a: ClassVector, b: ClassVector) -> bool:
    """a = b modulo the face relations, over ℤ.

    a - b lies in the integer row span iff adding it as a row keeps the rank
    and the product of the non-zero invariant factors.
    """
    _same_generators(a, b)
    diff = Matrix([[x - y for x, y in zip(a.coords, b.coords)]])
    m = lattice.relation_matrix
    if m.rows == 0:
        return all(x == 0 for x in diff)
    joined = m.col_join(diff)
    return joined.rank() == m.rank() and _index(joined) == _index(m)


def euler_form(lattice: ChargeLattice, category: Products) -> Matrix:
    """χ(X, Y) = ∑ (-1)^k dim H^k Hom(X, Y) on the generators."""
    p = category.p
    if not is_proper(p):
        raise PreconditionError("Euler form needs a proper presentation")
    if not is_smooth(p):
        raise PreconditionError("Euler form needs a smooth presentation")
    missing = set(lattice.generators) - set(p.vertices)
    if missing:
        raise InvalidInputError(f"generators {sorted(missing)} are not objects of the presentation")
    objects = {arc: single(category, arc) for arc in lattice.generators}
    n = len(lattice.generators)
    chi = Matrix.zeros(n, n)
    for i, x in enumerate(lattice.generators):
        for j, y in enumerate(lattice.generators):
            dims = hom_cohomology(objects[x], objects[y])
            chi[i, j] = sum((-1 if k % 2 else 1) * d for k, d in dims.items())
    return chi


def pairing(chi: Matrix, a: ClassVector, b: ClassVector) -> int:
    return int((Matrix([a.coords]) * chi * Matrix(b.coords))[0, 0])


def radical(chi: Matrix) -> list[tuple[int, ...]]:
    """Integer basis of the kernel of χ + χᵀ."""
    basis = []
    for v in (chi + chi.T).nullspace():
        denom = lcm(*(int(x.q) for x in v))
        w = [int(x * denom) for x in v]
        g = gcd(*w)
        basis.append(tuple(x // g for x in w) if g else tuple(w))
    return basis


def in_span(vectors: Sequence[Sequence[int]], v: Sequence[int]) -> bool:
    if not vectors:
        return all(x == 0 for x in v)
    m = Matrix(vectors)
    return m.col_join(Matrix([list(v)])).rank() == m.rank()
