"""S-graphs with exact central charges: hearts, HN filtrations and mutation.

An S-graph has one vertex per singularity and one edge per horizontal strip of
finite height. The half-edges at a vertex are ordered, cyclically or totally,
and every consecutive pair (a, b) carries d(a, b) >= 1. The graded quiver has
one vertex per edge and, per consecutive pair (a, b), an arrow
edge(b) -> edge(a) of degree d(a, b). Two arrows compose to zero when they
meet at different halves of the same edge. Every arrow has positive degree, so
the heart is the module category of the degree-one part and its simples are
the edges.

Charges are Gaussian rationals. Phases of objects in one heart are compared
with cross products only; no angle is ever computed on a decision path.

Mutation works inside the interval of hearts between the starting heart H and
H[1]. Crossing the wall at a simple e replaces e by e[1] (left) or e[-1]
(right), every edge whose end slides along e picks up the class of e, and the
charge of each simple is then read off a fixed reference charge Z0 on its
class, negated when Z0 of the class points into the lower half-plane. Every
heart in the interval therefore has its simples' charges back in the upper
half-plane.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, total_ordering
from multiprocessing import Pool
from typing import Any, Iterable, Iterator, Mapping, Sequence

import networkx as nx
import numpy as np
import pandas as pd
from sympy import Matrix

from fukayagen import linalg
from fukayagen.errors import (
    DegenerateChargeError,
    FormatError,
    InvalidInputError,
    PreconditionError,
    UnboundedError,
)
from fukayagen.gentle import Arrow, GentlePresentation, Products
from fukayagen.lattice import ChargeLattice, ClassVector
from fukayagen.linalg import Field
from fukayagen.strings import (
    BACKWARD,
    FORWARD,
    Connector,
    CurveWord,
    Letter,
    _junction_issue,
    validate_word,
    word_to_twcx,
)
from fukayagen.surface import Issue, ValidationReport
from fukayagen.twcx import hom_cohomology

logger = logging.getLogger(__name__)

FORMAT = "sgraph.v1"
ORDERS = ("cyclic", "total")
METRIC_TOLERANCE = 1e-12


# -- charges ---------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianRational:
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def parse(cls, value: Any) -> "GaussianRational":
        """``{"re": "p/q", "im": "r/s"}``, a ``[re, im]`` pair, or a real number."""
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, Mapping):
            return cls(Fraction(str(value.get("re", 0))), Fraction(str(value.get("im", 0))))
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return cls(Fraction(str(value[0])), Fraction(str(value[1])))
        return cls(Fraction(str(value)))

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other: "GaussianRational") -> "GaussianRational":
        return self + (-other)

    def __mul__(self, other: "GaussianRational | int | Fraction") -> "GaussianRational":
        if isinstance(other, GaussianRational):
            return GaussianRational(
                self.re * other.re - self.im * other.im, self.re * other.im + self.im * other.re
            )
        return GaussianRational(self.re * other, self.im * other)

    __rmul__ = __mul__

    def __bool__(self) -> bool:
        return bool(self.re or self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def cross(self, other: "GaussianRational") -> Fraction:
        """Positive iff ``other`` lies counterclockwise of ``self`` (within π)."""
        return self.re * other.im - self.im * other.re

    def dot(self, other: "GaussianRational") -> Fraction:
        return self.re * other.re + self.im * other.im

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def to_dict(self) -> dict[str, str]:
        return {"re": str(self.re), "im": str(self.im)}

    def __str__(self) -> str:
        sign = "-" if self.im < 0 else "+"
        return f"{self.re}{sign}{abs(self.im)}i"


def charge_sum(charges: Iterable[GaussianRational]) -> GaussianRational:
    total = GaussianRational()
    for z in charges:
        total = total + z
    return total


@total_ordering
@dataclass(frozen=True, eq=False)
class Phase:
    """shift + Arg(charge)/π, for charges inside one heart's half-plane."""

    shift: int
    charge: GaussianRational

    def __post_init__(self) -> None:
        if not self.charge:
            raise DegenerateChargeError("a phase needs a non-zero charge")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Phase):
            return NotImplemented
        return (
            self.shift == other.shift
            and self.charge.cross(other.charge) == 0
            and self.charge.dot(other.charge) > 0
        )

    def __lt__(self, other: "Phase") -> bool:
        if self.shift != other.shift:
            return self.shift < other.shift
        return self.charge.cross(other.charge) > 0

    __hash__ = None  # type: ignore[assignment]

    @property
    def value(self) -> float:
        """Float reading for reports; upper half-plane charges give (shift, shift + 1]."""
        return self.shift + math.atan2(float(self.charge.im), float(self.charge.re)) / math.pi

    def __str__(self) -> str:
        return f"{self.value:.6f}"


# -- S-graphs --------------------------------------------------------------------


@dataclass(frozen=True)
class SVertex:
    order: str
    halves: tuple[str, ...]
    d: tuple[int, ...] = ()

    def pairs(self) -> list[tuple[str, str, int]]:
        """Consecutive half-edge pairs with their strip counts."""
        n = len(self.halves)
        if self.order == "cyclic":
            return [(self.halves[i], self.halves[(i + 1) % n], self.d[i]) for i in range(n)]
        return [(self.halves[i], self.halves[i + 1], self.d[i]) for i in range(n - 1)]


@dataclass(frozen=True)
class SEdge:
    halves: tuple[str, str]
    charge: GaussianRational


@dataclass(frozen=True, eq=False)
class SGraph:
    vertices: Mapping[str, SVertex]
    edges: Mapping[str, SEdge]

    @cached_property
    def edge_of(self) -> dict[str, str]:
        return {h: e for e, x in self.edges.items() for h in x.halves}

    @cached_property
    def vertex_of(self) -> dict[str, str]:
        return {h: v for v, x in self.vertices.items() for h in x.halves}

    @cached_property
    def presentation(self) -> GentlePresentation:
        return sgraph_to_gentle(self)

    def charge(self, e: str) -> GaussianRational:
        try:
            return self.edges[e].charge
        except KeyError:
            raise InvalidInputError(f"unknown edge {e!r}") from None

    def pairs(self) -> list[tuple[str, str, str, int]]:
        return [(v, a, b, d) for v, x in self.vertices.items() for a, b, d in x.pairs()]

    def with_charges(self, charges: Mapping[str, GaussianRational]) -> "SGraph":
        edges = {
            e: SEdge(x.halves, GaussianRational.parse(charges.get(e, x.charge)))
            for e, x in self.edges.items()
        }
        return SGraph(dict(self.vertices), edges)


def _charge_issues(s: SGraph, upper: bool) -> list[Issue]:
    issues = []
    names = list(s.edges)
    for e in names:
        z = s.edges[e].charge
        if not z:
            issues.append(Issue(f"edges.{e}.Z", "central charge is zero"))
        elif upper and z.im <= 0:
            issues.append(Issue(f"edges.{e}.Z", f"{z} is not in the upper half-plane"))
    if issues:
        return issues
    for a, b in itertools.combinations(names, 2):
        if s.edges[a].charge.cross(s.edges[b].charge) == 0:
            issues.append(Issue(f"edges.{a}.Z", f"colinear with {b}: a wall of the first kind"))
    if not issues and names and _lowest(s) is None:
        issues.append(Issue("edges.Z", "charges do not lie in a common half-plane"))
    return issues


def validate_sgraph(s: SGraph, upper: bool = False) -> ValidationReport:
    """Structure and charge checks. ``upper`` also asks for the standard heart."""
    issues: list[Issue] = []
    seen: dict[str, str] = {}
    for v, x in s.vertices.items():
        where = f"vertices.{v}"
        if x.order not in ORDERS:
            issues.append(Issue(where, f"order must be cyclic or total, got {x.order!r}"))
            continue
        if not x.halves:
            issues.append(Issue(where, "a vertex needs at least one half-edge"))
        expected = len(x.halves) if x.order == "cyclic" else max(len(x.halves) - 1, 0)
        if len(x.d) != expected:
            issues.append(Issue(where, f"{len(x.d)} strip counts, expected {expected}"))
        if any(k < 1 for k in x.d):
            issues.append(Issue(where, "d(a, b) must be at least 1"))
        for h in x.halves:
            if h in seen:
                issues.append(Issue(where, f"half-edge {h!r} also sits at {seen[h]}"))
            seen[h] = v
    owners: dict[str, str] = {}
    for e, x in s.edges.items():
        where = f"edges.{e}"
        if len(x.halves) != 2 or x.halves[0] == x.halves[1]:
            issues.append(Issue(where, "an edge needs two distinct half-edges"))
        for h in x.halves:
            if h not in seen:
                issues.append(Issue(where, f"half-edge {h!r} sits at no vertex"))
            if h in owners and owners[h] != e:
                issues.append(Issue(where, f"half-edge {h!r} also belongs to {owners[h]}"))
            owners[h] = e
    for h, v in seen.items():
        if h not in owners:
            issues.append(Issue(f"vertices.{v}", f"half-edge {h!r} belongs to no edge"))
    if not issues:
        issues.extend(_charge_issues(s, upper))
    return ValidationReport(tuple(issues))


def _require_sgraph(report: ValidationReport) -> None:
    if report.ok:
        return
    if all(i.location.endswith(".Z") for i in report.issues):
        raise DegenerateChargeError(f"degenerate charges: {report.issues[0]}")
    raise InvalidInputError(f"invalid S-graph: {report.issues[0]}")


def _lowest(s: SGraph) -> str | None:
    for m, x in s.edges.items():
        if all(x.charge.cross(y.charge) > 0 for e, y in s.edges.items() if e != m):
            return m
    return None


def lowest_edge(s: SGraph) -> str:
    e = _lowest(s)
    if e is None:
        raise DegenerateChargeError("no simple has a strictly lowest phase")
    return e


def sgraph_to_gentle(s: SGraph) -> GentlePresentation:
    """Edges become objects; a consecutive pair (a, b) becomes edge(b) -> edge(a)."""
    report = validate_sgraph(s)
    if any(not i.location.endswith(".Z") for i in report.issues):
        _require_sgraph(report)
    arrows = [
        Arrow(f"{a}|{b}", s.edge_of[b], s.edge_of[a], d, start_half=b, end_half=a)
        for _, a, b, d in s.pairs()
    ]
    relations = frozenset(
        (x.name, y.name)
        for x in arrows
        for y in arrows
        if x.target == y.source and x.end_half != y.start_half
    )
    logger.debug("S-graph quiver: %d objects, %d arrows", len(s.edges), len(arrows))
    return GentlePresentation(tuple(s.edges), tuple(arrows), relations)


def heart_category(s: SGraph, K: Field | None = None) -> Products:
    return Products(s.presentation, (), K or linalg.field("q"))


def charge_lattice(s: SGraph) -> ChargeLattice:
    """Free on the edges; an S-graph carries no face relations."""
    return ChargeLattice(tuple(s.edges), ())


def central_charge(s: SGraph, c: ClassVector | Mapping[str, int]) -> GaussianRational:
    counts = c.as_dict() if isinstance(c, ClassVector) else dict(c)
    total = GaussianRational()
    for e, k in counts.items():
        total = total + s.charge(e) * k
    return total


def _in_heart(s: SGraph, z: GaussianRational) -> bool:
    zm = s.charge(lowest_edge(s))
    c = zm.cross(z)
    return c > 0 or (c == 0 and zm.dot(z) > 0)


def phase_of(s: SGraph, obj: ClassVector | Mapping[str, int] | CurveWord) -> Phase:
    """Phase of a class, or of a word lying in a shift of the heart.

    A class whose charge leaves the heart's half-plane is read as F[1] for F in
    the heart.
    """
    if isinstance(obj, CurveWord):
        shifts = {x.shift for x in obj.letters}
        if len(shifts) != 1:
            raise PreconditionError(f"{obj} does not lie in a shift of the heart")
        z = charge_sum(s.charge(x.arc) * obj.dimension for x in obj.letters)
        if not z:
            raise DegenerateChargeError(f"Z({obj}) = 0")
        return Phase(shifts.pop(), z)
    z = central_charge(s, obj)
    if not z:
        raise DegenerateChargeError("Z(c) = 0")
    return Phase(0, z) if _in_heart(s, z) else Phase(1, -z)


# -- heart words, semistability, HN ----------------------------------------------


@dataclass(frozen=True)
class HNFactor:
    letters: frozenset[int]
    words: tuple[CurveWord, ...]
    phase: Phase

    @property
    def charge(self) -> GaussianRational:
        return self.phase.charge

    @property
    def mass2(self) -> Fraction:
        return self.charge.norm2()


@dataclass(frozen=True)
class HNTower:
    source: CurveWord
    factors: tuple[HNFactor, ...]

    @property
    def phases(self) -> tuple[Phase, ...]:
        return tuple(f.phase for f in self.factors)

    @property
    def masses2(self) -> tuple[Fraction, ...]:
        return tuple(f.mass2 for f in self.factors)

    def mass(self) -> float:
        return sum(math.sqrt(m) for m in self.masses2)

    def partition(self) -> tuple[frozenset[int], ...]:
        return tuple(f.letters for f in self.factors)

    def __len__(self) -> int:
        return len(self.factors)


def _heart_word(s: SGraph, w: CurveWord) -> tuple[int, list[tuple[int, int]]]:
    """Heart shift of w and its δ as (source, target) letter pairs."""
    report = validate_word(heart_category(s), w)
    if not report.ok:
        raise InvalidInputError(f"invalid word: {report.issues[0]}")
    shifts = {x.shift for x in w.letters}
    if len(shifts) != 1:
        raise PreconditionError(f"{w} does not lie in a shift of the heart")
    if w.dimension != 1:
        raise PreconditionError("sub-object search needs a word of multiplicity one")
    m = len(w.letters)
    delta = []
    for i, c in enumerate(w.connectors):
        nxt = (i + 1) % m
        delta.append((i, nxt) if c.direction == FORWARD else (nxt, i))
    return shifts.pop(), delta


def _closed_subsets(
    delta: Sequence[tuple[int, int]], within: frozenset[int]
) -> Iterator[frozenset[int]]:
    """Non-empty subsets T of ``within`` with δ(T) ⊂ T: the sub-objects."""
    items = sorted(within)
    for mask in range(1, 1 << len(items)):
        t = frozenset(items[j] for j in range(len(items)) if mask >> j & 1)
        if all(dst in t for src, dst in delta if src in t and dst in within):
            yield t


def _sub_words(w: CurveWord, t: frozenset[int]) -> tuple[CurveWord, ...]:
    m = len(w.letters)
    if len(t) == m:
        return (w,)
    cyclic = w.kind == "band"
    out = []
    for i in sorted(t):
        before = (i - 1) % m if cyclic else i - 1
        if before in t:
            continue
        run = [i]
        while True:
            j = run[-1] + 1
            if cyclic:
                j %= m
            if j not in t or j in run:
                break
            run.append(j)
        out.append(
            CurveWord.string([w.letters[j] for j in run], [w.connectors[j] for j in run[:-1]])
        )
    return tuple(out)


def _subset_phase(s: SGraph, w: CurveWord, shift: int, t: Iterable[int]) -> Phase:
    return Phase(shift, charge_sum(s.charge(w.letters[i].arc) for i in t))


def is_semistable(s: SGraph, w: CurveWord) -> bool:
    """No sub-word sub-object has strictly greater phase."""
    shift, delta = _heart_word(s, w)
    whole = frozenset(range(len(w.letters)))
    phase = _subset_phase(s, w, shift, whole)
    return not any(
        t != whole and _subset_phase(s, w, shift, t) > phase for t in _closed_subsets(delta, whole)
    )


def is_stable(s: SGraph, w: CurveWord) -> bool:
    shift, delta = _heart_word(s, w)
    whole = frozenset(range(len(w.letters)))
    phase = _subset_phase(s, w, shift, whole)
    return not any(
        t != whole and _subset_phase(s, w, shift, t) >= phase
        for t in _closed_subsets(delta, whole)
    )


def hn_oracle(s: SGraph, w: CurveWord) -> HNTower:
    """Peel off the maximal destabilizing sub-object until nothing is left."""
    shift, delta = _heart_word(s, w)
    remaining = frozenset(range(len(w.letters)))
    factors = []
    while remaining:
        best: frozenset[int] = frozenset()
        best_phase: Phase | None = None
        for t in _closed_subsets(delta, remaining):
            phase = _subset_phase(s, w, shift, t)
            if best_phase is None or phase > best_phase:
                best, best_phase = t, phase
            elif phase == best_phase:
                best = best | t
        factors.append(HNFactor(best, _sub_words(w, best), _subset_phase(s, w, shift, best)))
        remaining = remaining - best
    return HNTower(w, tuple(factors))


def hn(s: SGraph, w: CurveWord) -> HNTower:
    """HN filtration of a heart word.

    When every δ component runs from a letter to one of no smaller phase, the
    letters grouped by phase already form the filtration. Otherwise fall back
    to :func:`hn_oracle`.
    """
    shift, delta = _heart_word(s, w)
    phases = [Phase(shift, s.charge(x.arc)) for x in w.letters]
    if not all(phases[dst] >= phases[src] for src, dst in delta):
        logger.debug("%s is not a geodesic representative; searching destabilizers", w)
        return hn_oracle(s, w)
    groups: list[tuple[Phase, set[int]]] = []
    for i, phase in enumerate(phases):
        for known, members in groups:
            if known == phase:
                members.add(i)
                break
        else:
            groups.append((phase, {i}))
    groups.sort(key=lambda g: g[0], reverse=True)
    factors = []
    for _, members in groups:
        t = frozenset(members)
        factors.append(HNFactor(t, _sub_words(w, t), _subset_phase(s, w, shift, t)))
    return HNTower(w, tuple(factors))


def mass(s: SGraph, w: CurveWord) -> float:
    """m(E) = Σ |Z(A_i)| over the HN factors."""
    return hn(s, w).mass()


def heart_objects(s: SGraph, max_letters: int | None = None) -> list[CurveWord]:
    """String words of the heart (every letter unshifted), up to reversal.

    Without ``max_letters`` the enumeration runs one letter past the number of
    distinct connectors. A string that long repeats a connector and can be
    pumped, so reaching it means the heart has infinitely many strings.
    """
    p = s.presentation
    ones = [a for a in p.arrows if a.degree == 1]
    limit = max_letters if max_letters is not None else 2 * len(ones) + 2
    K = linalg.field("q")
    found: dict[tuple, CurveWord] = {}

    def extend(letters: list[Letter], connectors: list[Connector]) -> None:
        word = CurveWord.string(letters, connectors).normal_form(K)
        found[word.key()] = word
        if len(letters) >= limit:
            return
        here = letters[-1].arc
        for a in ones:
            steps = []
            if a.source == here:
                steps.append((Connector((a.name,), FORWARD), a.target))
            if a.target == here:
                steps.append((Connector((a.name,), BACKWARD), a.source))
            for c, there in steps:
                if connectors and _junction_issue(p, connectors[-1], c):
                    continue
                extend(letters + [Letter(there, 0)], connectors + [c])

    for e in s.edges:
        extend([Letter(e, 0)], [])
    if max_letters is None and any(len(w.letters) >= limit for w in found.values()):
        raise UnboundedError("the heart has infinitely many strings; give max_letters")
    return sorted(found.values(), key=lambda w: (len(w.letters), w.key()))


def stable_count(s: SGraph, max_letters: int | None = None) -> int:
    """Stable objects up to shift: the stable string words of the heart."""
    return sum(1 for w in heart_objects(s, max_letters) if is_stable(s, w))


# -- brute-force sub-module search ----------------------------------------------


def _subspaces(p: int, n: int) -> list[frozenset[tuple[int, ...]]]:
    zero = (0,) * n
    vectors = list(itertools.product(range(p), repeat=n))
    seen = {frozenset([zero])}
    queue = deque(seen)
    while queue:
        space = queue.popleft()
        for v in vectors:
            if v in space:
                continue
            bigger = frozenset(
                tuple((a + c * b) % p for a, b in zip(u, v)) for u in space for c in range(p)
            )
            if bigger not in seen:
                seen.add(bigger)
                queue.append(bigger)
    return sorted(seen, key=len)


def is_semistable_bruteforce(s: SGraph, w: CurveWord, K: Field) -> bool:
    """Semistability against every sub-representation, enumerated over F_p."""
    if not K.is_finite:
        raise PreconditionError("brute-force sub-module search needs a finite field")
    shift, _ = _heart_word(s, w)
    t = word_to_twcx(heart_category(s, K), w)
    copies: dict[str, list[int]] = {}
    for i, x in enumerate(t.summands):
        copies.setdefault(x.arc, []).append(i)
    maps: dict[str, dict[tuple[int, int], int]] = {}
    for (dst, src), combo in t.delta.items():
        for path, c in combo:
            maps.setdefault(path.arrows[0], {})[(dst, src)] = K.to_python(c)
    arcs = list(copies)
    choices = [_subspaces(K.p, len(copies[a])) for a in arcs]
    arrows = {a.name: a for a in s.presentation.arrows}
    whole = Phase(shift, charge_sum(s.charge(x.arc) for x in t.summands))
    total = len(t.summands)

    def closed(choice: Sequence[frozenset]) -> bool:
        space = dict(zip(arcs, choice))
        for name, entries in maps.items():
            x, y = arrows[name].source, arrows[name].target
            for u in space.get(x, ()):
                image = tuple(
                    sum(entries.get((dst, src), 0) * u[j] for j, src in enumerate(copies[x]))
                    % K.p
                    for dst in copies[y]
                )
                if image not in space[y]:
                    return False
        return True

    for choice in itertools.product(*choices):
        dims = [round(math.log(len(c), K.p)) for c in choice]
        if sum(dims) in (0, total) or not closed(choice):
            continue
        z = charge_sum(s.charge(a) * k for a, k in zip(arcs, dims))
        if Phase(shift, z) > whole:
            return False
    return True


# -- stability states and mutation ----------------------------------------------


@dataclass(frozen=True, eq=False)
class StabilityState:
    """An S-graph, the class of every current simple in a fixed reference basis,
    and the reference charge Z0 on that basis."""

    sgraph: SGraph
    reference: tuple[str, ...]
    classes: Mapping[str, tuple[int, ...]]
    reference_z: Mapping[str, GaussianRational]

    @property
    def basis_change(self) -> Matrix:
        return Matrix([list(self.classes[e]) for e in self.sgraph.edges])

    def class_of(self, w: CurveWord) -> tuple[int, ...]:
        total = [0] * len(self.reference)
        for x in w.letters:
            sign = -1 if x.shift % 2 else 1
            for j, c in enumerate(self.classes[x.arc]):
                total[j] += sign * c * w.dimension
        return tuple(total)

    def reference_charge(self, cls: Sequence[int]) -> GaussianRational:
        """Z0 of a class given in the reference basis."""
        return charge_sum(self.reference_z[r] * c for r, c in zip(self.reference, cls))


def initial_state(s: SGraph) -> StabilityState:
    _require_sgraph(validate_sgraph(s, upper=True))
    names = tuple(s.edges)
    classes = {e: tuple(int(e == f) for f in names) for e in names}
    return StabilityState(s, names, classes, {e: s.charge(e) for e in names})


def _as_state(x: SGraph | StabilityState) -> StabilityState:
    return x if isinstance(x, StabilityState) else initial_state(x)


class _Surgery:
    """Mutable half-edge orders for one mutation."""

    def __init__(self, s: SGraph) -> None:
        self.s = s
        self.order = {v: x.order for v, x in s.vertices.items()}
        self.halves = {v: list(x.halves) for v, x in s.vertices.items()}
        self.gaps = {v: list(x.d) for v, x in s.vertices.items()}
        self.at = {h: v for v, hs in self.halves.items() for h in hs}

    def _locate(self, h: str) -> tuple[str, int]:
        v = self.at[h]
        return v, self.halves[v].index(h)

    def succ(self, h: str) -> str | None:
        v, i = self._locate(h)
        hs = self.halves[v]
        if self.order[v] == "cyclic":
            return hs[(i + 1) % len(hs)]
        return hs[i + 1] if i + 1 < len(hs) else None

    def pred(self, h: str) -> str | None:
        v, i = self._locate(h)
        hs = self.halves[v]
        if self.order[v] == "cyclic":
            return hs[i - 1]
        return hs[i - 1] if i > 0 else None

    def gap_after(self, h: str) -> int | None:
        if self.succ(h) is None:
            return None
        v, i = self._locate(h)
        return self.gaps[v][i]

    def shift_gap_after(self, h: str, by: int) -> None:
        if self.succ(h) is not None:
            v, i = self._locate(h)
            self.gaps[v][i] += by

    def remove(self, h: str) -> None:
        """Drop h; its two neighbouring gaps merge."""
        v, i = self._locate(h)
        hs, gs = self.halves[v], self.gaps[v]
        n = len(hs)
        if self.order[v] == "cyclic":
            merged = gs[i - 1] + gs[i]
            hs.pop(i)
            gs.pop(i)
            gs[(i - 1) % (n - 1)] = merged
        elif n == 1:
            hs.pop()
        elif i == 0:
            hs.pop(0)
            gs.pop(0)
        elif i == n - 1:
            hs.pop()
            gs.pop()
        else:
            merged = gs[i - 1] + gs[i]
            hs.pop(i)
            gs.pop(i)
            gs[i - 1] = merged
        del self.at[h]

    def insert_before(self, b: str, c: str) -> None:
        v, i = self._locate(b)
        self.halves[v].insert(i, c)
        self.gaps[v].insert(i, 1)
        self.at[c] = v

    def insert_after(self, a: str, c: str) -> None:
        v, i = self._locate(a)
        self.halves[v].insert(i + 1, c)
        self.gaps[v].insert(i, 1)
        self.at[c] = v

    def left(self, e: str) -> list[str]:
        a, b = self.s.edges[e].halves
        for h in (a, b):
            self.shift_gap_after(h, -1)
        slid = []
        for h, other in ((a, b), (b, a)):
            nxt = self.succ(h)
            if nxt is not None and self.gap_after(h) == 0:
                if nxt in (a, b):
                    raise PreconditionError(f"edge {e} closes up around a single strip")
                self.remove(nxt)
                self.insert_before(other, nxt)
                slid.append(self.s.edge_of[nxt])
            else:
                before = self.pred(other)
                if before is not None:
                    self.shift_gap_after(before, 1)
        return slid

    def right(self, e: str) -> list[str]:
        a, b = self.s.edges[e].halves
        for h in (a, b):
            before = self.pred(h)
            if before is not None:
                self.shift_gap_after(before, -1)
        slid = []
        for h, other in ((a, b), (b, a)):
            prev = self.pred(h)
            if prev is not None and self.gap_after(prev) == 0:
                if prev in (a, b):
                    raise PreconditionError(f"edge {e} closes up around a single strip")
                self.remove(prev)
                self.insert_after(other, prev)
                slid.append(self.s.edge_of[prev])
            else:
                self.shift_gap_after(other, 1)
        return slid

    def vertices(self) -> dict[str, SVertex]:
        return {
            v: SVertex(self.order[v], tuple(self.halves[v]), tuple(self.gaps[v]))
            for v in self.halves
        }


def _upper(z: GaussianRational, e: str) -> GaussianRational:
    if z.im > 0:
        return z
    if z.im < 0:
        return -z
    raise DegenerateChargeError(f"Z0 of the class of {e} is real: {z}")


def _mutate(st: StabilityState, e: str, left: bool) -> StabilityState:
    s = st.sgraph
    if e not in s.edges:
        raise InvalidInputError(f"unknown edge {e!r}")
    side = "left" if left else "right"
    work = _Surgery(s)
    slid = Counter(work.left(e) if left else work.right(e))
    vertices = work.vertices()
    if any(k < 1 for x in vertices.values() for k in x.d):
        raise PreconditionError(f"{side} mutation at {e} leaves a strip count below 1")
    ce = st.classes[e]
    edges, classes = {}, {}
    for f, x in s.edges.items():
        if f == e:
            cls = tuple(-c for c in ce)
        else:
            k = slid[f]
            cls = tuple(c + k * d for c, d in zip(st.classes[f], ce))
        edges[f] = SEdge(x.halves, _upper(st.reference_charge(cls), f))
        classes[f] = cls
    new = SGraph(vertices, edges)
    _require_sgraph(validate_sgraph(new, upper=True))
    logger.debug("%s mutation at %s slid %s", side, e, sorted(slid))
    return StabilityState(new, st.reference, classes, st.reference_z)


def mutate_left(state: SGraph | StabilityState, e: str) -> StabilityState:
    """Tilt at the simple e: e becomes e[1]."""
    return _mutate(_as_state(state), e, True)


def mutate_right(state: SGraph | StabilityState, e: str) -> StabilityState:
    """Tilt at the simple e: e becomes e[-1]. Inverse of :func:`mutate_left`."""
    return _mutate(_as_state(state), e, False)


def canonical_form(s: SGraph, labels: Mapping[str, Any] | None = None) -> tuple:
    """Vertex-name-free form of an S-graph whose edges carry ``labels``."""
    labels = labels if labels is not None else {e: e for e in s.edges}
    keys = []
    for x in s.vertices.values():
        seq = [labels[s.edge_of[h]] for h in x.halves]
        gaps = list(x.d)
        if x.order == "cyclic":
            n = len(seq)
            body = min(
                (tuple(seq[i:] + seq[:i]), tuple(gaps[i:] + gaps[:i])) for i in range(n)
            )
        else:
            body = (tuple(seq), tuple(gaps))
        keys.append((x.order,) + body)
    return tuple(sorted(keys))


def chamber_key(st: StabilityState) -> tuple:
    """The heart: edges labelled by their classes. H and H[1] get different keys."""
    return canonical_form(st.sgraph, dict(st.classes))


def _side(inverse: Matrix, cls: Sequence[int]) -> int:
    """+1 for a class in the start heart, -1 for one in its shift, 0 otherwise."""
    coords = list(Matrix([list(cls)]) * inverse)
    if all(c >= 0 for c in coords):
        return 1
    if all(c <= 0 for c in coords):
        return -1
    return 0


def _crossings(task: tuple[StabilityState, Matrix]) -> list[tuple[str, StabilityState]]:
    """Walls out of one heart that stay inside the interval; runs in a worker."""
    st, inverse = task
    out = []
    for e in st.sgraph.edges:
        sign = _side(inverse, st.classes[e])
        if not sign:
            logger.warning("class of %s leaves the interval; not crossing", e)
            continue
        side = "left" if sign > 0 else "right"
        try:
            nxt = _mutate(st, e, sign > 0)
        except (DegenerateChargeError, PreconditionError) as exc:
            logger.info("skipping %s %s: %s", side, e, exc)
            continue
        out.append((f"{side} {e}", nxt))
    return out


def explore_chambers(
    state: SGraph | StabilityState, max_depth: int, jobs: int = 1
) -> nx.Graph:
    """Hearts between the start H and H[1] within ``max_depth`` wall crossings.

    Simples of the start heart tilt left, simples of its shift tilt right.
    Each BFS level is fanned out over ``jobs`` worker processes and merged in
    frontier order, so the graph does not depend on ``jobs``.

    Node attributes: ``state`` and ``depth``. Edge attribute: ``label``, the
    side and the edge of the crossing.
    """
    if max_depth < 0:
        raise InvalidInputError("max_depth must be non-negative")
    start = _as_state(state)
    inverse = start.basis_change.inv()
    graph = nx.Graph()
    graph.add_node(chamber_key(start), state=start, depth=0)
    frontier = [start]
    for depth in range(max_depth):
        if not frontier:
            break
        tasks = [(st, inverse) for st in frontier]
        if jobs > 1 and len(tasks) > 1:
            with Pool(min(jobs, len(tasks))) as pool:
                results = pool.map(_crossings, tasks)
        else:
            results = [_crossings(t) for t in tasks]
        reached = []
        for st, crossings in zip(frontier, results):
            here = chamber_key(st)
            for label, nxt in crossings:
                key = chamber_key(nxt)
                if key not in graph:
                    graph.add_node(key, state=nxt, depth=depth + 1)
                    reached.append(nxt)
                if not graph.has_edge(here, key):
                    graph.add_edge(here, key, label=label)
        frontier = reached
        logger.debug("depth %d: %d chambers so far", depth + 1, graph.number_of_nodes())
    return graph


def random_mutation_path(
    rng: np.random.Generator, state: SGraph | StabilityState, steps: int
) -> list[StabilityState]:
    """Random tilts at any simple, either side; degenerate crossings are redrawn."""
    st = _as_state(state)
    edges = list(st.sgraph.edges)
    path = [st]
    for _ in range(steps):
        for i in rng.permutation(2 * len(edges)):
            try:
                st = _mutate(st, edges[i // 2], bool(i % 2))
            except (DegenerateChargeError, PreconditionError):
                continue
            break
        else:
            raise DegenerateChargeError("every wall out of this heart is degenerate")
        path.append(st)
    return path


# -- support, metric, axioms -----------------------------------------------------


def support_constant(state: SGraph | StabilityState, max_letters: int | None = None) -> Fraction:
    """max ‖cl(E)‖² / |Z(E)|² over the stable heart strings."""
    st = _as_state(state)
    s = st.sgraph
    best = Fraction(0)
    for w in heart_objects(s, max_letters):
        if not is_stable(s, w):
            continue
        cl = st.class_of(w)
        z = charge_sum(s.charge(x.arc) for x in w.letters)
        best = max(best, Fraction(sum(c * c for c in cl)) / z.norm2())
    return best


def stab_metric(
    s1: SGraph, s2: SGraph, sample: Sequence[CurveWord] | None = None
) -> float:
    """sup over the sample of max(|Δφ⁺|, |Δφ⁻|, |log m₁/m₂|); floats, reporting only."""
    if canonical_form(s1) != canonical_form(s2):
        raise InvalidInputError("stability conditions on different S-graphs")
    objects = list(sample) if sample is not None else heart_objects(s1)
    worst = 0.0
    for w in objects:
        t1, t2 = hn(s1, w), hn(s2, w)
        value = max(
            abs(t1.phases[0].value - t2.phases[0].value),
            abs(t1.phases[-1].value - t2.phases[-1].value),
            abs(math.log(t1.mass() / t2.mass())),
        )
        worst = max(worst, value)
    return 0.0 if worst < METRIC_TOLERANCE else worst


@dataclass(frozen=True)
class AxiomReport:
    hn_ok: bool
    hom_vanishing_ok: bool
    support: Fraction
    checked: int = 0
    issues: tuple[Issue, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return self.hn_ok and self.hom_vanishing_ok


def verify_axioms(
    state: SGraph | StabilityState, max_letters: int | None = None
) -> AxiomReport:
    """HN existence, Hom⁰ vanishing from higher to lower phase, and the support datum."""
    st = _as_state(state)
    s = st.sgraph
    words = heart_objects(s, max_letters)
    issues = []
    for w in words:
        tower = hn(s, w)
        if tower != hn_oracle(s, w):
            issues.append(Issue(str(w), "fast HN filtration disagrees with the oracle"))
        if any(a <= b for a, b in zip(tower.phases, tower.phases[1:])):
            issues.append(Issue(str(w), "HN phases do not strictly decrease"))
        parts = tower.partition()
        if sum(len(t) for t in parts) != len(w.letters) or len(frozenset().union(*parts)) != len(
            w.letters
        ):
            issues.append(Issue(str(w), "HN factors do not partition the word"))
    hn_ok = not issues
    category = heart_category(s)
    stable = [w for w in words if is_stable(s, w)]
    complexes = {w.key(): word_to_twcx(category, w) for w in stable}
    hom_ok = True
    for a, b in itertools.permutations(stable, 2):
        if phase_of(s, a) > phase_of(s, b):
            if hom_cohomology(complexes[a.key()], complexes[b.key()]).get(0, 0):
                hom_ok = False
                issues.append(Issue(str(a), f"Hom⁰ to the lower-phase stable {b} is non-zero"))
    return AxiomReport(hn_ok, hom_ok, support_constant(st, max_letters), len(words), tuple(issues))


def stable_count_sweep(
    states: Iterable[SGraph | StabilityState], names: Sequence[str] | None = None
) -> pd.DataFrame:
    rows = []
    for i, x in enumerate(states):
        st = _as_state(x)
        charges = ", ".join(f"{e}={st.sgraph.charge(e)}" for e in st.sgraph.edges)
        rows.append(
            {
                "chamber": names[i] if names is not None else f"c{i}",
                "charges": charges,
                "stable_count": stable_count(st.sgraph),
                "support": str(support_constant(st)),
            }
        )
    return pd.DataFrame(rows, columns=["chamber", "charges", "stable_count", "support"])


# -- DOT -------------------------------------------------------------------------


def chamber_names(graph: nx.Graph) -> dict[tuple, str]:
    order = sorted(graph.nodes, key=lambda k: (graph.nodes[k]["depth"], str(k)))
    return {key: f"c{i}" for i, key in enumerate(order)}


def chamber_dot(graph: nx.Graph) -> str:
    names = chamber_names(graph)
    lines = ["graph chambers {"]
    for key, name in names.items():
        st = graph.nodes[key]["state"]
        label = " ".join(f"{e}:{list(st.classes[e])}" for e in st.sgraph.edges)
        lines.append(f'    {name} [label="{label}"];')
    for u, v, data in graph.edges(data=True):
        lines.append(f'    {names[u]} -- {names[v]} [label="{data["label"]}"];')
    lines.append("}")
    return "\n".join(lines)


def sgraph_dot(s: SGraph) -> str:
    lines = ["graph sgraph {"]
    for v, x in s.vertices.items():
        lines.append(f'    "{v}" [label="{v} ({x.order})"];')
    for e, x in s.edges.items():
        a, b = (s.vertex_of[h] for h in x.halves)
        lines.append(f'    "{a}" -- "{b}" [label="{e} Z={x.charge}"];')
    lines.append("}")
    return "\n".join(lines)


# -- builders --------------------------------------------------------------------


def _default_charges(n: int) -> list[GaussianRational]:
    return [GaussianRational(1, k * k) for k in range(1, n + 1)]


def path_sgraph(n: int, charges: Sequence[Any] | None = None) -> SGraph:
    """A_n as a path: edge e_k joins v_{k-1} and v_k, all strip counts 1."""
    if n < 1:
        raise InvalidInputError("a path S-graph needs at least one edge")
    zs = [GaussianRational.parse(z) for z in charges] if charges else _default_charges(n)
    vertices = {"v0": SVertex("total", ("e1a",))}
    for k in range(1, n):
        vertices[f"v{k}"] = SVertex("total", (f"e{k}b", f"e{k + 1}a"), (1,))
    vertices[f"v{n}"] = SVertex("total", (f"e{n}b",))
    edges = {f"e{k}": SEdge((f"e{k}a", f"e{k}b"), zs[k - 1]) for k in range(1, n + 1)}
    return SGraph(vertices, edges)


def star_sgraph(n: int, charges: Sequence[Any] | None = None) -> SGraph:
    """n edges at one totally ordered centre: linear A_n without relations."""
    if n < 1:
        raise InvalidInputError("a star S-graph needs at least one edge")
    zs = [GaussianRational.parse(z) for z in charges] if charges else _default_charges(n)
    vertices = {"c": SVertex("total", tuple(f"e{k}a" for k in range(1, n + 1)), (1,) * (n - 1))}
    for k in range(1, n + 1):
        vertices[f"v{k}"] = SVertex("total", (f"e{k}b",))
    edges = {f"e{k}": SEdge((f"e{k}a", f"e{k}b"), zs[k - 1]) for k in range(1, n + 1)}
    return SGraph(vertices, edges)


def random_sgraph(rng: np.random.Generator, n: int, max_d: int = 2) -> SGraph:
    """Random tree S-graph with total orders and pairwise non-colinear charges."""
    vertices: dict[str, list[str]] = {"v0": []}
    edges: dict[str, tuple[str, str]] = {}
    for k in range(1, n + 1):
        a, b = f"e{k}a", f"e{k}b"
        anchor = f"v{int(rng.integers(len(vertices)))}"
        vertices[anchor].insert(int(rng.integers(len(vertices[anchor]) + 1)), a)
        vertices[f"v{len(vertices)}"] = [b]
        edges[f"e{k}"] = (a, b)
    svertices = {
        v: SVertex("total", tuple(hs), tuple(int(rng.integers(1, max_d + 1)) for _ in hs[1:]))
        for v, hs in vertices.items()
    }
    while True:
        zs = [
            GaussianRational(int(rng.integers(-5, 6)), int(rng.integers(1, 6))) for _ in range(n)
        ]
        if all(a.cross(b) != 0 for a, b in itertools.combinations(zs, 2)):
            break
    return SGraph(svertices, {e: SEdge(h, z) for (e, h), z in zip(edges.items(), zs)})


# -- JSON ------------------------------------------------------------------------


def sgraph_to_dict(s: SGraph) -> dict:
    return {
        "format": FORMAT,
        "vertices": {
            v: {"order": x.order, "halves": list(x.halves), "d": list(x.d)}
            for v, x in s.vertices.items()
        },
        "edges": {
            e: {"halves": list(x.halves), "Z": x.charge.to_dict()} for e, x in s.edges.items()
        },
    }


def sgraph_from_dict(doc: Mapping[str, Any]) -> SGraph:
    if doc.get("format") != FORMAT:
        raise FormatError(f"expected format {FORMAT!r}, got {doc.get('format')!r}", "format")
    vertices = {}
    for v, x in (doc.get("vertices") or {}).items():
        where = f"vertices.{v}"
        try:
            vertices[v] = SVertex(
                str(x.get("order", "total")),
                tuple(str(h) for h in x["halves"]),
                tuple(int(k) for k in x.get("d", ())),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise FormatError(f"bad vertex ({exc})", where) from None
    edges = {}
    for e, x in (doc.get("edges") or {}).items():
        where = f"edges.{e}"
        try:
            a, b = x["halves"]
            edges[e] = SEdge((str(a), str(b)), GaussianRational.parse(x["Z"]))
        except (KeyError, TypeError, ValueError, ZeroDivisionError, AttributeError) as exc:
            raise FormatError(f"bad edge ({exc})", where) from None
    if not edges:
        raise FormatError("an S-graph needs at least one edge", "edges")
    return SGraph(vertices, edges)


def state_to_dict(st: StabilityState) -> dict:
    doc = sgraph_to_dict(st.sgraph)
    doc["reference"] = list(st.reference)
    doc["classes"] = {e: list(c) for e, c in st.classes.items()}
    doc["reference_Z"] = {r: z.to_dict() for r, z in st.reference_z.items()}
    return doc


def _solve_reference_z(
    s: SGraph, reference: tuple[str, ...], basis: Matrix
) -> dict[str, GaussianRational]:
    """Z0 from the current charges, for documents written without ``reference_Z``."""
    inverse = basis.inv()
    edges = list(s.edges)
    out = {}
    for j, r in enumerate(reference):
        z = GaussianRational()
        for k, e in enumerate(edges):
            c = inverse[j, k]
            z = z + s.charge(e) * Fraction(int(c.p), int(c.q))
        out[r] = z
    return out


def state_from_dict(doc: Mapping[str, Any]) -> StabilityState:
    """An ``sgraph.v1`` document; without ``classes`` it is a starting chamber."""
    s = sgraph_from_dict(doc)
    if "classes" not in doc:
        return initial_state(s)
    reference = tuple(str(r) for r in doc.get("reference") or s.edges)
    try:
        classes = {e: tuple(int(c) for c in doc["classes"][e]) for e in s.edges}
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad class table ({exc})", "classes") from None
    if any(len(c) != len(reference) for c in classes.values()):
        raise FormatError("class vectors must match the reference basis", "classes")
    basis = Matrix([list(classes[e]) for e in s.edges])
    if basis.shape[0] != basis.shape[1] or abs(basis.det()) != 1:
        raise FormatError("class table is not invertible over ℤ", "classes")
    _require_sgraph(validate_sgraph(s, upper=True))
    if "reference_Z" in doc:
        try:
            reference_z = {r: GaussianRational.parse(doc["reference_Z"][r]) for r in reference}
        except (KeyError, TypeError, ValueError, ZeroDivisionError, AttributeError) as exc:
            raise FormatError(f"bad reference charge ({exc})", "reference_Z") from None
    else:
        reference_z = _solve_reference_z(s, reference, basis)
    st = StabilityState(s, reference, classes, reference_z)
    for e in s.edges:
        z = st.reference_charge(classes[e])
        if s.charge(e) not in (z, -z):
            raise FormatError(f"Z({e}) = {s.charge(e)} is not ±Z0 of its class", f"edges.{e}")
    return st


def tower_to_dict(tower: HNTower) -> dict:
    return {
        "word": str(tower.source),
        "factors": [
            {
                "letters": sorted(f.letters),
                "words": [str(w) for w in f.words],
                "phase": f.phase.value,
                "charge": f.charge.to_dict(),
                "mass2": str(f.mass2),
            }
            for f in tower.factors
        ],
    }
