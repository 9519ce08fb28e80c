"""Gentle presentations of F_A(S) and their A∞ structure.

Objects are the arcs of a graded ribbon graph. Morphisms are boundary paths:
relation-free strings of arrows, where an arrow is a corner h -> σh of a
polygon. Two arrows at the same polygon that meet at a common half-edge
compose to zero; this is the whole relation set, so relations are quadratic
monomial.

Paths are stored in travel order: ``BasisPath.arrows[0]`` is traversed first.
Products follow the usual written order, ``mu(p, [x_n, ..., x_1])`` applies x_1
first, and μ²(b, a) = (-1)^{|a|} a·b for the concatenation a·b.

Higher products come from disk sequences: cyclic chains of boundary paths
bounding an immersed polygon. Embedded ones are the polygons without a
boundary-arc side; immersed ones are glued from these along shared arcs.
"""

from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Sequence

import networkx as nx

from fukayagen import linalg
from fukayagen.config import load_settings
from fukayagen.errors import (
    FormatError,
    InvalidInputError,
    PreconditionError,
    UnboundedError,
)
from fukayagen.linalg import Field
from fukayagen.surface import GradedRibbonGraph, validate

logger = logging.getLogger(__name__)

FORMAT = "gentle.v1"
DEFAULT_MAX_ARROWS = 12


@dataclass(frozen=True)
class Arrow:
    name: str
    source: str
    target: str
    degree: int
    start_half: str | None = None
    end_half: str | None = None


@dataclass(frozen=True)
class BasisPath:
    """Relation-free path; ``arrows == ()`` is the identity at ``source``."""

    source: str
    target: str
    arrows: tuple[str, ...] = ()
    degree: int = 0

    @property
    def is_identity(self) -> bool:
        return not self.arrows

    @property
    def reduced_degree(self) -> int:
        return self.degree - 1

    def __len__(self) -> int:
        return len(self.arrows)

    def __str__(self) -> str:
        return "·".join(self.arrows) if self.arrows else f"1_{self.source}"


@dataclass(frozen=True)
class DiskSequence:
    """Cyclic chain of boundary paths bounding a polygon, in travel order."""

    corners: tuple[BasisPath, ...]

    @property
    def arrows(self) -> tuple[tuple[str, ...], ...]:
        return tuple(c.arrows for c in self.corners)

    @property
    def reduced_degree(self) -> int:
        return sum(c.reduced_degree for c in self.corners)

    def __len__(self) -> int:
        return len(self.corners)


@dataclass(frozen=True, eq=False)
class GentlePresentation:
    vertices: tuple[str, ...]
    arrows: tuple[Arrow, ...]
    relations: frozenset[tuple[str, str]] = frozenset()
    _cache: dict = field(default_factory=dict, repr=False)

    def arrow(self, name: str) -> Arrow:
        if "by_name" not in self._cache:
            self._cache["by_name"] = {a.name: a for a in self.arrows}
        try:
            return self._cache["by_name"][name]
        except KeyError:
            raise InvalidInputError(f"unknown arrow {name!r}") from None

    def outgoing(self, v: str) -> list[Arrow]:
        return [a for a in self.arrows if a.source == v]

    def incoming(self, v: str) -> list[Arrow]:
        return [a for a in self.arrows if a.target == v]

    def is_relation(self, first: str, second: str) -> bool:
        return (first, second) in self.relations

    def identity(self, v: str) -> BasisPath:
        if v not in self.vertices:
            raise InvalidInputError(f"unknown object {v!r}")
        return BasisPath(v, v)

    def path(self, names: Sequence[str]) -> BasisPath:
        """Basis path through the named arrows; raises if it hits a relation."""
        if not names:
            raise InvalidInputError("use identity() for empty paths")
        arrows = [self.arrow(n) for n in names]
        for a, b in zip(arrows, arrows[1:]):
            if a.target != b.source:
                raise InvalidInputError(f"arrows {a.name} and {b.name} do not compose")
            if self.is_relation(a.name, b.name):
                raise InvalidInputError(f"path crosses relation ({a.name}, {b.name})")
        return BasisPath(
            arrows[0].source, arrows[-1].target, tuple(names), sum(a.degree for a in arrows)
        )


class LinCombo:
    """Finite linear combination of basis paths; zero coefficients are dropped."""

    def __init__(self, K: Field, terms: Mapping[BasisPath, Any] | None = None) -> None:
        self.field = K
        self.terms: dict[BasisPath, Any] = {}
        for path, c in (terms or {}).items():
            c = K.convert(c)
            if c:
                self.terms[path] = c

    @classmethod
    def of(cls, K: Field, path: BasisPath, coefficient: Any = 1) -> "LinCombo":
        return cls(K, {path: coefficient})

    def add_term(self, path: BasisPath, c) -> None:
        total = self.terms.get(path, self.field.zero) + c
        if total:
            self.terms[path] = total
        else:
            self.terms.pop(path, None)

    def __add__(self, other: "LinCombo") -> "LinCombo":
        out = LinCombo(self.field, self.terms)
        for path, c in other.terms.items():
            out.add_term(path, c)
        return out

    def scale(self, c) -> "LinCombo":
        c = self.field.convert(c)
        return LinCombo(self.field, {p: c * x for p, x in self.terms.items()})

    def __neg__(self) -> "LinCombo":
        return self.scale(-1)

    def __sub__(self, other: "LinCombo") -> "LinCombo":
        return self + (-other)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LinCombo) and self.terms == other.terms

    def __iter__(self) -> Iterator[tuple[BasisPath, Any]]:
        return iter(self.terms.items())

    def coefficient(self, path: BasisPath):
        return self.terms.get(path, self.field.zero)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{self.field.format(c)}*{p}" for p, c in self.terms.items())


# -- construction ----------------------------------------------------------------


def disk_sequences(g: GradedRibbonGraph) -> tuple[GentlePresentation, list[DiskSequence]]:
    """Presentation of F_A(S) plus the disk sequence of every arcs-only polygon."""
    report = validate(g)
    if not report.ok:
        raise InvalidInputError(f"invalid ribbon graph: {report.issues[0]}")
    arcs = tuple(g.arcs)
    arrows: list[Arrow] = []
    corners_at: dict[str, list[Arrow]] = {}
    for v, order in g.vertices.items():
        flagged = [h for h in order if g.is_boundary(g.edge_of(h))]
        if not flagged and len(order) <= 2:
            raise PreconditionError(
                f"polygon {v} has {len(order)} side(s) and no boundary arc; localize it first"
            )
        here = []
        if len(order) > 1:
            for h in order:
                nxt = g.succ(h)
                if g.is_boundary(g.edge_of(h)) or g.is_boundary(g.edge_of(nxt)):
                    continue
                arrow = Arrow(f"{h}>{nxt}", g.edge_of(h), g.edge_of(nxt), g.degree(h), h, nxt)
                arrows.append(arrow)
                here.append(arrow)
        corners_at[v] = here
    relations = frozenset(
        (a.name, b.name) for a in arrows for b in arrows if b.start_half == a.end_half
    )
    p = GentlePresentation(arcs, tuple(arrows), relations)
    disks = [
        DiskSequence(tuple(BasisPath(a.source, a.target, (a.name,), a.degree) for a in here))
        for v, here in corners_at.items()
        if here and not any(g.is_boundary(g.edge_of(h)) for h in g.vertices[v])
    ]
    logger.debug("presentation: %d arcs, %d arrows, %d faces", len(arcs), len(arrows), len(disks))
    return p, disks


def from_ribbon(
    g: GradedRibbonGraph, max_corners: int | None = None
) -> tuple[GentlePresentation, list[DiskSequence]]:
    """Presentation of F_A(S) with every immersed disk of at most ``max_corners`` corners."""
    p, faces = disk_sequences(g)
    return p, immersed_disks(p, faces, max_corners)


def _rotation_key(corners: Sequence[BasisPath]) -> tuple:
    n = len(corners)
    return min(
        tuple(c.arrows for c in list(corners[i:]) + list(corners[:i])) for i in range(n)
    )


def _start_half(p: GentlePresentation, c: BasisPath) -> str | None:
    return p.arrow(c.arrows[0]).start_half


def _end_half(p: GentlePresentation, c: BasisPath) -> str | None:
    return p.arrow(c.arrows[-1]).end_half


def concat(p: GentlePresentation, first: BasisPath, second: BasisPath) -> BasisPath | None:
    """first then second, or None when they hit a relation."""
    if first.target != second.source:
        raise InvalidInputError(
            f"{first} ends at {first.target}, {second} starts at {second.source}"
        )
    if first.is_identity:
        return second
    if second.is_identity:
        return first
    if p.is_relation(first.arrows[-1], second.arrows[0]):
        return None
    return BasisPath(
        first.source, second.target, first.arrows + second.arrows, first.degree + second.degree
    )


def compose(p: GentlePresentation, x: BasisPath, y: BasisPath) -> BasisPath | None:
    """Unsigned product y∘x (x first), None if zero."""
    return concat(p, x, y)


def immersed_disks(
    p: GentlePresentation, faces: Sequence[DiskSequence], max_corners: int | None = None
) -> list[DiskSequence]:
    """Disk sequences of polygons glued from ``faces`` along shared arcs.

    Gluing face Q onto side X of a disk merges the two corners on either end
    of X with the corners of Q there. Each gluing adds len(Q) - 2 corners, so
    the enumeration stops at ``max_corners``.
    """
    max_corners = max_corners or load_settings().max_disk_corners
    base = [f for f in faces if all(c.arrows and _start_half(p, c) for c in f.corners)]
    seen: dict[tuple, DiskSequence] = {}
    frontier = []
    for f in faces:
        key = _rotation_key(f.corners)
        if key not in seen:
            seen[key] = f
            frontier.append(f)
    while frontier:
        nxt = []
        for disk in frontier:
            cs = list(disk.corners)
            for j in range(len(cs)):
                before, after = cs[j - 1], cs[j]
                side = _start_half(p, after)
                arc = after.source
                for q in base:
                    if len(cs) + len(q) - 2 > max_corners:
                        continue
                    qs = list(q.corners)
                    for t in range(len(qs)):
                        into, out = qs[t], qs[(t + 1) % len(qs)]
                        if out.source != arc or _start_half(p, out) == side:
                            continue
                        left = concat(p, before, out)
                        right = concat(p, into, after)
                        if left is None or right is None:
                            continue
                        middle = [qs[(t + 2 + i) % len(qs)] for i in range(len(qs) - 2)]
                        rest = [cs[(j + 1 + i) % len(cs)] for i in range(len(cs) - 2)]
                        glued = [left] + middle + [right] + rest
                        key = _rotation_key(glued)
                        if key not in seen:
                            seen[key] = DiskSequence(tuple(glued))
                            nxt.append(seen[key])
        frontier = nxt
    logger.debug("immersed disks: %d (max corners %d)", len(seen), max_corners)
    return list(seen.values())


# -- Hom bases -------------------------------------------------------------------


def _continuation_graph(p: GentlePresentation) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(a.name for a in p.arrows)
    for a in p.arrows:
        for b in p.outgoing(a.target):
            if not p.is_relation(a.name, b.name):
                graph.add_edge(a.name, b.name)
    return graph


def _relation_graph(p: GentlePresentation) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(a.name for a in p.arrows)
    graph.add_edges_from(p.relations)
    return graph


def is_smooth(p: GentlePresentation) -> bool:
    """No oriented cycle all of whose consecutive pairs are relations."""
    return nx.is_directed_acyclic_graph(_relation_graph(p))


def is_proper(p: GentlePresentation) -> bool:
    """No oriented cycle of arrows that composes without hitting a relation."""
    return nx.is_directed_acyclic_graph(_continuation_graph(p))


def has_null_cycle(p: GentlePresentation) -> bool:
    """A relation-free cycle (or pair of cycles) whose degrees can cancel."""
    graph = _continuation_graph(p)
    for component in nx.strongly_connected_components(graph):
        sub = graph.subgraph(component)
        if sub.number_of_edges() == 0:
            continue
        totals = [sum(p.arrow(a).degree for a in cycle) for cycle in nx.simple_cycles(sub)]
        signs = {(t > 0) - (t < 0) for t in totals}
        if 0 in signs or {1, -1} <= signs:
            return True
    return False


def is_f1(p: GentlePresentation) -> bool:
    """No relation cycles, at most two arrows in and out, and gentle branching."""
    if not is_smooth(p):
        return False
    for v in p.vertices:
        ins, outs = p.incoming(v), p.outgoing(v)
        if len(ins) > 2 or len(outs) > 2:
            return False
        for a in ins:
            for b, c in itertools.combinations(outs, 2):
                if p.is_relation(a.name, b.name) == p.is_relation(a.name, c.name):
                    return False
        for a in outs:
            for b, c in itertools.combinations(ins, 2):
                if p.is_relation(b.name, a.name) == p.is_relation(c.name, a.name):
                    return False
    return True


def all_paths(
    p: GentlePresentation, source: str | None = None, max_arrows: int = DEFAULT_MAX_ARROWS
) -> list[BasisPath]:
    """Identities plus relation-free paths of at most ``max_arrows`` arrows."""
    starts = [source] if source is not None else list(p.vertices)
    out: list[BasisPath] = []
    for v in starts:
        out.append(p.identity(v))
        stack = [BasisPath(a.source, a.target, (a.name,), a.degree) for a in p.outgoing(v)]
        while stack:
            path = stack.pop()
            out.append(path)
            if len(path) >= max_arrows:
                continue
            for b in p.outgoing(path.target):
                if not p.is_relation(path.arrows[-1], b.name):
                    arrows = path.arrows + (b.name,)
                    stack.append(
                        BasisPath(path.source, b.target, arrows, path.degree + b.degree)
                    )
    return out


def hom_basis(
    p: GentlePresentation,
    x: str,
    y: str,
    window: tuple[int, int] | None = None,
    max_arrows: int = DEFAULT_MAX_ARROWS,
) -> list[BasisPath]:
    """Basis paths x -> y with degree in the closed ``window``.

    An unbounded window needs a proper presentation. With a window, paths are
    cut at ``max_arrows`` arrows when the quiver has relation-free cycles.
    """
    for v in (x, y):
        if v not in p.vertices:
            raise InvalidInputError(f"unknown object {v!r}")
    proper = is_proper(p)
    if window is None and not proper:
        raise UnboundedError("Hom is infinite on a non-proper presentation; give a degree window")
    if not proper and has_null_cycle(p):
        raise UnboundedError("a relation-free cycle of degree 0 makes every Hom window infinite")
    bound = max_arrows if not proper else len(p.arrows) + 1
    lo, hi = window if window is not None else (None, None)
    return sorted(
        (
            path
            for path in all_paths(p, x, bound)
            if path.target == y
            and (lo is None or lo <= path.degree)
            and (hi is None or path.degree <= hi)
        ),
        key=lambda q: (len(q), q.degree, q.arrows),
    )


# -- products --------------------------------------------------------------------


def _mu2_sign(degree: int) -> int:
    return -1 if degree % 2 else 1


class Products:
    """μⁿ evaluator for one presentation and one set of disk sequences.

    Results for basis-path tuples are cached on the instance only.
    """

    def __init__(
        self,
        p: GentlePresentation,
        disks: Iterable[DiskSequence] = (),
        K: Field | None = None,
    ) -> None:
        self.p = p
        self.field = K or linalg.field("q")
        self.disks = list(disks)
        self._first: dict[tuple, list[BasisPath]] = defaultdict(list)
        self._last: dict[tuple, list[BasisPath]] = defaultdict(list)
        for disk in self.disks:
            if disk.reduced_degree != -2:
                raise InvalidInputError(
                    f"disk sequence {disk.arrows} has reduced degree {disk.reduced_degree}, not -2"
                )
            cs = disk.corners
            for i in range(len(cs)):
                r = cs[i:] + cs[:i]
                self._first[r[1:]].append(r[0])
                self._last[r[:-1]].append(r[-1])
        self._cache: dict[tuple[BasisPath, ...], LinCombo] = {}

    def zero(self) -> LinCombo:
        return LinCombo(self.field)

    def _check_chain(self, travel: Sequence[BasisPath]) -> None:
        for a, b in zip(travel, travel[1:]):
            if a.target != b.source:
                raise InvalidInputError(
                    f"non-composable chain: {a} ends at {a.target}, {b} starts at {b.source}"
                )

    def mu(self, args: Sequence[BasisPath | LinCombo]) -> LinCombo:
        """μⁿ(x_n, ..., x_1) for args listed in written order."""
        if len(args) < 1:
            raise InvalidInputError("μ needs at least one argument")
        combos = [a if isinstance(a, LinCombo) else LinCombo.of(self.field, a) for a in args]
        out = self.zero()
        for choice in itertools.product(*(list(c) for c in combos)):
            coeff = self.field.one
            for _, c in choice:
                coeff *= c
            value = self.mu_basis(tuple(path for path, _ in reversed(choice)))
            if value:
                out = out + value.scale(coeff)
        return out

    def mu_basis(self, travel: tuple[BasisPath, ...]) -> LinCombo:
        """μⁿ on basis paths given in travel order (x_1 first)."""
        self._check_chain(travel)
        if travel not in self._cache:
            self._cache[travel] = self._evaluate(travel)
        return self._cache[travel]

    def _evaluate(self, travel: tuple[BasisPath, ...]) -> LinCombo:
        K = self.field
        n = len(travel)
        if n == 1:
            return self.zero()
        if n == 2:
            a, b = travel
            product = concat(self.p, a, b)
            if product is None:
                return self.zero()
            sign = _mu2_sign(a.degree)
            return LinCombo.of(K, product, sign)
        if any(x.is_identity for x in travel):
            return self.zero()
        x1, xn = travel[0], travel[-1]
        for a1 in self._first.get(travel[1:], ()):
            k = len(a1)
            if k <= len(x1) and x1.arrows[-k:] == a1.arrows:
                b = self._prefix(x1, len(x1) - k)
                return LinCombo.of(K, b, K.sign(b.degree))
        for an in self._last.get(travel[:-1], ()):
            k = len(an)
            if k <= len(xn) and xn.arrows[:k] == an.arrows:
                return LinCombo.of(K, self._suffix(xn, len(xn) - k))
        return self.zero()

    def _prefix(self, x: BasisPath, k: int) -> BasisPath:
        if k == 0:
            return self.p.identity(x.source)
        names = x.arrows[:k]
        return BasisPath(
            x.source,
            self.p.arrow(names[-1]).target,
            names,
            sum(self.p.arrow(a).degree for a in names),
        )

    def _suffix(self, x: BasisPath, k: int) -> BasisPath:
        if k == 0:
            return self.p.identity(x.target)
        names = x.arrows[len(x) - k :]
        return BasisPath(
            self.p.arrow(names[0]).source,
            x.target,
            names,
            sum(self.p.arrow(a).degree for a in names),
        )

    def factorizations(self, travel: tuple[BasisPath, ...]) -> int:
        """Number of ways the tuple completes to a disk sequence (at most one each form)."""
        x1, xn = travel[0], travel[-1]
        first = sum(
            1
            for a1 in self._first.get(travel[1:], ())
            if len(a1) <= len(x1) and x1.arrows[-len(a1) :] == a1.arrows
        )
        last = sum(
            1
            for an in self._last.get(travel[:-1], ())
            if len(an) <= len(xn) and xn.arrows[: len(an)] == an.arrows
        )
        return max(first, last)

    # -- A∞ relations ----------------------------------------------------------

    def relation(self, travel: tuple[BasisPath, ...]) -> LinCombo:
        """Left side of the A∞ relation on x_1..x_n (travel order); zero when it holds."""
        K = self.field
        n = len(travel)
        total = self.zero()
        for j in range(2, n):
            for k in range(0, n - j + 1):
                inner = self.mu_basis(travel[k : k + j])
                if not inner:
                    continue
                sign = K.sign(sum(x.reduced_degree for x in travel[:k]))
                for path, c in inner:
                    outer = self.mu_basis(travel[:k] + (path,) + travel[k + j :])
                    if outer:
                        total = total + outer.scale(sign * c)
        return total

    def composable_tuples(self, paths: Sequence[BasisPath], length: int) -> Iterator[tuple]:
        by_source: dict[str, list[BasisPath]] = defaultdict(list)
        for path in paths:
            by_source[path.source].append(path)

        def extend(prefix: tuple[BasisPath, ...]) -> Iterator[tuple]:
            if len(prefix) == length:
                yield prefix
                return
            for nxt in by_source[prefix[-1].target]:
                yield from extend(prefix + (nxt,))

        for path in paths:
            yield from extend((path,))


def mu(
    p: GentlePresentation,
    args: Sequence[BasisPath | LinCombo],
    disks: Iterable[DiskSequence] = (),
    K: Field | None = None,
) -> LinCombo:
    return Products(p, disks, K).mu(args)


def verify_a_infinity(
    p: GentlePresentation,
    disks: Iterable[DiskSequence] = (),
    max_len: int = 6,
    K: Field | None = None,
    max_arrows: int = 2,
) -> bool:
    """Check the A∞ relations on every composable tuple of up to ``max_len`` paths.

    Paths of at most ``max_arrows`` arrows (and identities) are used as inputs.
    """
    if max_len < 1:
        raise InvalidInputError("max_len must be >= 1")
    products = Products(p, disks, K)
    paths = all_paths(p, max_arrows=max_arrows)
    checked = 0
    for n in range(3, max_len + 1):
        for travel in products.composable_tuples(paths, n):
            checked += 1
            if products.relation(travel):
                logger.debug("A∞ relation fails on %s", [str(x) for x in travel])
                return False
    logger.debug("A∞ relations hold on %d tuples", checked)
    return True


# -- resolution of the diagonal --------------------------------------------------


@dataclass(frozen=True)
class BimoduleRankTable:
    """Dimensions of M_n and ranks of f_n per (source, target, weight)."""

    n: int
    dims: Mapping[tuple[str, str, int], int]
    ranks: Mapping[tuple[str, str, int], int]

    @property
    def total(self) -> int:
        return sum(self.dims.values())


def relation_chains(p: GentlePresentation, n: int) -> list[tuple[str, ...]]:
    """Arrow chains α_1..α_n with every (α_i, α_{i+1}) a relation."""
    if n == 0:
        return []
    chains = [(a.name,) for a in p.arrows]
    for _ in range(n - 1):
        chains = [c + (b,) for c in chains for (a, b) in p.relations if a == c[-1]]
    return chains


class _Resolution:
    def __init__(self, p: GentlePresentation, weight: int, K: Field) -> None:
        self.p = p
        self.weight = weight
        self.field = K
        self.paths = all_paths(p, max_arrows=weight)
        self.ending: dict[str, list[BasisPath]] = defaultdict(list)
        self.starting: dict[str, list[BasisPath]] = defaultdict(list)
        for path in self.paths:
            self.ending[path.target].append(path)
            self.starting[path.source].append(path)

    def basis(self, n: int) -> dict[tuple[str, str, int], list[tuple]]:
        """Basis of M_n graded by (source, target, weight); n = -1 is A itself."""
        graded: dict[tuple[str, str, int], list[tuple]] = defaultdict(list)
        if n == -1:
            for path in self.paths:
                graded[(path.source, path.target, len(path))].append((path,))
            return graded
        if n == 0:
            items = [((v,), v, v) for v in self.p.vertices]
        else:
            items = [
                (c, self.p.arrow(c[0]).source, self.p.arrow(c[-1]).target)
                for c in relation_chains(self.p, n)
            ]
        for chain, left, right in items:
            length = 0 if n == 0 else n
            for a in self.ending[left]:
                for b in self.starting[right]:
                    w = len(a) + len(b) + length
                    if w <= self.weight:
                        graded[(a.source, b.target, w)].append((a, chain, b))
        return graded

    def _one(self, name: str) -> BasisPath:
        a = self.p.arrow(name)
        return BasisPath(a.source, a.target, (name,), a.degree)

    def image(self, n: int, element: tuple) -> list[tuple[tuple, Any]]:
        K = self.field
        if n == 0:
            a, _, b = element
            ab = concat(self.p, a, b)
            return [] if ab is None else [((ab,), K.one)]
        a, chain, b = element
        out = []
        left = concat(self.p, a, self._one(chain[0]))
        rest = chain[1:] if n > 1 else (self.p.arrow(chain[0]).target,)
        if left is not None:
            out.append(((left, rest, b), K.one))
        right = concat(self.p, self._one(chain[-1]), b)
        head = chain[:-1] if n > 1 else (self.p.arrow(chain[0]).source,)
        if right is not None:
            out.append(((a, head, right), K.sign(n)))
        return out

    def matrix(self, n: int, key, source: list[tuple], target: list[tuple]):
        K = self.field
        index = {t: i for i, t in enumerate(target)}
        rows = [[K.zero] * len(source) for _ in target]
        for j, element in enumerate(source):
            for image, c in self.image(n, element):
                rows[index[image]][j] += c
        return linalg.DomainMatrix(rows, (len(target), len(source)), K.domain)


def diagonal_resolution(
    p: GentlePresentation, n_max: int, K: Field | None = None
) -> list[BimoduleRankTable]:
    """Rank tables of f_n: M_n -> M_{n-1} for n = 0..n_max, weights up to n_max."""
    K = K or linalg.field("q")
    res = _Resolution(p, n_max, K)
    bases = {n: res.basis(n) for n in range(-1, n_max + 1)}
    tables = []
    for n in range(0, n_max + 1):
        dims, ranks = {}, {}
        for key, source in bases[n].items():
            dims[key] = len(source)
            m = res.matrix(n, key, source, bases[n - 1].get(key, []))
            ranks[key] = linalg.rank(K, m)
        tables.append(BimoduleRankTable(n, dims, ranks))
    return tables


def resolution_is_complex(p: GentlePresentation, n_max: int, K: Field | None = None) -> bool:
    """f_{n-1}∘f_n = 0 for n = 1..n_max."""
    K = K or linalg.field("q")
    res = _Resolution(p, n_max, K)
    bases = {n: res.basis(n) for n in range(-1, n_max + 1)}
    for n in range(1, n_max + 1):
        for key, source in bases[n].items():
            middle = bases[n - 1].get(key, [])
            upper = res.matrix(n, key, source, middle)
            lower = res.matrix(n - 1, key, middle, bases[n - 2].get(key, []))
            if not linalg.is_zero(linalg.matmul(K, lower, upper)):
                return False
    return True


def longest_chain(graph: nx.DiGraph) -> int:
    return nx.dag_longest_path_length(graph) + 1 if graph.number_of_nodes() else 0


def check_exact(p: GentlePresentation, n_max: int, K: Field | None = None) -> bool | None:
    """Exactness of M_• -> A -> 0 in every weight up to ``n_max``.

    False on a failure. True when every weight that can carry a nonzero term is
    covered; otherwise None (inconclusive).
    """
    tables = diagonal_resolution(p, n_max, K)
    K = K or linalg.field("q")
    res = _Resolution(p, n_max, K)
    algebra = res.basis(-1)
    keys = set(algebra)
    for table in tables:
        keys |= set(table.dims)
    for key in keys:
        dim_a = len(algebra.get(key, []))
        if tables[0].ranks.get(key, 0) != dim_a:
            logger.debug("f_0 not onto A in degree %s", key)
            return False
        for n in range(0, n_max + 1):
            dim = tables[n].dims.get(key, 0)
            incoming = tables[n + 1].ranks.get(key, 0) if n < n_max else 0
            if dim != tables[n].ranks.get(key, 0) + incoming:
                logger.debug("resolution not exact at M_%d in degree %s", n, key)
                return False
    if not (is_smooth(p) and is_proper(p)):
        return None
    stable = 2 * (longest_chain(_continuation_graph(p))) + longest_chain(_relation_graph(p))
    return True if n_max >= stable else None


# -- JSON ------------------------------------------------------------------------


def presentation_to_dict(p: GentlePresentation, disks: Sequence[DiskSequence] = ()) -> dict:
    return {
        "format": FORMAT,
        "vertices": list(p.vertices),
        "arrows": [
            {
                "name": a.name,
                "source": a.source,
                "target": a.target,
                "degree": a.degree,
                "start_half": a.start_half,
                "end_half": a.end_half,
            }
            for a in p.arrows
        ],
        "relations": sorted([list(r) for r in p.relations]),
        "disks": [[list(c.arrows) for c in d.corners] for d in disks],
    }


def presentation_from_dict(doc: Mapping[str, Any]) -> tuple[GentlePresentation, list[DiskSequence]]:
    if doc.get("format", FORMAT) != FORMAT:
        raise FormatError(f"expected format {FORMAT}, got {doc.get('format')!r}", "format")
    try:
        arrows = tuple(
            Arrow(
                str(a["name"]),
                str(a["source"]),
                str(a["target"]),
                int(a.get("degree", 0)),
                a.get("start_half"),
                a.get("end_half"),
            )
            for a in doc["arrows"]
        )
        p = GentlePresentation(
            tuple(str(v) for v in doc["vertices"]),
            arrows,
            frozenset((str(a), str(b)) for a, b in doc.get("relations", [])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed presentation ({exc})", "arrows") from exc
    names = {a.name for a in arrows}
    for i, (a, b) in enumerate(p.relations):
        if a not in names or b not in names:
            raise FormatError(f"relation ({a}, {b}) names an unknown arrow", f"relations[{i}]")
    disks = []
    for i, raw in enumerate(doc.get("disks", [])):
        try:
            disks.append(DiskSequence(tuple(p.path(c) for c in raw)))
        except InvalidInputError as exc:
            raise FormatError(str(exc), f"disks[{i}]") from exc
    return p, disks
