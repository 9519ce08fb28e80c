"""Twisted complexes over a gentle presentation.

A twisted complex is a list of shifted arcs X[s] (one entry per copy, so
multiplicities are expanded) and a matrix δ of boundary-path combinations.
An entry δ[q, p] runs from copy p to copy q and every path in it has degree
1 + s_q - s_p. Shifted objects use μ_Σ(x_n, ..., x_1) = (-1)^{s_0} μ(x_n, ..., x_1)
where s_0 is the shift of the first source, and the products of twisted
complexes insert δ in every slot.
"""

from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

from fukayagen import linalg
from fukayagen.errors import FormatError, InvalidInputError, PreconditionError
from fukayagen.gentle import (
    BasisPath,
    LinCombo,
    Products,
    concat,
    hom_basis,
    is_proper,
    presentation_from_dict,
)

logger = logging.getLogger(__name__)

FORMAT = "twcx.v1"
MAX_INVERSE_TERMS = 64

Entries = dict[tuple[int, int], LinCombo]


@dataclass(frozen=True)
class Summand:
    arc: str
    shift: int


@dataclass(eq=False)
class TwistedComplex:
    category: Products
    summands: tuple[Summand, ...]
    delta: Entries = field(default_factory=dict)

    def __post_init__(self) -> None:
        p = self.category.p
        self.summands = tuple(self.summands)
        self.delta = {k: v for k, v in self.delta.items() if v}
        for s in self.summands:
            if s.arc not in p.vertices:
                raise InvalidInputError(f"summand on unknown arc {s.arc!r}")
        for (q, r), combo in self.delta.items():
            if not (0 <= q < len(self.summands) and 0 <= r < len(self.summands)) or q == r:
                raise InvalidInputError(f"δ entry ({q}, {r}) is out of range or diagonal")
            _check_entry(self.summands[r], self.summands[q], combo, 1, f"δ[{q},{r}]")

    def __len__(self) -> int:
        return len(self.summands)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, TwistedComplex)
            and other.category is self.category
            and other.summands == self.summands
            and other.delta == self.delta
        )

    @property
    def field(self):
        return self.category.field

    def out_entries(self) -> dict[int, list[tuple[int, LinCombo]]]:
        out: dict[int, list[tuple[int, LinCombo]]] = defaultdict(list)
        for (q, r), combo in self.delta.items():
            out[r].append((q, combo))
        return out


@dataclass(eq=False)
class TwMorphism:
    source: TwistedComplex
    target: TwistedComplex
    entries: Entries
    degree: int

    def __post_init__(self) -> None:
        self.entries = {k: v for k, v in self.entries.items() if v}
        for (q, r), combo in self.entries.items():
            _check_entry(
                self.source.summands[r], self.target.summands[q], combo, self.degree, f"[{q},{r}]"
            )

    def __bool__(self) -> bool:
        return bool(self.entries)


def _check_entry(src: Summand, dst: Summand, combo: LinCombo, degree: int, where: str) -> None:
    for path, _ in combo:
        if path.source != src.arc or path.target != dst.arc:
            raise InvalidInputError(f"{where}: path {path} does not run {src.arc} -> {dst.arc}")
        if path.degree != degree + dst.shift - src.shift:
            raise InvalidInputError(
                f"{where}: path {path} has degree {path.degree}, "
                f"expected {degree + dst.shift - src.shift}"
            )


# -- constructors ----------------------------------------------------------------


def single(category: Products, arc: str, shift: int = 0) -> TwistedComplex:
    return TwistedComplex(category, (Summand(arc, shift),))


def shift(t: TwistedComplex, n: int) -> TwistedComplex:
    return TwistedComplex(
        t.category, tuple(Summand(s.arc, s.shift + n) for s in t.summands), dict(t.delta)
    )


def permuted(t: TwistedComplex, order: Sequence[int]) -> TwistedComplex:
    """Same complex with copy ``order[i]`` moved to position i."""
    new = {old: i for i, old in enumerate(order)}
    return TwistedComplex(
        t.category,
        tuple(t.summands[i] for i in order),
        {(new[q], new[r]): c for (q, r), c in t.delta.items()},
    )


def direct_sum(*ts: TwistedComplex) -> TwistedComplex:
    if not ts:
        raise InvalidInputError("direct sum of nothing")
    summands: list[Summand] = []
    delta: Entries = {}
    for t in ts:
        if t.category is not ts[0].category:
            raise InvalidInputError("direct sum across different categories")
        base = len(summands)
        summands.extend(t.summands)
        delta.update({(q + base, r + base): c for (q, r), c in t.delta.items()})
    return TwistedComplex(ts[0].category, tuple(summands), delta)


def unit(t: TwistedComplex) -> TwMorphism:
    """Identity morphism of t; on X[s] it is (-1)^s times the identity path."""
    K = t.field
    p = t.category.p
    entries = {
        (i, i): LinCombo.of(K, p.identity(s.arc), K.sign(s.shift))
        for i, s in enumerate(t.summands)
    }
    return TwMorphism(t, t, entries, 0)


def morphism(
    source: TwistedComplex, target: TwistedComplex, entries: Mapping, degree: int = 0
) -> TwMorphism:
    return TwMorphism(source, target, dict(entries), degree)


def cone(f: TwMorphism) -> TwistedComplex:
    """source[1] ⊕ target with δ assembled from δ_source, δ_target and f."""
    if f.degree != 0:
        raise PreconditionError(f"cone needs a degree 0 morphism, got degree {f.degree}")
    if not is_closed(f):
        raise PreconditionError("cone of a morphism that is not closed")
    t1, t2 = f.source, f.target
    base = len(t1)
    delta: Entries = dict(t1.delta)
    delta.update({(q + base, r + base): c for (q, r), c in t2.delta.items()})
    delta.update({(q + base, r): c for (q, r), c in f.entries.items()})
    return TwistedComplex(
        t1.category, tuple(Summand(s.arc, s.shift + 1) for s in t1.summands) + t2.summands, delta
    )


def disk_tower(category: Products, disk_index: int = 0) -> TwistedComplex:
    """E_1 -> E_2 -> ... -> E_{n-1} along the first n-2 corners of a disk sequence.

    The shifts are s_1 = 0, s_{i+1} = s_i + |a_i| - 1.
    """
    disk = category.disks[disk_index]
    corners = disk.corners
    if len(corners) < 3 or any(len(c) != 1 for c in corners):
        raise PreconditionError("disk tower needs an embedded polygon with at least 3 corners")
    summands = [Summand(corners[0].source, 0)]
    delta: Entries = {}
    for i, a in enumerate(corners[:-2]):
        summands.append(Summand(a.target, summands[-1].shift + a.degree - 1))
        delta[(i + 1, i)] = LinCombo.of(category.field, a)
    return TwistedComplex(category, tuple(summands), delta)


# -- A∞ structure of Tw ----------------------------------------------------------


def _tw_mu(
    complexes: Sequence[TwistedComplex],
    morphisms: Sequence[Entries],
    starts: Iterable[int] | None = None,
) -> Entries:
    """μ^k over twisted complexes C_0..C_k with f_i: C_{i-1} -> C_i.

    Sums μ_Σ over every chain that interleaves δ entries of C_i with the f's.
    Only chains leaving the copies ``starts`` of C_0 are summed when given.
    """
    category = complexes[0].category
    K = category.field
    k = len(morphisms)
    adjacency = [t.out_entries() for t in complexes]
    step: list[dict[int, list[tuple[int, LinCombo]]]] = []
    for f in morphisms:
        table: dict[int, list[tuple[int, LinCombo]]] = defaultdict(list)
        for (q, r), combo in f.items():
            table[r].append((q, combo))
        step.append(table)
    out: dict[tuple[int, int], LinCombo] = defaultdict(lambda: LinCombo(K))

    def walk(i: int, copy: int, travel: tuple[BasisPath, ...], coeff, start: int) -> None:
        if i == k and len(travel) >= 2:
            value = category.mu_basis(travel)
            if value:
                sign = K.sign(complexes[0].summands[start].shift)
                out[(copy, start)] = out[(copy, start)] + value.scale(sign * coeff)
        for nxt, combo in adjacency[i].get(copy, ()):
            for path, c in combo:
                walk(i, nxt, travel + (path,), coeff * c, start)
        if i < k:
            for nxt, combo in step[i].get(copy, ()):
                for path, c in combo:
                    walk(i + 1, nxt, travel + (path,), coeff * c, start)

    if starts is None:
        starts = range(len(complexes[0]))
    for start in starts:
        walk(0, start, (), K.one, start)
    return {key: combo for key, combo in out.items() if combo}


def _graph(t: TwistedComplex) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(len(t)))
    graph.add_edges_from((r, q) for q, r in t.delta)
    return graph


def is_triangular(t: TwistedComplex) -> bool:
    return nx.is_directed_acyclic_graph(_graph(t))


def verify_mc(t: TwistedComplex) -> bool:
    """δ is nilpotent and ∑_k μ^k(δ, ..., δ) vanishes exactly."""
    if not is_triangular(t):
        return False
    curvature = _tw_mu([t], [])
    if curvature:
        logger.debug("Maurer-Cartan fails at %s", sorted(curvature))
    return not curvature


def morphism_differential(f: TwMorphism) -> TwMorphism:
    return TwMorphism(f.source, f.target, _tw_mu([f.source, f.target], [f.entries]), f.degree + 1)


def is_closed(f: TwMorphism) -> bool:
    return not _tw_mu([f.source, f.target], [f.entries])


def compose_morphisms(g: TwMorphism, f: TwMorphism) -> TwMorphism:
    """μ²(g, f) for f: T0 -> T1, g: T1 -> T2."""
    if f.target is not g.source:
        raise InvalidInputError("morphisms do not compose")
    entries = _tw_mu([f.source, f.target, g.target], [f.entries, g.entries])
    return TwMorphism(f.source, g.target, entries, f.degree + g.degree)


# -- Hom complexes ---------------------------------------------------------------


@dataclass
class HomComplex:
    """Graded basis of Hom(t1, t2) and its differential, degree by degree."""

    source: TwistedComplex
    target: TwistedComplex
    basis: dict[int, list[tuple[int, int, BasisPath]]]
    differential: dict[int, Any]

    def cohomology(self) -> dict[int, int]:
        K = self.source.field
        ranks = {d: linalg.rank(K, m) for d, m in self.differential.items()}
        dims = {}
        for d, basis in self.basis.items():
            h = len(basis) - ranks.get(d, 0) - ranks.get(d - 1, 0)
            if h:
                dims[d] = h
        return dict(sorted(dims.items()))


def _elementary(K, r: int, q: int, path: BasisPath) -> Entries:
    return {(q, r): LinCombo.of(K, path)}


def hom_complex(t1: TwistedComplex, t2: TwistedComplex) -> HomComplex:
    category = t1.category
    if t2.category is not category:
        raise InvalidInputError("Hom between complexes over different categories")
    if not is_proper(category.p):
        raise PreconditionError("Hom complexes need a proper presentation")
    basis: dict[int, list[tuple[int, int, BasisPath]]] = defaultdict(list)
    for r, src in enumerate(t1.summands):
        for q, dst in enumerate(t2.summands):
            for path in hom_basis(category.p, src.arc, dst.arc):
                basis[path.degree - dst.shift + src.shift].append((r, q, path))
    K = category.field
    differential = {}
    for d, elements in basis.items():
        target = basis.get(d + 1, [])
        index = {(r, q, path): i for i, (r, q, path) in enumerate(target)}
        rows = [[K.zero] * len(elements) for _ in target]
        for j, (r, q, path) in enumerate(elements):
            image = _tw_mu([t1, t2], [_elementary(K, r, q, path)])
            for (qq, rr), combo in image.items():
                for x, c in combo:
                    rows[index[(rr, qq, x)]][j] += c
        differential[d] = linalg.DomainMatrix(rows, (len(target), len(elements)), K.domain)
    return HomComplex(t1, t2, dict(basis), differential)


def hom_cohomology(t1: TwistedComplex, t2: TwistedComplex) -> dict[int, int]:
    """Graded dimensions of H*(Hom(t1, t2)); degrees with zero dimension are omitted."""
    return hom_complex(t1, t2).cohomology()


# -- minimal models --------------------------------------------------------------


def _concat_combo(category: Products, a: LinCombo, b: LinCombo) -> LinCombo:
    out = LinCombo(category.field)
    for x, c in a:
        for y, e in b:
            xy = concat(category.p, x, y)
            if xy is not None:
                out.add_term(xy, c * e)
    return out


def _path_inverse(category: Products, phi: LinCombo, arc: str) -> LinCombo:
    """Inverse of c·1 + n in the path algebra, n nilpotent."""
    K = category.field
    one = category.p.identity(arc)
    c = phi.coefficient(one)
    nil = LinCombo(K, {x: e for x, e in phi if not x.is_identity})
    step = nil.scale(-K.one / c)
    total = LinCombo.of(K, one)
    power = LinCombo.of(K, one)
    for _ in range(MAX_INVERSE_TERMS):
        power = _concat_combo(category, power, step)
        if not power:
            return total.scale(K.one / c)
        total = total + power
    raise PreconditionError(f"endomorphism of {arc} has a non-nilpotent part")


def _order(graph: nx.DiGraph) -> dict[int, int]:
    return {v: i for i, v in enumerate(nx.topological_sort(graph))}


def _pivot(t: TwistedComplex) -> tuple[int, int] | None:
    order = _order(_graph(t))
    for (q, r), combo in sorted(t.delta.items(), key=lambda kv: (order[kv[0][1]], order[kv[0][0]])):
        arc = t.summands[r].arc
        if t.summands[q].arc == arc and combo.coefficient(t.category.p.identity(arc)):
            return q, r
    return None


def _eliminate_formal(t: TwistedComplex, q: int, p: int) -> TwistedComplex:
    category = t.category
    inverse = _path_inverse(category, t.delta[(q, p)], t.summands[p].arc)
    keep = [i for i in range(len(t)) if i not in (p, q)]
    new = {old: i for i, old in enumerate(keep)}
    delta: Entries = {}
    for (a, b), combo in t.delta.items():
        if a in new and b in new:
            delta[(new[a], new[b])] = combo
    into_q = [(r, c) for (a, r), c in t.delta.items() if a == q and r in new]
    from_p = [(a, c) for (a, r), c in t.delta.items() if r == p and a in new]
    for r, x in into_q:
        xi = _concat_combo(category, x, inverse)
        for a, y in from_p:
            correction = _concat_combo(category, xi, y)
            if correction:
                if a == r:
                    raise RuntimeError(f"elimination produced a diagonal entry at copy {r}")
                key = (new[a], new[r])
                delta[key] = delta.get(key, LinCombo(category.field)) - correction
    return TwistedComplex(category, tuple(t.summands[i] for i in keep), delta)


def _eliminate_with_products(t: TwistedComplex, q: int, p: int) -> TwistedComplex:
    """Cancel copy p against copy q when higher products feed the new δ.

    Solves for δ' on the kept copies together with a closed inclusion
    ι: (kept, δ') -> t that is the unit on every kept copy plus components
    into copy p. Each kept copy is solved after every copy it can reach, and
    the equations at one copy are linear in its own unknowns.
    """
    category = t.category
    K = category.field
    if not is_proper(category.p):
        raise PreconditionError("eliminating with higher products needs a proper presentation")
    merged = nx.contracted_nodes(_graph(t), p, q, self_loops=False)
    if not nx.is_directed_acyclic_graph(merged):
        raise RuntimeError("elimination produced a non-triangular δ")
    order = _order(merged)
    keep = [i for i in range(len(t)) if i not in (p, q)]
    kept = tuple(t.summands[i] for i in keep)
    delta: Entries = {}
    inclusion: Entries = {
        (old, i): LinCombo.of(K, category.p.identity(kept[i].arc), K.sign(kept[i].shift))
        for i, old in enumerate(keep)
    }
    for r in sorted(range(len(keep)), key=lambda i: order[keep[i]], reverse=True):
        src = kept[r]
        unknowns: list[tuple[Entries, tuple[int, int], BasisPath]] = []
        for a, dst in enumerate(kept):
            if order[keep[a]] > order[keep[r]]:
                unknowns.extend(
                    (delta, (a, r), path)
                    for path in hom_basis(category.p, src.arc, dst.arc)
                    if path.degree == 1 + dst.shift - src.shift
                )
        dst = t.summands[p]
        unknowns.extend(
            (inclusion, (p, r), path)
            for path in hom_basis(category.p, src.arc, dst.arc)
            if path.degree == dst.shift - src.shift
        )

        def defect() -> dict[tuple[int, BasisPath], Any]:
            image = _tw_mu([TwistedComplex(category, kept, delta), t], [inclusion], starts=[r])
            return {(copy, x): c for (copy, _), combo in image.items() for x, c in combo}

        base = defect()
        columns = []
        for entries, key, path in unknowns:
            entries[key] = LinCombo.of(K, path)
            columns.append(defect())
            del entries[key]
        rows = list(dict.fromkeys(itertools.chain(base, *columns)))
        lhs = [
            [column.get(key, K.zero) - base.get(key, K.zero) for column in columns]
            for key in rows
        ]
        rhs = [[-base.get(key, K.zero)] for key in rows]
        solution = linalg.solve(
            K,
            linalg.DomainMatrix(lhs, (len(rows), len(unknowns)), K.domain),
            linalg.DomainMatrix(rhs, (len(rows), 1), K.domain),
        )
        if solution is None:
            raise RuntimeError(f"elimination has no solution at copy {keep[r]}")
        for j, (entries, key, path) in enumerate(unknowns):
            c = linalg.entry(solution, j, 0)
            if c:
                entries.setdefault(key, LinCombo(K)).add_term(path, c)
    return TwistedComplex(category, kept, delta)


def minimize(t: TwistedComplex) -> TwistedComplex:
    """Strip identity components of δ by Gaussian elimination.

    With disk sequences present each step also solves for the terms that
    μⁿ, n >= 3, contributes to the new δ. The result is homotopy equivalent
    to t and its δ has no identity coefficients.
    """
    if not is_triangular(t):
        raise InvalidInputError("δ is not triangular")
    eliminate = _eliminate_with_products if t.category.disks else _eliminate_formal
    while (pivot := _pivot(t)) is not None:
        q, p = pivot
        logger.debug("eliminating copies %d -> %d", p, q)
        t = eliminate(t, q, p)
        if not is_triangular(t):
            raise RuntimeError("elimination produced a non-triangular δ")
    return t


# -- isomorphism -----------------------------------------------------------------


def class_vector(t: TwistedComplex) -> dict[str, int]:
    out: dict[str, int] = defaultdict(int)
    for s in t.summands:
        out[s.arc] += -1 if s.shift % 2 else 1
    return {arc: n for arc, n in out.items() if n}


def closed_maps(t1: TwistedComplex, t2: TwistedComplex) -> list[TwMorphism]:
    """Basis of the closed degree-0 maps t1 -> t2."""
    hom = hom_complex(t1, t2)
    K = t1.field
    basis = hom.basis.get(0, [])
    if not basis:
        return []
    d0 = hom.differential.get(0, K.zeros(0, len(basis)))
    kernel = linalg.nullspace(K, d0)
    maps = []
    for j in range(linalg.ncols(kernel)):
        entries: dict[tuple[int, int], LinCombo] = defaultdict(lambda: LinCombo(K))
        for i, (r, q, path) in enumerate(basis):
            c = linalg.entry(kernel, i, j)
            if c:
                entries[(q, r)].add_term(path, c)
        maps.append(TwMorphism(t1, t2, dict(entries), 0))
    return maps


def _linear_combination(maps: Sequence[TwMorphism], coeffs: Sequence) -> TwMorphism:
    K = maps[0].source.field
    entries: dict[tuple[int, int], LinCombo] = defaultdict(lambda: LinCombo(K))
    for f, c in zip(maps, coeffs):
        for key, combo in f.entries.items():
            entries[key] = entries[key] + combo.scale(c)
    return TwMorphism(maps[0].source, maps[0].target, dict(entries), 0)


def _induced_rank_ok(f: TwMorphism, obj: TwistedComplex) -> bool:
    """Whether f_*: H(Hom(obj, t1)) -> H(Hom(obj, t2)) is injective in every degree."""
    K = f.source.field
    h1 = hom_complex(obj, f.source)
    h2 = hom_complex(obj, f.target)
    for d, basis1 in h1.basis.items():
        basis2 = h2.basis.get(d, [])
        index2 = {(r, q, x): i for i, (r, q, x) in enumerate(basis2)}
        cols = []
        for r, q, path in basis1:
            g = TwMorphism(obj, f.source, _elementary(K, r, q, path), d)
            image = compose_morphisms(f, g)
            col = [K.zero] * len(basis2)
            for (qq, rr), combo in image.entries.items():
                for x, c in combo:
                    col[index2[(rr, qq, x)]] += c
            cols.append(col)
        push = linalg.DomainMatrix(
            [[cols[j][i] for j in range(len(cols))] for i in range(len(basis2))],
            (len(basis2), len(cols)),
            K.domain,
        )
        d1 = h1.differential.get(d, K.zeros(0, len(basis1)))
        cycles = linalg.nullspace(K, d1)
        prev1 = h1.differential.get(d - 1)
        prev2 = h2.differential.get(d - 1)
        b1 = linalg.rank(K, prev1) if prev1 is not None else 0
        boundaries2 = prev2 if prev2 is not None else K.zeros(len(basis2), 0)
        rb2 = linalg.rank(K, boundaries2)
        stacked = linalg.hstack(K, len(basis2), linalg.matmul(K, push, cycles), boundaries2)
        if linalg.rank(K, stacked) - rb2 != linalg.ncols(cycles) - b1:
            return False
    return True


def is_isomorphic(
    t1: TwistedComplex, t2: TwistedComplex, tries: int = 8, rng=None
) -> bool:
    """Search for a closed degree-0 map inducing isomorphisms on Hom(X, -) for every arc X.

    Over a prime field with at most 4096 candidate combinations of the closed maps
    the search is exhaustive and both answers are exact. Otherwise ``tries``
    random combinations are drawn from ``rng``: True is still a certificate, but
    False only means none of the draws was an isomorphism.
    """
    if t1.category is not t2.category:
        raise InvalidInputError("complexes over different categories")
    category = t1.category
    objects = [single(category, arc) for arc in category.p.vertices]
    for obj in objects:
        if hom_cohomology(obj, t1) != hom_cohomology(obj, t2):
            return False
    maps = closed_maps(t1, t2)
    if not maps:
        return not any(hom_cohomology(obj, t1) for obj in objects)
    K = category.field
    rng = rng if rng is not None else np.random.default_rng(0)
    if K.is_finite and K.p ** len(maps) <= 4096:
        candidates = itertools.product(K.elements(), repeat=len(maps))
    else:
        candidates = ([K.random(rng) for _ in maps] for _ in range(tries))
    for coeffs in candidates:
        if not any(coeffs):
            continue
        f = _linear_combination(maps, coeffs)
        if all(_induced_rank_ok(f, obj) for obj in objects):
            return True
    return False


# -- JSON ------------------------------------------------------------------------


def to_dict(t: TwistedComplex) -> dict:
    K = t.field
    return {
        "format": FORMAT,
        "summands": [{"arc": s.arc, "shift": s.shift} for s in t.summands],
        "delta": [
            {
                "to": q,
                "from": r,
                "terms": [{"path": list(x.arrows), "coeff": K.format(c)} for x, c in combo],
            }
            for (q, r), combo in sorted(t.delta.items())
        ],
    }


def from_dict(doc: Mapping[str, Any], category: Products | None = None) -> TwistedComplex:
    """Load a complex; ``category`` defaults to an embedded ``presentation`` document."""
    if doc.get("format", FORMAT) != FORMAT:
        raise FormatError(f"expected format {FORMAT}, got {doc.get('format')!r}", "format")
    if category is None:
        if "presentation" not in doc:
            raise FormatError("no presentation given or embedded", "presentation")
        p, disks = presentation_from_dict(doc["presentation"])
        category = Products(p, disks)
    K = category.field
    summands: list[Summand] = []
    try:
        for item in doc["summands"]:
            for _ in range(int(item.get("multiplicity", 1))):
                summands.append(Summand(str(item["arc"]), int(item.get("shift", 0))))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed summand ({exc})", "summands") from exc
    delta: Entries = {}
    for i, entry in enumerate(doc.get("delta", [])):
        try:
            q, r = int(entry["to"]), int(entry["from"])
            combo = LinCombo(K)
            for term in entry["terms"]:
                path = (
                    category.p.path(term["path"])
                    if term["path"]
                    else category.p.identity(summands[r].arc)
                )
                combo.add_term(path, K.convert(str(term.get("coeff", 1))))
        except (KeyError, TypeError, ValueError, IndexError, InvalidInputError) as exc:
            raise FormatError(f"malformed δ entry ({exc})", f"delta[{i}]") from exc
        delta[(q, r)] = delta.get((q, r), LinCombo(K)) + combo
    try:
        return TwistedComplex(category, tuple(summands), delta)
    except InvalidInputError as exc:
        raise FormatError(str(exc), "delta") from exc
