"""Graded ribbon graphs: the combinatorial model of a graded marked surface.

A vertex is a polygon of the arc system, an edge is an arc. Each edge has two
half-edges. A half-edge either sits at a vertex (in that vertex's cyclic order)
or is free, meaning the arc ends on marked boundary with no polygon on that
side. Edges flagged ``boundary`` are boundary arcs of the surface: they cut out
polygons but are not objects of the category.

Boundary components are the cycles of φ = σ∘ι, where ι swaps the two halves of
an edge and σ rotates a half-edge to its successor at its vertex (σ fixes free
halves).
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import networkx as nx

from fukayagen.errors import FormatError, InvalidInputError, PreconditionError

logger = logging.getLogger(__name__)

FORMAT = "surface.v1"


@dataclass(frozen=True)
class HalfEdge:
    id: str
    edge: str
    vertex: str | None
    degree: int


@dataclass(frozen=True)
class Issue:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self) -> str:
        return "\n".join(str(i) for i in self.issues) if self.issues else "ok"


@dataclass(frozen=True)
class SurfaceInvariants:
    num_faces: int
    num_boundary_components: int
    euler_char: int
    genus: int
    num_unmarked: int = 0


@dataclass(frozen=True, eq=False)
class GradedRibbonGraph:
    """Immutable ribbon graph with half-edge degrees d(h).

    vertices: vertex id -> half-edge ids in cyclic order
    edges: edge id -> (half, half)
    degrees: half-edge id -> d(h); only half-edges at vertices carry meaning
    boundary: ids of edges that are boundary arcs (not objects)
    unmarked: half-edge ids naming boundary cycles that are unmarked circles
    """

    vertices: Mapping[str, tuple[str, ...]]
    edges: Mapping[str, tuple[str, str]]
    degrees: Mapping[str, int]
    boundary: frozenset[str] = frozenset()
    unmarked: frozenset[str] = frozenset()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- incidence -------------------------------------------------------------

    def _index(self) -> dict[str, Any]:
        if "index" not in self._cache:
            vertex_of: dict[str, str] = {}
            succ: dict[str, str] = {}
            pred: dict[str, str] = {}
            for v, order in self.vertices.items():
                for i, h in enumerate(order):
                    vertex_of[h] = v
                    succ[h] = order[(i + 1) % len(order)]
                    pred[h] = order[i - 1]
            edge_of: dict[str, str] = {}
            other: dict[str, str] = {}
            for e, (a, b) in self.edges.items():
                edge_of[a], edge_of[b] = e, e
                other[a], other[b] = b, a
            self._cache["index"] = dict(
                vertex_of=vertex_of, succ=succ, pred=pred, edge_of=edge_of, other=other
            )
        return self._cache["index"]

    def vertex_of(self, h: str) -> str | None:
        return self._index()["vertex_of"].get(h)

    def edge_of(self, h: str) -> str:
        return self._index()["edge_of"][h]

    def other(self, h: str) -> str:
        return self._index()["other"][h]

    def succ(self, h: str) -> str:
        return self._index()["succ"].get(h, h)

    def pred(self, h: str) -> str:
        return self._index()["pred"].get(h, h)

    def degree(self, h: str) -> int:
        return int(self.degrees.get(h, 0))

    def is_boundary(self, e: str) -> bool:
        return e in self.boundary

    @property
    def arcs(self) -> list[str]:
        """Edges that are objects, in declaration order."""
        return [e for e in self.edges if e not in self.boundary]

    def half_edges(self) -> list[HalfEdge]:
        return [
            HalfEdge(h, e, self.vertex_of(h), self.degree(h))
            for e, halves in self.edges.items()
            for h in halves
        ]

    def boundary_cycles(self) -> list[tuple[str, ...]]:
        """Cycles of φ = σ∘ι, each starting at its first half-edge in edge order."""
        if "cycles" not in self._cache:
            seen: set[str] = set()
            cycles = []
            for h in (h for halves in self.edges.values() for h in halves):
                if h in seen:
                    continue
                cycle = []
                x = h
                while x not in seen:
                    seen.add(x)
                    cycle.append(x)
                    x = self.succ(self.other(x))
                cycles.append(tuple(cycle))
            self._cache["cycles"] = cycles
        return self._cache["cycles"]

    def nx_graph(self) -> nx.MultiGraph:
        """Underlying graph: vertices plus one node per free half-edge."""
        graph = nx.MultiGraph()
        graph.add_nodes_from(self.vertices)
        for e, (a, b) in self.edges.items():
            ends = [self.vertex_of(a) or f"free:{a}", self.vertex_of(b) or f"free:{b}"]
            graph.add_edge(ends[0], ends[1], key=e)
        return graph

    def relabeled(self, mapping: Mapping[str, str]) -> "GradedRibbonGraph":
        """Rename half-edges (ids missing from mapping are kept)."""

        def m(h: str) -> str:
            return mapping.get(h, h)

        return GradedRibbonGraph(
            vertices={v: tuple(m(h) for h in order) for v, order in self.vertices.items()},
            edges={e: (m(a), m(b)) for e, (a, b) in self.edges.items()},
            degrees={m(h): d for h, d in self.degrees.items()},
            boundary=self.boundary,
            unmarked=frozenset(m(h) for h in self.unmarked),
        )


# -- validation and invariants ---------------------------------------------------


def validate(g: GradedRibbonGraph) -> ValidationReport:
    """Every violated invariant, with its location. Never raises."""
    issues: list[Issue] = []
    owner: dict[str, str] = {}
    for e, halves in g.edges.items():
        if len(halves) != 2 or halves[0] == halves[1]:
            issues.append(Issue(f"edge {e}", "must have exactly two distinct half-edges"))
            continue
        for h in halves:
            if h in owner:
                issues.append(Issue(f"half-edge {h}", f"shared by edges {owner[h]} and {e}"))
            owner[h] = e
    placed: dict[str, str] = {}
    for v, order in g.vertices.items():
        if not order:
            issues.append(Issue(f"vertex {v}", "has no half-edges"))
        for h in order:
            if h not in owner:
                issues.append(Issue(f"vertex {v}", f"half-edge {h} belongs to no edge"))
            if h in placed:
                issues.append(
                    Issue(f"vertex {v}", f"half-edge {h} also appears at vertex {placed[h]}")
                )
            placed[h] = v
        if len(set(order)) != len(order):
            issues.append(Issue(f"vertex {v}", "cyclic order repeats a half-edge"))
        missing = [h for h in order if h not in g.degrees]
        if missing:
            issues.append(Issue(f"vertex {v}", f"no degree for {', '.join(missing)}"))
        total = sum(int(g.degrees.get(h, 0)) for h in order)
        if total != len(order) - 2:
            issues.append(
                Issue(f"vertex {v}", f"degree sum {total} != valence - 2 = {len(order) - 2}")
            )
    for e, halves in g.edges.items():
        if len(halves) == 2 and not any(h in placed for h in halves):
            issues.append(Issue(f"edge {e}", "is not attached to any vertex"))
    for e in g.boundary:
        if e not in g.edges:
            issues.append(Issue(f"edge {e}", "flagged boundary but not declared"))
    for h in g.degrees:
        if h not in owner:
            issues.append(Issue(f"half-edge {h}", "has a degree but belongs to no edge"))
    for h in g.unmarked:
        if h not in owner:
            issues.append(Issue(f"half-edge {h}", "marked unmarked but belongs to no edge"))
    return ValidationReport(tuple(issues))


def _require_valid(g: GradedRibbonGraph) -> None:
    report = validate(g)
    if not report.ok:
        raise InvalidInputError(f"invalid ribbon graph: {report.issues[0]}")


def invariants(g: GradedRibbonGraph) -> SurfaceInvariants:
    """Face, boundary and genus counts.

    χ = V' - E + F with V' counting free half-edges as vertices and F the
    φ-cycles; genus sums (2 - χ_c)/2 over components.
    """
    _require_valid(g)
    graph = g.nx_graph()
    cycles = g.boundary_cycles()
    cycle_of = {h: i for i, cycle in enumerate(cycles) for h in cycle}
    euler = graph.number_of_nodes() - graph.number_of_edges() + len(cycles)
    genus = 0
    for component in nx.connected_components(graph):
        edges = {k for _, _, k in graph.subgraph(component).edges(keys=True)}
        faces = {cycle_of[h] for e in edges for h in g.edges[e]}
        chi = len(component) - len(edges) + len(faces)
        genus += (2 - chi) // 2
    unmarked = {cycle_of[h] for h in g.unmarked if h in cycle_of}
    return SurfaceInvariants(
        num_faces=len(g.vertices),
        num_boundary_components=len(cycles),
        euler_char=euler,
        genus=genus,
        num_unmarked=len(unmarked),
    )


def is_full_formal(g: GradedRibbonGraph) -> bool:
    """Every polygon carries exactly one boundary-arc side."""
    _require_valid(g)
    return all(
        sum(1 for h in order if g.edge_of(h) in g.boundary) == 1 for order in g.vertices.values()
    )


def unmarked_arcs(g: GradedRibbonGraph) -> list[str]:
    """Arcs with a half-edge on an unmarked boundary circle."""
    flagged = {i for i, c in enumerate(g.boundary_cycles()) if set(c) & g.unmarked}
    hit = {g.edge_of(h) for i in flagged for h in g.boundary_cycles()[i]}
    return [e for e in g.arcs if e in hit]


# -- canonical form --------------------------------------------------------------


def _encode_from(g: GradedRibbonGraph, start: str) -> tuple:
    labels: dict[str, int] = {}
    entry: dict[str, str] = {}
    queue = deque([start])
    order: list[str] = []
    while queue:
        h = queue.popleft()
        v = g.vertex_of(h)
        if v in entry:
            continue
        entry[v] = h
        order.append(v)
        cyc = g.vertices[v]
        i = cyc.index(h)
        for x in cyc[i:] + cyc[:i]:
            labels.setdefault(x, len(labels))
            y = g.other(x)
            labels.setdefault(y, len(labels))
            if g.vertex_of(y) is not None and g.vertex_of(y) not in entry:
                queue.append(y)
    code = []
    for v in order:
        cyc = g.vertices[v]
        i = cyc.index(entry[v])
        code.append(
            tuple(
                (
                    labels[x],
                    g.degree(x),
                    labels[g.other(x)],
                    g.edge_of(x) in g.boundary,
                    x in g.unmarked,
                    g.other(x) in g.unmarked,
                )
                for x in cyc[i:] + cyc[:i]
            )
        )
    return tuple(code)


def canonical_form(g: GradedRibbonGraph) -> tuple:
    """Label-independent code: minimum BFS encoding per component, sorted."""
    graph = g.nx_graph()
    codes = []
    for component in nx.connected_components(graph):
        starts = [h for v in component if v in g.vertices for h in g.vertices[v]]
        codes.append(min(_encode_from(g, h) for h in starts))
    return tuple(sorted(codes))


def is_isomorphic(g: GradedRibbonGraph, h: GradedRibbonGraph) -> bool:
    return canonical_form(g) == canonical_form(h)


# -- localization ----------------------------------------------------------------


def localize_boundary_arc(g: GradedRibbonGraph, e: str) -> GradedRibbonGraph:
    """Add the boundary arc ``e`` to the marked boundary.

    The half-edges of ``e`` leave their polygons; the predecessor p of a removed
    half h absorbs its angle, d'(p) = d(p) + d(h) - 1. A polygon left with a
    single arc makes that arc null, and the arc is removed the same way at its
    other end. A polygon left with only a boundary arc is kept.
    """
    _require_valid(g)
    if e not in g.edges:
        raise PreconditionError(f"unknown edge {e!r}")
    if e not in g.boundary:
        raise PreconditionError(f"edge {e!r} is an arc, not a boundary arc")
    vertices = {v: list(order) for v, order in g.vertices.items()}
    edges = dict(g.edges)
    degrees = dict(g.degrees)
    boundary = set(g.boundary)
    where = {h: v for v, order in vertices.items() for h in order}

    def drop_edge(x: str) -> None:
        halves = edges.pop(x)
        boundary.discard(x)
        for h in halves:
            drop_half(h, halves)

    def drop_half(h: str, dying: Sequence[str]) -> None:
        v = where.pop(h, None)
        degree = degrees.pop(h, 0)
        if v is None:
            return
        order = vertices[v]
        i = order.index(h)
        if len(order) > 1:
            p = order[i - 1]
            if p not in dying:
                degrees[p] = degrees.get(p, 0) + degree - 1
        order.pop(i)
        if not order:
            del vertices[v]
        elif len(order) == 1 and all(x not in dying for x in order):
            last = order[0]
            x = next(k for k, hs in edges.items() if last in hs)
            if x not in boundary:
                logger.debug("arc %s became null after localizing, removing it", x)
                del vertices[v]
                where.pop(last, None)
                degrees.pop(last, None)
                halves = edges.pop(x)
                drop_half(halves[0] if halves[1] == last else halves[1], halves)

    drop_edge(e)
    live = {h for hs in edges.values() for h in hs}
    return GradedRibbonGraph(
        vertices={v: tuple(o) for v, o in vertices.items()},
        edges=edges,
        degrees={h: d for h, d in degrees.items() if h in live},
        boundary=frozenset(boundary),
        unmarked=frozenset(h for h in g.unmarked if h in live),
    )


# -- builders --------------------------------------------------------------------


def linear_tree(n: int, arrow_degrees: Sequence[int] | None = None) -> GradedRibbonGraph:
    """Full formal arc system of the A_n disk: a path of n arcs X1..Xn.

    Each polygon v_i carries one boundary leg B_i; the arrow X_i -> X_{i+1}
    sits at v_i with the given degree (default 0).
    """
    if n < 1:
        raise InvalidInputError("A_n needs n >= 1")
    arrow_degrees = list(arrow_degrees or [0] * (n - 1))
    if len(arrow_degrees) != n - 1:
        raise InvalidInputError(f"A_{n} has {n - 1} arrows, got {len(arrow_degrees)} degrees")
    vertices: dict[str, tuple[str, ...]] = {}
    edges: dict[str, tuple[str, str]] = {}
    degrees: dict[str, int] = {}
    for i in range(1, n + 1):
        edges[f"X{i}"] = (f"X{i}-", f"X{i}+")
    for i in range(n + 1):
        edges[f"B{i}"] = (f"B{i}v", f"B{i}o")
        if i == 0:
            vertices["v0"] = ("X1-", "B0v")
            degrees.update({"X1-": 0, "B0v": 0})
        elif i == n:
            vertices[f"v{n}"] = (f"X{n}+", f"B{n}v")
            degrees.update({f"X{n}+": 0, f"B{n}v": 0})
        else:
            k = arrow_degrees[i - 1]
            vertices[f"v{i}"] = (f"X{i}+", f"X{i + 1}-", f"B{i}v")
            degrees.update({f"X{i}+": k, f"X{i + 1}-": 0, f"B{i}v": 1 - k})
    return GradedRibbonGraph(
        vertices, edges, degrees, boundary=frozenset(f"B{i}" for i in range(n + 1))
    )


def disk_polygon(
    n: int, degrees: Sequence[int] | None = None, boundary_sides: Iterable[int] = ()
) -> GradedRibbonGraph:
    """One n-gon whose sides E1..En end on marked boundary outside the polygon.

    degrees[k] is d at side E_{k+1}, i.e. the degree of the corner E_{k+1} -> E_{k+2};
    default: 1 on the first n-2 corners, 0 on the last two.
    """
    if n < 1:
        raise InvalidInputError("polygon needs at least one side")
    degrees = list(degrees) if degrees is not None else [1] * (n - 2) + [0] * min(n, 2)
    if len(degrees) != n or sum(degrees) != n - 2:
        raise InvalidInputError(f"{n}-gon needs {n} degrees summing to {n - 2}")
    sides = [f"E{k}" for k in range(1, n + 1)]
    return GradedRibbonGraph(
        vertices={"p": tuple(f"{s}i" for s in sides)},
        edges={s: (f"{s}i", f"{s}o") for s in sides},
        degrees={f"{s}i": d for s, d in zip(sides, degrees)},
        boundary=frozenset(sides[k - 1] for k in boundary_sides),
    )


def annulus(p: int, q: int, arrow_degrees: Sequence[int] | None = None) -> GradedRibbonGraph:
    """Ã(p, q): a cycle of p + q arcs, p arrows turning one way and q the other."""
    if p < 1 or q < 1:
        raise InvalidInputError("Ã(p,q) needs p, q >= 1")
    m = p + q
    arrow_degrees = list(arrow_degrees or [0] * m)
    vertices: dict[str, tuple[str, ...]] = {}
    edges = {f"X{i}": (f"X{i}a", f"X{i}b") for i in range(m)}
    degrees: dict[str, int] = {}
    for i in range(m):
        j = (i + 1) % m
        here, there = f"X{i}b", f"X{j}a"
        source, target = (here, there) if i < p else (there, here)
        k = arrow_degrees[i]
        vertices[f"u{i}"] = (source, target, f"B{i}v")
        edges[f"B{i}"] = (f"B{i}v", f"B{i}o")
        degrees.update({source: k, target: 0, f"B{i}v": 1 - k})
    return GradedRibbonGraph(
        vertices, edges, degrees, boundary=frozenset(f"B{i}" for i in range(m))
    )


def torus_two_loops() -> GradedRibbonGraph:
    """One vertex with two interleaved loops: a genus one surface."""
    return GradedRibbonGraph(
        vertices={"v": ("a1", "b1", "a2", "b2")},
        edges={"A": ("a1", "a2"), "B": ("b1", "b2")},
        degrees={"a1": 1, "b1": 1, "a2": 0, "b2": 0},
    )


def random_graph(rng, max_arcs: int = 8, max_tries: int = 200) -> GradedRibbonGraph:
    """Connected valid graph whose arcless-boundary polygons have at least 3 sides."""
    for _ in range(max_tries):
        k = int(rng.integers(1, 4))
        valences = [int(rng.integers(2, 5)) for _ in range(k)]
        halves = [f"h{v}_{i}" for v in range(k) for i in range(valences[v])]
        rng.shuffle(halves)
        vertices: dict[str, list[str]] = {f"p{v}": [] for v in range(k)}
        for h in sorted(halves):
            vertices["p" + h[1:].split("_")[0]].append(h)
        edges: dict[str, tuple[str, str]] = {}
        boundary: set[str] = set()
        pool = list(halves)
        count = 0
        while pool:
            count += 1
            name = f"E{count}"
            a = pool.pop()
            if pool and rng.random() < 0.4:
                edges[name] = (a, pool.pop())
            else:
                edges[name] = (a, f"{a}o")
                if rng.random() < 0.5:
                    boundary.add(name)
        edge_of = {h: e for e, hs in edges.items() for h in hs}
        for v, order in vertices.items():
            if len(order) < 3 and not any(edge_of[h] in boundary for h in order):
                free = [edge_of[h] for h in order if edges[edge_of[h]][1].endswith("o")]
                if free:
                    boundary.add(free[0])
        if len(edges) - len(boundary) > max_arcs or len(edges) == len(boundary):
            continue
        degrees: dict[str, int] = {}
        for v, order in vertices.items():
            values = [int(rng.integers(-1, 2)) for _ in order[:-1]]
            values.append(len(order) - 2 - sum(values))
            degrees.update(zip(order, values))
        g = GradedRibbonGraph(
            {v: tuple(o) for v, o in vertices.items()}, edges, degrees, frozenset(boundary)
        )
        if not validate(g).ok or not nx.is_connected(g.nx_graph()):
            continue
        if any(
            len(o) < 3 and not any(g.edge_of(h) in boundary for h in o)
            for o in g.vertices.values()
        ):
            continue
        return g
    raise RuntimeError(f"no valid random graph after {max_tries} tries")


# -- JSON ------------------------------------------------------------------------


def to_dict(g: GradedRibbonGraph) -> dict[str, Any]:
    return {
        "format": FORMAT,
        "vertices": {v: list(order) for v, order in g.vertices.items()},
        "edges": [
            {"id": e, "halves": list(hs), "boundary": e in g.boundary}
            for e, hs in g.edges.items()
        ],
        "degrees": dict(g.degrees),
        "unmarked": sorted(g.unmarked),
    }


def from_dict(doc: Mapping[str, Any]) -> GradedRibbonGraph:
    if doc.get("format", FORMAT) != FORMAT:
        raise FormatError(f"expected format {FORMAT}, got {doc.get('format')!r}", "format")
    try:
        raw_vertices = doc["vertices"]
        if isinstance(raw_vertices, list):
            raw_vertices = {f"v{i}": order for i, order in enumerate(raw_vertices)}
        vertices = {str(v): tuple(str(h) for h in order) for v, order in raw_vertices.items()}
        edges: dict[str, tuple[str, str]] = {}
        boundary = set()
        for i, item in enumerate(doc["edges"]):
            if isinstance(item, Mapping):
                e = str(item.get("id", f"e{i}"))
                a, b = item["halves"]
                if item.get("boundary", False):
                    boundary.add(e)
            else:
                e, (a, b) = f"e{i}", item
            edges[e] = (str(a), str(b))
        degrees = {str(h): int(d) for h, d in doc.get("degrees", {}).items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed surface document ({exc})", "edges/vertices") from exc
    return GradedRibbonGraph(
        vertices,
        edges,
        degrees,
        frozenset(boundary),
        frozenset(str(h) for h in doc.get("unmarked", [])),
    )
