"""String and band words, their twisted complexes, and decomposition into words.

A word alternates arcs X[s] with connectors, each a basis path read forward
(from the previous arc to the next) or backward. A band word closes up and
its last connector carries the local system M; every other connector carries
the identity.

Decomposition goes through nets. Cut the quiver into threads (maximal
relation-free paths, plus trivial ones so that every arc lies on exactly two
thread positions). On a thread with arrows a_1..a_L put the level
c_pos = |a_1| + ... + |a_pos|; a copy X[s] sitting at position pos gets weight
c_pos - s, and δ raises weight by one. Each (thread, weight) is an orbit whose
t-side is filtered by position (later positions lower) and whose k-side is
Im δ ⊂ Ker δ ⊂ V. β glues the two positions of every copy and matches
V/Ker at one weight with Im at the next.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping, NamedTuple, Sequence

import networkx as nx
import numpy as np
from sympy.polys.matrices import DomainMatrix

from fukayagen import linalg, nets
from fukayagen.errors import FormatError, InvalidInputError, PreconditionError
from fukayagen.gentle import LinCombo, Products, all_paths, is_f1, is_proper
from fukayagen.linalg import Field, Scalar
from fukayagen.surface import Issue, ValidationReport
from fukayagen.twcx import (
    Summand,
    TwistedComplex,
    cone,
    direct_sum,
    minimize,
    permuted,
    single,
    unit,
    verify_mc,
)

logger = logging.getLogger(__name__)

WORD_FORMAT = "word.v1"
DECOMPOSITION_FORMAT = "decomposition.v1"
FORWARD = "forward"
BACKWARD = "backward"
KINDS = ("string", "band")


@dataclass(frozen=True, order=True)
class Letter:
    arc: str
    shift: int

    def __str__(self) -> str:
        return f"{self.arc}[{self.shift}]"


@dataclass(frozen=True, order=True)
class Connector:
    arrows: tuple[str, ...]
    direction: str

    def flipped(self) -> "Connector":
        return Connector(self.arrows, BACKWARD if self.direction == FORWARD else FORWARD)

    def __str__(self) -> str:
        path = "·".join(self.arrows)
        return f"-{path}->" if self.direction == FORWARD else f"<-{path}-"


@dataclass(frozen=True)
class CurveWord:
    """A string or band word with its local system.

    Strings carry a multiplicity ``dimension``. Bands carry ``monodromy``, the
    square matrix sitting on the closing connector, as rows of plain scalars.
    """

    kind: str
    letters: tuple[Letter, ...]
    connectors: tuple[Connector, ...] = ()
    dimension: int = 1
    monodromy: tuple[tuple[Scalar, ...], ...] = ()

    @classmethod
    def string(
        cls, letters: Sequence[Letter], connectors: Sequence[Connector] = (), dimension: int = 1
    ) -> "CurveWord":
        return cls("string", tuple(letters), tuple(connectors), dimension)

    @classmethod
    def band(
        cls,
        letters: Sequence[Letter],
        connectors: Sequence[Connector],
        monodromy: Sequence[Sequence[Scalar]],
    ) -> "CurveWord":
        rows = tuple(tuple(row) for row in monodromy)
        return cls("band", tuple(letters), tuple(connectors), len(rows), rows)

    def local_system(self, K: Field) -> DomainMatrix:
        if self.kind == "band":
            return K.matrix(self.monodromy, len(self.monodromy))
        return K.eye(self.dimension)

    def arc_shifts(self) -> list[tuple[str, int]]:
        return [(x.arc, x.shift) for x in self.letters for _ in range(self.dimension)]

    def key(self) -> tuple:
        out: list[Any] = []
        for i, x in enumerate(self.letters):
            out.append(x)
            if i < len(self.connectors):
                out.append(self.connectors[i])
        return tuple(out)

    def reversed(self) -> "CurveWord":
        """The same string read from its other end."""
        if self.kind != "string":
            raise InvalidInputError("only strings reverse letter by letter; use normal_form")
        return CurveWord.string(
            self.letters[::-1], tuple(c.flipped() for c in self.connectors[::-1]), self.dimension
        )

    def normal_form(self, K: Field) -> "CurveWord":
        """Minimal orientation for strings; for bands minimal rotation and
        orientation with the local system in primary rational canonical form."""
        if self.kind == "string":
            return min(self, self.reversed(), key=CurveWord.key)
        n = _walk_monodromy(K, self)
        m = len(self.letters)
        readings = [(self.letters, self.connectors, n)]
        readings.append(
            (
                self.letters[::-1],
                tuple(self.connectors[m - 2 - i].flipped() for i in range(m)),
                linalg.inverse(K, n),
            )
        )
        options = []
        for letters, connectors, walk in readings:
            for r in range(m):
                rotated_letters = letters[r:] + letters[:r]
                rotated_connectors = connectors[r:] + connectors[:r]
                closing = _closing_matrix(K, rotated_letters, rotated_connectors, walk)
                rows = tuple(
                    tuple(row) for row in K.to_python_rows(canonical_local_system(K, closing))
                )
                word = CurveWord.band(rotated_letters, rotated_connectors, rows)
                options.append((word.key(), tuple(map(str, sum(rows, ()))), word))
        return min(options, key=lambda o: (o[0], o[1]))[2]

    def __str__(self) -> str:
        parts = [str(self.letters[0])] if self.letters else []
        for i, c in enumerate(self.connectors):
            nxt = self.letters[(i + 1) % len(self.letters)]
            parts.extend((str(c), str(nxt)))
        text = " ".join(parts)
        if self.kind == "band":
            return f"band {text} M={[list(row) for row in self.monodromy]}"
        return f"string {text}" + (f" ×{self.dimension}" if self.dimension != 1 else "")


@dataclass(frozen=True)
class Decomposition:
    components: tuple[tuple[CurveWord, int], ...] = ()

    @property
    def size(self) -> int:
        return sum(k for _, k in self.components)

    def arc_shifts(self) -> list[tuple[str, int]]:
        return [pair for w, k in self.components for _ in range(k) for pair in w.arc_shifts()]

    def __str__(self) -> str:
        if not self.components:
            return "0"
        return "\n".join(f"{k} × {w}" for w, k in self.components)


# -- local systems ---------------------------------------------------------------


def _scaled(K: Field, m: DomainMatrix, c) -> DomainMatrix:
    return DomainMatrix([[c * x for x in row] for row in linalg.entries(m)], m.shape, K.domain)


def _walk_sign(K: Field, letters: Sequence[Letter], connectors: Sequence[Connector]):
    """Product of (-1)^s over the letters each connector points into."""
    sign = K.one
    for i, c in enumerate(connectors):
        target = (i + 1) % len(letters) if c.direction == FORWARD else i
        sign *= K.sign(letters[target].shift)
    return sign


def _walk_monodromy(K: Field, w: CurveWord) -> DomainMatrix:
    """Transport once around a band in word order, as seen by the thread net."""
    m = w.local_system(K)
    if w.connectors[-1].direction == BACKWARD:
        m = linalg.inverse(K, m)
    return _scaled(K, m, _walk_sign(K, w.letters, w.connectors))


def _closing_matrix(
    K: Field, letters: Sequence[Letter], connectors: Sequence[Connector], walk: DomainMatrix
) -> DomainMatrix:
    """Local system on the closing connector giving walk monodromy ``walk``."""
    m = _scaled(K, walk, _walk_sign(K, letters, connectors))
    return m if connectors[-1].direction == FORWARD else linalg.inverse(K, m)


def canonical_local_system(K: Field, m: DomainMatrix) -> DomainMatrix:
    """Block diagonal of companion matrices, one per elementary divisor."""
    blocks = [
        nets.Band((), q, e).matrix(K) for q, e in nets.elementary_divisors(K, m)
    ]
    n = sum(linalg.nrows(b) for b in blocks)
    rows = [[K.zero] * n for _ in range(n)]
    start = 0
    for block in blocks:
        for i, row in enumerate(linalg.entries(block)):
            rows[start + i][start : start + len(row)] = row
        start += linalg.nrows(block)
    return DomainMatrix(rows, (n, n), K.domain)


# -- validation ------------------------------------------------------------------


def _junction_issue(p, before: Connector, after: Connector) -> str | None:
    """Why two connectors cannot meet at the arc between them, if they cannot."""
    ins: list[tuple[str, ...]] = []
    outs: list[tuple[str, ...]] = []
    (ins if before.direction == FORWARD else outs).append(before.arrows)
    (outs if after.direction == FORWARD else ins).append(after.arrows)
    if len(ins) == 2 and ins[0][-1] == ins[1][-1]:
        return f"both connectors end with {ins[0][-1]}; the word is not reduced"
    if len(outs) == 2 and outs[0][0] == outs[1][0]:
        return f"both connectors start with {outs[0][0]}; the word is not reduced"
    if len(ins) == 1 and not p.is_relation(ins[0][-1], outs[0][0]):
        return f"{ins[0][-1]} then {outs[0][0]} is not a relation, so δ² ≠ 0"
    return None


def validate_word(category: Products, w: CurveWord) -> ValidationReport:
    p, K = category.p, category.field
    if w.kind not in KINDS:
        return ValidationReport((Issue("kind", f"expected string or band, got {w.kind!r}"),))
    issues: list[Issue] = []
    m = len(w.letters)
    expected = m if w.kind == "band" else m - 1
    if m == 0:
        issues.append(Issue("letters", "a word needs at least one letter"))
    elif len(w.connectors) != expected:
        issues.append(
            Issue(
                "connectors",
                f"{len(w.connectors)} connectors for {m} letters, expected {expected}",
            )
        )
    for i, x in enumerate(w.letters):
        if x.arc not in p.vertices:
            issues.append(Issue(f"letters[{i}]", f"unknown arc {x.arc!r}"))
    if issues:
        return ValidationReport(tuple(issues))
    for i, c in enumerate(w.connectors):
        where = f"connectors[{i}]"
        if c.direction not in (FORWARD, BACKWARD):
            issues.append(Issue(where, f"unknown direction {c.direction!r}"))
            continue
        try:
            path = p.path(c.arrows)
        except InvalidInputError as exc:
            issues.append(Issue(where, str(exc)))
            continue
        here, there = w.letters[i], w.letters[(i + 1) % m]
        source, target = (here, there) if c.direction == FORWARD else (there, here)
        if (path.source, path.target) != (source.arc, target.arc):
            issues.append(Issue(where, f"path {path} does not run {source.arc} -> {target.arc}"))
        elif path.degree != 1 + target.shift - source.shift:
            issues.append(
                Issue(
                    where,
                    f"path {path} has degree {path.degree}, "
                    f"the shifts need {1 + target.shift - source.shift}",
                )
            )
    if issues:
        return ValidationReport(tuple(issues))
    junctions = range(m) if w.kind == "band" else range(1, m - 1)
    for i in junctions:
        problem = _junction_issue(p, w.connectors[i - 1], w.connectors[i])
        if problem:
            issues.append(Issue(f"letters[{i}]", problem))
    if w.kind == "string":
        if w.dimension < 1 or w.monodromy:
            issues.append(Issue("dimension", "a string needs a positive dimension only"))
        return ValidationReport(tuple(issues))
    if len({c.direction for c in w.connectors}) == 1:
        issues.append(Issue("connectors", "a band needs connectors in both directions"))
    cycle = list(zip(w.letters, w.connectors))
    for k in range(1, m):
        if m % k == 0 and cycle[k:] + cycle[:k] == cycle:
            issues.append(Issue("letters", f"band repeats every {k} letters"))
            break
    try:
        local = w.local_system(K)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        issues.append(Issue("monodromy", f"not a matrix over {K.name} ({exc})"))
        return ValidationReport(tuple(issues))
    if not w.monodromy or any(len(row) != len(w.monodromy) for row in w.monodromy):
        issues.append(Issue("monodromy", "must be a non-empty square matrix"))
    elif w.dimension != len(w.monodromy) or not linalg.is_invertible(K, local):
        issues.append(Issue("monodromy", "must be invertible of size dimension"))
    return ValidationReport(tuple(issues))


def _require(report: ValidationReport) -> None:
    if not report.ok:
        raise InvalidInputError(f"invalid word: {report.issues[0]}")


# -- words to complexes ----------------------------------------------------------


def word_to_twcx(category: Products, w: CurveWord) -> TwistedComplex:
    """⊕ V ⊗ X_i with δ the connectors; the closing connector of a band carries M."""
    _require(validate_word(category, w))
    K, p = category.field, category.p
    d, m = w.dimension, len(w.letters)
    summands = tuple(Summand(x.arc, x.shift) for x in w.letters for _ in range(d))
    closing = linalg.entries(w.local_system(K)) if w.kind == "band" else None
    delta = {}
    for i, c in enumerate(w.connectors):
        path = p.path(c.arrows)
        nxt = (i + 1) % m
        src, dst = (i, nxt) if c.direction == FORWARD else (nxt, i)
        transport = closing if i == m - 1 and closing is not None else None
        for a in range(d):
            for b in range(d):
                if transport is None:
                    coeff = K.one if a == b else K.zero
                else:
                    coeff = transport[b][a]
                if coeff:
                    key = (dst * d + b, src * d + a)
                    delta[key] = delta.get(key, LinCombo(K)) + LinCombo.of(K, path, coeff)
    t = TwistedComplex(category, summands, delta)
    if not verify_mc(t):
        raise InvalidInputError(f"{w} fails the Maurer-Cartan equation; it bounds a teardrop")
    return t


def reassemble(category: Products, decomposition: Decomposition) -> TwistedComplex:
    pieces = [
        word_to_twcx(category, w) for w, k in decomposition.components for _ in range(k)
    ]
    if not pieces:
        return TwistedComplex(category, ())
    return direct_sum(*pieces)


# -- threads ---------------------------------------------------------------------


@dataclass(frozen=True)
class Thread:
    """Relation-free path; ``levels[pos]`` is the degree of its first ``pos`` arrows."""

    name: str
    vertices: tuple[str, ...]
    arrows: tuple[str, ...]
    levels: tuple[int, ...]


def threads(p) -> list[Thread]:
    """Maximal relation-free paths, then trivial threads until every arc lies on two."""
    following: dict[str, str] = {}
    for a in p.arrows:
        for b in p.outgoing(a.target):
            if not p.is_relation(a.name, b.name):
                following[a.name] = b.name
    starts = [a for a in p.arrows if a.name not in following.values()]
    out: list[Thread] = []
    count: Counter[str] = Counter()
    for a in starts:
        names = [a.name]
        while names[-1] in following:
            names.append(following[names[-1]])
        arrows = [p.arrow(n) for n in names]
        vertices = (arrows[0].source,) + tuple(x.target for x in arrows)
        levels = [0]
        for x in arrows:
            levels.append(levels[-1] + x.degree)
        out.append(Thread(f"d{len(out)}", vertices, tuple(names), tuple(levels)))
        count.update(vertices)
    for v in p.vertices:
        if count[v] > 2:
            raise PreconditionError(f"arc {v} lies on {count[v]} threads; not gentle")
        for _ in range(2 - count[v]):
            out.append(Thread(f"d{len(out)}", (v,), (), (0,)))
    return out


class Label(NamedTuple):
    """Where a net element sits: side kind, thread index, weight, position."""

    kind: str  # "pos", "im", "ker" or "top"
    thread: int
    weight: int
    pos: int | None = None


@dataclass(frozen=True)
class ThreadEmbedding:
    threads: tuple[Thread, ...]
    net: nets.Net
    rep: nets.NetRep
    labels: Mapping[str, Label]

    def letter(self, at: Label) -> Letter:
        th = self.threads[at.thread]
        return Letter(th.vertices[at.pos], th.levels[at.pos] - at.weight)

    def connector(self, out_k: Label, out_pos: Label, in_k: Label, in_pos: Label) -> Connector:
        """Connector read off a β link from the k-side ``out_k`` to ``in_k``."""
        th = self.threads[out_k.thread]
        if (out_k.kind, in_k.kind) == ("top", "im"):
            return Connector(th.arrows[out_pos.pos : in_pos.pos], FORWARD)
        if (out_k.kind, in_k.kind) == ("im", "top"):
            return Connector(th.arrows[in_pos.pos : out_pos.pos], BACKWARD)
        raise RuntimeError(f"unexpected link {out_k.kind} -> {in_k.kind}")


def _name(th: Thread, g: int, tail: str) -> str:
    return f"{th.name}@{g}:{tail}"


def embed(t: TwistedComplex) -> ThreadEmbedding:
    """Net representation of a minimal complex, one orbit per thread and weight."""
    K, p = t.field, t.category.p
    ths = threads(p)
    occurrences: dict[str, list[tuple[int, int]]] = defaultdict(list)
    at_arrow: dict[str, tuple[int, int]] = {}
    for k, th in enumerate(ths):
        for pos, v in enumerate(th.vertices):
            occurrences[v].append((k, pos))
        for pos, a in enumerate(th.arrows):
            at_arrow[a] = (k, pos)
    members: dict[tuple[int, int], list[tuple[int, int]]] = defaultdict(list)
    for c, s in enumerate(t.summands):
        for k, pos in occurrences[s.arc]:
            members[(k, ths[k].levels[pos] - s.shift)].append((pos, c))
    for basis in members.values():
        basis.sort(key=lambda pc: (-pc[0], pc[1]))
    index = {key: {pc: i for i, pc in enumerate(basis)} for key, basis in members.items()}
    seen: dict[int, list[int]] = defaultdict(list)
    for k, g in members:
        seen[k].append(g)
    ranges = {k: range(min(gs), max(gs) + 1) for k, gs in seen.items()}

    raw: dict[tuple[int, int], dict[tuple[int, int], Any]] = defaultdict(dict)
    for (q, r), combo in t.delta.items():
        for path, coeff in combo:
            if path.is_identity:
                raise InvalidInputError(f"δ[{q},{r}] has an identity component; minimize first")
            k, i = at_arrow[path.arrows[0]]
            j = i + len(path)
            if ths[k].arrows[i:j] != path.arrows:
                raise PreconditionError(f"path {path} leaves its thread; not gentle")
            g = ths[k].levels[i] - t.summands[r].shift
            cell = (index[(k, g + 1)][(j, q)], index[(k, g)][(i, r)])
            table = raw[(k, g)]
            table[cell] = table.get(cell, K.zero) + K.sign(t.summands[q].shift) * coeff

    blocks: dict[str, tuple[str, ...]] = {}
    alpha: dict[str, str] = {}
    beta: dict[str, str] = {}
    grades: dict[str, int] = {}
    lifts: dict[str, DomainMatrix] = {}
    labels: dict[str, Label] = {}
    for k, th in enumerate(ths):
        image = None
        for g in ranges.get(k, ()):
            basis = members.get((k, g), [])
            n = len(basis)
            t_side, k_side = _name(th, g, "t"), _name(th, g, "k")
            alpha[t_side], alpha[k_side] = k_side, t_side
            positions = range(len(th.vertices) - 1, -1, -1)
            blocks[t_side] = tuple(_name(th, g, f"p{pos}") for pos in positions)
            for pos in positions:
                b = _name(th, g, f"p{pos}")
                grades[b] = sum(1 for x, _ in basis if x == pos)
                labels[b] = Label("pos", k, g, pos)
            lifts[t_side] = K.eye(n)

            if g + 1 in ranges[k]:
                rows = len(members.get((k, g + 1), []))
                data = [[K.zero] * n for _ in range(rows)]
                for (row, col), value in raw.get((k, g), {}).items():
                    data[row][col] = value
                dmat = DomainMatrix(data, (rows, n), K.domain)
                kernel = linalg.nullspace(K, dmat)
            else:
                dmat, kernel = None, K.eye(n)
            top = linalg.complement(K, n, kernel)
            im = image if image is not None else K.zeros(n, 0)
            middle = linalg.complement_in(K, n, im, kernel)
            lifts[k_side] = linalg.hstack(K, n, im, middle, top)
            blocks[k_side] = tuple(_name(th, g, tail) for tail in ("im", "ker", "top"))
            for tail, part in zip(("im", "ker", "top"), (im, middle, top)):
                grades[_name(th, g, tail)] = linalg.ncols(part)
                labels[_name(th, g, tail)] = Label(tail, k, g)
            image = linalg.matmul(K, dmat, top) if dmat is not None else None
            if dmat is not None:
                beta[_name(th, g, "top")] = _name(th, g + 1, "im")
                beta[_name(th, g + 1, "im")] = _name(th, g, "top")

    for v in p.vertices:
        (k1, pos1), (k2, pos2) = occurrences[v]
        offset = ths[k2].levels[pos2] - ths[k1].levels[pos1]
        for g in ranges.get(k1, ()):
            if g + offset in ranges.get(k2, ()):
                b1, b2 = _name(ths[k1], g, f"p{pos1}"), _name(ths[k2], g + offset, f"p{pos2}")
                beta[b1], beta[b2] = b2, b1

    phi = {b: K.eye(grades[b]) for b in beta}
    x = nets.Net(blocks, alpha, beta)
    rep = nets.NetRep(x, K, grades, lifts, phi)
    logger.debug("thread net: %d threads, %d orbits", len(ths), len(x.orbits))
    return ThreadEmbedding(tuple(ths), x, rep, labels)


# -- decomposition ---------------------------------------------------------------


def _decode(emb: ThreadEmbedding, component: nets.String | nets.Band, K: Field) -> CurveWord:
    tokens = [emb.labels[b] for _, b in component.word]
    if isinstance(component, nets.Band) and tokens[1].pos is None:
        tokens = tokens[2:] + tokens[:2]
    if len(tokens) % 4:
        raise RuntimeError(f"component {component} does not alternate positions and links")
    n = len(tokens)
    m = n // 4
    closed = isinstance(component, nets.Band)
    letters = [emb.letter(tokens[4 * i + 1]) for i in range(m)]
    connectors = [
        emb.connector(
            tokens[4 * i + 3], tokens[4 * i + 2], tokens[(4 * i + 4) % n], tokens[(4 * i + 5) % n]
        )
        for i in range(m if closed else m - 1)
    ]
    if not closed:
        return CurveWord.string(letters, connectors).normal_form(K)
    closing = _closing_matrix(K, letters, connectors, component.matrix(K))
    return CurveWord.band(letters, connectors, K.to_python_rows(closing)).normal_form(K)


def _sort_key(item: tuple[CurveWord, int]) -> tuple:
    w, _ = item
    return (w.kind, w.key(), tuple(str(x) for row in w.monodromy for x in row))


def twcx_to_decomposition(t: TwistedComplex) -> Decomposition:
    """Indecomposable string and band words whose sum is homotopic to t."""
    p = t.category.p
    if not is_f1(p):
        raise PreconditionError("decomposition needs a gentle (F1) presentation; localize first")
    if not is_proper(p):
        raise PreconditionError("decomposition needs a proper presentation (finite threads)")
    if not verify_mc(t):
        raise InvalidInputError("the complex does not satisfy the Maurer-Cartan equation")
    minimal = minimize(t)
    if not len(minimal):
        return Decomposition()
    K = t.field
    emb = embed(minimal)
    x, f, v = nets.reduce(emb.net, emb.rep)
    counts: Counter[CurveWord] = Counter(
        _decode(emb, c, K) for c in nets.components(x, f, v)
    )
    logger.info("decomposed %d copies into %d words", len(minimal), sum(counts.values()))
    return Decomposition(tuple(sorted(counts.items(), key=_sort_key)))


# -- random complexes ------------------------------------------------------------


def random_word(
    rng: np.random.Generator, category: Products, max_letters: int = 3, max_arrows: int = 2
) -> CurveWord:
    """Random valid string word grown one connector at a time."""
    p = category.p
    paths = [x for x in all_paths(p, max_arrows=max_arrows) if not x.is_identity]
    start = p.vertices[int(rng.integers(len(p.vertices)))]
    letters = [Letter(start, int(rng.integers(-1, 2)))]
    connectors: list[Connector] = []
    while len(letters) < max_letters and rng.random() < 0.75:
        here = letters[-1]
        options = [(Connector(x.arrows, FORWARD), x) for x in paths if x.source == here.arc]
        options += [(Connector(x.arrows, BACKWARD), x) for x in paths if x.target == here.arc]
        if connectors:
            options = [o for o in options if _junction_issue(p, connectors[-1], o[0]) is None]
        if not options:
            break
        c, path = options[int(rng.integers(len(options)))]
        if c.direction == FORWARD:
            nxt = Letter(path.target, here.shift + path.degree - 1)
        else:
            nxt = Letter(path.source, here.shift - path.degree + 1)
        candidate = CurveWord.string(letters + [nxt], connectors + [c])
        try:
            word_to_twcx(category, candidate)
        except InvalidInputError:
            break
        letters.append(nxt)
        connectors.append(c)
    return CurveWord.string(letters, connectors)


def _gauge(rng: np.random.Generator, t: TwistedComplex) -> TwistedComplex:
    """Conjugate δ by a random invertible scalar matrix mixing copies of equal summands.

    The matrix is lower triangular along a topological order of δ, so δ stays
    strictly triangular.
    """
    K, n = t.field, len(t)
    graph = nx.DiGraph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from((r, q) for q, r in t.delta)
    order = {v: i for i, v in enumerate(nx.topological_sort(graph))}
    rows = [[K.zero] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = K.random(rng, nonzero=True)
        for j in range(n):
            if t.summands[i] == t.summands[j] and order[i] > order[j]:
                rows[i][j] = K.random(rng)
    g = DomainMatrix(rows, (n, n), K.domain)
    g_inv = linalg.entries(linalg.inverse(K, g))
    groups: dict[Summand, list[int]] = defaultdict(list)
    for i, s in enumerate(t.summands):
        groups[s].append(i)
    delta: dict[tuple[int, int], LinCombo] = {}
    for (q0, p0), combo in t.delta.items():
        for q in groups[t.summands[q0]]:
            for r in groups[t.summands[p0]]:
                c = rows[q][q0] * g_inv[p0][r]
                if c:
                    delta[(q, r)] = delta.get((q, r), LinCombo(K)) + combo.scale(c)
    return TwistedComplex(t.category, t.summands, delta)


def random_complex(
    rng: np.random.Generator,
    category: Products,
    max_copies: int = 6,
    cones: int = 1,
    max_letters: int = 3,
) -> TwistedComplex:
    """Gauge-transformed, shuffled sum of random string complexes and contractible cones."""
    pieces: list[TwistedComplex] = []
    total = 0
    for _ in range(min(cones, max_copies // 2)):
        arc = category.p.vertices[int(rng.integers(len(category.p.vertices)))]
        pieces.append(cone(unit(single(category, arc, int(rng.integers(-1, 2))))))
        total += 2
    for _ in range(4 * max_copies):
        if total >= max_copies:
            break
        w = random_word(rng, category, min(max_letters, max_copies - total))
        pieces.append(word_to_twcx(category, w))
        total += len(w.letters)
    if not pieces:
        pieces.append(single(category, category.p.vertices[0]))
    t = _gauge(rng, direct_sum(*pieces))
    return permuted(t, [int(i) for i in rng.permutation(len(t))])


# -- JSON ------------------------------------------------------------------------


def _json_scalar(x: Scalar) -> int | str:
    return x if isinstance(x, int) else str(x)


def _load_scalar(x: Any, where: str) -> Scalar:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise FormatError(f"expected an integer or 'p/q' string, got {x!r}", where)
    if isinstance(x, int):
        return x
    try:
        value = Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad scalar {x!r}", where) from exc
    return value.numerator if value.denominator == 1 else value


def word_to_dict(w: CurveWord) -> dict:
    doc: dict[str, Any] = {
        "format": WORD_FORMAT,
        "kind": w.kind,
        "letters": [{"arc": x.arc, "shift": x.shift} for x in w.letters],
        "connectors": [{"path": list(c.arrows), "direction": c.direction} for c in w.connectors],
    }
    if w.kind == "band":
        doc["monodromy"] = [[_json_scalar(x) for x in row] for row in w.monodromy]
    else:
        doc["dimension"] = w.dimension
    return doc


def word_from_dict(doc: Mapping[str, Any]) -> CurveWord:
    if doc.get("format", WORD_FORMAT) != WORD_FORMAT:
        raise FormatError(f"expected format {WORD_FORMAT}, got {doc.get('format')!r}", "format")
    kind = doc.get("kind", "string")
    if kind not in KINDS:
        raise FormatError(f"kind must be string or band, got {kind!r}", "kind")
    try:
        letters = [Letter(str(x["arc"]), int(x.get("shift", 0))) for x in doc["letters"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed letter ({exc})", "letters") from exc
    connectors = []
    for i, c in enumerate(doc.get("connectors", [])):
        try:
            connectors.append(Connector(tuple(str(a) for a in c["path"]), str(c["direction"])))
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed connector ({exc})", f"connectors[{i}]") from exc
    if kind == "string":
        return CurveWord.string(letters, connectors, int(doc.get("dimension", 1)))
    rows = doc.get("monodromy")
    if not isinstance(rows, list) or not all(isinstance(row, list) for row in rows):
        raise FormatError("a band needs a monodromy matrix", "monodromy")
    return CurveWord.band(
        letters,
        connectors,
        [
            [_load_scalar(x, f"monodromy[{i}][{j}]") for j, x in enumerate(row)]
            for i, row in enumerate(rows)
        ],
    )


def decomposition_to_dict(d: Decomposition) -> dict:
    return {
        "format": DECOMPOSITION_FORMAT,
        "components": [{"word": word_to_dict(w), "multiplicity": k} for w, k in d.components],
    }


def decomposition_from_dict(doc: Mapping[str, Any]) -> Decomposition:
    if doc.get("format", DECOMPOSITION_FORMAT) != DECOMPOSITION_FORMAT:
        raise FormatError(f"expected format {DECOMPOSITION_FORMAT}", "format")
    out = []
    for i, item in enumerate(doc.get("components", [])):
        k = item.get("multiplicity", 1)
        if not isinstance(k, int) or k < 1:
            raise FormatError("multiplicity must be a positive integer", f"components[{i}]")
        out.append((word_from_dict(item["word"]), k))
    return Decomposition(tuple(out))
