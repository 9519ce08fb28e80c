"""Nets, their representations, and reduction to height one.

A net is (A, α, B, β): α pairs the elements of A into orbits, every i ∈ A
carries a totally ordered block B_i, and β is a partial pairing on B. A
representation puts one vector space on each orbit, one increasing filtration
per side indexed by that side's block, and isomorphisms φ_b: gr_b → gr_β(b).

Filtrations are stored as lift matrices. For i ∈ A the lift P_i is an
invertible matrix whose column blocks, in the order of B_i, lift gr_b; F_b is
spanned by the columns up to the end of block b and the gr_b coordinates of a
vector in F_b are the b-rows of P_i⁻¹ v. The lifts double as the splittings
needed when a pushforward merges several elements of a block.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping, Sequence

import numpy as np
from sympy import Poly, symbols
from sympy.polys.matrices import DomainMatrix

from fukayagen import linalg
from fukayagen.errors import FormatError, InvalidInputError, PreconditionError
from fukayagen.linalg import Field, Scalar
from fukayagen.surface import Issue, ValidationReport

logger = logging.getLogger(__name__)

NET_FORMAT = "net.v1"
REP_FORMAT = "netrep.v1"
EXHAUSTIVE_LIMIT = 4096


@dataclass(frozen=True)
class Net:
    """Blocks are keyed by the elements of A in input order; the reduction follows that order."""

    blocks: Mapping[str, tuple[str, ...]]
    alpha: Mapping[str, str]
    beta: Mapping[str, str] = field(default_factory=dict)

    @cached_property
    def elements(self) -> tuple[str, ...]:
        return tuple(self.blocks)

    @cached_property
    def owner(self) -> dict[str, str]:
        return {b: i for i, block in self.blocks.items() for b in block}

    @cached_property
    def orbits(self) -> tuple[tuple[str, str], ...]:
        """(key, partner) per α-orbit; the key is the element listed first."""
        seen: set[str] = set()
        out = []
        for i in self.elements:
            if i not in seen:
                seen.update((i, self.alpha[i]))
                out.append((i, self.alpha[i]))
        return tuple(out)

    @cached_property
    def _orbit_key(self) -> dict[str, str]:
        return {i: key for key, other in self.orbits for i in (key, other)}

    def orbit(self, i: str) -> str:
        return self._orbit_key[i]

    @property
    def height(self) -> int:
        return max((len(block) for block in self.blocks.values()), default=0)


@dataclass(frozen=True)
class NetMorphismData:
    source: Net
    target: Net
    f1: Mapping[str, str]
    f2: Mapping[str, str]


@dataclass(frozen=True, eq=False)
class NetRep:
    net: Net
    K: Field
    grades: Mapping[str, int]
    lifts: Mapping[str, DomainMatrix]
    phi: Mapping[str, DomainMatrix] = field(default_factory=dict)

    @property
    def field(self) -> Field:
        return self.K

    def dim(self, i: str) -> int:
        return linalg.nrows(self.lifts[i])

    @property
    def total_dim(self) -> int:
        return sum(self.dim(key) for key, _ in self.net.orbits)

    @cached_property
    def offsets(self) -> dict[str, tuple[int, int]]:
        out = {}
        for block in self.net.blocks.values():
            start = 0
            for b in block:
                out[b] = (start, start + self.grades[b])
                start += self.grades[b]
        return out

    @cached_property
    def _inverses(self) -> dict[str, DomainMatrix]:
        return {i: linalg.inverse(self.K, p) for i, p in self.lifts.items()}

    def inverse_lift(self, i: str) -> DomainMatrix:
        return self._inverses[i]

    def _columns(self, b: str, start: int, end: int) -> DomainMatrix:
        return linalg.columns(self.K, self.lifts[self.net.owner[b]], range(start, end))

    def lift(self, b: str) -> DomainMatrix:
        start, end = self.offsets[b]
        return self._columns(b, start, end)

    def below(self, b: str) -> DomainMatrix:
        """Basis of F_{<b}."""
        return self._columns(b, 0, self.offsets[b][0])

    def filtration(self, b: str) -> DomainMatrix:
        """Basis of F_b."""
        return self._columns(b, 0, self.offsets[b][1])

    def gr_coords(self, b: str, vectors: DomainMatrix) -> DomainMatrix:
        """Classes in gr_b of vectors lying in F_b."""
        start, end = self.offsets[b]
        coords = linalg.matmul(self.K, self.inverse_lift(self.net.owner[b]), vectors)
        return linalg.rows_of(self.K, coords, range(start, end))


# -- validation ------------------------------------------------------------------


def validate_net(x: Net) -> ValidationReport:
    issues: list[Issue] = []
    elements = set(x.blocks)
    if set(x.alpha) != elements:
        issues.append(Issue("alpha", "α must be defined on exactly the elements of A"))
    for i, j in x.alpha.items():
        if j == i or x.alpha.get(j) != i:
            issues.append(Issue(f"alpha[{i}]", "α is not a fixed-point-free involution here"))
    seen: dict[str, str] = {}
    for i, block in x.blocks.items():
        for b in block:
            if b in seen:
                issues.append(Issue(f"blocks[{i}]", f"{b!r} also appears in block {seen[b]!r}"))
            seen[b] = i
    for b, c in x.beta.items():
        if b not in seen or c not in seen:
            issues.append(Issue(f"beta[{b}]", "β pairs elements outside B"))
        elif c == b or x.beta.get(c) != b:
            issues.append(Issue(f"beta[{b}]", "β is not a fixed-point-free involution here"))
    return ValidationReport(tuple(issues))


def validate_rep(v: NetRep) -> ValidationReport:
    report = validate_net(v.net)
    if not report.ok:
        return report
    K, x = v.K, v.net
    issues: list[Issue] = []
    for b in x.owner:
        if b not in v.grades or v.grades[b] < 0:
            issues.append(Issue(f"grades[{b}]", "missing or negative"))
    if issues:
        return ValidationReport(tuple(issues))
    for key, other in x.orbits:
        for i in (key, other):
            p = v.lifts.get(i)
            if p is None:
                issues.append(Issue(f"lifts[{i}]", "missing"))
                continue
            if sum(v.grades[b] for b in x.blocks[i]) != linalg.nrows(p):
                issues.append(Issue(f"lifts[{i}]", "grades do not add up to the dimension"))
            elif not linalg.is_invertible(K, p):
                issues.append(Issue(f"lifts[{i}]", "not an invertible square matrix"))
        if key in v.lifts and other in v.lifts and v.dim(key) != v.dim(other):
            issues.append(Issue(f"lifts[{key}]", f"dimension differs from {other!r}"))
    for b, c in x.beta.items():
        m = v.phi.get(b)
        if m is None:
            issues.append(Issue(f"phi[{b}]", "missing"))
        elif m.shape != (v.grades[c], v.grades[b]):
            issues.append(Issue(f"phi[{b}]", f"shape {m.shape}, expected gr_{c} × gr_{b}"))
        elif c in v.phi and v.phi[c].shape == (v.grades[b], v.grades[c]):
            if not linalg.equal(linalg.matmul(K, v.phi[c], m), K.eye(v.grades[b])):
                issues.append(Issue(f"phi[{b}]", f"φ_{c} is not the inverse of φ_{b}"))
    return ValidationReport(tuple(issues))


def validate_morphism(f: NetMorphismData) -> ValidationReport:
    x, y = f.source, f.target
    issues: list[Issue] = []
    for i in x.elements:
        j = f.f1.get(i)
        if j not in y.blocks:
            issues.append(Issue(f"f1[{i}]", "not mapped into A'"))
        elif f.f1.get(x.alpha[i]) != y.alpha[j]:
            issues.append(Issue(f"f1[{i}]", "does not commute with α"))
    for i, block in x.blocks.items():
        target = y.blocks.get(f.f1.get(i, ""), ())
        ranks = []
        for b in block:
            image = f.f2.get(b)
            if image not in target:
                issues.append(Issue(f"f2[{b}]", f"not in the block of {f.f1.get(i)!r}"))
                continue
            ranks.append(target.index(image))
            if (b in x.beta) != (image in y.beta):
                issues.append(Issue(f"f2[{b}]", "does not respect Dom β"))
            elif b in x.beta and f.f2.get(x.beta[b]) != y.beta[image]:
                issues.append(Issue(f"f2[{b}]", "does not commute with β"))
        if any(a > b for a, b in zip(ranks, ranks[1:])):
            issues.append(Issue(f"f2 on {i}", "not increasing on the block"))
    return ValidationReport(tuple(issues))


def _require(report: ValidationReport, what: str) -> None:
    if not report.ok:
        raise InvalidInputError(f"invalid {what}: {report.issues[0]}")


def identity_morphism(x: Net) -> NetMorphismData:
    return NetMorphismData(x, x, {i: i for i in x.elements}, {b: b for b in x.owner})


def compose_morphisms(g: NetMorphismData, f: NetMorphismData) -> NetMorphismData:
    """g ∘ f."""
    if f.target != g.source:
        raise InvalidInputError("morphisms are not composable")
    return NetMorphismData(
        f.source,
        g.target,
        {i: g.f1[j] for i, j in f.f1.items()},
        {b: g.f2[c] for b, c in f.f2.items()},
    )


# -- builders --------------------------------------------------------------------


def string_net(n: int) -> Net:
    """n orbits in a row: a1-a2 ~ a3-a4 ~ ... with one element b_i per a_i."""
    if n < 1:
        raise InvalidInputError("a string net needs at least one orbit")
    blocks = {f"a{i}": (f"b{i}",) for i in range(1, 2 * n + 1)}
    alpha = {}
    for i in range(1, 2 * n, 2):
        alpha[f"a{i}"], alpha[f"a{i + 1}"] = f"a{i + 1}", f"a{i}"
    beta = {}
    for i in range(2, 2 * n, 2):
        beta[f"b{i}"], beta[f"b{i + 1}"] = f"b{i + 1}", f"b{i}"
    return Net(blocks, alpha, beta)


def cycle_net(n: int) -> Net:
    x = string_net(n)
    beta = dict(x.beta)
    beta[f"b{2 * n}"], beta["b1"] = "b1", f"b{2 * n}"
    return Net(dict(x.blocks), dict(x.alpha), beta)


def covering_morphism(n: int, k: int) -> NetMorphismData:
    """The k-fold covering cycle_net(n·k) → cycle_net(n)."""
    if k < 1:
        raise InvalidInputError("covering degree must be positive")
    source, target = cycle_net(n * k), cycle_net(n)
    wrap = {i: (i - 1) % (2 * n) + 1 for i in range(1, 2 * n * k + 1)}
    return NetMorphismData(
        source,
        target,
        {f"a{i}": f"a{j}" for i, j in wrap.items()},
        {f"b{i}": f"b{j}" for i, j in wrap.items()},
    )


def string_rep(n: int, d: int, K: Field) -> NetRep:
    x = string_net(n)
    return NetRep(
        x,
        K,
        {b: d for b in x.owner},
        {i: K.eye(d) for i in x.elements},
        {b: K.eye(d) for b in x.beta},
    )


def band_rep(n: int, monodromy: DomainMatrix, K: Field) -> NetRep:
    """Cycle of n orbits, identity everywhere except b_2n → b_1, which carries the monodromy."""
    if not linalg.is_invertible(K, monodromy):
        raise InvalidInputError("band monodromy must be invertible")
    x = cycle_net(n)
    d = linalg.nrows(monodromy)
    phi = {b: K.eye(d) for b in x.beta}
    phi[f"b{2 * n}"] = monodromy
    phi["b1"] = linalg.inverse(K, monodromy)
    return NetRep(x, K, {b: d for b in x.owner}, {i: K.eye(d) for i in x.elements}, phi)


def random_net(rng: np.random.Generator, max_orbits: int = 3, max_block: int = 2) -> Net:
    blocks: dict[str, tuple[str, ...]] = {}
    alpha: dict[str, str] = {}
    count = itertools.count(1)
    for o in range(int(rng.integers(1, max_orbits + 1))):
        left, right = f"r{o}", f"s{o}"
        alpha[left], alpha[right] = right, left
        for i in (left, right):
            blocks[i] = tuple(f"e{next(count)}" for _ in range(int(rng.integers(1, max_block + 1))))
    elements = [b for block in blocks.values() for b in block]
    order = [elements[j] for j in rng.permutation(len(elements))]
    beta: dict[str, str] = {}
    for b, c in zip(order[::2], order[1::2]):
        if rng.random() < 0.67:
            beta[b], beta[c] = c, b
    return Net(blocks, alpha, beta)


def _random_invertible(K: Field, rng: np.random.Generator, d: int) -> DomainMatrix:
    while True:
        m = DomainMatrix([[K.random(rng) for _ in range(d)] for _ in range(d)], (d, d), K.domain)
        if linalg.is_invertible(K, m):
            return m


def random_rep(
    rng: np.random.Generator, x: Net, K: Field, max_grade: int = 1, attempts: int = 200
) -> NetRep:
    """Random lifts and φ on random grades balanced across each orbit."""
    _require(validate_net(x), "net")
    classes = [(b,) for b in x.owner if b not in x.beta]
    classes += [(b, c) for b, c in x.beta.items() if b < c]
    for _ in range(attempts):
        grades: dict[str, int] = {}
        for cls in classes:
            g = int(rng.integers(0, max_grade + 1))
            grades.update((b, g) for b in cls)
        if _balance(x, grades):
            break
    else:
        raise PreconditionError(f"no balanced grading found in {attempts} attempts")
    lifts = {}
    for key, other in x.orbits:
        d = sum(grades[b] for b in x.blocks[key])
        lifts[key] = _random_invertible(K, rng, d)
        lifts[other] = _random_invertible(K, rng, d)
    phi = {}
    for b, c in x.beta.items():
        if b < c:
            phi[b] = _random_invertible(K, rng, grades[b])
            phi[c] = linalg.inverse(K, phi[b])
    return NetRep(x, K, grades, lifts, phi)


def _balance(x: Net, grades: dict[str, int]) -> bool:
    """Top up unpaired elements so both sides of every orbit have equal total grade."""
    for key, other in x.orbits:
        left = sum(grades[b] for b in x.blocks[key])
        right = sum(grades[b] for b in x.blocks[other])
        if left == right:
            continue
        light = key if left < right else other
        free = [b for b in x.blocks[light] if b not in x.beta]
        if not free:
            return False
        grades[free[-1]] += abs(left - right)
    return True


# -- pushforward and morphisms of representations --------------------------------


def _place(K: Field, shape: tuple[int, int], pieces: Sequence[tuple[int, int, DomainMatrix]]):
    """Zero matrix of the given shape with each block written at its (row, col) corner."""
    rows = [[K.zero] * shape[1] for _ in range(shape[0])]
    for r0, c0, m in pieces:
        for r, row in enumerate(linalg.entries(m)):
            rows[r0 + r][c0 : c0 + len(row)] = row
    return DomainMatrix(rows, shape, K.domain)


def pushforward(f: NetMorphismData, v: NetRep) -> NetRep:
    """f_* v. Where f_2 merges elements of a block, the lifts of v split the merged gr."""
    _require(validate_morphism(f), "net morphism")
    if f.source != v.net:
        raise InvalidInputError("representation does not live on the source of the morphism")
    K, x, y = v.K, f.source, f.target
    size = {key: 0 for key, _ in y.orbits}
    offset: dict[str, int] = {}
    for key, _ in x.orbits:
        target = y.orbit(f.f1[key])
        offset[key] = size[target]
        size[target] += v.dim(key)
    members: dict[str, list[str]] = {level: [] for level in y.owner}
    for block in x.blocks.values():
        for b in block:
            members[f.f2[b]].append(b)
    grades = {level: sum(v.grades[b] for b in bs) for level, bs in members.items()}
    lifts = {}
    for j, block in y.blocks.items():
        d = size[y.orbit(j)]
        pieces, col = [], 0
        for level in block:
            for b in members[level]:
                pieces.append((offset[x.orbit(x.owner[b])], col, v.lift(b)))
                col += v.grades[b]
        lifts[j] = _place(K, (d, d), pieces)
    phi = {}
    for level, partner in y.beta.items():
        start, position = 0, {}
        for b in members[partner]:
            position[b] = start
            start += v.grades[b]
        pieces, col = [], 0
        for b in members[level]:
            pieces.append((position[x.beta[b]], col, v.phi[b]))
            col += v.grades[b]
        phi[level] = _place(K, (grades[partner], grades[level]), pieces)
    return NetRep(y, K, grades, lifts, phi)


def direct_sum_rep(v: NetRep, w: NetRep) -> NetRep:
    if v.net != w.net or v.K != w.K:
        raise InvalidInputError("direct sum of representations of different nets")
    K, x = v.K, v.net
    lifts = {}
    for i, block in x.blocks.items():
        dv, dw = v.dim(i), w.dim(i)
        pieces, col = [], 0
        for b in block:
            pieces.append((0, col, v.lift(b)))
            pieces.append((dv, col + v.grades[b], w.lift(b)))
            col += v.grades[b] + w.grades[b]
        lifts[i] = _place(K, (dv + dw, dv + dw), pieces)
    grades = {b: v.grades[b] + w.grades[b] for b in x.owner}
    phi = {
        b: _place(
            K,
            (grades[c], grades[b]),
            [(0, 0, v.phi[b]), (v.grades[c], v.grades[b], w.phi[b])],
        )
        for b, c in x.beta.items()
    }
    return NetRep(x, K, grades, lifts, phi)


def hom_space(v: NetRep, w: NetRep) -> list[dict[str, DomainMatrix]]:
    """Basis of the morphisms v → w, one matrix W_o × V_o per orbit key.

    A family f_o is a morphism when every T_i = Q_i⁻¹ f P_i has no component from
    block b into a later block c, and ψ_b T_i[b, b] = T_i'[βb, βb] φ_b.
    """
    if v.net != w.net or v.K != w.K:
        raise InvalidInputError("morphisms between representations of different nets")
    K, x = v.K, v.net
    start: dict[str, int] = {}
    total = 0
    for key, _ in x.orbits:
        start[key] = total
        total += v.dim(key) * w.dim(key)

    q_inv = {i: linalg.entries(w.inverse_lift(i)) for i in x.elements}
    lifts = {i: linalg.entries(v.lifts[i]) for i in x.elements}

    def t_entry(i: str, r: int, c: int) -> list:
        """Coefficients of T_i[r, c] in the unknown entries of f."""
        key = x.orbit(i)
        dv = v.dim(key)
        out = [K.zero] * total
        for a in range(w.dim(key)):
            for b in range(dv):
                out[start[key] + a * dv + b] = q_inv[i][r][a] * lifts[i][b][c]
        return out

    conditions: list[list] = []
    for i, block in x.blocks.items():
        for pos, b in enumerate(block):
            b0, b1 = v.offsets[b]
            for c in block[pos + 1 :]:
                c0, c1 = w.offsets[c]
                conditions.extend(
                    t_entry(i, r, col) for r in range(c0, c1) for col in range(b0, b1)
                )
    for b, c in x.beta.items():
        if b > c:
            continue
        i, j = x.owner[b], x.owner[c]
        vb0, _ = v.offsets[b]
        vc0, _ = v.offsets[c]
        wb0, _ = w.offsets[b]
        wc0, _ = w.offsets[c]
        psi = linalg.entries(w.phi[b])
        phi = linalg.entries(v.phi[b])
        for r in range(w.grades[c]):
            for col in range(v.grades[b]):
                row = [K.zero] * total
                for m in range(w.grades[b]):
                    for idx, coeff in enumerate(t_entry(i, wb0 + m, vb0 + col)):
                        row[idx] += psi[r][m] * coeff
                for m in range(v.grades[c]):
                    for idx, coeff in enumerate(t_entry(j, wc0 + r, vc0 + m)):
                        row[idx] -= coeff * phi[m][col]
                conditions.append(row)
    system = DomainMatrix(conditions, (len(conditions), total), K.domain)
    kernel = linalg.nullspace(K, system) if conditions else K.eye(total)
    basis = []
    for n in range(linalg.ncols(kernel)):
        vec = [row[n] for row in linalg.entries(kernel)]
        maps = {}
        for key, _ in x.orbits:
            dv, dw = v.dim(key), w.dim(key)
            flat = vec[start[key] : start[key] + dv * dw]
            maps[key] = DomainMatrix(
                [flat[a * dv : (a + 1) * dv] for a in range(dw)], (dw, dv), K.domain
            )
        basis.append(maps)
    return basis


def is_isomorphic_rep(v: NetRep, w: NetRep, tries: int = 16, rng=None) -> bool:
    """Search the morphism space for an invertible member.

    Exhaustive over a small prime field, random combinations otherwise.
    """
    if v.net != w.net or v.K != w.K:
        return False
    x = v.net
    if any(v.dim(key) != w.dim(key) for key, _ in x.orbits):
        return False
    if any(v.grades[b] != w.grades[b] for b in x.owner):
        return False
    if v.total_dim == 0:
        return True
    basis = hom_space(v, w)
    if not basis:
        return False
    K = v.K
    rng = rng if rng is not None else np.random.default_rng(0)
    if K.is_finite and K.p ** len(basis) <= EXHAUSTIVE_LIMIT:
        candidates = itertools.product(K.elements(), repeat=len(basis))
    else:
        candidates = ([K.random(rng, bound=50) for _ in basis] for _ in range(tries))
    for coeffs in candidates:
        if not any(coeffs):
            continue
        f = {
            key: _combine(K, [m[key] for m in basis], coeffs, (w.dim(key), v.dim(key)))
            for key, _ in x.orbits
        }
        if all(linalg.is_invertible(K, m) for m in f.values()):
            return True
    return False


def _combine(K: Field, mats: Sequence[DomainMatrix], coeffs: Sequence, shape) -> DomainMatrix:
    rows = [[K.zero] * shape[1] for _ in range(shape[0])]
    for m, c in zip(mats, coeffs):
        if not c:
            continue
        for r, row in enumerate(linalg.entries(m)):
            for j, e in enumerate(row):
                rows[r][j] += c * e
    return DomainMatrix(rows, shape, K.domain)


# -- reduction to height one -----------------------------------------------------


@dataclass
class _Side:
    name: str
    image: str
    elements: list[tuple[str, str, DomainMatrix]]  # (new element, image, lift in old coordinates)


@dataclass
class _Orbit:
    basis: DomainMatrix  # the new space inside the old orbit space
    sides: tuple[_Side, _Side]


class _Names:
    def __init__(self, x: Net) -> None:
        self.used = set(x.blocks) | set(x.owner)

    def __call__(self, base: str) -> str:
        k = 1
        while f"{base}#{k}" in self.used:
            k += 1
        name = f"{base}#{k}"
        self.used.add(name)
        return name


def _assemble(
    v: NetRep, orbits: Sequence[_Orbit], beta: Mapping[str, str]
) -> tuple[Net, NetMorphismData, NetRep]:
    """Build (X', f, V') from new orbits given as subspaces and lifts of the old ones.

    φ' is read off from φ: the old gr class of each new lift is pushed through φ
    and expanded in the new lifts above the partner level.
    """
    K, x = v.K, v.net
    blocks: dict[str, tuple[str, ...]] = {}
    alpha: dict[str, str] = {}
    f1: dict[str, str] = {}
    f2: dict[str, str] = {}
    grades: dict[str, int] = {}
    lifts: dict[str, DomainMatrix] = {}
    ambient: dict[str, DomainMatrix] = {}
    for orbit in orbits:
        left, right = orbit.sides
        alpha[left.name], alpha[right.name] = right.name, left.name
        d_old = linalg.nrows(orbit.basis)
        for side in orbit.sides:
            f1[side.name] = side.image
            blocks[side.name] = tuple(b for b, _, _ in side.elements)
            for b, image, lift in side.elements:
                f2[b] = image
                grades[b] = linalg.ncols(lift)
                ambient[b] = lift
            stacked = linalg.hstack(K, d_old, *(lift for _, _, lift in side.elements))
            p = linalg.coordinates(K, orbit.basis, stacked)
            if not linalg.is_invertible(K, p):
                raise RuntimeError(f"lifts on {side.name!r} do not form a basis")
            lifts[side.name] = p
    fibers: dict[str, list[str]] = {}
    for b, image in f2.items():
        fibers.setdefault(image, []).append(b)
    phi: dict[str, DomainMatrix] = {}
    for b, c in beta.items():
        b0, c0 = f2[b], f2[c]
        if x.beta.get(b0) != c0:
            raise RuntimeError(f"{b} ↔ {c} does not lie over a β-pair")
        image = linalg.matmul(K, v.phi[b0], v.gr_coords(b0, ambient[b]))
        fiber = fibers[c0]
        frame = linalg.hstack(K, v.grades[c0], *(v.gr_coords(c0, ambient[e]) for e in fiber))
        if not linalg.is_invertible(K, frame):
            raise RuntimeError(f"new lifts over {c0!r} do not split gr_{c0}")
        y = linalg.solve(K, frame, image)
        start = 0
        for e in fiber:
            block = linalg.rows_of(K, y, range(start, start + grades[e]))
            if e == c:
                phi[b] = block
            elif not linalg.is_zero(block):
                raise RuntimeError(f"φ_{b} has a component on {e!r}")
            start += grades[e]
    net = Net(blocks, alpha, dict(beta))
    return net, NetMorphismData(net, x, f1, f2), NetRep(net, K, grades, lifts, phi)


def _carry(
    v: NetRep,
    replace: Mapping[str, list[tuple[str, DomainMatrix]]],
    spaces: Mapping[str, tuple[DomainMatrix, DomainMatrix]],
) -> list[_Orbit]:
    """The old orbits with some elements replaced and some spaces cut down.

    ``spaces`` maps an orbit key to (basis, projector onto it); every lift in
    that orbit goes through the projector.
    """
    K, x = v.K, v.net
    out = []
    for key, other in x.orbits:
        basis, projector = spaces.get(key, (K.eye(v.dim(key)), None))
        sides = []
        for i in (key, other):
            elements = []
            for b in x.blocks[i]:
                for name, lift in replace.get(b, [(b, v.lift(b))]):
                    if projector is not None:
                        lift = linalg.matmul(K, projector, lift)
                    elements.append((name, b, lift))
            sides.append(_Side(i, i, elements))
        out.append(_Orbit(basis, (sides[0], sides[1])))
    return out


def _projector(K: Field, onto: DomainMatrix, along: DomainMatrix) -> DomainMatrix:
    d, k = linalg.nrows(onto), linalg.ncols(onto)
    inv = linalg.inverse(K, linalg.hstack(K, d, onto, along))
    return linalg.matmul(K, onto, linalg.rows_of(K, inv, range(k)))


def prune(v: NetRep) -> tuple[Net, NetMorphismData, NetRep]:
    """Drop elements with gr = 0 and orbits of dimension 0."""
    K, x = v.K, v.net
    orbits = []
    for key, other in x.orbits:
        d = v.dim(key)
        if d == 0:
            continue
        sides = [
            _Side(i, i, [(b, b, v.lift(b)) for b in x.blocks[i] if v.grades[b]])
            for i in (key, other)
        ]
        orbits.append(_Orbit(K.eye(d), (sides[0], sides[1])))
    beta = {b: c for b, c in x.beta.items() if v.grades[b]}
    return _assemble(v, orbits, beta)


def _split_unpaired(v: NetRep, r: str, n: str, k: str, x1: DomainMatrix, x2: DomainMatrix):
    """β(k) ≠ n: split V/X₁ off as a new orbit over (n, k); refine the partners of n and k."""
    K, x = v.K, v.net
    s, d = x.alpha[r], v.dim(r)
    names = _Names(x)
    u = linalg.complement_in(K, d, x2, v.filtration(k))
    top_n = linalg.complement_in(K, d, v.below(n), x1)
    top_k = linalg.complement_in(K, d, v.below(k), x2)
    replace: dict[str, list[tuple[str, DomainMatrix]]] = {n: [(n, top_n)], k: [(k, top_k)]}
    beta = dict(x.beta)
    new_n, new_k = names(n), names(k)
    for old, kept, new in ((n, top_n, new_n), (k, top_k, new_k)):
        m = x.beta.get(old)
        if m is None:
            continue
        inserted = names(m)
        to_m = linalg.matmul(K, v.lift(m), v.phi[old])
        replace[m] = [
            (inserted, linalg.matmul(K, to_m, v.gr_coords(old, kept))),
            (m, linalg.matmul(K, to_m, v.gr_coords(old, u))),
        ]
        beta[old], beta[inserted] = inserted, old
        beta[new], beta[m] = m, new
    orbits = _carry(v, replace, {x.orbit(r): (x1, _projector(K, x1, u))})
    orbits.append(
        _Orbit(u, (_Side(names(r), r, [(new_n, n, u)]), _Side(names(s), s, [(new_k, k, u)])))
    )
    return _assemble(v, orbits, beta)


def _chains(K: Field, g: int, a: DomainMatrix, b: DomainMatrix):
    """Split the source of two surjections a, b: K^g → Q into chains and a band part.

    Chains x_0, ..., x_{L-1} satisfy a x_0 = 0, a x_i = b x_{i-1} and b x_{L-1} = 0;
    they span N, the common limit of the filtrations a⁻¹(b ...a⁻¹(b ker a)) and
    b⁻¹(a ...b⁻¹(a ker b)). On the returned complement C one has b C = a C T.
    """
    ker_a = linalg.nullspace(K, a)
    levels = [K.zeros(g, 0), linalg.nullspace(K, b)]
    while True:
        nxt = linalg.preimage(K, b, linalg.image(K, a, levels[-1]))
        if linalg.dim(K, nxt) == linalg.dim(K, levels[-1]):
            break
        levels.append(nxt)
    limit = ker_a
    while True:
        nxt = linalg.preimage(K, a, linalg.image(K, b, limit))
        if linalg.dim(K, nxt) == linalg.dim(K, limit):
            break
        limit = nxt
    if not linalg.equal_spaces(K, g, levels[-1], limit):
        raise RuntimeError("the two chain filtrations have different limits")

    chains: dict[int, list[list[DomainMatrix]]] = {}
    for length in range(1, len(levels)):
        low = linalg.intersect(K, g, ker_a, levels[length - 1])
        high = linalg.intersect(K, g, ker_a, levels[length])
        tops = linalg.complement_in(K, g, low, high)
        for col in range(linalg.ncols(tops)):
            chain = [linalg.columns(K, tops, [col])]
            for i in range(1, length):
                level = levels[length - i]
                y = linalg.solve(K, linalg.matmul(K, a, level), linalg.matmul(K, b, chain[-1]))
                if y is None:
                    raise RuntimeError("a chain stops early")
                chain.append(linalg.matmul(K, level, y))
            chains.setdefault(length, []).append(chain)
    spanning = linalg.hstack(K, g, *(x for group in chains.values() for ch in group for x in ch))
    count = linalg.ncols(spanning)
    if linalg.rank(K, spanning) != count or count != linalg.dim(K, limit):
        raise RuntimeError("chains do not form a basis of their span")

    q = linalg.nrows(a)
    c0 = linalg.complement(K, g, spanning)
    c = linalg.ncols(c0)
    if c == 0:
        return chains, c0, K.zeros(0, 0)
    a_n = linalg.matmul(K, a, spanning)
    b_n = linalg.matmul(K, b, spanning)
    a_c = linalg.matmul(K, a, c0)
    sol = linalg.solve(K, linalg.hstack(K, q, a_c, a_n), linalg.matmul(K, b, c0))
    if sol is None:
        raise RuntimeError("a is not onto")
    t = linalg.rows_of(K, sol, range(c))
    rhs = linalg.entries(linalg.matmul(K, b, c0) - linalg.matmul(K, a_c, t))
    # shear C = C₀ + N ν so that b C = a C T: solve a N ν T - b N ν = b C₀ - a C₀ T
    m = linalg.ncols(spanning)
    an, bn, tt = linalg.entries(a_n), linalg.entries(b_n), linalg.entries(t)
    rows = []
    for rr in range(q):
        for cc in range(c):
            row = [K.zero] * (m * c)
            for p in range(m):
                for j in range(c):
                    coeff = an[rr][p] * tt[j][cc]
                    if j == cc:
                        coeff -= bn[rr][p]
                    row[p * c + j] = coeff
            rows.append(row)
    system = DomainMatrix(rows, (q * c, m * c), K.domain)
    flat_rhs = [[rhs[rr][cc]] for rr in range(q) for cc in range(c)]
    target = DomainMatrix(flat_rhs, (q * c, 1), K.domain)
    nu = linalg.solve(K, system, target)
    if nu is None:
        raise RuntimeError("no invariant complement to the chains")
    flat = [row[0] for row in linalg.entries(nu)]
    shear = DomainMatrix([flat[p * c : (p + 1) * c] for p in range(m)], (m, c), K.domain)
    return chains, c0 + linalg.matmul(K, spanning, shear), t


def _split_paired(v: NetRep, r: str, n: str, k: str, x1: DomainMatrix):
    """β(k) = n: decompose gr_n along the two surjections onto V/X₁ and split off chain links."""
    K, x = v.K, v.net
    s, d, g = x.alpha[r], v.dim(r), v.grades[n]
    names = _Names(x)
    quotient = linalg.complement(K, d, x1)
    inv = linalg.inverse(K, linalg.hstack(K, d, x1, quotient))
    tail = range(linalg.ncols(x1), d)
    lift_n = v.lift(n)
    lift_k = linalg.matmul(K, v.lift(k), v.phi[n])  # gr_n coordinates → F_k
    a = linalg.rows_of(K, linalg.matmul(K, inv, lift_n), tail)
    b = linalg.rows_of(K, linalg.matmul(K, inv, lift_k), tail)
    chains, band, t = _chains(K, g, a, b)

    below_k = v.below(k)
    frame = linalg.hstack(K, d, below_k, v.below(n))

    def link(upper: DomainMatrix, lower: DomainMatrix) -> DomainMatrix:
        """z ∈ F_k with gr_n class ``upper`` and gr_k class φ_n ``lower``."""
        v1 = linalg.matmul(K, lift_n, upper)
        v2 = linalg.matmul(K, lift_k, lower)
        w = linalg.solve(K, frame, v1 - v2)
        if w is None:
            raise RuntimeError("chain link leaves F_{<k} + F_{<n}")
        return v2 + linalg.matmul(K, below_k, linalg.rows_of(K, w, range(linalg.ncols(below_k))))

    def new_orbit(z: DomainMatrix) -> tuple[_Orbit, str, str]:
        upper, lower = names(n), names(k)
        sides = (_Side(names(r), r, [(upper, n, z)]), _Side(names(s), s, [(lower, k, z)]))
        return _Orbit(z, sides), upper, lower

    beta = {b_: c for b_, c in x.beta.items() if b_ not in (n, k)}
    replace: dict[str, list[tuple[str, DomainMatrix]]] = {n: [], k: []}
    extra: list[_Orbit] = []
    links: list[DomainMatrix] = []
    for length in sorted(chains):
        group = chains[length]
        first, last = names(n), names(k)
        heads = linalg.hstack(K, g, *(ch[0] for ch in group))
        tails = linalg.hstack(K, g, *(ch[-1] for ch in group))
        replace[n].append((first, linalg.matmul(K, lift_n, heads)))
        replace[k].append((last, linalg.matmul(K, lift_k, tails)))
        previous = first
        for i in range(1, length):
            z = linalg.hstack(K, d, *(link(ch[i], ch[i - 1]) for ch in group))
            orbit, upper, lower = new_orbit(z)
            extra.append(orbit)
            links.append(z)
            beta[previous], beta[lower] = lower, previous
            previous = upper
        beta[previous], beta[last] = last, previous
    if linalg.ncols(band):
        shifted = linalg.matmul(K, band, t)
        z = linalg.hstack(
            K,
            d,
            *(
                link(linalg.columns(K, shifted, [col]), linalg.columns(K, band, [col]))
                for col in range(linalg.ncols(band))
            ),
        )
        orbit, upper, lower = new_orbit(z)
        extra.append(orbit)
        links.append(z)
        beta[upper], beta[lower] = lower, upper
    along = linalg.hstack(K, d, *links)
    orbits = _carry(v, replace, {x.orbit(r): (x1, _projector(K, x1, along))})
    return _assemble(v, orbits + extra, beta)


def _step(v: NetRep) -> tuple[Net, NetMorphismData, NetRep]:
    K, x = v.K, v.net
    r = next(i for i in x.elements if len(x.blocks[i]) == x.height)
    s, d = x.alpha[r], v.dim(r)
    n = x.blocks[r][-1]
    below_n = v.below(n)
    k = next(
        b
        for b in x.blocks[s]
        if linalg.rank(K, linalg.hstack(K, d, v.filtration(b), below_n)) == d
    )
    x1 = linalg.subspace_sum(K, d, v.below(k), below_n)
    paired = x.beta.get(k) == n
    logger.debug(
        "reduce at %s: n=%s k=%s dim X1=%d of %d (%s)",
        r,
        n,
        k,
        linalg.ncols(x1),
        d,
        "paired" if paired else "unpaired",
    )
    if paired:
        return _split_paired(v, r, n, k, x1)
    x2 = linalg.intersect(K, d, v.filtration(k), x1)
    return _split_unpaired(v, r, n, k, x1, x2)


def reduce(x: Net, v: NetRep) -> tuple[Net, NetMorphismData, NetRep]:
    """A height-one net X', a morphism f: X' → X and V' with f_* V' ≅ V."""
    _require(validate_rep(v), "representation")
    if v.net != x:
        raise InvalidInputError("representation does not live on this net")
    f = identity_morphism(v.net)
    rep = v
    # each step adds a nonzero orbit, and there are at most dim V of those
    for _ in range(v.total_dim + 1):
        net, g, rep = prune(rep)
        f = compose_morphisms(f, g)
        if net.height <= 1:
            return net, f, rep
        net, g, rep = _step(rep)
        f = compose_morphisms(f, g)
    raise RuntimeError("reduction did not terminate")


# -- classification --------------------------------------------------------------

_X = symbols("x")

Token = tuple[str, str]


@dataclass(frozen=True)
class String:
    """One-dimensional string; the word lists (f₁(i), f₂(b_i)) along the walk."""

    word: tuple[Token, ...]

    def __str__(self) -> str:
        return "string " + " ".join(f"{i}:{b}" for i, b in self.word)


@dataclass(frozen=True)
class Band:
    """Band on a primitive cycle with monodromy conjugate to the companion matrix of q^power."""

    word: tuple[Token, ...]
    polynomial: tuple[Scalar, ...]  # monic irreducible q, leading coefficient first
    power: int

    @property
    def size(self) -> int:
        return (len(self.polynomial) - 1) * self.power

    def matrix(self, K: Field) -> DomainMatrix:
        coeffs = [K.one]
        for _ in range(self.power):
            coeffs = _poly_mul(K, coeffs, [K.convert(str(c)) for c in self.polynomial])
        return companion(K, coeffs)

    def __str__(self) -> str:
        q = " ".join(str(c) for c in self.polynomial)
        return "band " + " ".join(f"{i}:{b}" for i, b in self.word) + f" [{q}]^{self.power}"


def _poly_mul(K: Field, p: Sequence, q: Sequence) -> list:
    out = [K.zero] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def companion(K: Field, coeffs: Sequence) -> DomainMatrix:
    """Companion matrix of a monic polynomial given leading coefficient first."""
    n = len(coeffs) - 1
    rows = [[K.zero] * n for _ in range(n)]
    for i in range(1, n):
        rows[i][i - 1] = K.one
    for i in range(n):
        rows[i][n - 1] = -coeffs[n - i]
    return DomainMatrix(rows, (n, n), K.domain)


def _evaluate(K: Field, coeffs: Sequence, m: DomainMatrix) -> DomainMatrix:
    n = linalg.nrows(m)
    out = K.zeros(n, n)
    for c in coeffs:
        scalar = DomainMatrix(
            [[c if i == j else K.zero for j in range(n)] for i in range(n)], (n, n), K.domain
        )
        out = linalg.matmul(K, out, m) + scalar
    return out


def elementary_divisors(K: Field, m: DomainMatrix) -> list[tuple[tuple[Scalar, ...], int]]:
    """(q, e) per primary block of m: q monic irreducible, blocks of size deg q · e."""
    n = linalg.nrows(m)
    if n == 0:
        return []
    char = Poly([K.domain.to_sympy(c) for c in m.charpoly()], _X, domain=K.domain)
    out = []
    for factor, mult in char.factor_list()[1]:
        coeffs = [K.domain.from_sympy(c) for c in factor.monic().all_coeffs()]
        degree = len(coeffs) - 1
        q_of_m = _evaluate(K, coeffs, m)
        ranks = [n]
        power = K.eye(n)
        for _ in range(mult):
            power = linalg.matmul(K, power, q_of_m)
            ranks.append(linalg.rank(K, power))
        at_least = [(ranks[e - 1] - ranks[e]) // degree for e in range(1, mult + 1)] + [0]
        label = tuple(K.to_python(c) for c in coeffs)
        for e in range(1, mult + 1):
            out.extend([(label, e)] * (at_least[e - 1] - at_least[e]))
    return sorted(out)


def _walk(x: Net, enter: str) -> tuple[list[str], bool]:
    """A-elements met entering at ``enter`` and alternating α, β; True when it closes up."""
    seq: list[str] = []
    i = enter
    while True:
        j = x.alpha[i]
        seq.extend((i, j))
        partner = x.beta.get(x.blocks[j][0])
        if partner is None:
            return seq, False
        i = x.owner[partner]
        if i == enter:
            return seq, True


def components(x: Net, f: NetMorphismData, v: NetRep) -> list[String | Band]:
    """Indecomposable summands of a representation of a height-one net, named through f.

    Bands whose word repeats are pushed down to the primitive cycle, so a
    representation that factors through a covering is reported on the base.
    """
    if v.net != x or f.source != x:
        raise InvalidInputError("representation and morphism must live on the same net")
    x, g, v = prune(v)
    f = compose_morphisms(f, g)
    if x.height > 1:
        raise PreconditionError(f"components need a net of height one, got {x.height}")
    K = v.K

    def token(i: str) -> Token:
        return (f.f1[i], f.f2[x.blocks[i][0]])

    out: list[String | Band] = []
    seen: set[str] = set()
    for key, other in x.orbits:
        if key in seen:
            continue
        back, closed = _walk(x, other)
        seq = back if closed else _walk(x, back[-1])[0]
        seen.update(seq)
        if not closed:
            word = min(tuple(map(token, seq)), tuple(map(token, reversed(seq))))
            out.extend([String(word)] * v.dim(key))
            continue
        out.extend(_bands(K, x, v, seq, token))
    return sorted(out, key=_sort_key)


def _sort_key(c: String | Band):
    if isinstance(c, String):
        return (0, c.word, (), 0)
    return (1, c.word, tuple(str(a) for a in c.polynomial), c.power)


def _bands(K: Field, x: Net, v: NetRep, seq: list[str], token) -> list[Band]:
    """Band summands over one cycle, walked from its smallest word."""
    length = len(seq) // 2
    walks = []
    for direction in (seq, list(reversed(seq))):
        for t in range(length):
            rotated = direction[2 * t :] + direction[: 2 * t]
            walks.append((tuple(map(token, rotated)), rotated))
    best = min(word for word, _ in walks)
    options = []
    for word, walk in walks:
        if word != best:
            continue
        period = _period(word)
        divisors = elementary_divisors(K, _base_monodromy(K, x, v, walk, period))
        options.append((divisors, word[: 2 * period]))
    divisors, word = min(options, key=lambda o: [(tuple(str(a) for a in q), e) for q, e in o[0]])
    return [Band(word, q, e) for q, e in divisors]


def _period(word: tuple[Token, ...]) -> int:
    """Fewest orbits after which the cyclic word repeats."""
    length = len(word) // 2
    return next(
        p for p in range(1, length + 1) if length % p == 0 and word[: 2 * p] * (length // p) == word
    )


def _base_monodromy(K: Field, x: Net, v: NetRep, walk: list[str], period: int) -> DomainMatrix:
    """Monodromy of the push-down to the cycle of ``period`` orbits.

    Transport across β from orbit t to t+1 is P_{i_{t+1}} φ_b P_{j_t}⁻¹; runs of
    ``period`` steps give the blocks U_0, ..., U_{m-1} of a cyclic block matrix.
    """
    length = len(walk) // 2
    d = v.dim(walk[0])
    steps = []
    for t in range(length):
        j, nxt = walk[2 * t + 1], walk[(2 * t + 2) % len(walk)]
        b = x.blocks[j][0]
        step = linalg.matmul(K, v.phi[b], v.inverse_lift(j))
        steps.append(linalg.matmul(K, v.lifts[nxt], step))
    copies = length // period
    pieces = []
    for block in range(copies):
        u = K.eye(d)
        for t in range(block * period, (block + 1) * period):
            u = linalg.matmul(K, steps[t], u)
        pieces.append((((block + 1) % copies) * d, block * d, u))
    return _place(K, (copies * d, copies * d), pieces)


def classify(x: Net, v: NetRep) -> list[String | Band]:
    net, f, rep = reduce(x, v)
    return components(net, f, rep)


# -- JSON ------------------------------------------------------------------------


def _pairs(mapping: Mapping[str, str]) -> list[list[str]]:
    return [[a, b] for a, b in mapping.items() if a < b]


def _unpair(pairs: Any, where: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        for a, b in pairs:
            out[str(a)], out[str(b)] = str(b), str(a)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"expected a list of pairs ({exc})", where) from exc
    return out


def net_to_dict(x: Net) -> dict:
    return {
        "format": NET_FORMAT,
        "blocks": {i: list(block) for i, block in x.blocks.items()},
        "alpha": _pairs(x.alpha),
        "beta": _pairs(x.beta),
    }


def net_from_dict(doc: Mapping[str, Any]) -> Net:
    if doc.get("format", NET_FORMAT) != NET_FORMAT:
        raise FormatError(f"expected format {NET_FORMAT}, got {doc.get('format')!r}", "format")
    try:
        blocks = {str(i): tuple(str(b) for b in block) for i, block in doc["blocks"].items()}
    except (KeyError, AttributeError, TypeError) as exc:
        raise FormatError(f"malformed blocks ({exc})", "blocks") from exc
    x = Net(blocks, _unpair(doc.get("alpha", []), "alpha"), _unpair(doc.get("beta", []), "beta"))
    _require(validate_net(x), "net")
    return x


def _json_scalar(value: Scalar) -> int | str:
    return value if isinstance(value, int) else str(value)


def _json_matrix(K: Field, m: DomainMatrix) -> list[list[int | str]]:
    return [[_json_scalar(e) for e in row] for row in K.to_python_rows(m)]


def rep_to_dict(v: NetRep) -> dict:
    return {
        "format": REP_FORMAT,
        "field": v.K.name,
        "net": net_to_dict(v.net),
        "grades": dict(v.grades),
        "lifts": {i: _json_matrix(v.K, m) for i, m in v.lifts.items()},
        "phi": {b: _json_matrix(v.K, m) for b, m in v.phi.items()},
    }


def rep_from_dict(doc: Mapping[str, Any], x: Net | None = None, K: Field | None = None) -> NetRep:
    """Load a representation; the net defaults to the embedded ``net`` document."""
    if doc.get("format", REP_FORMAT) != REP_FORMAT:
        raise FormatError(f"expected format {REP_FORMAT}, got {doc.get('format')!r}", "format")
    if x is None:
        if "net" not in doc:
            raise FormatError("no net given or embedded", "net")
        x = net_from_dict(doc["net"])
    K = K or linalg.field(str(doc.get("field", "q")))
    try:
        grades = {str(b): int(g) for b, g in doc["grades"].items()}
    except (KeyError, AttributeError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed grades ({exc})", "grades") from exc
    lifts, phi = {}, {}
    for key, other in x.orbits:
        for i in (key, other):
            d = sum(grades.get(b, 0) for b in x.blocks[i])
            lifts[i] = _load_matrix(K, doc.get("lifts", {}).get(i), d, d, f"lifts.{i}")
    for b, c in x.beta.items():
        rows, cols = grades.get(c, 0), grades.get(b, 0)
        phi[b] = _load_matrix(K, doc.get("phi", {}).get(b), rows, cols, f"phi.{b}")
    v = NetRep(x, K, grades, lifts, phi)
    _require(validate_rep(v), "representation")
    return v


def _load_matrix(K: Field, rows: Any, m: int, n: int, where: str) -> DomainMatrix:
    if rows is None:
        if m == 0 or n == 0:
            return K.zeros(m, n)
        raise FormatError("missing matrix", where)
    try:
        out = K.matrix([[str(e) for e in row] for row in rows], n)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"malformed matrix ({exc})", where) from exc
    if out.shape != (m, n):
        raise FormatError(f"shape {out.shape}, expected {(m, n)}", where)
    return out
