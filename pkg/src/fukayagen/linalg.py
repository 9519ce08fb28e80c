"""Exact linear algebra over ℚ and small prime fields.

Thin layer over sympy's DomainMatrix. Matrices are DomainMatrix instances; a
subspace of K^d is a d×k DomainMatrix whose columns form a basis. Zero-size
shapes are handled here so callers never special-case them.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from sympy.polys.domains import GF, QQ
from sympy.polys.matrices import DomainMatrix

from fukayagen.errors import InvalidInputError

Scalar = int | Fraction


class Field:
    """Coefficient field: ℚ (`q`) or F_p (`f2`, `f3`, `f5`, or `f<p>`)."""

    def __init__(self, name: str = "q") -> None:
        name = name.lower()
        if name == "q":
            self.p = 0
            self.domain = QQ
        elif name.startswith("f") and name[1:].isdigit():
            self.p = int(name[1:])
            if self.p < 2 or any(self.p % k == 0 for k in range(2, int(self.p**0.5) + 1)):
                raise InvalidInputError(f"field size must be prime, got {self.p}")
            self.domain = GF(self.p)
        else:
            raise InvalidInputError(f"unknown field {name!r}")
        self.name = name

    def __repr__(self) -> str:
        return f"Field({self.name!r})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Field) and other.name == self.name

    def __hash__(self) -> int:
        return hash(self.name)

    @property
    def is_finite(self) -> bool:
        return self.p > 0

    @property
    def zero(self):
        return self.domain.zero

    @property
    def one(self):
        return self.domain.one

    # -- scalars ---------------------------------------------------------------

    def convert(self, x):
        """Python int / Fraction / "p/q" string / domain element → domain element."""
        if isinstance(x, str):
            x = Fraction(x)
        if isinstance(x, Fraction):
            if self.p:
                return self.domain.convert(x.numerator) / self.domain.convert(x.denominator)
            return self.domain(x.numerator, x.denominator)
        if isinstance(x, int):
            return self.domain.convert(x)
        return self.domain.convert(x)

    def to_python(self, e) -> Scalar:
        if self.p:
            return int(e) % self.p
        value = Fraction(int(e.numerator), int(e.denominator))
        return value.numerator if value.denominator == 1 else value

    def format(self, e) -> str:
        return str(self.to_python(e))

    def elements(self) -> list:
        """All elements of a finite field, 0 first."""
        if not self.p:
            raise InvalidInputError("ℚ has no finite element list")
        return [self.domain.convert(k) for k in range(self.p)]

    def random(self, rng, nonzero: bool = False, bound: int = 7):
        """Seeded random scalar; over ℚ a small integer."""
        if self.p:
            low = 1 if nonzero else 0
            return self.domain.convert(int(rng.integers(low, self.p)))
        while True:
            k = int(rng.integers(-bound, bound + 1))
            if k or not nonzero:
                return self.domain.convert(k)

    def sign(self, exponent: int):
        return self.one if exponent % 2 == 0 else -self.one

    # -- matrices --------------------------------------------------------------

    def matrix(self, rows: Sequence[Sequence], ncols: int | None = None) -> DomainMatrix:
        rows = [[self.convert(x) for x in row] for row in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        return DomainMatrix(rows, (len(rows), ncols), self.domain)

    def zeros(self, m: int, n: int) -> DomainMatrix:
        return DomainMatrix.zeros((m, n), self.domain).to_dense()

    def eye(self, n: int) -> DomainMatrix:
        return DomainMatrix.eye(n, self.domain).to_dense()

    def column(self, values: Iterable) -> DomainMatrix:
        return self.matrix([[v] for v in values], 1)

    def to_python_rows(self, m: DomainMatrix) -> list[list[Scalar]]:
        return [[self.to_python(e) for e in row] for row in m.to_list()]


@lru_cache(maxsize=None)
def field(name: str = "q") -> Field:
    return Field(name)


# -- shape helpers ---------------------------------------------------------------


def nrows(m: DomainMatrix) -> int:
    return m.shape[0]


def ncols(m: DomainMatrix) -> int:
    return m.shape[1]


def entries(m: DomainMatrix) -> list[list]:
    return m.to_list() if nrows(m) else []


def entry(m: DomainMatrix, i: int, j: int):
    return m.to_list()[i][j]


def hstack(K: Field, d: int, *blocks: DomainMatrix) -> DomainMatrix:
    rows = [[] for _ in range(d)]
    for block in blocks:
        if ncols(block) == 0:
            continue
        for i, row in enumerate(block.to_list()):
            rows[i].extend(row)
    width = sum(ncols(b) for b in blocks)
    return DomainMatrix(rows, (d, width), K.domain)


def vstack(K: Field, width: int, *blocks: DomainMatrix) -> DomainMatrix:
    rows = []
    for block in blocks:
        if nrows(block):
            rows.extend(block.to_list())
    return DomainMatrix(rows, (len(rows), width), K.domain)


def columns(K: Field, m: DomainMatrix, idx: Sequence[int]) -> DomainMatrix:
    data = entries(m)
    return DomainMatrix([[row[j] for j in idx] for row in data], (nrows(m), len(idx)), K.domain)


def rows_of(K: Field, m: DomainMatrix, idx: Sequence[int]) -> DomainMatrix:
    data = entries(m)
    return DomainMatrix([list(data[i]) for i in idx], (len(idx), ncols(m)), K.domain)


def matmul(K: Field, a: DomainMatrix, b: DomainMatrix) -> DomainMatrix:
    if ncols(a) != nrows(b):
        raise InvalidInputError(f"shape mismatch {a.shape} @ {b.shape}")
    if 0 in (nrows(a), ncols(b)) or ncols(a) == 0:
        return K.zeros(nrows(a), ncols(b))
    return a.to_dense().matmul(b.to_dense())


def is_zero(m: DomainMatrix) -> bool:
    return all(not e for row in entries(m) for e in row)


def equal(a: DomainMatrix, b: DomainMatrix) -> bool:
    return a.shape == b.shape and entries(a) == entries(b)


# -- elimination -----------------------------------------------------------------


def rref(K: Field, m: DomainMatrix) -> tuple[DomainMatrix, tuple[int, ...]]:
    if nrows(m) == 0 or ncols(m) == 0:
        return m, ()
    reduced, pivots = m.rref()
    return reduced, tuple(pivots)


def rank(K: Field, m: DomainMatrix) -> int:
    return len(rref(K, m)[1])


def nullspace(K: Field, m: DomainMatrix) -> DomainMatrix:
    """Columns spanning {x : m x = 0}."""
    n = ncols(m)
    reduced, pivots = rref(K, m)
    free = [j for j in range(n) if j not in pivots]
    data = entries(reduced)
    cols = []
    for f in free:
        vec = [K.zero] * n
        vec[f] = K.one
        for r, pc in enumerate(pivots):
            vec[pc] = -data[r][f]
        cols.append(vec)
    return DomainMatrix([[c[i] for c in cols] for i in range(n)], (n, len(cols)), K.domain)


def solve(K: Field, a: DomainMatrix, b: DomainMatrix) -> DomainMatrix | None:
    """Some X with a X = b, or None when the system is inconsistent."""
    m, n = a.shape
    k = ncols(b)
    if m == 0:
        return K.zeros(n, k)
    aug = hstack(K, m, a, b)
    reduced, pivots = rref(K, aug)
    if any(p >= n for p in pivots):
        return None
    data = entries(reduced)
    out = [[K.zero] * k for _ in range(n)]
    for r, pc in enumerate(pivots):
        for j in range(k):
            out[pc][j] = data[r][n + j]
    return DomainMatrix(out, (n, k), K.domain)


def inverse(K: Field, m: DomainMatrix) -> DomainMatrix:
    n = nrows(m)
    if n != ncols(m):
        raise InvalidInputError("inverse of a non-square matrix")
    if n == 0:
        return m
    x = solve(K, m, K.eye(n))
    if x is None or rank(K, m) < n:
        raise InvalidInputError("matrix is not invertible")
    return x


def is_invertible(K: Field, m: DomainMatrix) -> bool:
    return nrows(m) == ncols(m) and rank(K, m) == nrows(m)


# -- subspaces (column bases) ----------------------------------------------------


def span(K: Field, m: DomainMatrix) -> DomainMatrix:
    """Basis of the column space, taken from the pivot columns of m."""
    _, pivots = rref(K, m)
    return columns(K, m, pivots)


def dim(K: Field, s: DomainMatrix) -> int:
    return rank(K, s)


def subspace_sum(K: Field, d: int, *spaces: DomainMatrix) -> DomainMatrix:
    return span(K, hstack(K, d, *spaces))


def intersect(K: Field, d: int, s: DomainMatrix, t: DomainMatrix) -> DomainMatrix:
    if ncols(s) == 0 or ncols(t) == 0:
        return K.zeros(d, 0)
    kernel = nullspace(K, hstack(K, d, s, -t))
    top = rows_of(K, kernel, range(ncols(s)))
    return span(K, matmul(K, s, top))


def contains(K: Field, s: DomainMatrix, v: DomainMatrix) -> bool:
    return solve(K, s, v) is not None


def complement_in(K: Field, d: int, s: DomainMatrix, t: DomainMatrix) -> DomainMatrix:
    """Columns of t completing a basis of s to a basis of s + t."""
    s = span(K, s)
    _, pivots = rref(K, hstack(K, d, s, t))
    k = ncols(s)
    return columns(K, t, [p - k for p in pivots if p >= k])


def complement(K: Field, d: int, s: DomainMatrix) -> DomainMatrix:
    return complement_in(K, d, s, K.eye(d))


def coordinates(K: Field, basis: DomainMatrix, v: DomainMatrix) -> DomainMatrix:
    x = solve(K, basis, v)
    if x is None:
        raise InvalidInputError("vector not in the span of the basis")
    return x


def preimage(K: Field, a: DomainMatrix, s: DomainMatrix) -> DomainMatrix:
    """Basis of {x : a x ∈ span(s)}."""
    m, n = a.shape
    kernel = nullspace(K, hstack(K, m, a, -s)) if ncols(s) else nullspace(K, a)
    return span(K, rows_of(K, kernel, range(n)))


def image(K: Field, a: DomainMatrix, s: DomainMatrix) -> DomainMatrix:
    return span(K, matmul(K, a, s))


def equal_spaces(K: Field, d: int, s: DomainMatrix, t: DomainMatrix) -> bool:
    r = rank(K, s)
    return r == rank(K, t) and rank(K, hstack(K, d, s, t)) == r
