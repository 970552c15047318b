"""Exact rational linear algebra and lattice algorithms.

Vectors are tuples of ``Fraction``; matrices are tuples of row tuples.
Lattices are stored by an explicit basis of column vectors in ambient
coordinates, canonicalized through the column Hermite normal form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import product
from typing import Iterable, Sequence

Rat = Fraction
QVector = tuple
QMatrix = tuple


class LinalgError(ValueError):
    """Base class for precondition failures in this module."""


class NonRationalSubspace(LinalgError):
    pass


class NotFiniteIndex(LinalgError):
    pass


class NotOrthogonal(LinalgError):
    pass


class DimensionMismatch(LinalgError):
    pass


# ---------------------------------------------------------------- scalars


def rat(x) -> Fraction:
    """Parse an int, Fraction or string like ``"-3/4"`` into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted as exact rationals")
    return Fraction(x)


def vec(xs: Iterable) -> QVector:
    return tuple(rat(x) for x in xs)


def mat(rows: Iterable[Iterable]) -> QMatrix:
    return tuple(vec(r) for r in rows)


def zeros(n: int) -> QVector:
    return (Fraction(0),) * n


def identity(n: int) -> QMatrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def lcm_denominators(xs: Iterable[Fraction]) -> int:
    return reduce(math.lcm, (x.denominator for x in xs), 1)


def is_integral(xs: Iterable[Fraction]) -> bool:
    return all(x.denominator == 1 for x in xs)


# ------------------------------------------------------- vector/matrix ops


def dot(u: Sequence, v: Sequence):
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def vadd(u, v) -> QVector:
    return tuple(a + b for a, b in zip(u, v))


def vsub(u, v) -> QVector:
    return tuple(a - b for a, b in zip(u, v))


def vscale(c, v) -> QVector:
    return tuple(c * a for a in v)


def vneg(v) -> QVector:
    return tuple(-a for a in v)


def is_zero(v) -> bool:
    return all(a == 0 for a in v)


def transpose(m: Sequence[Sequence]) -> QMatrix:
    return tuple(zip(*m)) if m else ()


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> QMatrix:
    bt = transpose(b)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def matvec(m: Sequence[Sequence], v: Sequence) -> QVector:
    return tuple(dot(row, v) for row in m)


def columns_to_matrix(cols: Sequence[Sequence], n: int) -> QMatrix:
    """Stack column vectors into an n x k matrix."""
    if not cols:
        return tuple(() for _ in range(n))
    return transpose(cols)


def rref(m: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q and the pivot column list."""
    a = [[Fraction(x) for x in row] for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def rank(m: Sequence[Sequence]) -> int:
    if not m or not m[0]:
        return 0
    return len(rref(m)[1])


def vectors_rank(vs: Sequence[Sequence]) -> int:
    return rank(list(vs)) if vs else 0


def det(m: Sequence[Sequence]) -> Fraction:
    a = [[Fraction(x) for x in row] for row in m]
    n = len(a)
    if n == 0:
        return Fraction(1)
    d = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            d = -d
        d *= a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] / a[c][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return d


def inverse(m: Sequence[Sequence]) -> QMatrix:
    n = len(m)
    aug = [list(row) + list(e) for row, e in zip(m, identity(n))]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise LinalgError("matrix is singular")
    return tuple(tuple(row[n:]) for row in red)


def nullspace(m: Sequence[Sequence], ncols: int | None = None) -> list[QVector]:
    """Basis of {x : m x = 0} over Q."""
    if not m:
        n = ncols or 0
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    n = len(m[0])
    red, piv = rref(m)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for r, p in enumerate(piv):
            x[p] = -red[r][f]
        basis.append(tuple(x))
    return basis


def solve_in_span(cols: Sequence[Sequence], x: Sequence) -> QVector | None:
    """Coordinates c with sum c_j cols[j] = x, or None if x is not in the span.

    The columns must be linearly independent.
    """
    k = len(cols)
    if k == 0:
        return () if is_zero(x) else None
    n = len(x)
    aug = [[cols[j][i] for j in range(k)] + [x[i]] for i in range(n)]
    red, piv = rref(aug)
    if k in piv:
        return None
    if len(piv) < k:
        raise LinalgError("columns are linearly dependent")
    return tuple(red[r][k] for r in range(k))


def independent_subset(vs: Sequence[Sequence]) -> list[int]:
    """Indices of a maximal linearly independent prefix-greedy subset."""
    chosen: list[int] = []
    current: list = []
    for i, v in enumerate(vs):
        if is_zero(v):
            continue
        if rank(current + [v]) > len(current):
            chosen.append(i)
            current.append(v)
    return chosen


def span_basis(vs: Sequence[Sequence]) -> list[QVector]:
    return [tuple(vs[i]) for i in independent_subset(vs)]


def annihilator(basis: Sequence[Sequence], n: int) -> list[QVector]:
    """Rows a with a . w = 0 for every w in the span of ``basis``."""
    return nullspace(list(basis), n) if basis else [
        tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)
    ]


def primitive_integer(v: Sequence[Fraction]) -> tuple[int, ...]:
    """The primitive integer vector on the ray through ``v``."""
    d = lcm_denominators(v)
    ints = [int(x * d) for x in v]
    g = reduce(math.gcd, (abs(a) for a in ints), 0)
    if g == 0:
        raise LinalgError("zero vector has no primitive scaling")
    return tuple(a // g for a in ints)


# --------------------------------------------------------- inner products


@dataclass(frozen=True)
class InnerProduct:
    """Rational positive definite Gram matrix on Q^n."""

    gram: QMatrix

    def __post_init__(self):
        g = self.gram
        n = len(g)
        if any(len(r) != n for r in g):
            raise DimensionMismatch("Gram matrix must be square")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise LinalgError("Gram matrix must be symmetric")
        for k in range(1, n + 1):
            if det([row[:k] for row in g[:k]]) <= 0:
                raise LinalgError("Gram matrix must be positive definite")

    @classmethod
    def standard(cls, n: int) -> "InnerProduct":
        return cls(identity(n))

    @property
    def dim(self) -> int:
        return len(self.gram)

    def __call__(self, x, y) -> Fraction:
        return dot(x, matvec(self.gram, y))

    def lower(self, x) -> QVector:
        """The covector <x, .>."""
        return matvec(self.gram, x)

    def raise_(self, covector) -> QVector:
        """The vector representing a covector."""
        return matvec(inverse(self.gram), covector)

    def projector(self, basis: Sequence[Sequence]) -> QMatrix:
        """Matrix of orthogonal projection onto span(basis)."""
        n = self.dim
        basis = span_basis(basis)
        if not basis:
            return tuple(zeros(n) for _ in range(n))
        b = columns_to_matrix(basis, n)
        bt = transpose(b)
        mid = inverse(matmul(matmul(bt, self.gram), b))
        return matmul(matmul(matmul(b, mid), bt), self.gram)

    def project(self, x, basis) -> QVector:
        return matvec(self.projector(basis), x)

    def complement(self, basis: Sequence[Sequence]) -> list[QVector]:
        """Basis of the orthogonal complement of span(basis) in Q^n."""
        basis = span_basis(basis)
        if not basis:
            return list(identity(self.dim))
        return nullspace([self.lower(b) for b in basis], self.dim)

    def complement_within(self, basis, ambient) -> list[QVector]:
        """Basis of span(ambient) intersected with span(basis)^perp."""
        ambient = span_basis(ambient)
        if not ambient:
            return []
        cons =[[self(b, a) for a in ambient] for b in span_basis(basis)]
        coeffs = nullspace(cons, len(ambient)) if cons else list(identity(len(ambient)))
        out = []
        for c in coeffs:
            v = zeros(self.dim)
            for cj, a in zip(c, ambient):
                v = vadd(v, vscale(cj, a))
            out.append(v)
        return out


# ------------------------------------------------- integer normal forms


def _int_matrix(m: Sequence[Sequence]) -> tuple[list[list[int]], int]:
    d = lcm_denominators(x for row in m for x in row)
    return [[int(Fraction(x) * d) for x in row] for row in m], d


def hnf_columns(m: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Column Hermite normal form H = M U with U unimodular.

    H is in column echelon form: each pivot is positive, zero columns come
    last, and entries to the left of a pivot lie in [0, pivot).
    """
    rows = len(m)
    cols = len(m[0]) if rows else 0
    h = [list(map(int, r)) for r in m]
    u = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def col_add(dst, src, q):  # col_dst += q col_src
        for r in h:
            r[dst] += q * r[src]
        for r in u:
            r[dst] += q * r[src]

    def col_swap(a, b):
        for r in h:
            r[a], r[b] = r[b], r[a]
        for r in u:
            r[a], r[b] = r[b], r[a]

    def col_neg(a):
        for r in h:
            r[a] = -r[a]
        for r in u:
            r[a] = -r[a]

    c = 0
    for i in range(rows):
        if c >= cols:
            break
        while True:
            nz = [j for j in range(c, cols) if h[i][j] != 0]
            if not nz:
                break
            j = min(nz, key=lambda j: abs(h[i][j]))
            if j != c:
                col_swap(c, j)
            done = True
            for j in range(c + 1, cols):
                if h[i][j] != 0:
                    col_add(j, c, -(h[i][j] // h[i][c]))
                    if h[i][j] != 0:
                        done = False
            if done:
                break
        if h[i][c] == 0:
            continue
        if h[i][c] < 0:
            col_neg(c)
        p = h[i][c]
        for j in range(c):
            q = h[i][j] // p
            if q:
                col_add(j, c, -q)
        c += 1
    return h, u


def snf(m: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Smith normal form with M = U S V, U and V unimodular, d1 | d2 | ..."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    a = [list(map(int, r)) for r in m]
    u = [[int(i == j) for j in range(rows)] for i in range(rows)]
    v = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def row_add(i, j, q):  # row_i += q row_j ; U col_j -= q col_i
        a[i] = [x + q * y for x, y in zip(a[i], a[j])]
        for r in u:
            r[j] -= q * r[i]

    def row_swap(i, j):
        a[i], a[j] = a[j], a[i]
        for r in u:
            r[i], r[j] = r[j], r[i]

    def row_neg(i):
        a[i] = [-x for x in a[i]]
        for r in u:
            r[i] = -r[i]

    def col_add(j, i, q):  # col_j += q col_i ; V row_i -= q row_j
        for r in a:
            r[j] += q * r[i]
        v[i] = [x - q * y for x, y in zip(v[i], v[j])]

    def col_swap(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        v[i], v[j] = v[j], v[i]

    for t in range(min(rows, cols)):
        cand = [(abs(a[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i][j]]
        if not cand:
            break
        _, i0, j0 = min(cand)
        if i0 != t:
            row_swap(t, i0)
        if j0 != t:
            col_swap(t, j0)
        while True:
            changed = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    row_add(i, t, -(a[i][t] // a[t][t]))
                    if a[i][t]:
                        changed = True
            for j in range(t + 1, cols):
                if a[t][j]:
                    col_add(j, t, -(a[t][j] // a[t][t]))
                    if a[t][j]:
                        changed = True
            if changed:
                cand = [(abs(a[i][t]), i, 'r') for i in range(t, rows) if a[i][t]]
                cand += [(abs(a[t][j]), j, 'c') for j in range(t, cols) if a[t][j]]
                _, k, kind = min(cand)
                if kind == 'r' and k != t:
                    row_swap(t, k)
                elif kind == 'c' and k != t:
                    col_swap(t, k)
                continue
            bad = next(
                (i for i in range(t + 1, rows) for j in range(t + 1, cols) if a[i][j] % a[t][t]),
                None,
            )
            if bad is None:
                break
            row_add(t, bad, 1)
        if a[t][t] < 0:
            row_neg(t)
    return u, a, v


def canonical_forms(m: Sequence[Sequence], kind: str = "HNF"):
    """Hermite or Smith form of a rational matrix after clearing denominators.

    Returns ``(canonical, transforms, scale)`` where the integer matrix is
    ``scale * m``.  For ``"HNF"`` the transforms are ``[U]`` with
    ``scale*m @ U == canonical``; for ``"SNF"`` they are ``[U, V]`` with
    ``scale*m == U @ canonical @ V``.
    """
    im, d = _int_matrix(m)
    if kind.upper() == "HNF":
        h, u = hnf_columns(im)
        return mat(h), [mat(u)], d
    if kind.upper() == "SNF":
        u, s, v = snf(im)
        return mat(s), [mat(u), mat(v)], d
    raise ValueError(f"unknown normal form {kind!r}")


def integer_kernel(m: Sequence[Sequence], ncols: int) -> list[tuple[int, ...]]:
    """Basis of {z in Z^ncols : m z = 0}."""
    if not m:
        return [tuple(int(i == j) for j in range(ncols)) for i in range(ncols)]
    im = [[int(x * lcm_denominators(row)) for x in row] for row in m]
    h, u = hnf_columns(im)
    nz = {j for row in h for j, x in enumerate(row) if x}
    return [tuple(u[i][j] for i in range(ncols)) for j in range(ncols) if j not in nz]


def congruence_lattice(m: Sequence[Sequence], ncols: int) -> list[tuple[int, ...]]:
    """Basis of {z in Z^ncols : m z is integral} for a rational matrix m."""
    if not m:
        return [tuple(int(i == j) for j in range(ncols)) for i in range(ncols)]
    rows = len(m)
    d = lcm_denominators(x for row in m for x in row)
    big = [[x * d for x in row] + [Fraction(-d if i == r else 0) for i in range(rows)]
           for r, row in enumerate(m)]
    gens = [k[:ncols] for k in integer_kernel(big, ncols + rows)]
    return _int_basis_from_generators(gens, ncols)


def _int_basis_from_generators(gens: Sequence[Sequence[int]], n: int) -> list[tuple[int, ...]]:
    if not gens:
        return []
    h, _ = hnf_columns(columns_to_matrix(gens, n))
    k = len(gens)
    return [tuple(int(h[i][j]) for i in range(n)) for j in range(k)
            if any(h[i][j] for i in range(n))]


def solve_integer(m: Sequence[Sequence], rhs: Sequence) -> tuple[int, ...] | None:
    """Some integer z with m z = rhs, or None."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    d = lcm_denominators([x for row in m for x in row] + list(rhs))
    im = [[int(x * d) for x in row] for row in m]
    r = [Fraction(x) * d for x in rhs]
    u, s, v = snf(im)
    uinv = inverse(u)
    w = matvec(uinv, r)
    y = [0] * cols
    for i in range(rows):
        si = s[i][i] if i < cols else 0
        if si == 0:
            if w[i] != 0:
                return None
            continue
        q = w[i] / si
        if q.denominator != 1:
            return None
        y[i] = int(q)
    vinv = inverse(v)
    z = matvec(vinv, y)
    return tuple(int(x) for x in z)


# ------------------------------------------------------------- lattices


@dataclass(frozen=True)
class Lattice:
    """A lattice given by Q-linearly independent columns in Q^ambient_dim.

    The stored basis is the column Hermite normal form, so equal lattices
    compare equal.
    """

    ambient_dim: int
    basis: tuple = field(default=())

    def __post_init__(self):
        cols = [vec(c) for c in self.basis]
        if any(len(c) != self.ambient_dim for c in cols):
            raise DimensionMismatch("basis vector length differs from ambient_dim")
        if cols and vectors_rank(cols) != len(cols):
            raise LinalgError("lattice basis must be linearly independent")
        object.__setattr__(self, "basis", _canonical_basis(cols, self.ambient_dim))

    @classmethod
    def standard(cls, n: int) -> "Lattice":
        return cls(n, tuple(identity(n)))

    @classmethod
    def from_generators(cls, gens: Sequence[Sequence], n: int) -> "Lattice":
        gens = [vec(g) for g in gens if not is_zero(g)]
        return cls(n, tuple(_canonical_basis(gens, n)))

    @property
    def rank(self) -> int:
        return len(self.basis)

    def coords(self, x) -> QVector | None:
        return solve_in_span(self.basis, vec(x))

    def contains(self, x) -> bool:
        c = self.coords(x)
        return c is not None and is_integral(c)

    def point(self, z: Sequence) -> QVector:
        out = zeros(self.ambient_dim)
        for zi, b in zip(z, self.basis):
            out = vadd(out, vscale(zi, b))
        return out

    def span(self) -> list[QVector]:
        return list(self.basis)

    def primitive(self, v) -> QVector:
        """The primitive lattice vector on the ray through v (v in span)."""
        c = self.coords(v)
        if c is None:
            raise DimensionMismatch("vector is not in the span of the lattice")
        return self.point(primitive_integer(c))

    def reduce(self, x) -> QVector:
        """Representative of x + L in the half-open fundamental parallelepiped."""
        c = self.coords(x)
        if c is None:
            raise DimensionMismatch("vector is not in the span of the lattice")
        return self.point(tuple(ci - math.floor(ci) for ci in c))

    def sublattice_index(self, sub: "Lattice") -> int:
        cs = [self.coords(b) for b in sub.basis]
        if any(c is None or not is_integral(c) for c in cs) or sub.rank != self.rank:
            raise NotFiniteIndex("not a finite-index sublattice")
        return abs(int(det(columns_to_matrix(cs, self.rank))))


def _canonical_basis(cols: Sequence[Sequence[Fraction]], n: int) -> tuple:
    if not cols:
        return ()
    d = lcm_denominators(x for c in cols for x in c)
    ints = [[int(x * d) for x in c] for c in cols]
    basis = _int_basis_from_generators(ints, n)
    return tuple(tuple(Fraction(x, d) for x in b) for b in basis)


def gram_det_sq(lat: Lattice, ip: InnerProduct) -> Fraction:
    """gr(L)^2 = det(B^T A B)."""
    if lat.rank == 0:
        return Fraction(1)
    b = columns_to_matrix(lat.basis, lat.ambient_dim)
    return det(matmul(matmul(transpose(b), ip.gram), b))


def lattice_section(lat: Lattice, w_basis: Sequence[Sequence]) -> Lattice:
    """L intersected with the subspace span(w_basis)."""
    n = lat.ambient_dim
    w_basis = span_basis([vec(w) for w in w_basis])
    ann = annihilator(w_basis, n)
    cons = [[dot(a, b) for b in lat.basis] for a in ann]
    ker = integer_kernel(cons, lat.rank) if ann else [
        tuple(int(i == j) for j in range(lat.rank)) for i in range(lat.rank)]
    sec = Lattice.from_generators([lat.point(z) for z in ker], n)
    w_in_lat = vectors_rank(list(w_basis) + list(lat.basis)) == lat.rank
    if w_in_lat and sec.rank != len(w_basis):
        raise NonRationalSubspace("subspace is not spanned by lattice vectors")
    return sec


def lattice_projection(lat: Lattice, w_basis, ip: InnerProduct) -> Lattice:
    """Orthogonal projection of L onto span(w_basis)."""
    p = ip.projector(w_basis)
    return Lattice.from_generators([matvec(p, b) for b in lat.basis], lat.ambient_dim)


def lattice_section_and_projection(lat: Lattice, w_basis, ip: InnerProduct) -> tuple[Lattice, Lattice]:
    sec = lattice_section(lat, w_basis)
    proj = lattice_projection(lat, w_basis, ip)
    return sec, proj


def affine_lattice_point(lat: Lattice, point, w_basis) -> QVector | None:
    """Some element of L in point + span(w_basis), or None."""
    n = lat.ambient_dim
    ann = annihilator(span_basis(w_basis), n)
    if not ann:
        return lat.point(zeros(lat.rank))
    m = [[dot(a, b) for b in lat.basis] for a in ann]
    rhs = [dot(a, point) for a in ann]
    if lat.rank == 0:
        return lat.point(()) if is_zero(rhs) else None
    z = solve_integer(m, rhs)
    return None if z is None else lat.point(z)


def _reduce_in_cell(cols: Sequence[Sequence], x) -> QVector:
    c = solve_in_span(cols, x)
    if c is None:
        raise DimensionMismatch("vector is not in the span of the lattice")
    out = zeros(len(x))
    for ci, b in zip(c, cols):
        out = vadd(out, vscale(ci - math.floor(ci), b))
    return out


def quotient_representatives(lat: Lattice, sub: Lattice,
                             cell: Sequence[Sequence] | None = None) -> list[QVector]:
    """Representatives of lat / sub, one per coset.

    Each representative is reduced into the half-open parallelepiped spanned by
    ``cell`` (a basis of ``sub``; default its canonical basis).
    """
    k = lat.rank
    cell = list(cell) if cell is not None else list(sub.basis)
    cs = [lat.coords(b) for b in sub.basis]
    if sub.rank != k or any(c is None or not is_integral(c) for c in cs):
        raise NotFiniteIndex("sublattice does not have finite index")
    cm = [[int(x) for x in row] for row in columns_to_matrix(cs, k)]
    u, s, _ = snf(cm)
    ranges = [range(s[i][i]) for i in range(k)]
    reps = set()
    for a in product(*ranges):
        z = [sum(u[i][j] * a[j] for j in range(k)) for i in range(k)]
        reps.add(_reduce_in_cell(cell, lat.point(z)))
    return sorted(reps)


@dataclass(frozen=True)
class CosetDecomposition:
    sublattice: Lattice
    representatives: tuple
    phi1_images: tuple
    phi2_images: tuple


def coset_representatives(lat: Lattice, l1: Lattice, l2: Lattice,
                          ip: InnerProduct | None = None) -> CosetDecomposition:
    """Cosets of L / (L1 + L2) with the projection maps onto each factor.

    The images phi1([g]) = P_{W1} g mod L1 and phi2([g]) = P_{W2} g mod L2 are
    reduced into the fundamental cells of L1 and L2.
    """
    n = lat.ambient_dim
    ip = ip or InnerProduct.standard(n)
    if any(ip(a, b) != 0 for a in l1.basis for b in l2.basis):
        raise NotOrthogonal("L1 and L2 are not orthogonal")
    sub = Lattice(n, tuple(l1.basis) + tuple(l2.basis))
    w1, w2 = list(l1.basis), list(l2.basis)
    reps = quotient_representatives(lat, sub, w1 + w2)
    p1, p2 = ip.projector(w1), ip.projector(w2)
    phi1 = tuple(l1.reduce(matvec(p1, g)) if w1 else zeros(n) for g in reps)
    phi2 = tuple(l2.reduce(matvec(p2, g)) if w2 else zeros(n) for g in reps)
    # the maps are bijections onto the projected quotients when L1, L2 are sections
    if l1 == lattice_section(lat, w1) and l2 == lattice_section(lat, w2):
        if len(set(phi1)) != len(reps) or len(set(phi2)) != len(reps):
            raise NotFiniteIndex("projection maps are not injective on cosets")
    return CosetDecomposition(sub, tuple(reps), phi1, phi2)


# --------------------------------------------------- triangulation/volume


def affine_rank(points: Sequence[Sequence]) -> int:
    if not points:
        return -1
    p0 = points[0]
    return vectors_rank([vsub(p, p0) for p in points[1:]]) if len(points) > 1 else 0


def placing_triangulation(points: Sequence[Sequence]) -> list[tuple[int, ...]]:
    """Lexicographic placing triangulation of a point configuration.

    Every distinct point becomes a vertex of the triangulation.  Returns index
    tuples of full-dimensional simplices (in the affine hull).
    """
    pts = [vec(p) for p in points]
    order = []
    seen = set()
    for i in sorted(range(len(pts)), key=lambda i: pts[i]):
        if pts[i] not in seen:
            seen.add(pts[i])
            order.append(i)
    if not order:
        return []
    base = [order[0]]
    simplices: list[tuple[int, ...]] = [(order[0],)]
    for idx in order[1:]:
        dirs = [vsub(pts[b], pts[base[0]]) for b in base[1:]]
        y = solve_in_span(dirs, vsub(pts[idx], pts[base[0]]))
        if y is None:
            simplices = [s + (idx,) for s in simplices]
            base.append(idx)
            continue

        def local(i):
            return solve_in_span(dirs, vsub(pts[i], pts[base[0]]))

        facets: dict[tuple[int, ...], list[int]] = {}
        for s in simplices:
            for j in range(len(s)):
                f = tuple(sorted(s[:j] + s[j + 1:]))
                facets.setdefault(f, []).append(s[j])
        yp = y
        new = []
        for f, opp in facets.items():
            if len(opp) != 1:
                continue
            ys = [local(i) for i in f]
            normal = nullspace([vsub(q, ys[0]) for q in ys[1:]], len(dirs)) if len(ys) > 1 \
                else list(identity(len(dirs)))
            c = normal[0]
            side_opp = dot(c, vsub(local(opp[0]), ys[0]))
            side_p = dot(c, vsub(yp, ys[0]))
            if side_opp * side_p < 0:
                new.append(f + (idx,))
        simplices.extend(new)
    return [tuple(sorted(s)) for s in simplices]


def simplex_volume(points: Sequence[Sequence], basis: Sequence[Sequence] | None = None) -> Fraction:
    """|det|/k! of a k-simplex in coordinates of ``basis`` (default: ambient)."""
    p0 = points[0]
    diffs = [vsub(p, p0) for p in points[1:]]
    k = len(diffs)
    if basis is not None:
        diffs = [solve_in_span(basis, d) for d in diffs]
    return abs(det(columns_to_matrix(diffs, k))) / math.factorial(k) if k else Fraction(1)


def normalized_volume(vertices: Sequence[Sequence], lat: Lattice) -> Fraction:
    """Volume of conv(vertices) with respect to which ``lat`` has covolume 1."""
    pts = [vec(v) for v in vertices]
    p0 = pts[0]
    coords = []
    for p in pts:
        c = lat.coords(vsub(p, p0))
        if c is None:
            raise DimensionMismatch("affine hull is not parallel to the lattice span")
        coords.append(c)
    if affine_rank(coords) != lat.rank:
        raise DimensionMismatch("polytope is lower dimensional than the lattice span")
    if lat.rank == 0:
        return Fraction(1)
    tri = placing_triangulation(coords)
    return sum((simplex_volume([coords[i] for i in s]) for s in tri), Fraction(0))
