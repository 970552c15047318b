"""Meromorphic evaluation of exponential integrals and sums over cones.

Every query fixes a base functional xi and a generic real direction beta and
works with truncated Laurent series in t along alpha(t) = xi + t * beta. The
valuation of each linear or exponential factor is decided exactly in
rational arithmetic; only sums of terms can produce numerical cancellation.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import mpmath

from .exact_linalg import (
    InnerProduct,
    Lattice,
    QVector,
    affine_lattice_point,
    columns_to_matrix,
    det,
    dot,
    inverse,
    is_integral,
    lattice_section,
    matmul,
    matvec,
    placing_triangulation,
    primitive_integer,
    snf,
    solve_in_span,
    span_basis,
    transpose,
    vadd,
    vec,
    vectors_rank,
    vneg,
    vscale,
    vsub,
    zeros,
)
from .polytope_core import Cone, Polytope
from .xi_structure import Xi

DEFAULT_PRECISION = 256
MAX_DRAWS = 1000


class NonGenericLine(ArithmeticError):
    pass


class ExhaustedRetries(RuntimeError):
    pass


class TruncationTooShallow(ValueError):
    pass


class NotPointed(ValueError):
    pass


class NotRational(ValueError):
    pass


# ------------------------------------------------------------ series


def _to_mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpc(mpmath.mpf(x.numerator) / x.denominator)
    if isinstance(x, int):
        return mpmath.mpc(x)
    return mpmath.mpc(x)


class LaurentSeries:
    """Truncated Laurent series sum_{k=val}^{trunc} c_k t^k.

    Coefficients are mpmath complex numbers; exponents above ``trunc`` are
    unknown.
    """

    exact = False

    def __init__(self, val: int, coeffs: Sequence, trunc: int):
        self.val = val
        self.trunc = trunc
        n = max(trunc - val + 1, 0)
        cs = list(coeffs)[:n]
        cs += [self._zero()] * (n - len(cs))
        self.coeffs = [self._lift(c) for c in cs]

    @staticmethod
    def _zero():
        return mpmath.mpc(0)

    @staticmethod
    def _lift(c):
        return _to_mp(c)

    @property
    def precision_bits(self) -> int:
        return mpmath.mp.prec

    @property
    def order_min(self) -> int:
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return self.val + i
        return self.trunc + 1

    def coeff(self, k: int):
        if k > self.trunc:
            raise TruncationTooShallow(f"coefficient t^{k} beyond truncation {self.trunc}")
        if k < self.val:
            return self._zero()
        return self.coeffs[k - self.val]

    def _like(self, other) -> type:
        if isinstance(other, LaurentSeries) and not other.exact:
            return LaurentSeries
        return type(self)

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        cls = self._like(other) if self.exact else LaurentSeries
        val = min(self.val, other.val)
        trunc = min(self.trunc, other.trunc)
        if cls.exact:
            return cls(val, [self.coeff(k) + other.coeff(k) for k in range(val, trunc + 1)], trunc)
        return cls(val, [_to_mp(self.coeff(k)) + _to_mp(other.coeff(k))
                         for k in range(val, trunc + 1)], trunc)

    def __neg__(self) -> "LaurentSeries":
        return type(self)(self.val, [-c for c in self.coeffs], self.trunc)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "LaurentSeries":
        if self.exact and isinstance(c, (int, Fraction)):
            return type(self)(self.val, [c * x for x in self.coeffs], self.trunc)
        c = _to_mp(c)
        return LaurentSeries(self.val, [c * _to_mp(x) for x in self.coeffs], self.trunc)

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            return self.scale(other)
        cls = self._like(other) if self.exact else LaurentSeries
        a, b = self, other
        val = a.val + b.val
        trunc = min(a.trunc + b.val, b.trunc + a.val)
        out = []
        for k in range(val, trunc + 1):
            s = cls._zero()
            for i in range(a.val, k - b.val + 1):
                s += a.coeffs[i - a.val] * b.coeffs[k - i - b.val] if cls.exact else \
                    _to_mp(a.coeffs[i - a.val]) * _to_mp(b.coeffs[k - i - b.val])
            out.append(s)
        return cls(val, out, trunc)

    __rmul__ = scale

    def stripped(self) -> "LaurentSeries":
        """Drop exactly-zero leading coefficients."""
        m = self.order_min
        return type(self)(m, self.coeffs[m - self.val:], self.trunc)

    def inverse(self) -> "LaurentSeries":
        s = self.stripped()
        if not s.coeffs:
            raise NonGenericLine("cannot invert a series with no nonzero coefficient")
        a0 = s.coeffs[0]
        n = len(s.coeffs)
        inv0 = (Fraction(1) / a0) if self.exact else 1 / a0
        b = [inv0]
        for k in range(1, n):
            acc = s._zero()
            for i in range(1, k + 1):
                acc += s.coeffs[i] * b[k - i]
            b.append(-acc * inv0)
        return type(self)(-s.val, b, -s.val + n - 1)

    def truncated(self, trunc: int) -> "LaurentSeries":
        trunc = min(trunc, self.trunc)
        return type(self)(self.val, self.coeffs, trunc)

    def __repr__(self) -> str:
        terms = ", ".join(f"t^{self.val + i}: {c}" for i, c in enumerate(self.coeffs))
        return f"{type(self).__name__}({terms}; trunc={self.trunc})"


class ExactSeries(LaurentSeries):
    """LaurentSeries over the rationals (used only at xi = 0)."""

    exact = True

    @staticmethod
    def _zero():
        return Fraction(0)

    @staticmethod
    def _lift(c):
        if isinstance(c, (int, Fraction)):
            return Fraction(c)
        raise TypeError("floating coefficient in exact mode")

    @property
    def precision_bits(self):
        return None


def series_class(exact: bool) -> type:
    return ExactSeries if exact else LaurentSeries


def zero_series(trunc: int, exact: bool) -> LaurentSeries:
    return series_class(exact)(0, [], trunc)


def one_series(trunc: int, exact: bool) -> LaurentSeries:
    return series_class(exact)(0, [1], trunc)


@lru_cache(maxsize=None)
def bernoulli(k: int) -> Fraction:
    """Bernoulli numbers with B_1 = -1/2."""
    if k == 0:
        return Fraction(1)
    return -sum((math.comb(k + 1, j) * bernoulli(j) for j in range(k)), Fraction(0)) / (k + 1)


# -------------------------------------------------------- generic line


@dataclass(frozen=True)
class GenericLine:
    """alpha(t) = base + t * beta with beta real rational."""

    base: Xi
    beta: QVector
    precision_bits: int = DEFAULT_PRECISION
    certificates: tuple = ()

    @property
    def exact(self) -> bool:
        return self.base.is_zero()

    @property
    def tol(self) -> mpmath.mpf:
        return mpmath.mpf(2) ** (-(self.precision_bits // 2))

    def slope(self, v) -> Fraction:
        return dot(self.beta, v)

    def exp_series(self, v, trunc: int) -> LaurentSeries:
        """e^{<alpha(t), v>}."""
        b = self.slope(v)
        if self.exact:
            cs, term = [], Fraction(1)
            for k in range(trunc + 1):
                cs.append(term)
                term = term * b / (k + 1)
            return ExactSeries(0, cs, trunc)
        c = self.base.exp_at(v)
        bm = _to_mp(Fraction(b))
        cs, term = [], c
        for k in range(trunc + 1):
            cs.append(term)
            term = term * bm / (k + 1)
        return LaurentSeries(0, cs, trunc)

    def linear_inverse(self, v, trunc: int) -> LaurentSeries:
        """1 / <alpha(t), v>."""
        r, i = self.base.pairing(v)
        b = self.slope(v)
        cls = series_class(self.exact)
        if r == 0 and i == 0:
            if b == 0:
                raise NonGenericLine(f"<alpha, {v}> vanishes identically")
            return cls(-1, [Fraction(1) / b], trunc)
        a0 = self.base.to_mpc(v)
        bm = _to_mp(Fraction(b))
        ratio = -bm / a0
        cs, term = [], 1 / a0
        for _ in range(trunc + 1):
            cs.append(term)
            term *= ratio
        return LaurentSeries(0, cs, trunc)

    def geometric_inverse(self, v, trunc: int) -> LaurentSeries:
        """1 / (1 - e^{<alpha(t), v>})."""
        b = self.slope(v)
        cls = series_class(self.exact)
        if self.base.exp_is_one(v):
            if b == 0:
                raise NonGenericLine(f"e^<alpha, {v}> is identically 1")
            # -1/(bt) * sum B_k (bt)^k / k!
            cs = [-bernoulli(k) * b ** (k - 1) / math.factorial(k) for k in range(trunc + 2)]
            return cls(-1, cs, trunc)
        e = self.exp_series(v, trunc)
        return (one_series(trunc, False) - e).inverse().truncated(trunc)


def _draw(rng: random.Random, n: int) -> QVector:
    return tuple(Fraction(rng.randint(-40, 40), rng.randint(1, 9)) for _ in range(n))


def generic_direction(constraints: Sequence[Sequence], n: int | None = None,
                      seed: int = 0, skip: int = 0) -> tuple[QVector, int]:
    """First pseudo-random direction (after ``skip`` draws) pairing nonzero with
    every constraint vector.

    Returns:
        (beta, index of the accepted draw).
    """
    cons = [vec(c) for c in constraints]
    if n is None:
        if not cons:
            raise ValueError("dimension needed when there are no constraints")
        n = len(cons[0])
    rng = random.Random(seed)
    for k in range(MAX_DRAWS):
        beta = _draw(rng, n)
        if k < skip:
            continue
        if all(dot(beta, c) != 0 for c in cons):
            return beta, k
    raise ExhaustedRetries(f"no generic direction within {MAX_DRAWS} draws")


def with_generic_line(fn: Callable[[GenericLine], object], base: Xi,
                      constraints: Sequence = (), seed: int = 0,
                      precision_bits: int = DEFAULT_PRECISION):
    """Run ``fn`` on successive generic lines until none of its factors degenerate."""
    skip = 0
    while skip < MAX_DRAWS:
        beta, k = generic_direction(constraints, base.dim, seed, skip)
        line = GenericLine(base, beta, precision_bits, tuple(vec(c) for c in constraints))
        try:
            with mpmath.workprec(precision_bits):
                return fn(line)
        except NonGenericLine:
            skip = k + 1
    raise ExhaustedRetries(f"no generic direction within {MAX_DRAWS} draws")


def value_at(s: LaurentSeries, tol=None) -> tuple[bool, object]:
    """(holomorphic, value at t = 0) of a truncated Laurent series."""
    if s.trunc < 0:
        raise TruncationTooShallow("series does not reach the constant term")
    if s.exact:
        hol = all(s.coeff(k) == 0 for k in range(s.val, 0))
        return hol, (s.coeff(0) if hol else None)
    tol = tol if tol is not None else mpmath.mpf(2) ** (-(mpmath.mp.prec // 2))
    scale = max((abs(c) for c in s.coeffs), default=mpmath.mpf(0))
    neg = max((abs(s.coeff(k)) for k in range(s.val, 0)), default=mpmath.mpf(0))
    hol = neg <= tol * scale
    return hol, (s.coeff(0) if hol else None)


def holomorphy_margin(s: LaurentSeries, tol=None) -> float:
    """Bits by which the largest negative-order coefficient sits below the
    holomorphy threshold (relative to the largest coefficient); capped at the
    working precision, negative when the series is not holomorphic."""
    prec = mpmath.mp.prec
    if s.exact:
        return float(prec) if all(s.coeff(k) == 0 for k in range(s.val, 0)) else float("-inf")
    tol = tol if tol is not None else mpmath.mpf(2) ** (-(prec // 2))
    scale = max((abs(c) for c in s.coeffs), default=mpmath.mpf(0))
    neg = max((abs(s.coeff(k)) for k in range(s.val, 0)), default=mpmath.mpf(0))
    if neg == 0 or scale == 0:
        return float(prec)
    return float(min(mpmath.log(tol * scale / neg, 2), prec))


# ----------------------------------------------------- cone decomposition


@dataclass(frozen=True)
class HalfOpenSimplicialCone:
    apex: QVector
    rays: tuple
    open_facets: tuple

    def contains(self, x) -> bool:
        c = solve_in_span(self.rays, vsub(x, self.apex)) if self.rays else (
            () if all(v == 0 for v in vsub(x, self.apex)) else None)
        if c is None:
            return False
        return all((ci > 0) if op else (ci >= 0) for ci, op in zip(c, self.open_facets))


def _prim(r) -> QVector:
    return tuple(Fraction(x) for x in primitive_integer(r))


def _cone_facet_normals(rays: list[QVector]) -> list[QVector]:
    n = len(rays[0])
    p = Polytope.from_vertices([zeros(n)] + rays)
    return [vneg(a) for a, b in p.facets if b == 0]


def rays_pointed(rays: Sequence[Sequence]) -> bool:
    """True iff the cone spanned by the nonzero rays contains no line, i.e. 0
    is a vertex of conv({0} and the rays)."""
    rays = [vec(r) for r in rays if any(x != 0 for x in r)]
    if len(rays) <= 1:
        return True
    origin = zeros(len(rays[0]))
    return origin in Polytope.from_vertices([origin] + rays).vertices


def cone_cross_section(rays: Sequence[QVector]) -> tuple[QVector, list[QVector]]:
    """A functional h positive on a pointed cone and the points r / h(r)."""
    rays = [vec(r) for r in rays]
    if not rays_pointed(rays):
        raise NotPointed("cone is not pointed")
    if len(rays) == 1:
        h = rays[0]
    else:
        normals = _cone_facet_normals(rays)
        h = normals[0]
        for nv in normals[1:]:
            h = vadd(h, nv)
    if any(dot(h, r) <= 0 for r in rays):
        raise NotPointed("cone is not pointed")
    return h, [vscale(Fraction(1) / dot(h, r), r) for r in rays]


def _dual_coords(rays: Sequence[QVector], x) -> QVector:
    return solve_in_span(rays, x)


def decompose_cone(k: Cone, lattice: Lattice | None = None, half_open: bool = True,
                   seed: int = 0) -> list[tuple[int, HalfOpenSimplicialCone]]:
    """Split a pointed cone into simplicial pieces using only its rays.

    Args:
        k: the cone.
        lattice: when given, rays are rescaled to primitive vectors of the
            lattice section by span(k).
        half_open: if true, shared facets are opened according to a generic
            interior reference point so that the pieces partition k exactly.
        seed: seed for the reference point.

    Returns:
        A list of (sign, HalfOpenSimplicialCone); signs are all +1.
    """
    if k.lineality:
        raise NotPointed("cone contains a line")
    rays = sorted({_prim(r) for r in k.rays if any(x != 0 for x in r)})
    if lattice is not None and rays:
        sec = lattice_section(lattice, span_basis(rays))
        if sec.rank != vectors_rank(rays):
            raise NotRational("cone is not rational for the lattice")
        rays = [sec.primitive(r) for r in rays]
    d = vectors_rank(rays) if rays else 0
    if len(rays) == d:
        return [(1, HalfOpenSimplicialCone(k.apex, tuple(rays), (False,) * d))]
    _, section = cone_cross_section(rays)
    simplices = placing_triangulation(section)
    pieces = [[rays[i] for i in s] for s in simplices]
    if not half_open:
        return [(1, HalfOpenSimplicialCone(k.apex, tuple(pc), (False,) * d)) for pc in pieces]
    rng = random.Random(seed)
    for _ in range(MAX_DRAWS):
        q = zeros(len(k.apex))
        for r in rays:
            q = vadd(q, vscale(Fraction(rng.randint(1, 997)), r))
        coords = [_dual_coords(pc, q) for pc in pieces]
        if all(c != 0 for cs in coords for c in cs):
            break
    else:
        raise ExhaustedRetries("no generic reference point")
    return [(1, HalfOpenSimplicialCone(k.apex, tuple(pc), tuple(c < 0 for c in cs)))
            for pc, cs in zip(pieces, coords)]


def parallelepiped_points(rays: Sequence[Sequence], lattice: Lattice, apex,
                          open_flags: Sequence[bool] | None = None) -> list[QVector]:
    """Lattice points of apex + {sum c_j v_j : c_j in [0,1), or (0,1] if open}.

    The rays must be lattice vectors; the count equals the index of the
    sublattice they generate in the lattice section by their span.
    """
    rays = [vec(r) for r in rays]
    apex = vec(apex)
    d = len(rays)
    open_flags = tuple(open_flags) if open_flags is not None else (False,) * d
    if d == 0:
        return [apex] if lattice.contains(apex) else []
    lam0 = affine_lattice_point(lattice, apex, rays)
    if lam0 is None:
        return []
    sec = lattice_section(lattice, rays)
    m = [sec.coords(r) for r in rays]
    if any(c is None or not is_integral(c) for c in m):
        raise NotRational("rays are not lattice vectors")
    mm = columns_to_matrix(m, d)
    minv = inverse(mm)
    w = sec.coords(vsub(lam0, apex))
    u, s, _ = snf([[int(x) for x in row] for row in mm])
    pts = set()

    def rec(i, y):
        if i == d:
            z = [sum(u[a][b] * y[b] for b in range(d)) for a in range(d)]
            c = matvec(minv, [w[a] + z[a] for a in range(d)])
            cc = []
            for cj, op in zip(c, open_flags):
                f = cj - math.floor(cj)
                cc.append(Fraction(1) if (op and f == 0) else f)
            x = apex
            for cj, r in zip(cc, rays):
                x = vadd(x, vscale(cj, r))
            pts.add(x)
            return
        for a in range(s[i][i]):
            rec(i + 1, y + [a])

    rec(0, [])
    return sorted(pts)


# ------------------------------------------------------ cone evaluation


def _sqrt_rational(q: Fraction):
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return mpmath.sqrt(mpmath.mpf(n) / d)


def cell_volume(rays: Sequence[QVector], measure) -> object:
    """Volume of the parallelepiped spanned by rays.

    ``measure`` is an InnerProduct (Euclidean volume in span) or a Lattice
    spanning the same space (lattice-normalized volume).
    """
    if not rays:
        return Fraction(1)
    if isinstance(measure, Lattice):
        cs = [measure.coords(r) for r in rays]
        if any(c is None for c in cs) or measure.rank != len(rays):
            raise ValueError("measure lattice does not span the cone")
        return abs(det(columns_to_matrix(cs, len(rays))))
    v = columns_to_matrix(rays, len(rays[0]))
    g = det(matmul(matmul(transpose(v), measure.gram), v))
    return _sqrt_rational(g)


def _num(x, exact: bool):
    if exact and isinstance(x, (int, Fraction)):
        return Fraction(x)
    return _to_mp(x)


def _simplicial_I(apex, rays, line: GenericLine, trunc: int, measure) -> LaurentSeries:
    nf = len(rays) + 1
    t = trunc + nf
    out = line.exp_series(apex, t)
    for r in rays:
        out = out * line.linear_inverse(r, t).scale(-1)
    vol = cell_volume(rays, measure)
    if out.exact and not isinstance(vol, Fraction):
        out = LaurentSeries(out.val, out.coeffs, out.trunc)
    return out.scale(_num(vol, out.exact)).truncated(trunc)


def _iter_terms(vc):
    from .virtual_cone import VirtualCone
    if isinstance(vc, VirtualCone):
        return list(vc.terms)
    if isinstance(vc, Cone):
        return [(1, vc)]
    raise TypeError(f"cannot evaluate {type(vc).__name__}")


def I_eval(vc, line: GenericLine, trunc: int, measure=None) -> LaurentSeries:
    """Laurent expansion of the exponential integral over a (virtual) cone.

    Args:
        vc: a Cone or VirtualCone.
        line: the generic line through the base functional.
        trunc: highest exponent to keep.
        measure: InnerProduct for Euclidean volume on the span of each cone
            (default standard), or a Lattice normalizing the volume.

    Returns:
        The series of I(vc; base + t beta) up to t^trunc.
    """
    acc = zero_series(trunc, line.exact)
    with mpmath.workprec(line.precision_bits):
        for coeff, k in _iter_terms(vc):
            if k.lineality:
                continue
            m = measure if measure is not None else InnerProduct.standard(len(k.apex))
            rays = [r for r in k.rays if any(x != 0 for x in r)]
            if not rays:
                acc = acc + line.exp_series(k.apex, trunc).scale(coeff)
                continue
            for sign, piece in decompose_cone(Cone(k.apex, tuple(rays)), None, half_open=False):
                term = _simplicial_I(k.apex, list(piece.rays), line, trunc, m)
                acc = acc + term.scale(coeff * sign)
    return acc


def _cone_S(k: Cone, lattice: Lattice, line: GenericLine, trunc: int) -> LaurentSeries:
    if k.lineality:
        return zero_series(trunc, line.exact)
    rays = [r for r in k.rays if any(x != 0 for x in r)]
    if not rays:
        if lattice.contains(k.apex):
            return line.exp_series(k.apex, trunc)
        return zero_series(trunc, line.exact)
    if affine_lattice_point(lattice, k.apex, span_basis(rays)) is None:
        return zero_series(trunc, line.exact)
    acc = zero_series(trunc, line.exact)
    for sign, piece in decompose_cone(Cone(k.apex, tuple(rays)), lattice):
        pts = parallelepiped_points(piece.rays, lattice, piece.apex, piece.open_facets)
        t = trunc + len(piece.rays) + 1
        num = zero_series(t, line.exact)
        for x in pts:
            num = num + line.exp_series(x, t)
        term = num
        for r in piece.rays:
            term = term * line.geometric_inverse(r, t)
        acc = acc + term.truncated(trunc).scale(sign)
    return acc


def S_eval(vc, lattice: Lattice, shift, line: GenericLine, trunc: int) -> LaurentSeries:
    """Laurent expansion of the exponential sum of a (virtual) cone over
    shift + lattice, using S_{s+L}(q) = e^{<alpha, s>} S_L(q - s)."""
    with mpmath.workprec(line.precision_bits):
        shift = vec(shift) if shift is not None else None
        acc = zero_series(trunc, line.exact)
        for coeff, k in _iter_terms(vc):
            kk = k if shift is None else Cone(vsub(k.apex, shift), k.rays, k.lineality)
            acc = acc + _cone_S(kk, lattice, line, trunc).scale(coeff)
        if shift is not None and any(x != 0 for x in shift):
            acc = (acc * line.exp_series(shift, trunc - min(acc.val, 0))).truncated(trunc)
        return acc


__all__ = [
    "LaurentSeries", "ExactSeries", "GenericLine", "HalfOpenSimplicialCone",
    "NonGenericLine", "ExhaustedRetries", "TruncationTooShallow", "NotPointed", "NotRational",
    "generic_direction", "with_generic_line", "cone_cross_section", "rays_pointed", "decompose_cone", "parallelepiped_points",
    "I_eval", "S_eval", "value_at", "holomorphy_margin", "bernoulli", "cell_volume",
    "zero_series", "one_series", "DEFAULT_PRECISION",
]
