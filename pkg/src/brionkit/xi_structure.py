"""Complex rational functionals, their constant faces, flags and the
reduction of a functional to one adapted to a finite-index sublattice."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .exact_linalg import (
    InnerProduct,
    Lattice,
    QVector,
    congruence_lattice,
    dot,
    integer_kernel,
    matvec,
    quotient_representatives,
    solve_in_span,
    transpose,
    vec,
    zeros,
)
from .polytope_core import Face, Polytope


class NotXiConstant(ValueError):
    pass


@dataclass(frozen=True)
class Xi:
    """The functional x -> <re, x> + 2 pi i <im2pi, x> with rational data."""

    re: QVector
    im2pi: QVector

    @classmethod
    def real(cls, re: Sequence) -> "Xi":
        re = vec(re)
        return cls(re, zeros(len(re)))

    @classmethod
    def zero(cls, n: int) -> "Xi":
        return cls(zeros(n), zeros(n))

    @classmethod
    def of(cls, re: Sequence | None = None, im2pi: Sequence | None = None, n: int | None = None) -> "Xi":
        if re is None and im2pi is None:
            return cls.zero(n or 0)
        size = len(re) if re is not None else len(im2pi)
        return cls(vec(re) if re is not None else zeros(size),
                   vec(im2pi) if im2pi is not None else zeros(size))

    @property
    def dim(self) -> int:
        return len(self.re)

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.re) and all(x == 0 for x in self.im2pi)

    def pairing(self, x) -> tuple[Fraction, Fraction]:
        """Exact (real part, imaginary part / 2 pi) of <xi, x>."""
        return dot(self.re, x), dot(self.im2pi, x)

    def vanishes_on(self, basis) -> bool:
        return all(self.pairing(b) == (0, 0) for b in basis)

    def exp_is_one(self, x) -> bool:
        """Exact test for e^{<xi, x>} = 1."""
        r, i = self.pairing(x)
        return r == 0 and i.denominator == 1

    def pullback(self, m) -> "Xi":
        """The functional x -> xi(m x) for a rational matrix m."""
        mt = transpose(m)
        return Xi(matvec(mt, self.re), matvec(mt, self.im2pi))

    def __add__(self, other: "Xi") -> "Xi":
        return Xi(tuple(a + b for a, b in zip(self.re, other.re)),
                  tuple(a + b for a, b in zip(self.im2pi, other.im2pi)))

    def scaled(self, c) -> "Xi":
        c = Fraction(c)
        return Xi(tuple(c * a for a in self.re), tuple(c * a for a in self.im2pi))

    def to_mpc(self, x) -> mpmath.mpc:
        r, i = self.pairing(x)
        return mpmath.mpc(_mpf(r), 2 * mpmath.pi * _mpf(i))

    def exp_at(self, x) -> mpmath.mpc:
        """e^{<xi, x>} with the angle reduced exactly mod 1 before use."""
        return exp_of_pair(*self.pairing(x))

    def components(self) -> list[mpmath.mpc]:
        return [mpmath.mpc(_mpf(r), 2 * mpmath.pi * _mpf(i)) for r, i in zip(self.re, self.im2pi)]


def _mpf(q: Fraction) -> mpmath.mpf:
    return mpmath.mpf(q.numerator) / q.denominator


def exp_of_pair(r: Fraction, i: Fraction) -> mpmath.mpc:
    """e^{r + 2 pi i * i} computed with the angle reduced into [0, 1)."""
    frac = i - math.floor(i)
    mag = mpmath.exp(_mpf(r))
    quarter = {Fraction(0): (1, 0), Fraction(1, 4): (0, 1), Fraction(1, 2): (-1, 0), Fraction(3, 4): (0, -1)}
    if frac in quarter:
        c, s = quarter[frac]
        return mpmath.mpc(c * mag, s * mag)
    ang = 2 * mpmath.pi * _mpf(frac)
    return mpmath.mpc(mag * mpmath.cos(ang), mag * mpmath.sin(ang))


# ------------------------------------------------------ decomposition


@dataclass(frozen=True)
class XiDecomposition:
    polytope: Polytope
    constant_faces: frozenset
    maximal_faces: frozenset
    good_faces: frozenset


def is_constant_face(f: Face, xi: Xi) -> bool:
    return xi.vanishes_on(f.lin_basis)


def xi_decomposition(p: Polytope, xi: Xi) -> XiDecomposition:
    fl = p.faces
    const = frozenset(f.id for f in fl if is_constant_face(f, xi))
    maximal = frozenset(
        i for i in const
        if not any(g.id in const for g in fl.superfaces(fl[i])))
    good = frozenset(
        i for i in const
        if sum(1 for m in maximal if fl.contains(fl[i], fl[m])) == 1)
    return XiDecomposition(p, const, maximal, good)


# ------------------------------------------------------------- flags


def flags(p: Polytope, f: Face, mode: str = "all-saturated", xi: Xi | None = None) -> list[tuple[int, ...]]:
    """Flags of faces starting at f.

    ``all-saturated``: saturated chains from f to p.
    ``xi-adapted``: saturated chains from f to p with every face after f
    non-constant.
    ``xi-maladapted``: chains of any length starting at f made only of
    constant faces (not necessarily saturated or ending at p).
    """
    fl = p.faces
    top = fl.top
    if mode in ("xi-adapted", "xi-maladapted") and xi is None:
        raise ValueError("this flag mode needs xi")
    if mode == "xi-maladapted":
        if not is_constant_face(f, xi):
            raise NotXiConstant(f"face {f.id} is not constant")
        out = []

        def grow(chain):
            out.append(tuple(chain))
            last = fl[chain[-1]]
            for g in fl.superfaces(last):
                if is_constant_face(g, xi):
                    grow(chain + [g.id])

        grow([f.id])
        return sorted(out)
    adapted = mode == "xi-adapted"
    if mode not in ("all-saturated", "xi-adapted"):
        raise ValueError(f"unknown flag mode {mode!r}")
    out = []

    def walk(chain):
        last = fl[chain[-1]]
        if last == top:
            out.append(tuple(chain))
            return
        for g in fl.covers(last):
            if adapted and is_constant_face(g, xi):
                continue
            walk(chain + [g.id])

    walk([f.id])
    return sorted(out)


# ------------------------------------------------------- xi' reduction


@dataclass(frozen=True)
class XiPrimeData:
    xi_prime: Xi
    lambda_bar_prime: Lattice
    v_prime: tuple
    lambda_prime: Lattice
    cosets: tuple  # (representative, (re, im2pi) exponent of <xi, gamma^{V'}>)


def _exp_kernel(lat: Lattice, xi: Xi) -> Lattice:
    """{l in lat : e^{<xi, l>} = 1}."""
    r = lat.rank
    re_row = [dot(xi.re, b) for b in lat.basis]
    im_row = [dot(xi.im2pi, b) for b in lat.basis]
    ker = integer_kernel([re_row], r) if any(re_row) else [
        tuple(int(i == j) for j in range(r)) for i in range(r)]
    if not ker:
        return Lattice(lat.ambient_dim, ())
    c = [sum(im_row[i] * k[i] for i in range(r)) for k in ker]
    ws = congruence_lattice([c], len(ker))
    gens = [lat.point([sum(w[j] * ker[j][i] for j in range(len(ker))) for i in range(r)])
            for w in ws]
    return Lattice.from_generators(gens, lat.ambient_dim)


def xi_prime(lat: Lattice, xi: Xi, ip: InnerProduct | None = None) -> XiPrimeData:
    """Reduce xi to an adapted functional on a finite-index sublattice.

    With Lbar = {l : e^{<xi,l>} = 1}, V' = span(Lbar), xi' = xi o P_{V'^perp}
    and L' = {l : P_{V'} l in Lbar}, one has
    S_L(p; xi) = sum over [g] in L/L' of e^{<xi, P_{V'} g>} S_{g+L'}(p; xi').
    """
    n = lat.ambient_dim
    ip = ip or InnerProduct.standard(n)
    lbar = _exp_kernel(lat, xi)
    vp = tuple(lbar.basis)
    pv = ip.projector(vp)
    q = tuple(tuple(Fraction(int(i == j)) - pv[i][j] for j in range(n)) for i in range(n))
    xip = xi.pullback(q)
    if lbar.rank == 0:
        lp = lat
    else:
        m = [solve_in_span(lbar.basis, matvec(pv, b)) for b in lat.basis]
        rows = transpose(m)
        zs = congruence_lattice(rows, lat.rank)
        lp = Lattice.from_generators([lat.point(z) for z in zs], n)
    reps = quotient_representatives(lat, lp)
    cosets = tuple((g, xi.pairing(matvec(pv, g))) for g in reps)
    return XiPrimeData(xip, lbar, vp, lp, cosets)


def is_adapted_point(xi: Xi, lat: Lattice) -> bool:
    """True iff e^{<xi, g>} = 1 forces <xi, g> = 0 for g in lat."""
    lbar = _exp_kernel(lat, xi)
    return all(dot(xi.im2pi, b) == 0 for b in lbar.basis)


__all__ = [
    "Xi", "XiDecomposition", "XiPrimeData", "NotXiConstant", "xi_decomposition",
    "flags", "xi_prime", "is_adapted_point", "is_constant_face", "exp_of_pair",
]
