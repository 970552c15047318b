"""Brute-force references: lattice point enumeration and numerical quadrature.

Nothing here uses cones, generating functions or Laurent series, so these
values can be compared against the engine without circularity.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import product

import mpmath
import numpy as np

from .exact_linalg import (
    Lattice,
    annihilator,
    columns_to_matrix,
    inverse,
    matvec,
    placing_triangulation,
    simplex_volume,
    vadd,
    vec,
    vscale,
    vsub,
    zeros,
)
from .polytope_core import Polytope, dilate_translate
from .xi_structure import Xi


class ToleranceNotReached(RuntimeError):
    pass


def lattice_points(p: Polytope, lattice: Lattice, shift=None) -> list:
    """Points of (shift + lattice) inside p, by scanning a bounding box in
    lattice coordinates."""
    n = p.ambient_dim
    shift = vec(shift) if shift is not None else zeros(n)
    r = lattice.rank
    extra = annihilator(lattice.basis, n) if r < n else []
    basis = list(lattice.basis) + [tuple(x for x in e) for e in extra]
    einv = inverse(columns_to_matrix(basis, n))
    coords = [matvec(einv, vsub(v, shift)) for v in p.vertices]
    lo = [math.ceil(min(c[i] for c in coords)) for i in range(r)]
    hi = [math.floor(max(c[i] for c in coords)) for i in range(r)]
    out = []
    for z in product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        x = shift
        for zi, b in zip(z, lattice.basis):
            x = vadd(x, vscale(zi, b))
        if p.contains(x):
            out.append(x)
    return sorted(out)


def lattice_enum_sum(p: Polytope, lattice: Lattice, shift=None, xi: Xi | None = None,
                     precision_bits: int = 256) -> tuple[list, mpmath.mpc]:
    """All points of p in shift + lattice and the sum of e^{<xi, x>} over them."""
    pts = lattice_points(p, lattice, shift)
    xi = xi or Xi.zero(p.ambient_dim)
    with mpmath.workprec(precision_bits):
        total = mpmath.mpc(0)
        for x in pts:
            total += xi.exp_at(x)
    return pts, total


def ehrhart_table(p: Polytope, lattice: Lattice, t_max: int) -> list[int]:
    """|t p cap lattice| for t = 1..t_max."""
    return [len(lattice_points(dilate_translate(p, t), lattice)) for t in range(1, t_max + 1)]


@lru_cache(maxsize=None)
def _collapsed_rule(k: int, m: int):
    """Gauss-Legendre points and weights on the unit k-simplex via the
    collapsed-coordinate (Duffy) map from the unit cube."""
    x, w = np.polynomial.legendre.leggauss(m)
    u = (x + 1) / 2
    wu = w / 2
    grids = np.meshgrid(*([u] * k), indexing="ij")
    wgrids = np.meshgrid(*([wu] * k), indexing="ij")
    us = [g.ravel() for g in grids]
    ws = [g.ravel() for g in wgrids]
    lam = np.zeros((us[0].size, k))
    rest = np.ones(us[0].size)
    jac = np.ones(us[0].size)
    for j in range(k):
        lam[:, j] = rest * us[j]
        jac *= rest * ws[j]
        rest = rest * (1 - us[j])
    return lam, jac


def _simplex_rule(verts: np.ndarray, m: int):
    k = verts.shape[0] - 1
    if k == 0:
        return verts[:1], np.ones(1)
    d = (verts[1:] - verts[0]).T
    jac = math.sqrt(abs(np.linalg.det(d.T @ d)))
    lam, w = _collapsed_rule(k, m)
    return verts[0] + lam @ d.T, w * jac


def quad_integral(p: Polytope, xi: Xi, rel_tol: float = 1e-12, max_order: int = 96) -> complex:
    """Integral of e^{<xi, x>} over p (Euclidean measure on its affine hull).

    Triangulates p and applies tensor Gauss-Legendre rules on each simplex,
    doubling the order until two successive results agree to ``rel_tol``
    relative to the integral of |e^{<xi,x>}|.
    """
    if p.dim > 3:
        raise ValueError("quadrature is limited to dimension 3")
    verts = [vec(v) for v in p.vertices]
    simplices = placing_triangulation(verts) if p.dim > 0 else [(0,)]
    fv = np.array([[float(x) for x in v] for v in verts])
    re = np.array([float(x) for x in xi.re])
    im = 2 * math.pi * np.array([float(x) for x in xi.im2pi])

    def integrate(m):
        tot, mag = 0j, 0.0
        for s in simplices:
            pts, w = _simplex_rule(fv[list(s)], m)
            vals = np.exp(pts @ re + 1j * (pts @ im))
            tot += complex(np.sum(w * vals))
            mag += float(np.sum(w * np.abs(vals)))
        return tot, mag

    m = 6
    prev, _ = integrate(m)
    while m < max_order:
        m *= 2
        cur, mag = integrate(m)
        if abs(cur - prev) <= rel_tol * max(mag, 1e-300):
            return cur
        prev = cur
    raise ToleranceNotReached(f"quadrature did not reach {rel_tol} by order {max_order}")


def volume(p: Polytope) -> Fraction:
    """Exact Euclidean volume of a full-dimensional polytope."""
    verts = [vec(v) for v in p.vertices]
    return sum((simplex_volume([verts[i] for i in s]) for s in placing_triangulation(verts)),
               Fraction(0))


__all__ = ["lattice_points", "lattice_enum_sum", "ehrhart_table", "quad_integral",
           "ToleranceNotReached", "volume"]
