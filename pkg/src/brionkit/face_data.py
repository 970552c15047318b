"""Per-face lattices, volumes and sub-polytope bookkeeping shared by the
continuous and discrete formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from .exact_linalg import (
    InnerProduct,
    Lattice,
    gram_det_sq,
    lattice_projection,
    lattice_section,
    matvec,
    normalized_volume,
    vec,
)
from .polytope_core import Face, Polytope, face_point, face_polytope


@dataclass(frozen=True)
class FaceLattices:
    """Lattices attached to a face f for an ambient lattice L.

    section: L cap lin(f); perp_section: L cap lin(f)^perp;
    projection: orthogonal projection of L onto lin(f)^perp.
    """

    lin: tuple
    perp: tuple
    section: Lattice
    perp_section: Lattice
    projection: Lattice


@lru_cache(maxsize=None)
def face_lattices(lin_basis: tuple, lat: Lattice, ip: InnerProduct) -> FaceLattices:
    perp = tuple(ip.complement(lin_basis))
    sec = lattice_section(lat, lin_basis) if lin_basis else Lattice(lat.ambient_dim, ())
    psec = lattice_section(lat, perp) if perp else Lattice(lat.ambient_dim, ())
    proj = lattice_projection(lat, perp, ip) if perp else Lattice(lat.ambient_dim, ())
    return FaceLattices(tuple(lin_basis), perp, sec, psec, proj)


def lattice_volume(p: Polytope, f: Face, lat: Lattice) -> Fraction:
    """vol of f normalized so that L cap lin(f) has covolume 1."""
    if f.dim == 0:
        return Fraction(1)
    sec = lattice_section(lat, f.lin_basis)
    return normalized_volume([p.vertices[i] for i in sorted(f.vertex_ids)], sec)


def euclidean_volume(p: Polytope, f: Face, ip: InnerProduct):
    """Euclidean dim(f)-volume of f (exact Fraction when rational)."""
    if f.dim == 0:
        return Fraction(1)
    lat = Lattice(p.ambient_dim, tuple(f.lin_basis))
    nv = normalized_volume([p.vertices[i] for i in sorted(f.vertex_ids)], lat)
    g = gram_det_sq(lat, ip)
    n, d = g.numerator, g.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return nv * Fraction(rn, rd)
    return mpmath.mpf(nv.numerator) / nv.denominator * mpmath.sqrt(mpmath.mpf(n) / d)


def perp_point(p: Polytope, f: Face, ip: InnerProduct) -> tuple:
    """The projection of f onto lin(f)^perp (a single point)."""
    return matvec(ip.projector(ip.complement(f.lin_basis)), face_point(p, f))


def as_subface(p: Polytope, f: Face, g: Face) -> tuple[Polytope, Face]:
    """The polytope f and the face of it corresponding to g (g inside f)."""
    fp = face_polytope(p, f)
    idx = {v: i for i, v in enumerate(fp.vertices)}
    gids = [idx[vec(p.vertices[i])] for i in g.vertex_ids]
    return fp, fp.faces.by_vertices(gids)


__all__ = ["FaceLattices", "face_lattices", "lattice_volume", "euclidean_volume",
           "perp_point", "as_subface"]
