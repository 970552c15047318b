"""Virtual cones (signed sums of pointed cones with a common apex) and the
alternating Levi cone attached to a face on which xi is constant."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .exact_linalg import (
    InnerProduct,
    NotOrthogonal,
    matvec,
    primitive_integer,
    vadd,
    zeros,
)
from .polytope_core import Cone, Face, Polytope, face_point, transverse_cone_in
from .xi_structure import NotXiConstant, Xi, flags, is_constant_face


def _prim(r) -> tuple:
    return tuple(Fraction(x) for x in primitive_integer(r))


@dataclass(frozen=True)
class VirtualCone:
    """Integer combination of pointed cones sharing ``apex``.

    ``terms`` is a tuple of (coeff, Cone) in canonical order: rays are
    primitive integer vectors sorted lexicographically and terms are sorted
    by their ray lists. ``provenance`` maps each ray list to the flags that
    produced it.
    """

    ambient: tuple
    apex: tuple
    terms: tuple
    provenance: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @classmethod
    def build(cls, ambient, apex, raw_terms, provenance=None) -> "VirtualCone":
        acc: dict[tuple, int] = {}
        for coeff, rays in raw_terms:
            key = tuple(sorted({_prim(r) for r in rays}))
            acc[key] = acc.get(key, 0) + coeff
        terms = tuple((c, Cone(tuple(apex), key)) for key, c in sorted(acc.items()) if c != 0)
        prov = {}
        if provenance:
            for key, fl in provenance.items():
                k = tuple(sorted({_prim(r) for r in key}))
                if acc.get(k):
                    prov.setdefault(k, []).extend(fl)
        return cls(tuple(ambient), tuple(apex), terms, prov)

    def shifted(self, v) -> "VirtualCone":
        apex = vadd(self.apex, v)
        return VirtualCone(self.ambient, apex,
                           tuple((c, Cone(apex, k.rays)) for c, k in self.terms), self.provenance)

    def at_origin(self) -> "VirtualCone":
        return self.shifted(tuple(-x for x in self.apex))

    def signature(self) -> tuple:
        """Apex-free canonical content, for comparing constructions."""
        return tuple((c, k.rays) for c, k in self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)


def cone_product(c1: Cone, c2: Cone, ip: InnerProduct | None = None) -> Cone:
    """Product of cones living in orthogonal subspaces, as a single cone."""
    ip = ip or InnerProduct.standard(len(c1.apex))
    g1 = list(c1.rays) + list(c1.lineality)
    g2 = list(c2.rays) + list(c2.lineality)
    for u in g1:
        for v in g2:
            if ip(u, v) != 0:
                raise NotOrthogonal("cone factors do not live in orthogonal subspaces")
    rays = tuple(sorted(set(c1.rays) | set(c2.rays)))
    return Cone(vadd(c1.apex, c2.apex), rays, tuple(c1.lineality) + tuple(c2.lineality))


def _flag_rays(p: Polytope, chain, ip: InnerProduct) -> list:
    fl = p.faces
    rays = []
    faces = [fl[i] for i in chain] + [fl.top]
    for a, b in zip(faces, faces[1:]):
        if a == b:
            continue
        rays.extend(transverse_cone_in(p, a, b, ip).rays)
    return rays


def _apex(p: Polytope, f: Face, ip: InnerProduct, based: str):
    if based == "origin":
        return zeros(p.ambient_dim)
    if based == "projected":
        return matvec(ip.projector(ip.complement(f.lin_basis)), face_point(p, f))
    raise ValueError(f"unknown basing {based!r}")


def levi_cone(p: Polytope, f: Face, xi: Xi, ip: InnerProduct | None = None,
              based: str = "origin") -> VirtualCone:
    """Alternating Levi cone of p at the xi-constant face f (flag expansion).

    Args:
        p: the polytope.
        f: a face of p on which xi is constant.
        xi: the functional.
        ip: inner product (standard by default).
        based: ``origin`` for the shifted cone, ``projected`` to put the apex
            at the projection of f onto lin(f)^perp.

    Returns:
        The virtual cone sum over constant flags f = h0 < ... < hl of
        (-1)^l t_{h0}^{h1} x ... x t_{hl}^{p}.
    """
    ip = ip or InnerProduct.standard(p.ambient_dim)
    if not is_constant_face(f, xi):
        raise NotXiConstant(f"face {f.id} is not xi-constant")
    raw, prov = [], {}
    for chain in flags(p, f, "xi-maladapted", xi):
        rays = _flag_rays(p, chain, ip)
        sign = -1 if (len(chain) - 1) % 2 else 1
        raw.append((sign, rays))
        prov.setdefault(tuple(rays), []).append(chain)
    return VirtualCone.build(ip.complement(f.lin_basis), _apex(p, f, ip, based), raw, prov)


def levi_cone_recursive(p: Polytope, f: Face, xi: Xi, ip: InnerProduct | None = None,
                        based: str = "origin") -> VirtualCone:
    """Same cone via LC_g = t_g^p - sum over constant f > g of t_g^f x LC_f."""
    ip = ip or InnerProduct.standard(p.ambient_dim)
    if not is_constant_face(f, xi):
        raise NotXiConstant(f"face {f.id} is not xi-constant")
    fl = p.faces
    memo: dict[int, list] = {}

    def lc(g: Face) -> list:
        if g.id in memo:
            return memo[g.id]
        out = [(1, list(transverse_cone_in(p, g, fl.top, ip).rays) if g != fl.top else [])]
        for h in fl.superfaces(g):
            if not is_constant_face(h, xi):
                continue
            base = list(transverse_cone_in(p, g, h, ip).rays)
            for c, rays in lc(h):
                out.append((-c, base + rays))
        memo[g.id] = out
        return out

    return VirtualCone.build(ip.complement(f.lin_basis), _apex(p, f, ip, based), lc(f))


__all__ = ["VirtualCone", "cone_product", "levi_cone", "levi_cone_recursive"]
