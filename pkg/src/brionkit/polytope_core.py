"""Polytopes in dual representation, their face lattices and face cones."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

from .exact_linalg import (
    InnerProduct,
    QVector,
    affine_rank,
    annihilator,
    columns_to_matrix,
    dot,
    inverse,
    matvec,
    nullspace,
    primitive_integer,
    rank,
    solve_in_span,
    span_basis,
    vadd,
    vec,
    vscale,
    vsub,
    is_zero,
    zeros,
)


class PolytopeError(ValueError):
    pass


class Unbounded(PolytopeError):
    pass


class Empty(PolytopeError):
    pass


Halfspace = tuple  # (a: QVector, b: Fraction) meaning a . x <= b


@dataclass(frozen=True)
class Cone:
    """apex + cone(rays) + span(lineality)."""

    apex: QVector
    rays: tuple = ()
    lineality: tuple = ()

    @property
    def dim(self) -> int:
        return rank(list(self.rays) + list(self.lineality)) if (self.rays or self.lineality) else 0

    @property
    def pointed(self) -> bool:
        return not self.lineality

    def shifted(self, v) -> "Cone":
        return Cone(vadd(self.apex, v), self.rays, self.lineality)

    def at_origin(self) -> "Cone":
        return Cone(zeros(len(self.apex)), self.rays, self.lineality)

    def canonical(self) -> "Cone":
        rays = tuple(sorted({tuple(Fraction(x) for x in primitive_integer(r)) for r in self.rays}))
        return Cone(self.apex, rays, tuple(span_basis(self.lineality)))


@dataclass(frozen=True)
class Face:
    id: int
    vertex_ids: frozenset
    active_facets: frozenset
    dim: int
    lin_basis: tuple
    relint_point: QVector


@dataclass(frozen=True)
class Polytope:
    """A bounded polytope in Q^n with vertices, facets and affine equations.

    ``facets`` hold irredundant inequalities a . x <= b with a a primitive
    integer vector lying in the direction space of the affine hull;
    ``equations`` cut out the affine hull.
    """

    ambient_dim: int
    vertices: tuple
    facets: tuple
    equations: tuple = ()

    @property
    def dim(self) -> int:
        return affine_rank(self.vertices)

    @classmethod
    def from_vertices(cls, points: Sequence[Sequence]) -> "Polytope":
        return dual_representation(vertices=points)

    @classmethod
    def from_inequalities(cls, halfspaces: Sequence[Halfspace], n: int | None = None) -> "Polytope":
        return dual_representation(hrep=halfspaces, ambient_dim=n)

    def contains(self, x) -> bool:
        return all(dot(a, x) <= b for a, b in self.facets) and all(
            dot(a, x) == b for a, b in self.equations)

    @cached_property
    def faces(self) -> "FaceLattice":
        return face_lattice(self)


# ------------------------------------------------------------- V <-> H


def _hull_facets(points: list[QVector]) -> tuple[list[Halfspace], list[Halfspace]]:
    """Irredundant facets and affine-hull equations of conv(points)."""
    n = len(points[0])
    p0 = points[0]
    dirs = span_basis([vsub(p, p0) for p in points[1:]])
    d = len(dirs)
    equations = []
    for a in annihilator(dirs, n):
        a = tuple(Fraction(x) for x in primitive_integer(a))
        equations.append((a, dot(a, p0)))
    if d == 0:
        return [], equations
    # local coordinates in the affine hull, then lift normals back
    loc = [solve_in_span(dirs, vsub(p, p0)) for p in points]
    dmat = columns_to_matrix(dirs, n)
    gram_inv = inverse([[dot(u, v) for v in dirs] for u in dirs])
    facets = {}
    for sub in combinations(range(len(points)), d):
        ys = [loc[i] for i in sub]
        if d > 1 and rank([vsub(y, ys[0]) for y in ys[1:]]) != d - 1:
            continue
        normal = nullspace([vsub(y, ys[0]) for y in ys[1:]], d) if d > 1 else [(Fraction(1),)]
        if len(normal) != 1:
            continue
        c = normal[0]
        off = dot(c, ys[0])
        sides = [dot(c, y) - off for y in loc]
        if all(s <= 0 for s in sides):
            pass
        elif all(s >= 0 for s in sides):
            c = tuple(-x for x in c)
        else:
            continue
        # lift: a = D (D^T D)^{-1} c satisfies a . (p0 + D y) = a . p0 + c . y
        a = matvec(dmat, matvec(gram_inv, c))
        a = tuple(Fraction(x) for x in primitive_integer(a))
        b = max(dot(a, p) for p in points)
        tight = frozenset(i for i, p in enumerate(points) if dot(a, p) == b)
        facets[tight] = (a, b)
    return [facets[k] for k in sorted(facets, key=lambda k: sorted(k))], equations


def _extreme_points(points: list[QVector]) -> list[QVector]:
    pts = sorted(set(points))
    if len(pts) <= 1:
        return pts
    facets, _ = _hull_facets(pts)
    if not facets:
        return pts
    keep = []
    for p in pts:
        tight = [a for a, b in facets if dot(a, p) == b]
        if tight and rank(tight) >= affine_rank(pts):
            keep.append(p)
    return keep


def dual_representation(vertices: Sequence[Sequence] | None = None,
                        hrep: Sequence[Halfspace] | None = None,
                        ambient_dim: int | None = None) -> Polytope:
    """Complete a partial V- or H-description into a full Polytope."""
    if vertices is not None:
        pts = [vec(v) for v in vertices]
        if not pts:
            raise Empty("no vertices given")
        n = len(pts[0])
    elif hrep is not None:
        hs = [(vec(a), Fraction(b)) for a, b in hrep]
        n = ambient_dim if ambient_dim is not None else len(hs[0][0])
        pts = _vertices_from_h(hs, n)
    else:
        raise PolytopeError("need vertices or inequalities")
    ext = _extreme_points(pts)
    facets, equations = _hull_facets(ext)
    return Polytope(n, tuple(ext), tuple(facets), tuple(equations))


def _vertices_from_h(hs: list[Halfspace], n: int) -> list[QVector]:
    if not hs:
        raise Unbounded("no inequalities")
    normals = [a for a, _ in hs]
    if rank(normals) < n:
        raise Unbounded("recession cone contains a line")
    for sub in combinations(range(len(hs)), n - 1):
        rows = [normals[i] for i in sub]
        ker = nullspace(rows, n) if rows else [tuple(Fraction(int(i == j)) for j in range(n))
                                               for i in range(n)]
        if len(ker) != 1:
            continue
        for r in (ker[0], tuple(-x for x in ker[0])):
            if all(dot(a, r) <= 0 for a in normals):
                raise Unbounded("recession cone is nontrivial")
    pts = set()
    for sub in combinations(range(len(hs)), n):
        rows = [list(hs[i][0]) + [hs[i][1]] for i in sub]
        if rank([r[:n] for r in rows]) < n:
            continue
        cols = [tuple(hs[i][0][j] for i in sub) for j in range(n)]
        sol = solve_in_span(cols, [hs[i][1] for i in sub])
        if sol is None:
            continue
        if all(dot(a, sol) <= b for a, b in hs):
            pts.add(sol)
    if not pts:
        raise Empty("inequalities are infeasible")
    return sorted(pts)


# ---------------------------------------------------------- face lattice


@dataclass(frozen=True)
class FaceLattice:
    polytope: Polytope
    faces: tuple

    def __iter__(self):
        return iter(self.faces)

    def __len__(self):
        return len(self.faces)

    def __getitem__(self, i) -> Face:
        return self.faces[i]

    @cached_property
    def top(self) -> Face:
        return self.faces[-1]

    @cached_property
    def vertices(self) -> list[Face]:
        return [f for f in self.faces if f.dim == 0]

    def by_vertices(self, vids) -> Face:
        vids = frozenset(vids)
        for f in self.faces:
            if f.vertex_ids == vids:
                return f
        raise KeyError(vids)

    def contains(self, small: Face, big: Face) -> bool:
        return small.vertex_ids <= big.vertex_ids

    def superfaces(self, f: Face, strict: bool = True) -> list[Face]:
        return [g for g in self.faces if f.vertex_ids <= g.vertex_ids and (g != f or not strict)]

    def subfaces(self, f: Face, strict: bool = True) -> list[Face]:
        return [g for g in self.faces if g.vertex_ids <= f.vertex_ids and (g != f or not strict)]

    def covers(self, f: Face) -> list[Face]:
        """Faces of dimension dim(f)+1 containing f."""
        return [g for g in self.superfaces(f) if g.dim == f.dim + 1]

    def facets_of(self, f: Face) -> list[Face]:
        return [g for g in self.subfaces(f) if g.dim == f.dim - 1]

    def euler_characteristic(self) -> int:
        """Sum of (-1)^dim over proper faces (equals 1 - (-1)^d for d-polytopes)."""
        return sum((-1) ** f.dim for f in self.faces if f != self.top)


def face_lattice(p: Polytope) -> FaceLattice:
    verts = list(p.vertices)
    nv = len(verts)
    tight = [frozenset(i for i, v in enumerate(verts) if dot(a, v) == b) for a, b in p.facets]
    sets = {frozenset(range(nv))}
    frontier = set(tight)
    while frontier:
        sets |= frontier
        nxt = set()
        for s in frontier:
            for t in tight:
                u = s & t
                if u and u not in sets:
                    nxt.add(u)
        frontier = nxt
    sets |= {frozenset([i]) for i in range(nv)}
    raw = []
    for s in sets:
        pts = [verts[i] for i in sorted(s)]
        lin = span_basis([vsub(q, pts[0]) for q in pts[1:]])
        bary = vscale(Fraction(1, len(pts)), _sum(pts, p.ambient_dim))
        active = frozenset(j for j, t in enumerate(tight) if s <= t)
        raw.append((len(lin), tuple(sorted(s)), s, active, tuple(lin), bary))
    raw.sort(key=lambda r: (r[0], r[1]))
    faces = tuple(Face(i, r[2], r[3], r[0], r[4], r[5]) for i, r in enumerate(raw))
    fl = FaceLattice(p, faces)
    if p.dim > 0:
        expected = 1 - (-1) ** p.dim
        if fl.euler_characteristic() != expected:
            raise PolytopeError("face lattice failed the Euler characteristic check")
    return fl


def _sum(vs, n):
    out = zeros(n)
    for v in vs:
        out = vadd(out, v)
    return out


# ---------------------------------------------------------- face cones


def face_point(p: Polytope, f: Face) -> QVector:
    return p.vertices[min(f.vertex_ids)]


def transverse_cone_in(p: Polytope, g: Face, f: Face, ip: InnerProduct) -> Cone:
    """Transverse cone of g inside the face f (g a face of f).

    Lives in lin(g)^perp with apex the projection of aff(g) onto lin(g)^perp;
    its rays are projections of edges leaving g inside faces covering g in f.
    """
    fl = p.faces
    comp = ip.complement(g.lin_basis)
    proj = ip.projector(comp)
    x_g = face_point(p, g)
    apex = matvec(proj, x_g)
    rays = []
    for h in fl.covers(g):
        if not fl.contains(h, f):
            continue
        v = p.vertices[min(h.vertex_ids - g.vertex_ids)]
        r = matvec(proj, vsub(v, x_g))
        rays.append(tuple(Fraction(x) for x in primitive_integer(r)))
    return Cone(apex, tuple(sorted(set(rays))))


def cones_at_face(p: Polytope, f: Face, ip: InnerProduct | None = None) -> tuple[Cone, Cone, Cone]:
    """(tangent, transverse, normal) cones of p at the face f."""
    ip = ip or InnerProduct.standard(p.ambient_dim)
    fl = p.faces
    x_f = face_point(p, f)
    tan_rays = sorted({tuple(Fraction(x) for x in primitive_integer(vsub(p.vertices[min(h.vertex_ids - f.vertex_ids)], x_f)))
                       for h in fl.covers(f)})
    tangent = Cone(f.relint_point, tuple(tan_rays), tuple(f.lin_basis))
    transverse = transverse_cone_in(p, f, fl.top, ip)
    normals = [ip.raise_(p.facets[j][0]) for j in sorted(f.active_facets)]
    normal_rays = sorted({tuple(Fraction(x) for x in primitive_integer(nv)) for nv in normals})
    eq_lin = [ip.raise_(a) for a, _ in p.equations]
    normal = Cone(zeros(p.ambient_dim), tuple(normal_rays), tuple(span_basis(eq_lin)))
    return tangent, transverse, normal


def tangent_rays_at_vertex(p: Polytope, v: Face) -> list[QVector]:
    """Edge directions leaving a vertex (unnormalized)."""
    fl = p.faces
    x = face_point(p, v)
    return [vsub(p.vertices[min(e.vertex_ids - v.vertex_ids)], x) for e in fl.covers(v)]


def dilate_translate(p: Polytope, t, shift=None) -> Polytope:
    """t * p + shift, with facets in the same order (face ids preserved)."""
    t = Fraction(t)
    if t <= 0:
        raise PolytopeError("dilation factor must be positive")
    shift = vec(shift) if shift is not None else zeros(p.ambient_dim)
    verts = tuple(vadd(vscale(t, v), shift) for v in p.vertices)
    facets = tuple((a, t * b + dot(a, shift)) for a, b in p.facets)
    eqs = tuple((a, t * b + dot(a, shift)) for a, b in p.equations)
    return Polytope(p.ambient_dim, verts, facets, eqs)


def projected_polytope(p: Polytope, f: Face, ip: InnerProduct) -> Polytope:
    """The face f orthogonally projected onto lin(f), as a polytope."""
    proj = ip.projector(f.lin_basis)
    pts = [matvec(proj, p.vertices[i]) for i in sorted(f.vertex_ids)]
    return Polytope.from_vertices(pts)


def face_polytope(p: Polytope, f: Face) -> Polytope:
    return Polytope.from_vertices([p.vertices[i] for i in sorted(f.vertex_ids)])


__all__ = [
    "Cone", "Face", "FaceLattice", "Polytope", "PolytopeError", "Unbounded", "Empty",
    "dual_representation", "face_lattice", "cones_at_face", "dilate_translate",
    "transverse_cone_in", "projected_polytope", "face_polytope", "face_point",
    "tangent_rays_at_vertex", "is_zero",
]
