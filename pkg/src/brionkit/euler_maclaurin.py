"""Local Euler-Maclaurin weights (Berline-Vergne mu) computed by their
defining recursion, and the lattice-sum formulas built from them."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import mpmath

from .exact_linalg import (
    InnerProduct,
    Lattice,
    coset_representatives,
    lattice_projection,
    lattice_section,
    matvec,
    primitive_integer,
    span_basis,
    vec,
    vectors_rank,
    vneg,
    vsub,
    zeros,
)
from .face_data import as_subface, face_lattices, lattice_volume
from .laurent_eval import (
    DEFAULT_PRECISION,
    GenericLine,
    LaurentSeries,
    I_eval,
    NotPointed,
    S_eval,
    cone_cross_section,
    holomorphy_margin,
    one_series,
    rays_pointed,
    value_at,
    with_generic_line,
    zero_series,
)
from .polytope_core import Cone, Face, Polytope, face_point, transverse_cone_in
from .virtual_cone import levi_cone
from .xi_structure import Xi, is_adapted_point, xi_decomposition


class HolomorphyViolation(ArithmeticError):
    """A value that must be holomorphic at xi has a pole along the line."""


class NotAdapted(ValueError):
    """xi is not adapted to the lattice (reduce with xi_prime first)."""


def _prim(r) -> tuple:
    return tuple(Fraction(x) for x in primitive_integer(r))


def _nonzero(rays):
    return [r for r in rays if any(x != 0 for x in r)]


def cone_faces(k: Cone) -> list[Cone]:
    """Positive-dimensional faces of a pointed cone (including k itself)."""
    if k.lineality:
        raise NotPointed("cone contains a line")
    rays = sorted({_prim(r) for r in _nonzero(k.rays)})
    if not rays:
        return []
    if vectors_rank(rays) == len(rays):
        return [Cone(k.apex, sub) for m in range(1, len(rays) + 1)
                for sub in combinations(rays, m)]
    _, section = cone_cross_section(rays)
    q = Polytope.from_vertices(section)
    return [Cone(k.apex, tuple(sorted(_prim(q.vertices[i]) for i in f.vertex_ids)))
            for f in q.faces]


def _perp_projector(lin, n, ip: InnerProduct):
    p = ip.projector(lin) if lin else tuple(tuple(Fraction(0) for _ in range(n)) for _ in range(n))
    return tuple(tuple(Fraction(int(i == j)) - p[i][j] for j in range(n)) for i in range(n))


def mu_series(k: Cone, lattice: Lattice, ip: InnerProduct, line: GenericLine, trunc: int,
              memo: dict | None = None) -> LaurentSeries:
    """Laurent expansion of mu^lattice(k; alpha) along ``line``.

    Uses mu(k) = e^{-<alpha,s>} (S(k) - sum over faces f of k with dim f > 0
    of mu^{L^{f perp}}(t_f^k) * I^{L_f}(f)), with the zero-dimensional base
    case mu({s}) = [s in L].
    """
    memo = {} if memo is None else memo
    if k.lineality or not rays_pointed(k.rays):
        return zero_series(trunc, line.exact)
    rays = sorted({_prim(r) for r in _nonzero(k.rays)})
    s = vec(k.apex)
    if lattice.rank and lattice.coords(s) is not None:
        s = lattice.reduce(s)
    key = (lattice, s, tuple(rays), trunc)
    if key in memo:
        return memo[key]
    if not rays:
        out = one_series(trunc, line.exact) if lattice.contains(s) else zero_series(trunc, line.exact)
        memo[key] = out
        return out
    n = len(s)
    total = S_eval(Cone(s, tuple(rays)), lattice, None, line, trunc)
    for face in cone_faces(Cone(s, tuple(rays))):
        lin = span_basis(face.rays)
        dim_f = len(lin)
        pp = _perp_projector(lin, n, ip)
        t_cone = Cone(matvec(pp, s), tuple(sorted({_prim(matvec(pp, r))
                                                   for r in rays if any(matvec(pp, r))})))
        comp = ip.complement(lin)
        sub = lattice_projection(lattice, comp, ip) if comp else Lattice(n, ())
        m = mu_series(t_cone, sub, ip, line, trunc + dim_f, memo)
        if all(c == 0 for c in m.coeffs):
            continue
        meas = lattice_section(lattice, lin)
        i = I_eval(face, line, trunc + dim_f, meas)
        total = total - (m * i).truncated(trunc)
    out = (total * line.exp_series(vneg(s), trunc - min(total.val, 0))).truncated(trunc)
    memo[key] = out
    return out


@dataclass(frozen=True)
class MuQuery:
    cone: Cone
    lattice: Lattice
    ip: InnerProduct | None = None
    at_zero: bool = True
    xi: Xi | None = None
    trunc: int | None = None
    seed: int = 0
    precision_bits: int = DEFAULT_PRECISION


def mu_eval(q: MuQuery):
    """mu of a cone: an exact Fraction at xi = 0, otherwise the Laurent
    series along a generic line through xi."""
    n = len(q.cone.apex)
    ip = q.ip or InnerProduct.standard(n)
    trunc = q.trunc if q.trunc is not None else n + 4
    xi = Xi.zero(n) if q.at_zero else (q.xi or Xi.zero(n))

    def run(line):
        return mu_series(q.cone, q.lattice, ip, line, trunc)

    s = with_generic_line(run, xi, _nonzero(q.cone.rays), q.seed, q.precision_bits)
    if q.at_zero:
        hol, v = value_at(s)
        if not hol:
            raise HolomorphyViolation("mu at 0 has a pole")
        return v
    return s


def mu_at_zero(k: Cone, lattice: Lattice, ip: InnerProduct | None = None, shift=None) -> Fraction:
    """mu^{shift + lattice}(k; 0) = mu^lattice(k - shift; 0), exact."""
    if shift is not None:
        k = Cone(vsub(k.apex, vec(shift)), k.rays, k.lineality)
    return mu_eval(MuQuery(k, lattice, ip, at_zero=True))


# ----------------------------------------------------------- identities


def _vertex_tangent_cones(p: Polytope):
    fl = p.faces
    out = []
    for v in fl.vertices:
        x = face_point(p, v)
        rays = [vsub(p.vertices[min(e.vertex_ids - v.vertex_ids)], x) for e in fl.covers(v)]
        out.append(Cone(x, tuple(sorted({_prim(r) for r in rays}))))
    return out


def polytope_I_series(p: Polytope, line: GenericLine, trunc: int, measure=None) -> LaurentSeries:
    """I(p; alpha) as the sum of vertex tangent-cone series (Brion)."""
    acc = zero_series(trunc, line.exact)
    for k in _vertex_tangent_cones(p):
        acc = acc + I_eval(k, line, trunc, measure)
    return acc


def polytope_S_series(p: Polytope, lattice: Lattice, line: GenericLine, trunc: int,
                      shift=None) -> LaurentSeries:
    acc = zero_series(trunc, line.exact)
    for k in _vertex_tangent_cones(p):
        acc = acc + S_eval(k, lattice, shift, line, trunc)
    return acc


def all_edge_directions(p: Polytope) -> list:
    out = set()
    for k in _vertex_tangent_cones(p):
        out.update(k.rays)
    return sorted(out)


@dataclass
class EMReport:
    lhs: object
    rhs: object
    deviation: object
    passed: bool
    exact: bool
    terms: list = field(default_factory=list)


def em_reconstruct(q, lattice: Lattice, xi: Xi | None = None, ip: InnerProduct | None = None,
                   seed: int = 0, precision_bits: int = DEFAULT_PRECISION,
                   trunc: int | None = None, tol=None) -> EMReport:
    """Check S_L(q) = sum over faces f of mu^{L^{f perp}}(t_f^q) I^{L_f}(f).

    ``q`` is a Polytope or a pointed Cone. The right side is assembled face
    by face along a shared generic line and compared with the lattice sum.
    """
    if isinstance(q, Cone):
        return _em_cone(q, lattice, xi, ip, seed, precision_bits, trunc, tol)
    n = q.ambient_dim
    ip = ip or InnerProduct.standard(n)
    xi = xi or Xi.zero(n)
    trunc = trunc if trunc is not None else n + 4
    fl = q.faces

    def run(line):
        lhs = polytope_S_series(q, lattice, line, trunc)
        memo: dict = {}
        rhs = zero_series(trunc, line.exact)
        terms = []
        for f in fl:
            data = face_lattices(tuple(f.lin_basis), lattice, ip)
            t = transverse_cone_in(q, f, fl.top, ip)
            m = mu_series(t, data.projection, ip, line, trunc + f.dim, memo)
            sub = _face_as_polytope(q, f)
            i = polytope_I_series(sub, line, trunc + f.dim, data.section) if f.dim else \
                line.exp_series(face_point(q, f), trunc)
            term = (m * i).truncated(trunc)
            terms.append((f.id, value_at(term)[1]))
            rhs = rhs + term
        return lhs, rhs, terms

    lhs, rhs, terms = with_generic_line(run, xi, all_edge_directions(q), seed, precision_bits)
    return _report(lhs, rhs, terms, tol, precision_bits)


def _face_as_polytope(p: Polytope, f: Face) -> Polytope:
    return Polytope.from_vertices([p.vertices[i] for i in sorted(f.vertex_ids)])


def _em_cone(k, lattice, xi, ip, seed, precision_bits, trunc, tol):
    n = len(k.apex)
    ip = ip or InnerProduct.standard(n)
    xi = xi or Xi.zero(n)
    trunc = trunc if trunc is not None else n + 4

    def run(line):
        lhs = S_eval(k, lattice, None, line, trunc)
        memo: dict = {}
        rhs = (mu_series(k, lattice, ip, line, trunc, memo) * line.exp_series(k.apex, trunc)).truncated(trunc)
        terms = [("vertex", value_at(rhs)[1])]
        for face in cone_faces(k):
            lin = span_basis(face.rays)
            pp = _perp_projector(lin, n, ip)
            t = Cone(matvec(pp, k.apex), tuple(sorted({_prim(matvec(pp, r)) for r in k.rays
                                                       if any(matvec(pp, r))})))
            comp = ip.complement(lin)
            sub = lattice_projection(lattice, comp, ip) if comp else Lattice(n, ())
            m = mu_series(t, sub, ip, line, trunc + len(lin), memo)
            i = I_eval(face, line, trunc + len(lin), lattice_section(lattice, lin))
            term = (m * i).truncated(trunc)
            terms.append((face.rays, None))
            rhs = rhs + term
        return lhs, rhs, terms

    lhs, rhs, terms = with_generic_line(run, xi, _nonzero(k.rays), seed, precision_bits)
    return _report(lhs, rhs, terms, tol, precision_bits)


def _report(lhs_s, rhs_s, terms, tol, precision_bits) -> EMReport:
    with mpmath.workprec(precision_bits):
        _, lhs = value_at(lhs_s)
        hol, rhs = value_at(rhs_s)
        if lhs_s.exact and rhs_s.exact:
            return EMReport(lhs, rhs, abs(lhs - rhs) if hol else None, hol and lhs == rhs, True, terms)
        tol = tol if tol is not None else mpmath.mpf(2) ** (-100)
        if not hol or lhs is None:
            return EMReport(lhs, rhs, None, False, False, terms)
        dev = abs(lhs - rhs) / max(abs(lhs), mpmath.mpf(1))
        return EMReport(lhs, rhs, dev, dev < tol, False, terms)


def pommersheim_thomas_count(p: Polytope, lattice: Lattice, ip: InnerProduct | None = None) -> Fraction:
    """Lattice point count as sum over faces g of vol^{L_g}(g) mu^{L^{g perp}}(t_g^p; 0)."""
    ip = ip or InnerProduct.standard(p.ambient_dim)
    fl = p.faces
    total = Fraction(0)
    for g in fl:
        data = face_lattices(tuple(g.lin_basis), lattice, ip)
        mu = mu_at_zero(transverse_cone_in(p, g, fl.top, ip), data.projection, ip)
        total += lattice_volume(p, g, lattice) * mu
    return total


# -------------------------------------------- degenerate discrete formulas


@dataclass
class DegenerateTermReport:
    face_id: int
    normalized_face_volume: object
    levi_value: object
    rate: tuple
    value: object
    holomorphy_margin: float
    coset_breakdown: list = field(default_factory=list)


def _require_adapted(xi: Xi, lattice: Lattice):
    if not is_adapted_point(xi, lattice):
        raise NotAdapted("xi is not adapted to the lattice; apply xi_prime first")


def _checked(s: LaurentSeries, what: str):
    hol, v = value_at(s)
    if not hol:
        raise HolomorphyViolation(f"{what} is not holomorphic at xi")
    return v


def levi_coset_sums(p: Polytope, f: Face, lattice: Lattice, xi: Xi, ip: InnerProduct,
                    line: GenericLine, trunc: int) -> list:
    """For each class [g] in L / (L_f + L_{f perp}): (g, g^f mod L_f,
    g^{f perp} mod L_{f perp}, series of S over the coset of LC_f^p)."""
    data = face_lattices(tuple(f.lin_basis), lattice, ip)
    cd = coset_representatives(lattice, data.section, data.perp_section, ip)
    lc = levi_cone(p, f, xi, ip, based="projected")
    out = []
    for g, a, b in zip(cd.representatives, cd.phi1_images, cd.phi2_images):
        out.append((g, a, b, S_eval(lc, data.perp_section, b, line, trunc)))
    return out


def _levi_constraints(p: Polytope, xi: Xi, ip: InnerProduct) -> list:
    rays = set(all_edge_directions(p))
    dec = xi_decomposition(p, xi)
    for fid in dec.constant_faces:
        for _, k in levi_cone(p, p.faces[fid], xi, ip):
            rays.update(k.rays)
    return sorted(rays)


def degenerate_brion_discrete_v2(p: Polytope, lattice: Lattice, xi: Xi,
                                 ip: InnerProduct | None = None, seed: int = 0,
                                 precision_bits: int = DEFAULT_PRECISION,
                                 trunc: int | None = None):
    """S_L(p; xi) as sum over constant faces g of vol^{L_g}(g) times the
    mu(.; 0)-weighted coset sums of Levi cones of constant faces f >= g."""
    n = p.ambient_dim
    ip = ip or InnerProduct.standard(n)
    trunc = trunc if trunc is not None else n + 4
    _require_adapted(xi, lattice)
    fl = p.faces
    dec = xi_decomposition(p, xi)
    const = sorted(dec.constant_faces)

    def run(line):
        sums = {fid: levi_coset_sums(p, fl[fid], lattice, xi, ip, line, trunc) for fid in const}
        vals = {fid: [(g, a, b, s, _checked(s, f"S of Levi cone at face {fid}")) for g, a, b, s in sums[fid]]
                for fid in const}
        margins = {fid: min((holomorphy_margin(s) for *_, s, _ in vals[fid]), default=float(precision_bits))
                   for fid in const}
        terms, total = [], 0
        for gid in const:
            g = fl[gid]
            vol = lattice_volume(p, g, lattice)
            acc, breakdown = 0, []
            for fid in const:
                f = fl[fid]
                if not fl.contains(g, f):
                    continue
                data = face_lattices(tuple(f.lin_basis), lattice, ip)
                gl = face_lattices(tuple(g.lin_basis), data.section, ip)
                t = transverse_cone_in(p, g, f, ip)
                pf = ip.projector(f.lin_basis) if f.lin_basis else None
                x_f = matvec(pf, face_point(p, g)) if pf else zeros(n)
                pg = _perp_projector(g.lin_basis, n, ip)
                cone = Cone(matvec(pg, x_f), t.rays)
                for gam, a, b, s, v in vals[fid]:
                    w = mu_at_zero(cone, gl.projection, ip, shift=matvec(pg, a))
                    if w:
                        acc = acc + w * v
                    breakdown.append((fid, gam, w, v))
            value = vol * acc
            rate = xi.pairing(face_point(p, g))
            terms.append(DegenerateTermReport(gid, vol, acc, rate, value, margins[gid], breakdown))
            total = total + value
        return total, terms

    return with_generic_line(run, xi, _levi_constraints(p, xi, ip), seed, precision_bits)


def degenerate_brion_discrete_v3(p: Polytope, lattice: Lattice, xi: Xi,
                                 ip: InnerProduct | None = None, seed: int = 0,
                                 precision_bits: int = DEFAULT_PRECISION,
                                 trunc: int | None = None):
    """S_L(p; xi) as sum over constant faces g of vol^{L_g}(g) times
    sum over f >= g (f = g or f not constant) of mu^{L^{f perp}}(t_f^p; xi)
    e^{<xi, g>} I^{(L^{g perp})_f}(0LC_g^f; xi)."""
    n = p.ambient_dim
    ip = ip or InnerProduct.standard(n)
    trunc = trunc if trunc is not None else n + 4
    _require_adapted(xi, lattice)
    fl = p.faces
    dec = xi_decomposition(p, xi)
    const = sorted(dec.constant_faces)

    def run(line):
        memo: dict = {}
        mu_vals = {}
        terms, total = [], 0
        for gid in const:
            g = fl[gid]
            vol = lattice_volume(p, g, lattice)
            gdata = face_lattices(tuple(g.lin_basis), lattice, ip)
            acc, breakdown, margin = 0, [], float(precision_bits)
            eg = xi.exp_at(face_point(p, g)) if not line.exact else 1
            for f in [g] + fl.superfaces(g):
                if f != g and f.id in dec.constant_faces:
                    continue
                if f.id not in mu_vals:
                    fdata = face_lattices(tuple(f.lin_basis), lattice, ip)
                    ms = mu_series(transverse_cone_in(p, f, fl.top, ip), fdata.projection, ip,
                                   line, trunc, memo)
                    mu_vals[f.id] = (_checked(ms, f"mu at face {f.id}"), holomorphy_margin(ms))
                mv, mm = mu_vals[f.id]
                fp, gg = as_subface(p, f, g)
                lc = levi_cone(fp, gg, xi, ip)
                w = ip.complement_within(g.lin_basis, f.lin_basis) if f != g else []
                meas = lattice_section(gdata.projection, w) if w else Lattice(n, ())
                i_s = I_eval(lc, line, trunc, meas)
                iv = _checked(i_s, f"I of Levi cone of face {gid} in face {f.id}")
                margin = min(margin, mm, holomorphy_margin(i_s))
                contrib = mv * iv * eg
                breakdown.append((f.id, mv, iv))
                acc = acc + contrib
            value = vol * acc
            terms.append(DegenerateTermReport(gid, vol, acc, xi.pairing(face_point(p, g)),
                                              value, margin, breakdown))
            total = total + value
        return total, terms

    return with_generic_line(run, xi, _levi_constraints(p, xi, ip), seed, precision_bits)


@dataclass
class HolomorphyReport:
    face_id: int
    order_min: int
    holomorphic: bool
    margin: float
    value: object


def levi_cone_S_holomorphy(p: Polytope, f: Face, lattice: Lattice, xi: Xi,
                           ip: InnerProduct | None = None, seed: int = 0,
                           precision_bits: int = DEFAULT_PRECISION,
                           trunc: int | None = None) -> HolomorphyReport:
    """Expand S_{L^{f perp}}(LC_f^p(xi); .) along a generic line through xi and
    report whether it is holomorphic there."""
    n = p.ambient_dim
    ip = ip or InnerProduct.standard(n)
    trunc = trunc if trunc is not None else n + 4
    data = face_lattices(tuple(f.lin_basis), lattice, ip)
    lc = levi_cone(p, f, xi, ip, based="projected")
    rays = sorted({r for _, k in lc for r in k.rays})

    def run(line):
        return S_eval(lc, data.projection, None, line, trunc)

    s = with_generic_line(run, xi, rays, seed, precision_bits)
    with mpmath.workprec(precision_bits):
        hol, v = value_at(s)
        return HolomorphyReport(f.id, _numerical_order(s), hol, holomorphy_margin(s), v)


def _numerical_order(s: LaurentSeries) -> int:
    """Lowest exponent whose coefficient is above the noise floor."""
    if s.exact:
        nz = [k for k in range(s.val, s.trunc + 1) if s.coeff(k) != 0]
        return nz[0] if nz else s.trunc + 1
    scale = max((abs(c) for c in s.coeffs), default=0)
    tol = mpmath.mpf(2) ** (-(mpmath.mp.prec // 2)) * scale
    nz = [k for k in range(s.val, s.trunc + 1) if abs(s.coeff(k)) > tol]
    return nz[0] if nz else s.trunc + 1


__all__ = [
    "MuQuery", "mu_eval", "mu_series", "mu_at_zero", "cone_faces", "em_reconstruct", "EMReport",
    "pommersheim_thomas_count", "degenerate_brion_discrete_v2", "degenerate_brion_discrete_v3",
    "levi_cone_S_holomorphy", "HolomorphyReport", "HolomorphyViolation", "NotAdapted",
    "DegenerateTermReport", "levi_coset_sums", "polytope_I_series", "polytope_S_series",
    "all_edge_directions",
]
