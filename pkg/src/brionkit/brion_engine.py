"""Brion-type formulas for exponential integrals and sums over polytopes,
including their degenerate versions where xi is constant on some faces."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .euler_maclaurin import (
    DegenerateTermReport,
    HolomorphyViolation,
    NotAdapted,
    _checked,
    _levi_constraints,
    _require_adapted,
    all_edge_directions,
    degenerate_brion_discrete_v2,
    degenerate_brion_discrete_v3,
    levi_coset_sums,
    mu_series,
    polytope_I_series,
    polytope_S_series,
)
from .exact_linalg import (
    InnerProduct,
    Lattice,
    coset_representatives,
    lattice_section,
    lcm_denominators,
    matvec,
    vscale,
    vsub,
)
from .face_data import as_subface, euclidean_volume, face_lattices, lattice_volume
from .laurent_eval import (
    DEFAULT_PRECISION,
    GenericLine,
    I_eval,
    S_eval,
    holomorphy_margin,
    value_at,
    with_generic_line,
    zero_series,
)
from .polytope_core import Cone, Face, Polytope, dilate_translate, face_point, projected_polytope, \
    transverse_cone_in
from .virtual_cone import levi_cone
from .xi_structure import Xi, exp_of_pair, flags, is_constant_face, xi_decomposition, xi_prime


class ZeroRestriction(ArithmeticError):
    """xi restricts to zero on a flag face where a nonzero restriction is needed."""


def _trunc(p: Polytope, trunc):
    return trunc if trunc is not None else p.ambient_dim + 4


def _finish(s, what):
    hol, v = value_at(s)
    if not hol:
        raise HolomorphyViolation(f"{what} has a pole at xi")
    return v, holomorphy_margin(s)


# ------------------------------------------------------------ classical


@dataclass
class BrionResult:
    total: object
    holomorphy_margin: float
    vertex_values: list = field(default_factory=list)


def brion_continuous_report(p: Polytope, xi: Xi, ip: InnerProduct | None = None, seed: int = 0,
                            precision_bits: int = DEFAULT_PRECISION, trunc: int | None = None) -> BrionResult:
    """Sum of the vertex tangent-cone integrals along one shared generic line."""
    ip = ip or InnerProduct.standard(p.ambient_dim)
    trunc = _trunc(p, trunc)
    fl = p.faces

    def run(line):
        acc, per = None, []
        for v in fl.vertices:
            x = face_point(p, v)
            rays = [vsub(p.vertices[min(e.vertex_ids - v.vertex_ids)], x) for e in fl.covers(v)]
            s = I_eval(Cone(x, tuple(rays)), line, trunc, ip)
            per.append((v.id, s))
            acc = s if acc is None else acc + s
        total, margin = _finish(acc, "the summed vertex series")
        return BrionResult(total, margin, [(i, value_at(s)[1]) for i, s in per])

    return with_generic_line(run, xi, all_edge_directions(p), seed, precision_bits)


def brion_continuous(p: Polytope, xi: Xi, ip: InnerProduct | None = None, seed: int = 0,
                     precision_bits: int = DEFAULT_PRECISION):
    """Integral of e^{<xi,x>} over p by Brion's formula.

    Args:
        p: a bounded polytope (Euclidean measure on its affine hull).
        xi: the functional; degenerate values are allowed since the vertex
            series are summed before taking the constant term.
        ip: inner product defining the measure.

    Returns:
        The integral as an mpc (an exact Fraction when xi = 0).
    """
    return brion_continuous_report(p, xi, ip, seed, precision_bits).total


def brion_discrete_report(p: Polytope, lattice: Lattice, xi: Xi, ip: InnerProduct | None = None,
                          seed: int = 0, precision_bits: int = DEFAULT_PRECISION,
                          trunc: int | None = None, shift=None) -> BrionResult:
    trunc = _trunc(p, trunc)
    fl = p.faces

    def run(line):
        acc, per = None, []
        for v in fl.vertices:
            x = face_point(p, v)
            rays = [vsub(p.vertices[min(e.vertex_ids - v.vertex_ids)], x) for e in fl.covers(v)]
            s = S_eval(Cone(x, tuple(rays)), lattice, shift, line, trunc)
            per.append((v.id, s))
            acc = s if acc is None else acc + s
        total, margin = _finish(acc, "the summed vertex series")
        return BrionResult(total, margin, [(i, value_at(s)[1]) for i, s in per])

    return with_generic_line(run, xi, all_edge_directions(p), seed, precision_bits)


def brion_discrete(p: Polytope, lattice: Lattice, xi: Xi, ip: InnerProduct | None = None,
                   seed: int = 0, precision_bits: int = DEFAULT_PRECISION, shift=None):
    """Sum of e^{<xi,x>} over p cap (shift + lattice) by Brion's formula."""
    return brion_discrete_report(p, lattice, xi, ip, seed, precision_bits, shift=shift).total


# ------------------------------------------------------------ DBI


def _complex_covector(xi: Xi):
    two_pi = 2 * mpmath.pi
    return [mpmath.mpc(mpmath.mpf(r.numerator) / r.denominator,
                       two_pi * mpmath.mpf(i.numerator) / i.denominator)
            for r, i in zip(xi.re, xi.im2pi)]


def _mpf(q):
    q = Fraction(q)
    return mpmath.mpf(q.numerator) / q.denominator


def restricted_norm_sq(xi: Xi, basis, ip: InnerProduct):
    """Hermitian squared norm of xi restricted to span(basis), measured with
    the dual of ip restricted to that span."""
    c = [sum(x * _mpf(b_i) for x, b_i in zip(_complex_covector(xi), b)) for b in basis]
    k = len(basis)
    g = mpmath.matrix(k, k)
    for i in range(k):
        for j in range(k):
            g[i, j] = _mpf(ip(basis[i], basis[j]))
    gi = mpmath.inverse(g)
    return mpmath.re(sum(mpmath.conj(c[i]) * gi[i, j] * c[j] for i in range(k) for j in range(k)))


def _unit_outward_normal(p: Polytope, small: Face, big: Face, ip: InnerProduct):
    (w,) = ip.complement_within(small.lin_basis, big.lin_basis)
    y = face_point(p, small)
    x = p.vertices[min(big.vertex_ids - small.vertex_ids)]
    if ip(w, vsub(x, y)) > 0:
        w = vscale(-1, w)
    norm = mpmath.sqrt(_mpf(ip(w, w)))
    return [_mpf(c) / norm for c in w]


def dbi(p: Polytope, g: Face, xi: Xi, ip: InnerProduct | None = None,
        precision_bits: int = DEFAULT_PRECISION):
    """Flag-product expression for I(0LC_g^p; xi).

    Sums, over xi-adapted saturated flags g = h_k < ... < h_n = p, the
    products of <xi, eta_j>_H / ||xi restricted to lin h_j||^2 where eta_j is
    the unit outward normal of h_{j-1} inside h_j.
    """
    ip = ip or InnerProduct.standard(p.ambient_dim)
    if not is_constant_face(g, xi):
        raise ValueError(f"face {g.id} is not xi-constant")
    fl = p.faces
    with mpmath.workprec(precision_bits):
        if g == fl.top:
            return mpmath.mpc(1)
        xc = _complex_covector(xi)
        total = mpmath.mpc(0)
        for chain in flags(p, g, "xi-adapted", xi):
            term = mpmath.mpc(1)
            for a, b in zip(chain, chain[1:]):
                lo, hi = fl[a], fl[b]
                nsq = restricted_norm_sq(xi, hi.lin_basis, ip)
                if nsq == 0:
                    raise ZeroRestriction(f"xi vanishes on face {hi.id}")
                eta = _unit_outward_normal(p, lo, hi, ip)
                term *= sum(mpmath.conj(c) * e for c, e in zip(xc, eta)) / nsq
            total += term
        return total


# ------------------------------------------------- degenerate continuous


def degenerate_brion_continuous(p: Polytope, xi: Xi, ip: InnerProduct | None = None, seed: int = 0,
                                precision_bits: int = DEFAULT_PRECISION, trunc: int | None = None):
    """Integral of e^{<xi,x>} over p as a sum over the xi-constant faces f of
    e^{<xi,f>} vol(f) I(0LC_f^p(xi); xi).

    Returns:
        (total, list of DegenerateTermReport), one report per constant face.

    Raises:
        HolomorphyViolation: a Levi value has a pole at xi.
    """
    n = p.ambient_dim
    ip = ip or InnerProduct.standard(n)
    trunc = _trunc(p, trunc)
    fl = p.faces
    const = sorted(xi_decomposition(p, xi).constant_faces)

    def run(line):
        terms, total = [], 0
        for fid in const:
            f = fl[fid]
            s = I_eval(levi_cone(p, f, xi, ip), line, trunc, ip)
            lv, margin = _finish(s, f"I of the Levi cone at face {fid}")
            vol = euclidean_volume(p, f, ip)
            x = face_point(p, f)
            rate = xi.pairing(x)
            e = exp_of_pair(*rate) if not line.exact else 1
            # keep exact zeros exact; vol may be irrational on lower faces
            value = lv if lv == 0 else e * vol * lv
            terms.append(DegenerateTermReport(fid, vol, lv, rate, value, margin))
            total = total + value
        return total, terms

    return with_generic_line(run, xi, _levi_constraints(p, xi, ip), seed, precision_bits)


# ------------------------------------------------- decomposition check


@dataclass
class DecompositionReport:
    probes: int
    max_deviation_integral: object
    max_deviation_sum: object
    passed: bool
    tolerance: object


def _random_xi(rng: random.Random, n: int) -> Xi:
    def q():
        return Fraction(rng.randint(-30, 30), rng.randint(1, 11))
    return Xi(tuple(q() for _ in range(n)), tuple(q() / 7 for _ in range(n)))


def decomposition_check(p: Polytope, xi: Xi, ip: InnerProduct | None = None, probes: int = 10,
                        lattice: Lattice | None = None, seed: int = 0,
                        precision_bits: int = DEFAULT_PRECISION, tol=None) -> DecompositionReport:
    """Evaluate both sides of [p] = sum over constant faces f of
    [f^f x LC_f^p(xi)] (modulo polyhedra with lines) at random probes.

    The integral side uses I(f^f x LC) = I(f^f) I(LC); the sum side splits
    over the classes of L / (L_f + L_{f perp}).
    """
    if probes < 1:
        raise ValueError("need at least one probe")
    n = p.ambient_dim
    ip = ip or InnerProduct.standard(n)
    fl = p.faces
    const = sorted(xi_decomposition(p, xi).constant_faces)
    rng = random.Random(seed)
    trunc = 0
    with mpmath.workprec(precision_bits):
        tol = tol if tol is not None else mpmath.mpf(2) ** -100
        dev_i = dev_s = mpmath.mpf(0)
        pieces = {fid: (projected_polytope(p, fl[fid], ip), levi_cone(p, fl[fid], xi, ip, "projected"))
                  for fid in const}
        for _ in range(probes):
            alpha = _random_xi(rng, n)

            def run(line):
                lhs = value_at(polytope_I_series(p, line, trunc, ip))[1]
                rhs = 0
                for fid in const:
                    ff, lc = pieces[fid]
                    a = value_at(polytope_I_series(ff, line, trunc, ip))[1] if ff.dim else \
                        line.exp_series(ff.vertices[0], trunc).coeff(0)
                    rhs += a * value_at(I_eval(lc, line, trunc, ip))[1]
                out = [lhs, rhs]
                if lattice is not None:
                    out += [value_at(polytope_S_series(p, lattice, line, trunc))[1],
                            _sum_side(p, fl, const, pieces, lattice, ip, line, trunc)]
                return out

            vals = with_generic_line(run, alpha, (), seed, precision_bits)
            dev_i = max(dev_i, abs(vals[0] - vals[1]) / max(abs(vals[0]), 1))
            if lattice is not None:
                dev_s = max(dev_s, abs(vals[2] - vals[3]) / max(abs(vals[2]), 1))
        passed = dev_i < tol and dev_s < tol
        return DecompositionReport(probes, dev_i, dev_s if lattice is not None else None, passed, tol)


def _sum_side(p, fl, const, pieces, lattice, ip, line, trunc):
    rhs = 0
    for fid in const:
        f = fl[fid]
        ff, lc = pieces[fid]
        data = face_lattices(tuple(f.lin_basis), lattice, ip)
        cd = coset_representatives(lattice, data.section, data.perp_section, ip)
        for a, b in zip(cd.phi1_images, cd.phi2_images):
            left = value_at(_face_sum_series(ff, data.section, a, line, trunc))[1]
            if left == 0:
                continue
            rhs += left * value_at(S_eval(lc, data.perp_section, b, line, trunc))[1]
    return rhs


def _face_sum_series(ff: Polytope, section: Lattice, shift, line, trunc):
    if ff.dim == 0:
        x = ff.vertices[0]
        if section.rank == 0:
            ok = all(c == s for c, s in zip(x, shift))
        else:
            ok = section.contains(vsub(x, shift))
        return line.exp_series(x, trunc) if ok else zero_series(trunc, line.exact)
    return polytope_S_series(ff, section, line, trunc, shift)


# ----------------------------------------------------- degenerate discrete


def degenerate_brion_discrete_v1(p: Polytope, lattice: Lattice, xi: Xi,
                                 ip: InnerProduct | None = None, seed: int = 0,
                                 precision_bits: int = DEFAULT_PRECISION,
                                 trunc: int | None = None):
    """Sum of e^{<xi,x>} over p cap L as a sum over constant faces f and
    classes [g] in L/(L_f + L_{f perp}) of the number of points of
    [g^f] + L_f in f^f times S over [g^{f perp}] + L_{f perp} of LC_f^p(xi).

    Requires xi adapted to L (see ``degenerate_brion_discrete`` for the
    general case).
    """
    n = p.ambient_dim
    ip = ip or InnerProduct.standard(n)
    trunc = _trunc(p, trunc)
    _require_adapted(xi, lattice)
    fl = p.faces
    const = sorted(xi_decomposition(p, xi).constant_faces)

    def run(line):
        zero_line = GenericLine(Xi.zero(n), line.beta, line.precision_bits)
        terms, total = [], 0
        for fid in const:
            f = fl[fid]
            ff = projected_polytope(p, f, ip)
            data = face_lattices(tuple(f.lin_basis), lattice, ip)
            acc, breakdown, margin = 0, [], float(precision_bits)
            for g, a, b, s in levi_coset_sums(p, f, lattice, xi, ip, line, trunc):
                count = value_at(_face_sum_series(ff, data.section, a, zero_line, 0))[1]
                count = int(count)
                if count == 0:
                    breakdown.append((g, 0, None))
                    continue
                v, m = _finish(s, f"S of the Levi cone at face {fid}")
                margin = min(margin, m)
                breakdown.append((g, count, v))
                acc = acc + count * v
            vol = lattice_volume(p, f, lattice)
            terms.append(DegenerateTermReport(fid, vol, acc, xi.pairing(face_point(p, f)), acc,
                                              margin, breakdown))
            total = total + acc
        return total, terms

    return with_generic_line(run, xi, _levi_constraints(p, xi, ip), seed, precision_bits)


_VERSIONS = {1: degenerate_brion_discrete_v1, 2: degenerate_brion_discrete_v2,
             3: degenerate_brion_discrete_v3}


def degenerate_brion_discrete(p: Polytope, lattice: Lattice, xi: Xi,
                              ip: InnerProduct | None = None, version: int = 1, seed: int = 0,
                              precision_bits: int = DEFAULT_PRECISION):
    """Lattice sum for arbitrary xi: reduce to an adapted xi' on a
    finite-index sublattice L', then apply the chosen version per coset.

    Returns:
        (total, list of (coset representative, weight, version total, terms)).
    """
    ip = ip or InnerProduct.standard(p.ambient_dim)
    fn = _VERSIONS[version]
    data = xi_prime(lattice, xi, ip)
    xp = data.xi_prime
    parts, total = [], 0
    with mpmath.workprec(precision_bits):
        for g, pair in data.cosets:
            sub = dilate_translate(p, 1, vscale(-1, g))
            v, terms = fn(sub, data.lambda_prime, xp, ip, seed=seed, precision_bits=precision_bits)
            r, i = (a + b for a, b in zip(pair, xp.pairing(g)))
            w = 1 if r == 0 and i.denominator == 1 else exp_of_pair(r, i)
            parts.append((g, w, v, terms))
            total = total + w * v
    return total, parts


# ----------------------------------------------------------- dilation


@dataclass
class DilationSeries:
    """sum over constant faces g of c_g(t) t^{dim g} e^{t <xi, g>}.

    ``terms`` holds (face id, degree, rate, coefficients) where coefficients
    is a list indexed by t mod ``period`` (length 1 in continuous mode).
    """

    mode: str
    period: int
    terms: list
    checks: list = field(default_factory=list)

    def evaluate(self, t: int):
        total = 0
        for _, deg, rate, coeffs in self.terms:
            c = coeffs[t % self.period]
            if c == 0:
                continue
            r, i = rate
            e = 1 if (r == 0 and i == 0) else exp_of_pair(t * r, t * i)
            total = total + c * Fraction(t) ** deg * e
        return total


def _perp_period(p: Polytope, f: Face, lat: Lattice, ip: InnerProduct) -> int:
    data = face_lattices(tuple(f.lin_basis), lat, ip)
    if data.projection.rank == 0:
        return 1
    x = matvec(ip.projector(data.perp), face_point(p, f))
    return lcm_denominators(data.projection.coords(x))


def dilation_series(p: Polytope, xi: Xi, ip: InnerProduct | None = None, mode: str = "continuous",
                    lattice: Lattice | None = None, t_probe=(), seed: int = 0,
                    precision_bits: int = DEFAULT_PRECISION, trunc: int | None = None) -> DilationSeries:
    """Exponential polynomial (quasi-polynomial in the discrete case) in t
    giving I(tp; xi) or S_L(tp; xi) for positive integers t.

    Each entry of ``t_probe`` is compared with a direct evaluation on the
    dilate and recorded in ``checks`` as (t, series value, direct value).
    """
    n = p.ambient_dim
    ip = ip or InnerProduct.standard(n)
    trunc = _trunc(p, trunc)
    fl = p.faces
    const = sorted(xi_decomposition(p, xi).constant_faces)
    if mode == "continuous":
        _, terms = degenerate_brion_continuous(p, xi, ip, seed, precision_bits, trunc)
        out = [(t.face_id, fl[t.face_id].dim, t.rate, [t.normalized_face_volume * t.levi_value])
               for t in terms]
        ds = DilationSeries("continuous", 1, out)
        for t in t_probe:
            ds.checks.append((t, ds.evaluate(t),
                              degenerate_brion_continuous(dilate_translate(p, t), xi, ip, seed,
                                                          precision_bits)[0]))
        return ds
    if mode != "discrete":
        raise ValueError(f"unknown mode {mode!r}")
    lattice = lattice or Lattice.standard(n)
    _require_adapted(xi, lattice)
    period = 1
    for f in fl:
        period = math.lcm(period, _perp_period(p, f, lattice, ip))

    def run(line):
        memo: dict = {}
        out = []
        for gid in const:
            g = fl[gid]
            vol = lattice_volume(p, g, lattice)
            gdata = face_lattices(tuple(g.lin_basis), lattice, ip)
            coeffs = []
            for r in range(period):
                acc = 0
                for f in [g] + fl.superfaces(g):
                    if f != g and f.id in const:
                        continue
                    fdata = face_lattices(tuple(f.lin_basis), lattice, ip)
                    t0 = transverse_cone_in(p, f, fl.top, ip)
                    apex = vscale(r, t0.apex)
                    ms = mu_series(Cone(apex, t0.rays), fdata.projection, ip, line, trunc, memo)
                    mv = _checked(ms, f"mu at face {f.id}")
                    fp, gg = as_subface(p, f, g)
                    w = ip.complement_within(g.lin_basis, f.lin_basis) if f != g else []
                    meas = lattice_section(gdata.projection, w) if w else Lattice(n, ())
                    iv = _checked(I_eval(levi_cone(fp, gg, xi, ip), line, trunc, meas),
                                  f"I of the Levi cone of face {gid} in face {f.id}")
                    acc = acc + mv * iv
                coeffs.append(vol * acc)
            out.append((gid, g.dim, xi.pairing(face_point(p, g)), coeffs))
        return out

    out = with_generic_line(run, xi, _levi_constraints(p, xi, ip), seed, precision_bits)
    ds = DilationSeries("discrete", period, out)
    for t in t_probe:
        direct = degenerate_brion_discrete_v1(dilate_translate(p, t), lattice, xi, ip, seed,
                                              precision_bits)[0]
        ds.checks.append((t, ds.evaluate(t), direct))
    return ds


__all__ = [
    "brion_continuous", "brion_continuous_report", "brion_discrete", "brion_discrete_report",
    "BrionResult", "dbi", "restricted_norm_sq", "ZeroRestriction", "degenerate_brion_continuous",
    "decomposition_check", "DecompositionReport", "degenerate_brion_discrete_v1",
    "degenerate_brion_discrete_v2", "degenerate_brion_discrete_v3", "degenerate_brion_discrete",
    "dilation_series", "DilationSeries", "HolomorphyViolation", "NotAdapted", "DegenerateTermReport",
]
