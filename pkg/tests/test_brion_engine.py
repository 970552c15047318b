from fractions import Fraction

import mpmath
import pytest

from brionkit.brion_engine import (
    brion_continuous,
    brion_continuous_report,
    brion_discrete,
    dbi,
    decomposition_check,
    degenerate_brion_continuous,
    degenerate_brion_discrete,
    degenerate_brion_discrete_v1,
    dilation_series,
)
from brionkit.corpus import PENTAGON, SKEW_TRIANGLE, by_name, corpus, generic_xis
from brionkit.exact_linalg import InnerProduct, Lattice
from brionkit.laurent_eval import GenericLine, I_eval, value_at
from brionkit.oracle import ehrhart_table, lattice_enum_sum, quad_integral
from brionkit.polytope_core import Polytope, dilate_translate, face_polytope, transverse_cone_in
from brionkit.virtual_cone import levi_cone
from brionkit.xi_structure import Xi
from helpers import close, face_at, mpc

F = Fraction
Z1, Z2 = Lattice.standard(1), Lattice.standard(2)
E1 = Xi.of((1, 0), (0, 0))
PENT = Polytope.from_vertices(PENTAGON)
SKEW = Polytope.from_vertices(SKEW_TRIANGLE)
UNIT = Polytope.from_vertices([(0,), (1,)])
SQUARE = Polytope.from_vertices([(0, 0), (1, 0), (0, 1), (1, 1)])


def test_continuous_closed_forms():
    with mpmath.workprec(256):
        assert close(brion_continuous(UNIT, Xi.of((1,), (0,))), mpmath.e - 1)
        assert close(brion_continuous(SQUARE, Xi.of((1, 1), (0, 0))), (mpmath.e - 1) ** 2)
    assert brion_continuous(PENT, Xi.zero(2)) == F(15, 2)


def test_continuous_matches_quadrature_on_pentagon():
    for xi in generic_xis(2, 3):
        ref = quad_integral(PENT, xi)
        assert abs(complex(brion_continuous(PENT, xi)) - ref) < 1e-10 * abs(ref)


def test_vertex_values_are_reported():
    rep = brion_continuous_report(SQUARE, Xi.of((F(1, 2), F(1, 3)), (0, 0)))
    assert len(rep.vertex_values) == 4 and rep.holomorphy_margin > 0


def test_stokes_relation_over_facets():
    # I(p) = sum over facets F of <xi, eta_F> / |xi|^2 * I(F)
    xi = Xi.of((F(1, 3), F(2, 5)), (0, 0))
    with mpmath.workprec(256):
        rhs = mpmath.mpc(0)
        for f in PENT.faces:
            if f.dim != 1:
                continue
            (a, _), = [PENT.facets[i] for i in f.active_facets]
            eta = [mpc(x) / mpmath.sqrt(mpc(a[0] ** 2 + a[1] ** 2).real) for x in a]
            rhs += (mpc(xi.re[0]) * eta[0] + mpc(xi.re[1]) * eta[1]) / mpc(xi.re[0] ** 2 + xi.re[1] ** 2) \
                * brion_continuous(face_polytope(PENT, f), xi)
        assert close(brion_continuous(PENT, xi), rhs, mpmath.mpf(2) ** -100)


def test_discrete_closed_forms():
    seg = Polytope.from_vertices([(0,), (3,)])
    with mpmath.workprec(256):
        assert close(brion_discrete(seg, Z1, Xi.of((1,), (0,))), sum(mpmath.e ** k for k in range(4)))
        xi = Xi.of((F(1, 3), F(-2, 7)), (F(1, 5), 0))
        factors = [1 + xi.exp_at(e) for e in ((1, 0), (0, 1))]
        assert close(brion_discrete(SQUARE, Z2, xi), factors[0] * factors[1])
    assert brion_discrete(SKEW, Z2, Xi.zero(2)) == len(lattice_enum_sum(SKEW, Z2)[0])


def test_dbi_at_maximal_vertex_equals_tangent_cone_integral():
    v = face_at(PENT, (3, 1))
    t = transverse_cone_in(PENT, v, PENT.faces.top, InnerProduct.standard(2)).at_origin()
    with mpmath.workprec(256):
        ref = value_at(I_eval(t, GenericLine(E1, (F(1, 3), F(2, 7))), 2))[1]
        assert close(dbi(PENT, v, E1), ref)


def test_dbi_at_zero_functional():
    assert dbi(PENT, PENT.faces.top, Xi.zero(2)) == 1
    assert dbi(PENT, face_at(PENT, (0, 0)), Xi.zero(2)) == 0


def test_dbi_matches_levi_value_on_skew_triangle():
    g = face_at(SKEW, (0, 0))
    with mpmath.workprec(256):
        ref = value_at(I_eval(levi_cone(SKEW, g, E1), GenericLine(E1, (F(1, 3), F(2, 7))), 3))[1]
        assert close(dbi(SKEW, g, E1), ref)


def test_degenerate_continuous_examples():
    total, terms = degenerate_brion_continuous(PENT, Xi.zero(2))
    assert total == F(15, 2)
    assert [t.face_id for t in terms if t.value != 0] == [PENT.faces.top.id]
    total, terms = degenerate_brion_continuous(PENT, E1)
    assert len(terms) == 6
    assert abs(complex(total) - quad_integral(PENT, E1)) < 1e-10
    total, terms = degenerate_brion_continuous(SKEW, E1)
    assert len(terms) == 4
    assert abs(complex(total) - quad_integral(SKEW, E1)) < 1e-10


def test_degenerate_continuous_collapses_for_generic_functional():
    xi = generic_xis(2, 1, seed=5)[0]
    total, terms = degenerate_brion_continuous(SKEW, xi)
    assert len(terms) == 3
    assert close(total, brion_continuous(SKEW, xi))


def test_decomposition_check():
    assert decomposition_check(SQUARE, generic_xis(2, 1)[0], probes=3).passed
    rep = decomposition_check(PENT, E1, probes=10)
    assert rep.passed and rep.max_deviation_integral < mpmath.mpf(2) ** -100
    assert decomposition_check(SKEW, E1, probes=3, lattice=Z2).passed
    with pytest.raises(ValueError):
        decomposition_check(SQUARE, E1, probes=0)


def test_discrete_degenerate_at_zero_counts_points():
    for inst in corpus()[:8]:
        lat = Lattice.standard(inst.dim)
        total, _ = degenerate_brion_discrete(inst.polytope, lat, Xi.zero(inst.dim))
        assert isinstance(total, (int, Fraction))
        assert total == len(lattice_enum_sum(inst.polytope, lat)[0])


def test_bottom_edge_term_of_square():
    sq = by_name("square_2").polytope
    xi = Xi.of((0, -1), (0, 0))
    total, terms = degenerate_brion_discrete_v1(sq, Z2, xi)
    edge = face_at(sq, (0, 0), (2, 0))
    (term,) = [t for t in terms if t.face_id == edge.id]
    with mpmath.workprec(256):
        assert close(term.value, 3 / (1 - mpmath.exp(-1)))
        assert close(total, lattice_enum_sum(sq, Z2, None, xi)[1])


def test_diagonal_edge_splits_into_two_cosets():
    tri = by_name("triangle_2").polytope
    xi = Xi.of((1, 1), (0, 0))
    _, terms = degenerate_brion_discrete_v1(tri, Z2, xi)
    edge = face_at(tri, (2, 0), (0, 2))
    (term,) = [t for t in terms if t.face_id == edge.id]
    assert len(term.coset_breakdown) == 2
    # the projected edge runs from (-1, 1) to (1, -1): 3 points of Z(1,-1), 2 of its shifted coset
    assert sorted(c for _, c, _ in term.coset_breakdown) == [2, 3]


@pytest.mark.parametrize("a, b", [(0, 2), (1, 3), (0, 1)])
@pytest.mark.parametrize("version", [1, 2, 3])
def test_pi_i_on_dilated_segments(a, b, version):
    seg = Polytope.from_vertices([(a,), (b,)])
    xi = Xi.of((0,), (F(1, 2),))
    for t in range(1, 7):
        p = dilate_translate(seg, t)
        got, parts = degenerate_brion_discrete(p, Z1, xi, version=version)
        ref = lattice_enum_sum(p, Z1, None, xi)[1]
        assert close(got, ref, mpmath.mpf(2) ** -64)
        expected = (-1) ** (t * a) if (t * (b - a)) % 2 == 0 else 0
        assert close(got, expected, mpmath.mpf(2) ** -64)
        assert len(parts) == 2


@pytest.mark.parametrize("inst", [i for i in corpus() if i.dim < 3], ids=lambda i: i.name)
def test_discrete_versions_match_brute_force(inst):
    lat = Lattice.standard(inst.dim)
    for xi in inst.degenerate_xis:
        ref = lattice_enum_sum(inst.polytope, lat, None, xi)[1]
        for version in (1, 2, 3):
            got, _ = degenerate_brion_discrete(inst.polytope, lat, xi, version=version)
            assert close(got, ref, mpmath.mpf(2) ** -64)


def test_continuous_dilation():
    ds = dilation_series(PENT, Xi.zero(2))
    assert ds.period == 1 and len(ds.terms) == 11
    assert ds.evaluate(3) == 9 * F(15, 2)
    ds = dilation_series(SKEW, E1, t_probe=(2, 3))
    for _, series, direct in ds.checks:
        assert close(series, direct)


def test_discrete_dilation_is_ehrhart():
    ds = dilation_series(SKEW, Xi.zero(2), mode="discrete", lattice=Z2)
    assert ds.period == 1
    assert [ds.evaluate(t) for t in range(1, 7)] == ehrhart_table(SKEW, Z2, 6)


def test_half_segment_has_period_two():
    half = Polytope.from_vertices([(0,), (F(1, 2),)])
    ds = dilation_series(half, Xi.zero(1), mode="discrete", lattice=Z1)
    assert ds.period == 2
    assert [ds.evaluate(t) for t in range(1, 9)] == [t // 2 + 1 for t in range(1, 9)]


def test_discrete_dilation_with_degenerate_functional():
    ds = dilation_series(SKEW, E1, mode="discrete", lattice=Z2, t_probe=(1, 2, 3))
    for t, series, direct in ds.checks:
        assert close(series, direct, mpmath.mpf(2) ** -64)
        assert close(series, lattice_enum_sum(dilate_translate(SKEW, t), Z2, None, E1)[1],
                     mpmath.mpf(2) ** -64)


def test_leading_coefficient_of_continuous_dilation():
    ds = dilation_series(PENT, E1)
    lead = max(ds.terms, key=lambda term: term[2][0])
    assert lead[1] == 0 and lead[2] == (3, 0)
    assert abs(complex(lead[3][0]) - 3) < 1e-60
