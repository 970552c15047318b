from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brionkit.brion_engine import brion_discrete, degenerate_brion_discrete_v1
from brionkit.corpus import PENTAGON, SKEW_TRIANGLE, by_name, corpus, nonstandard_lattice
from brionkit.euler_maclaurin import (
    MuQuery,
    NotAdapted,
    degenerate_brion_discrete_v2,
    degenerate_brion_discrete_v3,
    em_reconstruct,
    levi_cone_S_holomorphy,
    mu_at_zero,
    mu_eval,
    pommersheim_thomas_count,
)
from brionkit.exact_linalg import Lattice
from brionkit.oracle import lattice_enum_sum
from brionkit.polytope_core import Cone, Polytope
from brionkit.xi_structure import Xi
from helpers import close, face_at

F = Fraction
Z1, Z2 = Lattice.standard(1), Lattice.standard(2)
E1 = Xi.of((1, 0), (0, 0))


def cone(apex, *rays, lineality=()):
    v = lambda x: tuple(F(c) for c in x)  # noqa: E731
    return Cone(v(apex), tuple(v(r) for r in rays), tuple(v(r) for r in lineality))


@pytest.mark.parametrize("s, expected", [(0, F(1, 2)), (F(1, 3), F(-1, 6)), (F(-1, 4), F(1, 4)), (2, F(1, 2))])
def test_half_line_mu_at_zero(s, expected):
    assert mu_at_zero(cone((s,), (1,)), Z1) == expected


def test_mu_base_cases():
    assert mu_at_zero(Cone(()), Lattice(0, ())) == 1
    assert mu_at_zero(cone((0, 0), lineality=[(1, 0)]), Z2) == 0
    assert mu_at_zero(cone((0, 0), (1, 0), (0, 1)), Z2) == F(1, 4)


def test_mu_at_shifted_lattice():
    k = cone((F(1, 3),), (1,))
    assert mu_at_zero(k, Z1, shift=(F(1, 3),)) == mu_at_zero(cone((0,), (1,)), Z1)


@given(st.integers(-5, 5), st.fractions(min_value=-2, max_value=2, max_denominator=5))
@settings(max_examples=25, deadline=None)
def test_mu_lattice_translation_1d(g, s):
    assert mu_at_zero(cone((s + g,), (1,)), Z1) == mu_at_zero(cone((s,), (1,)), Z1)


@given(st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
@settings(max_examples=15, deadline=None)
def test_mu_lattice_translation_2d(g):
    base = cone((F(1, 2), F(1, 3)), (1, 0), (1, 2))
    moved = cone((F(1, 2) + g[0], F(1, 3) + g[1]), (1, 0), (1, 2))
    assert mu_at_zero(moved, Z2) == mu_at_zero(base, Z2)


@pytest.mark.parametrize("apex", [(0, 0), (F(1, 2), F(1, 3))])
def test_mu_is_a_valuation(apex):
    whole = mu_at_zero(cone(apex, (1, 0), (0, 1)), Z2)
    left = mu_at_zero(cone(apex, (1, 0), (1, 1)), Z2)
    right = mu_at_zero(cone(apex, (1, 1), (0, 1)), Z2)
    shared = mu_at_zero(cone(apex, (1, 1)), Z2)
    assert whole == left + right - shared


def test_mu_series_is_holomorphic_at_adapted_points():
    for k, lat in [(cone((0, 0), (1, 0), (1, 2)), Z2), (cone((F(1, 3),), (1,)), Z1)]:
        n = len(k.apex)
        xi = Xi.of([F(1, 2)] * n, [0] * n)
        s = mu_eval(MuQuery(k, lat, at_zero=False, xi=xi))
        with mpmath.workprec(256):
            scale = max(abs(c) for c in s.coeffs)
            assert all(abs(s.coeff(j)) <= mpmath.mpf(2) ** -128 * scale for j in range(s.val, 0))


def test_mu_one_dim_series_against_closed_form():
    # mu([0, inf); x) = 1/(1 - e^x) + 1/x
    s = mu_eval(MuQuery(cone((0,), (1,)), Z1, at_zero=False, xi=Xi.of((1,), (0,)), trunc=0))
    with mpmath.workprec(256):
        assert close(s.coeff(0), 1 / (1 - mpmath.e) + 1)


def test_em_reconstruct_segment_generic():
    seg = Polytope.from_vertices([(0,), (3,)])
    rep = em_reconstruct(seg, Z1, Xi.of((F(2, 7),), (F(1, 9),)))
    assert rep.passed and not rep.exact


def test_em_reconstruct_exact_counts():
    sq = Polytope.from_vertices([(0, 0), (2, 0), (0, 2), (2, 2)])
    rep = em_reconstruct(sq, Z2)
    assert rep.exact and rep.passed and rep.lhs == rep.rhs == 9
    tri = by_name("triangle_2").polytope
    assert em_reconstruct(tri, Z2).rhs == 6


def test_em_reconstruct_on_a_cone():
    assert em_reconstruct(cone((0, 0), (1, 0), (1, 2)), Z2, Xi.of((-1, -1), (0, 0))).passed


@pytest.mark.parametrize("inst", corpus(), ids=lambda i: i.name)
def test_face_formula_counts_lattice_points(inst):
    for lat in (Lattice.standard(inst.dim), nonstandard_lattice(inst.dim)):
        got = pommersheim_thomas_count(inst.polytope, lat)
        assert isinstance(got, Fraction)
        assert got == len(lattice_enum_sum(inst.polytope, lat)[0])


def test_face_formula_small_cases():
    assert pommersheim_thomas_count(by_name("unit_square").polytope, Z2) == 4
    assert pommersheim_thomas_count(Polytope.from_vertices([(F(1, 2), F(1, 2))]), Z2) == 0


def _brute(p, xi):
    return lattice_enum_sum(p, Lattice.standard(p.ambient_dim), None, xi, 256)[1]


@pytest.mark.parametrize("verts", [PENTAGON, SKEW_TRIANGLE], ids=["pentagon", "skew_triangle"])
def test_discrete_versions_agree_with_brute_force(verts):
    p = Polytope.from_vertices(verts)
    ref = _brute(p, E1)
    v1, _ = degenerate_brion_discrete_v1(p, Z2, E1)
    v2, terms2 = degenerate_brion_discrete_v2(p, Z2, E1)
    v3, terms3 = degenerate_brion_discrete_v3(p, Z2, E1)
    for v in (v1, v2, v3):
        assert close(v, ref, mpmath.mpf(2) ** -100)
    assert [t.face_id for t in terms2] == [t.face_id for t in terms3]


def test_versions_collapse_for_generic_and_zero_functionals():
    p = Polytope.from_vertices(SKEW_TRIANGLE)
    xi = Xi.of((F(1, 3), F(-2, 5)), (0, 0))
    ref = brion_discrete(p, Z2, xi)
    assert close(degenerate_brion_discrete_v2(p, Z2, xi)[0], ref)
    assert close(degenerate_brion_discrete_v3(p, Z2, xi)[0], ref)
    count = pommersheim_thomas_count(p, Z2)
    assert close(degenerate_brion_discrete_v2(p, Z2, Xi.zero(2))[0], count)
    assert close(degenerate_brion_discrete_v3(p, Z2, Xi.zero(2))[0], count)


def test_versions_reject_non_adapted_functionals():
    seg = Polytope.from_vertices([(0,), (2,)])
    with pytest.raises(NotAdapted):
        degenerate_brion_discrete_v2(seg, Z1, Xi.of((0,), (F(1, 2),)))


def test_levi_sum_holomorphy():
    p = Polytope.from_vertices(PENTAGON)
    rep = levi_cone_S_holomorphy(p, face_at(p, (0, 0)), Z2, E1)
    assert rep.holomorphic and rep.order_min >= 0
    assert levi_cone_S_holomorphy(p, face_at(p, (3, 1)), Z2, E1).holomorphic
    top = levi_cone_S_holomorphy(p, p.faces.top, Z2, Xi.zero(2))
    assert top.holomorphic and top.value == 1
