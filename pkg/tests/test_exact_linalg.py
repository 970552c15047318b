from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from brionkit.exact_linalg import (
    InnerProduct,
    Lattice,
    NonRationalSubspace,
    NotFiniteIndex,
    NotOrthogonal,
    canonical_forms,
    coset_representatives,
    det,
    gram_det_sq,
    hnf_columns,
    identity,
    integer_kernel,
    inverse,
    lattice_projection,
    lattice_section,
    matmul,
    normalized_volume,
    nullspace,
    placing_triangulation,
    primitive_integer,
    quotient_representatives,
    rank,
    snf,
    solve_integer,
)

small = st.integers(-6, 6)


def int_matrix(rows, cols):
    return st.lists(st.lists(small, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


@given(int_matrix(3, 3))
def test_det_matches_sympy(m):
    assert det(m) == sympy.Matrix(m).det()


@given(int_matrix(3, 3))
def test_inverse_round_trip(m):
    if det(m) == 0:
        return
    inv = inverse(m)
    assert matmul(inv, m) == identity(3)
    assert inv == tuple(tuple(Fraction(int(x.p), int(x.q)) for x in row)
                        for row in sympy.Matrix(m).inv().tolist())


@given(int_matrix(3, 4))
def test_nullspace_is_annihilated(m):
    ns = nullspace(m, 4)
    assert len(ns) == 4 - rank(m)
    for v in ns:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in m)


@given(int_matrix(3, 3))
def test_hnf_is_column_echelon_and_unimodular(m):
    h, u = hnf_columns(m)
    assert [list(r) for r in matmul(m, u)] == [list(map(Fraction, r)) for r in h]
    assert abs(det(u)) == 1


@given(int_matrix(3, 3))
@settings(max_examples=60)
def test_snf_invariants_match_sympy(m):
    u, s, v = snf(m)
    assert [list(r) for r in matmul(matmul(u, s), v)] == [list(map(Fraction, r)) for r in m]
    diag = [s[i][i] for i in range(3)]
    for a, b in zip(diag, diag[1:]):
        assert (b == 0) or (a != 0 and b % a == 0)
    from sympy.matrices.normalforms import smith_normal_form
    ref = smith_normal_form(sympy.Matrix(m), domain=sympy.ZZ)
    assert sorted(abs(int(ref[i, i])) for i in range(3)) == sorted(abs(d) for d in diag)


def test_canonical_forms_scale_rationals():
    h, (u,), d = canonical_forms([[Fraction(1, 2), 1], [0, Fraction(3, 2)]])
    assert d == 2
    assert matmul([[1, 2], [0, 3]], u) == h


@given(int_matrix(2, 3))
def test_integer_kernel_and_solve(m):
    for z in integer_kernel(m, 3):
        assert all(sum(a * b for a, b in zip(row, z)) == 0 for row in m)
    rhs = [sum(row[j] * (j + 1) for j in range(3)) for row in m]
    z = solve_integer(m, rhs)
    assert z is not None
    assert [sum(a * b for a, b in zip(row, z)) for row in m] == rhs


def test_solve_integer_detects_no_solution():
    assert solve_integer([[2, 4]], [3]) is None


def test_primitive_integer():
    assert primitive_integer((Fraction(2, 3), Fraction(-4, 3))) == (1, -2)


def test_lattice_canonical_basis_identifies_equal_lattices():
    a = Lattice(2, ((1, 1), (1, -1)))
    b = Lattice(2, ((2, 0), (1, 1)))
    assert a == b
    assert a.contains((2, 0)) and not a.contains((1, 0))
    assert Lattice.standard(2).sublattice_index(a) == 2


def test_lattice_reduce_lands_in_cell():
    lat = Lattice(2, ((1, 1), (1, -1)))
    r = lat.reduce((Fraction(7, 2), Fraction(1, 3)))
    c = lat.coords(r)
    assert all(0 <= x < 1 for x in c)


def test_section_and_projection_of_standard_lattice():
    ip = InnerProduct.standard(2)
    sec = lattice_section(Lattice.standard(2), [(1, 1)])
    assert sec.basis == ((Fraction(1), Fraction(1)),)
    proj = lattice_projection(Lattice.standard(2), [(1, 1)], ip)
    assert proj.contains((Fraction(1, 2), Fraction(1, 2)))
    assert gram_det_sq(sec, ip) * gram_det_sq(proj, ip) == 1


def test_section_rejects_irrational_span_only_when_contained():
    # span (1, 1) in the lattice spanned by (1, 0) only: not contained, so fine
    assert lattice_section(Lattice(2, ((1, 0),)), [(1, 1)]).rank == 0


def test_diagonal_edge_coset_count():
    ip = InnerProduct.standard(2)
    lat = Lattice.standard(2)
    l1 = lattice_section(lat, [(1, -1)])
    l2 = lattice_section(lat, [(1, 1)])
    cd = coset_representatives(lat, l1, l2, ip)
    assert len(cd.representatives) == 2
    assert len(set(cd.phi1_images)) == 2


def test_coset_representatives_require_orthogonal_parts():
    lat = Lattice.standard(2)
    with pytest.raises(NotOrthogonal):
        coset_representatives(lat, Lattice(2, ((1, 0),)), Lattice(2, ((1, 1),)))


def test_quotient_representatives_rejects_infinite_index():
    with pytest.raises(NotFiniteIndex):
        quotient_representatives(Lattice.standard(2), Lattice(2, ((1, 0),)))


@given(st.lists(st.tuples(small, small), min_size=3, max_size=7))
def test_triangulation_volume_is_additive(points):
    pts = sorted(set(points))
    if len(pts) < 3 or rank([(x - pts[0][0], y - pts[0][1]) for x, y in pts[1:]]) < 2:
        return
    tri = placing_triangulation(pts)
    vol = sum(normalized_volume([pts[i] for i in s], Lattice.standard(2)) for s in tri)
    assert vol == normalized_volume(pts, Lattice.standard(2))
    hull = sympy.Polygon(*[sympy.Point(*p) for p in pts]) if len(pts) >= 3 else None
    if isinstance(hull, sympy.Polygon):
        from sympy import convex_hull
        h = convex_hull(*[sympy.Point(*p) for p in pts])
        assert vol == abs(h.area)


def test_inner_product_complement():
    ip = InnerProduct(((2, 1), (1, 2)))
    (w,) = ip.complement([(1, 0)])
    assert ip(w, (1, 0)) == 0
    with pytest.raises(Exception):
        InnerProduct(((1, 2), (2, 1)))


def test_non_rational_subspace_error():
    lat = Lattice.standard(2)
    # span of (1, 2) inside Z^2 is rational, so section has rank 1
    assert lattice_section(lat, [(1, 2)]).rank == 1
    assert issubclass(NonRationalSubspace, ValueError)
