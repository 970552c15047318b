from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from brionkit.corpus import PENTAGON
from brionkit.exact_linalg import InnerProduct
from brionkit.polytope_core import (
    Cone,
    Empty,
    Polytope,
    Unbounded,
    cones_at_face,
    dilate_translate,
    face_polytope,
    projected_polytope,
    transverse_cone_in,
)


@pytest.fixture
def pentagon():
    return Polytope.from_vertices(PENTAGON)


def vid(p, point):
    return p.vertices.index(tuple(Fraction(x) for x in point))


def test_pentagon_face_count(pentagon):
    fl = pentagon.faces
    assert len(fl) == 11
    assert sorted(f.dim for f in fl) == [0] * 5 + [1] * 5 + [2]
    # proper faces only: 1 - (-1)^2
    assert fl.euler_characteristic() == 0


def test_edge_transverse_cone_is_unit_ray(pentagon):
    ip = InnerProduct.standard(2)
    fl = pentagon.faces
    e = fl.by_vertices([vid(pentagon, (0, 0)), vid(pentagon, (0, 2))])
    t = transverse_cone_in(pentagon, e, fl.top, ip)
    assert t.rays == ((Fraction(1), Fraction(0)),)
    assert t.apex == (0, 0)


def test_cones_at_vertex(pentagon):
    fl = pentagon.faces
    v = fl.by_vertices([vid(pentagon, (0, 0))])
    tangent, transverse, normal = cones_at_face(pentagon, v)
    assert set(tangent.rays) == {(0, 1), (2, -1)}
    assert transverse.rays == tangent.rays
    assert len(normal.rays) == 2


def test_h_and_v_descriptions_agree():
    square = Polytope.from_inequalities([((1, 0), 1), ((-1, 0), 0), ((0, 1), 1), ((0, -1), 0)])
    assert sorted(square.vertices) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    again = Polytope.from_vertices(square.vertices)
    assert sorted(again.facets) == sorted(square.facets)


def test_unbounded_and_empty_are_rejected():
    with pytest.raises(Unbounded):
        Polytope.from_inequalities([((1, 0), 1), ((0, 1), 1)])
    with pytest.raises(Empty):
        Polytope.from_inequalities([((1,), 0), ((-1,), -1)])


def test_dilation_scales_vertices_and_keeps_face_ids(pentagon):
    big = dilate_translate(pentagon, 3)
    assert big.vertices == tuple(tuple(3 * x for x in v) for v in pentagon.vertices)
    assert [f.vertex_ids for f in big.faces] == [f.vertex_ids for f in pentagon.faces]


def test_lower_dimensional_polytope_has_equations():
    seg = Polytope.from_vertices([(0, 0), (2, 1)])
    assert seg.dim == 1
    assert len(seg.equations) == 1
    assert seg.contains((Fraction(1), Fraction(1, 2)))
    assert not seg.contains((1, 1))


def test_face_and_projected_polytopes(pentagon):
    ip = InnerProduct.standard(2)
    e = pentagon.faces.by_vertices([vid(pentagon, (0, 0)), vid(pentagon, (0, 2))])
    assert sorted(face_polytope(pentagon, e).vertices) == [(0, 0), (0, 2)]
    assert sorted(projected_polytope(pentagon, e, ip).vertices) == [(0, 0), (0, 2)]


def test_cone_canonical_form():
    k = Cone((0, 0), ((2, 4), (Fraction(1, 3), 0)))
    assert k.canonical().rays == ((1, 0), (1, 2))
    assert k.pointed and k.dim == 2


points2d = st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=3, max_size=9)


@given(points2d)
def test_random_polygon_face_lattice(points):
    pts = sorted(set(points))
    if len(pts) < 3:
        return
    try:
        p = Polytope.from_vertices(pts)
    except Exception:
        return
    fl = p.faces
    assert fl.euler_characteristic() == 1 - (-1) ** p.dim
    for f in fl:
        for g in fl.subfaces(f):
            assert g.vertex_ids < f.vertex_ids
    if p.dim == 2:
        assert len(fl.vertices) == len(p.facets)
        for v in p.vertices:
            assert p.contains(v)
