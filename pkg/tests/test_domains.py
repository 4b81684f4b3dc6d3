import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fundgap.domains import (
    GraphDomain,
    Polygon,
    Simplex,
    area,
    diameter,
    equilateral_triangle,
    in_fundamental_region,
    make_triangle_from_moduli,
    mesh_graph_domain,
    mesh_sequence,
    rectangle,
    refine,
    regular_polygon,
    simplex_height,
    triangulate,
)


def test_rectangle_diameter_and_area():
    r = rectangle(2.0, 1.0)
    assert diameter(r) == pytest.approx(np.sqrt(5.0))
    assert area(r) == pytest.approx(2.0)


def test_equilateral_diameter():
    assert diameter(equilateral_triangle()) == pytest.approx(1.0)


def test_clockwise_input_is_reoriented():
    p = Polygon([[0, 0], [0, 1], [1, 1], [1, 0]])
    assert p.area == pytest.approx(1.0)


def test_self_intersecting_polygon_rejected():
    with pytest.raises(ValueError):
        Polygon([[0, 0], [1, 1], [1, 0], [0, 1]])


def test_degenerate_simplex_rejected():
    with pytest.raises(ValueError):
        Simplex([[0, 0], [1, 0], [2, 0]])


def test_moduli_triangle():
    t = make_triangle_from_moduli((0.5, np.sqrt(3) / 2))
    assert diameter(t) == pytest.approx(1.0)
    assert simplex_height(t, 2) == pytest.approx(np.sqrt(3) / 2)
    with pytest.raises(ValueError):
        make_triangle_from_moduli((0.2, 0.5))
    with pytest.raises(ValueError):
        make_triangle_from_moduli((0.5, 0.0))


def test_simplex_height_is_distance_to_facet_hull():
    t = Simplex([[0, 0], [4, 0], [1, 3]])
    # facet opposite vertex 2 is the base
    assert simplex_height(t, 2) == pytest.approx(3.0)


def test_graph_domain_rejects_zero_profile():
    with pytest.raises(ValueError):
        GraphDomain(1.0, np.zeros(5), 0.1)
    with pytest.raises(ValueError):
        GraphDomain(1.0, np.ones(5), 0.0)


def test_graph_domain_area():
    gd = GraphDomain(1.0, lambda x: np.sin(np.pi * x) ** 2, 0.2)
    assert area(gd) == pytest.approx(0.1, rel=1e-4)
    mesh = mesh_graph_domain(gd, 64, 4)
    assert mesh.signed_areas().sum() == pytest.approx(0.1, rel=1e-3)
    assert np.all(mesh.signed_areas() > 0)


@pytest.mark.parametrize("poly", [rectangle(1, 1), equilateral_triangle(), regular_polygon(7),
                                  Polygon([[0, 0], [2, 0], [2, 1], [1, 0.4], [0, 1]])])
def test_triangulation_covers_polygon(poly):
    mesh = triangulate(poly, 0.2)
    assert np.all(mesh.signed_areas() > 0)
    assert mesh.signed_areas().sum() == pytest.approx(poly.area, rel=1e-12)
    assert mesh.h_max <= 0.2 + 1e-12


def test_refine_halves_h_and_keeps_boundary():
    m = triangulate(rectangle(1, 1), 0.5)
    r = refine(m)
    assert r.n_triangles == 4 * m.n_triangles
    assert r.h_max == pytest.approx(m.h_max / 2)
    b = r.vertices[r.boundary]
    on_edge = (np.isclose(b[:, 0], 0) | np.isclose(b[:, 0], 1) | np.isclose(b[:, 1], 0) | np.isclose(b[:, 1], 1))
    assert on_edge.all()
    assert r.boundary.sum() == 2 * m.boundary.sum()


def test_thin_triangle_gets_mapped_mesh():
    ladder = mesh_sequence(make_triangle_from_moduli((0.5, 0.05)), 2)
    for m in ladder:
        assert m.signed_areas().sum() == pytest.approx(0.025, rel=1e-12)
    assert ladder[1].h_max < ladder[0].h_max


@given(st.floats(0.5, 1.0), st.floats(0.01, 1.0))
def test_fundamental_region_membership(x, y):
    inside = in_fundamental_region((x, y))
    assert inside == (x * x + y * y <= 1 + 1e-14 and (x - 1) ** 2 + y * y <= 1 + 1e-14)
    if inside:
        assert diameter(make_triangle_from_moduli((x, y))) == pytest.approx(1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0), st.floats(0.2, 5.0))
def test_diameter_scales_linearly(a, b, t):
    r = rectangle(a, b)
    assert diameter(r.scaled(t)) == pytest.approx(t * diameter(r))
    assert area(r.scaled(t)) == pytest.approx(t * t * area(r))


@pytest.mark.parametrize("a, b", [(-1.0, 1.0), (1.0, 0.0)])
def test_rectangle_needs_positive_sides(a, b):
    with pytest.raises(ValueError):
        rectangle(a, b)
