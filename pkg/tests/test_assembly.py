import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fundgap.assembly import (
    Weight,
    assemble_mass,
    assemble_stiffness,
    build_pencil,
    export_triplets,
)
from fundgap.domains import TriMesh, equilateral_triangle, rectangle, triangulate
from fundgap.eigensolve import dense_eigenpairs

weights = st.lists(st.floats(0.05, 5.0), min_size=1, max_size=1)


@pytest.fixture(scope="module")
def mesh():
    return triangulate(rectangle(1.0, 1.0), 0.25)


def single_triangle():
    return TriMesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0, 1, 2]]),
                   np.array([True, True, True]))


def test_reference_element_matrices():
    m = single_triangle()
    K = assemble_stiffness(m).toarray()
    M = assemble_mass(m).toarray()
    np.testing.assert_allclose(K, 0.5 * np.array([[2, -1, -1], [-1, 1, 0], [-1, 0, 1]]), atol=1e-15)
    np.testing.assert_allclose(M, np.array([[2, 1, 1], [1, 2, 1], [1, 1, 2]]) / 24, atol=1e-15)


def test_matrices_symmetric_and_mass_integrates_area(mesh):
    K = assemble_stiffness(mesh)
    M = assemble_mass(mesh)
    assert abs(K - K.T).max() < 1e-14
    assert abs(M - M.T).max() < 1e-14
    one = np.ones(mesh.n_vertices)
    assert one @ M @ one == pytest.approx(1.0)


def test_constants_in_stiffness_kernel(mesh):
    w = Weight(np.random.default_rng(0).uniform(0.1, 2.0, mesh.n_vertices))
    K = assemble_stiffness(mesh, w)
    assert np.abs(K @ np.ones(mesh.n_vertices)).max() < 1e-12


def test_linear_functions_have_exact_energy(mesh):
    x, y = mesh.vertices.T
    u = 2 * x - 3 * y
    assert u @ assemble_stiffness(mesh) @ u == pytest.approx(13.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.05, 5.0))
def test_weight_linearity(a, b):
    m = triangulate(equilateral_triangle(), 0.3)
    rng = np.random.default_rng(1)
    w1 = rng.uniform(0.1, 1.0, m.n_vertices)
    w2 = rng.uniform(0.1, 1.0, m.n_vertices)
    for assemble in (assemble_stiffness, assemble_mass):
        lhs = assemble(m, Weight(a * w1 + b * w2))
        rhs = a * assemble(m, Weight(w1)) + b * assemble(m, Weight(w2))
        assert abs(lhs - rhs).max() <= 1e-12 * (a + b)


def test_neumann_kernel_is_constants(mesh):
    p = build_pencil(mesh, "neumann")
    s = dense_eigenpairs(p, 2)
    assert abs(s.eigenvalues[0]) < 1e-10
    v = s.eigenvectors[:, 0]
    assert np.ptp(v / v[0]) < 1e-8
    assert s.eigenvalues[1] > 1.0


def test_constant_potential_shifts_spectrum(mesh):
    base = dense_eigenpairs(build_pencil(mesh, "dirichlet"), 4).eigenvalues
    shifted = dense_eigenpairs(build_pencil(mesh, "dirichlet", V=5.0), 4).eigenvalues
    np.testing.assert_allclose(shifted, base + 5.0, rtol=1e-12)


def test_dirichlet_eliminates_boundary(mesh):
    p = build_pencil(mesh, "dirichlet")
    assert p.dim == int((~mesh.boundary).sum())
    nodal = p.to_nodal(np.ones(p.dim))
    assert np.all(nodal[mesh.boundary] == 0)


def test_degenerate_weight_drops_zero_mass_vertices():
    m = triangulate(rectangle(1.0, 1.0), 0.125)
    x = m.vertices[:, 0]
    w = Weight(np.maximum(x - 0.5, 0.0))
    p = build_pencil(m, "neumann", w)
    M = assemble_mass(m, w)
    # a vertex survives iff some incident quadrature point sees positive weight
    assert p.dim == int((M.diagonal() > 0).sum())
    assert p.dim < m.n_vertices
    assert np.all(x[p.dof_map >= 0] > 0.5 - 0.125 - 1e-12)
    assert np.all(p.M.diagonal() > 0)


def test_weight_validation(mesh):
    with pytest.raises(ValueError):
        Weight(np.zeros(3))
    with pytest.raises(ValueError):
        Weight(np.array([1.0, -1.0]))
    with pytest.raises(ValueError):
        assemble_mass(mesh, Weight(np.ones(3)))
    with pytest.raises(ValueError):
        build_pencil(mesh, "robin")


def test_triplet_export_sorted():
    text = export_triplets(assemble_mass(single_triangle()))
    rows = [tuple(map(float, line.split())) for line in text.strip().splitlines()]
    assert len(rows) == 9
    assert rows == sorted(rows, key=lambda r: (r[0], r[1]))
    assert rows[0][2] == pytest.approx(1 / 12)
