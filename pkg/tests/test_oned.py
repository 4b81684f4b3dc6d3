import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fundgap.eigensolve import dense_eigenpairs
from fundgap.oned import (
    Profile1D,
    bakry_emery_eigs_1d,
    exact_interval_eigs,
    ground_state_1d,
    interval_pencil,
    load_profile_csv,
    random_convex_potential,
    schrodinger_eigs_1d,
)

PI2 = np.pi**2


@pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
@pytest.mark.parametrize("R", [1.0, 2.5])
def test_free_interval_matches_exact(bc, R):
    s = schrodinger_eigs_1d(0.0, bc, 512, 4, R)
    np.testing.assert_allclose(s.eigenvalues, exact_interval_eigs(R, bc, 4), rtol=1e-8, atol=1e-8)


def test_interval_gap_is_three_pi_squared():
    lam = schrodinger_eigs_1d(0.0, "dirichlet", 512, 2).eigenvalues
    assert abs(lam[1] - lam[0] - 3 * PI2) < 1e-6


def test_constant_shift_is_exact():
    a = schrodinger_eigs_1d(0.0, "dirichlet", 256, 4, extrapolate=False).eigenvalues
    b = schrodinger_eigs_1d(5.0, "dirichlet", 256, 4, extrapolate=False).eigenvalues
    np.testing.assert_allclose(b - a, 5.0, rtol=0, atol=1e-10)


def test_ramp_potential_gap_exceeds_free_gap():
    V = lambda x: 50 * np.maximum(0.0, x - 0.5)  # noqa: E731
    lam = schrodinger_eigs_1d(V, "dirichlet", 512, 2).eigenvalues
    assert lam[1] - lam[0] > 3 * PI2 + 1e-3


def test_drift_with_squared_ground_state():
    mu = bakry_emery_eigs_1d(lambda x: np.sin(np.pi * x) ** 2, "neumann", 512, 3).eigenvalues
    np.testing.assert_allclose(mu, [0.0, 3 * PI2, 8 * PI2], rtol=1e-7, atol=1e-8)


def test_drift_uniform_weight_is_neumann_laplacian():
    mu = bakry_emery_eigs_1d(1.0, "neumann", 256, 3).eigenvalues
    np.testing.assert_allclose(mu, [0, PI2, 4 * PI2], rtol=1e-8, atol=1e-9)


def test_drift_rejects_disconnected_weight():
    with pytest.raises(ValueError):
        bakry_emery_eigs_1d(lambda x: np.abs(x - 0.5) > 0.1, "neumann", 64, 2)


def test_ground_state_normalized():
    g = ground_state_1d(0.0, "dirichlet", 200)
    x = np.linspace(0, 1, 201)
    assert g.max() == pytest.approx(1.0)
    np.testing.assert_allclose(g, np.sin(np.pi * x), atol=1e-4)


def test_interval_pencil_agrees_with_tridiagonal_solver():
    w = lambda x: 1 + x**2  # noqa: E731
    p, _ = interval_pencil(128, bc="neumann", weight=w)
    dense = dense_eigenpairs(p, 4).eigenvalues
    direct = bakry_emery_eigs_1d(w, "neumann", 128, 4, extrapolate=False).eigenvalues
    np.testing.assert_allclose(dense, direct, rtol=1e-10, atol=1e-10)


def test_profile_csv_roundtrip(tmp_path):
    x = np.linspace(0, 2, 11)
    path = tmp_path / "w.csv"
    path.write_text("x,w\n" + "".join("%r,%r\n" % (float(a), float(a * a)) for a in x))
    prof = load_profile_csv(path)
    assert prof.R == pytest.approx(2.0)
    assert prof(1.0) == pytest.approx(1.0)
    bad = tmp_path / "bad.csv"
    bad.write_text("0,1\n0.3,1\n1,1\n")
    with pytest.raises(ValueError):
        load_profile_csv(bad)


def test_profile_validation():
    with pytest.raises(ValueError):
        Profile1D(1.0, [1.0, 2.0])
    with pytest.raises(ValueError):
        Profile1D(0.0, [1.0, 2.0, 3.0])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_potential_is_convex_and_bounded(seed):
    V, _ = random_convex_potential(np.random.default_rng(seed))
    x = np.linspace(0, 1, 513)
    v = V(x)
    assert np.all(np.abs(v) <= 50.0 + 1e-9)
    assert np.all(v[:-2] + v[2:] - 2 * v[1:-1] >= -1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.5, 3.0))
def test_convex_potential_gap_bounds(seed, R):
    V, _ = random_convex_potential(np.random.default_rng(seed), R)
    d = schrodinger_eigs_1d(V, "dirichlet", 256, 2, R).eigenvalues
    n = schrodinger_eigs_1d(V, "neumann", 256, 2, R).eigenvalues
    assert d[1] - d[0] >= 3 * PI2 / R**2 - 1e-6
    assert n[1] - n[0] >= PI2 / R**2 - 1e-6
