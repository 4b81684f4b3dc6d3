import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fundgap.assembly import build_pencil
from fundgap.domains import (
    Polygon,
    diameter,
    equilateral_triangle,
    make_triangle_from_moduli,
    mesh_sequence,
    rectangle,
)
from fundgap.eigensolve import smallest_eigenpairs
from fundgap.gaplab.collapse import collapse_corollary1, collapse_theorem1
from fundgap.gaplab.gap import fundamental_gap, rectangle_gap_exact, tolerance
from fundgap.gaplab.identities import (
    orthogonal_family,
    prop1_residual_check,
    prop2_identity_1d,
    prop2_identity_check,
    prop4_sum_bound_check,
)
from fundgap.gaplab.modulus import (
    ac_concavity_check,
    check_modulus_concavity,
    check_modulus_continuity,
    check_modulus_contraction,
    check_modulus_convexity,
    check_modulus_expansion,
    comparison_modulus,
    log_concavity_check,
)
from fundgap.gaplab.suites import ac_gap_suite, lavine_suite, random_convex_polygon
from fundgap.gaplab.triangles import EQUILATERAL_XI, moduli_grid, thin_triangle_scaling
from fundgap.oned import interval_pencil

PI2 = np.pi**2


# --- gap function -----------------------------------------------------------

def test_rectangle_exact_values():
    lam, gap, xi = rectangle_gap_exact(1.0, 1.0)
    assert lam[0] == pytest.approx(2 * PI2)
    assert lam[1] == pytest.approx(5 * PI2)
    assert gap == pytest.approx(3 * PI2)
    _, gap, xi = rectangle_gap_exact(2.0, 1.0)
    assert gap == pytest.approx(3 * PI2 / 4)
    assert xi == pytest.approx(15 * PI2 / 4)
    assert rectangle_gap_exact(1e4, 1.0)[2] == pytest.approx(3 * PI2, rel=1e-7)
    with pytest.raises(ValueError):
        rectangle_gap_exact(1.0, 2.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0), st.sampled_from([0.5, 2.0]))
def test_exact_xi_is_scale_invariant(a, b, t):
    a, b = max(a, b), min(a, b)
    assert rectangle_gap_exact(t * a, t * b)[2] == pytest.approx(rectangle_gap_exact(a, b)[2], rel=1e-6)


@pytest.mark.parametrize("domain, exact", [
    (rectangle(1.0, 1.0), 6 * PI2),
    (rectangle(2.0, 1.0), 15 * PI2 / 4),
    (equilateral_triangle(), 64 * PI2 / 9),
])
def test_fem_gap_function(domain, exact):
    g = fundamental_gap(domain, 4)
    assert g.xi == pytest.approx(exact, rel=1e-3)
    assert abs(g.xi - exact) <= max(g.xi_tol, 1e-3 * exact)
    assert g.lambda2 >= g.lambda1
    l1 = [r[1] for r in g.per_level]
    assert all(b < a for a, b in zip(l1, l1[1:]))


def test_equilateral_lambda2_flagged_as_cluster():
    assert fundamental_gap(equilateral_triangle(), 3).cluster_flag


def test_fem_xi_scale_invariant():
    base = fundamental_gap(rectangle(1.0, 1.0), 3)
    for t in (0.5, 2.0):
        g = fundamental_gap(rectangle(1.0, 1.0).scaled(t), 3)
        assert g.xi == pytest.approx(base.xi, abs=base.xi_tol + g.xi_tol)
        assert g.gap == pytest.approx(base.gap / t**2, rel=1e-8)


def test_domain_monotonicity():
    side = 1.0
    tri = Polygon([[0.0, 0.0], [side, 0.0], [0.5, np.sqrt(3) / 2]])
    sq = fundamental_gap(rectangle(1.0, 1.0), 3).lambda1
    assert sq < fundamental_gap(tri, 3).lambda1


def test_tolerance_floor():
    assert tolerance(1.0, 1.0) == 1e-6
    assert tolerance(1.0, 1.1) == pytest.approx(0.2)


# --- collapse ---------------------------------------------------------------

def test_collapse_flat_profile_is_exact():
    tab = collapse_theorem1(0.0, k=2, eps_list=(0.4, 0.2, 0.1), nx=32, ny=2)
    np.testing.assert_allclose(tab.mu_limit, [0, PI2, 4 * PI2], atol=1e-7)
    # separable: mu_1 = pi^2 at every eps, up to the discretization estimate
    assert np.all(np.abs(tab.mu_eps[:, 1] - PI2) <= tab.tol[:, 1])
    assert np.all(tab.errors[:, 1] < 2e-5 * PI2)


def test_collapse_ground_state_profile():
    tab = collapse_corollary1((0.4, 0.2, 0.1, 0.05), nx=48)
    assert np.all(np.abs(tab.mu_eps[:, 0]) < 1e-8)
    rel = tab.errors[:, 1] / (3 * PI2)
    assert rel[2] < 0.10
    assert tab.errors_decreasing(1, noise=0.0)


def test_collapse_nonconstant_phi_errors_decrease():
    tab = collapse_theorem1(lambda x: 4 * (x - 0.5) ** 2, k=2, eps_list=(0.2, 0.1, 0.05), nx=48)
    assert tab.errors_decreasing(1)
    assert tab.errors_decreasing(2)


def test_collapse_guards():
    with pytest.raises(ValueError):
        collapse_theorem1(0.0, eps_list=(0.2, 0.1))
    with pytest.raises(ValueError):
        collapse_theorem1(0.0, eps_list=(0.1, 0.2, 0.05))
    with pytest.raises(ValueError):
        collapse_theorem1(0.0, eps_list=(0.1, 0.01, 1e-4))


# --- identities -------------------------------------------------------------

def test_prop1_residual_decreases():
    rows = prop1_residual_check(rectangle(1.0, 1.0), k=2, levels=4)
    res = [r for _, r in rows]
    assert all(b < a for a, b in zip(res, res[1:]))
    assert res[-1] <= 0.05
    k1 = prop1_residual_check(rectangle(1.0, 1.0), k=1, levels=3)
    assert max(r for _, r in k1) < 1e-8


def test_prop1_on_strip():
    rows = prop1_residual_check(rectangle(1.0, 0.25), k=2, levels=3, h0=0.0625)
    assert rows[-1][1] < rows[0][1]


def test_prop2_interval():
    rows = prop2_identity_1d(k=3)
    assert rows[1].mu == pytest.approx(3 * PI2, rel=1e-8)
    assert rows[2].mu == pytest.approx(8 * PI2, rel=1e-8)
    assert max(r.relative for r in rows[1:]) < 1e-4


def test_prop2_interval_observed_order():
    diffs = [abs(prop2_identity_1d(k=2, n=n)[1].difference) for n in (32, 64)]
    # extrapolated values: differences shrink faster than first order
    assert diffs[1] < diffs[0] / 2


def test_prop2_square():
    rows, levels = prop2_identity_check(rectangle(1.0, 1.0), k=3, levels=3)
    assert all(r.relative < 0.02 for r in rows)
    assert len(levels) == 3


def test_prop4_examples():
    p, x = interval_pencil(256, bc="neumann")
    mu = smallest_eigenpairs(p, 2).eigenvalues
    eq = prop4_sum_bound_check(p, np.cos(np.pi * x), eigenvalues=mu)
    assert eq.holds and eq.rhs == pytest.approx(PI2, rel=1e-4)
    lin = prop4_sum_bound_check(p, x - 0.5, eigenvalues=mu)
    assert lin.holds and lin.rhs == pytest.approx(12.0, rel=1e-3)
    assert lin.orthogonal_to_ground
    with pytest.raises(ValueError):
        prop4_sum_bound_check(p, np.column_stack([x - 0.5, x - 0.5]))
    with pytest.raises(ValueError):
        prop4_sum_bound_check(p, np.zeros(p.dim))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_prop4_random_families(seed, k):
    p, _ = interval_pencil(64, bc="neumann", weight=lambda t: 1 + t)
    rng = np.random.default_rng(seed)
    assert prop4_sum_bound_check(p, orthogonal_family(p, k, rng)).holds


# --- moduli of continuity/convexity ------------------------------------------

def pairs_1d(n=200, seed=0):
    rng = np.random.default_rng(seed)
    x, y = rng.uniform(0.05, 0.95, (2, n))
    keep = np.abs(x - y) > 1e-6
    return x[keep], y[keep]


def test_continuity_examples():
    pairs = pairs_1d()
    assert check_modulus_continuity(lambda t: t[:, 0], lambda s: s, pairs).holds
    bad = check_modulus_continuity(lambda t: 2 * t[:, 0], lambda s: s, pairs)
    assert not bad.holds and bad.margin < 0
    assert check_modulus_continuity(lambda t: np.ones(len(t)), lambda s: 0 * s, pairs).holds


def test_expansion_examples():
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=(2, 100, 2))
    rep = check_modulus_expansion(lambda p: p, lambda s: s, (x, y))
    assert rep.holds and rep.margin == pytest.approx(0.0, abs=1e-12)
    assert check_modulus_convexity(lambda p: 0 * p, lambda s: 0 * s, (x, y)).holds
    with pytest.raises(ValueError):
        check_modulus_expansion(lambda p: p, lambda s: s, (x, x))


def test_contraction_is_negated_expansion():
    rng = np.random.default_rng(2)
    x, y = rng.normal(size=(2, 50, 2))
    assert check_modulus_contraction(lambda p: -p, lambda s: -s, (x, y)).holds
    assert not check_modulus_contraction(lambda p: p, lambda s: 0 * s, (x, y)).holds


def test_log_sine_concavity_equality_case():
    # (log sin(pi t))' on (0, 1) against the comparison modulus for D = 1
    pairs = pairs_1d()
    rep = check_modulus_concavity(lambda t: np.pi / np.tan(np.pi * t), comparison_modulus(1.0), pairs, tol=1e-9)
    assert rep.holds


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 1000))
def test_checkers_symmetric_under_pair_swap(seed):
    rng = np.random.default_rng(seed)
    x, y = rng.uniform(-1, 1, (2, 40, 2))
    f = lambda p: np.sin(p[:, 0]) + p[:, 1] ** 2  # noqa: E731
    grad = lambda p: np.column_stack([np.cos(p[:, 0]), 2 * p[:, 1]])  # noqa: E731
    omega = lambda s: -0.3 * s  # noqa: E731
    for check, fn, mod in ((check_modulus_continuity, f, lambda s: s),
                           (check_modulus_expansion, grad, omega),
                           (check_modulus_contraction, grad, omega)):
        a, b = check(fn, mod, (x, y)), check(fn, mod, (y, x))
        assert a.margin == pytest.approx(b.margin, abs=1e-12)
        assert a.holds == b.holds


@pytest.mark.parametrize("domain", [rectangle(1.0, 1.0), equilateral_triangle(), rectangle(1.0, 0.25)])
def test_log_concavity_holds(domain):
    rep = log_concavity_check(domain, levels=3, n_random=500)
    assert rep.holds


def test_log_concavity_rejects_nonconvex():
    L = Polygon([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]])
    with pytest.raises(ValueError):
        log_concavity_check(L, levels=2)


def test_ac_concavity_square():
    assert ac_concavity_check(rectangle(1.0, 1.0), levels=3, n_random=500).holds


# --- suites -----------------------------------------------------------------

def test_lavine_suite_small():
    rep = lavine_suite(10)
    assert rep.violations == 0
    assert max(rep.equality_error) < 1e-6
    assert rep.rows[0].constant


def test_random_convex_polygon_is_convex():
    rng = np.random.default_rng(5)
    for _ in range(20):
        p = random_convex_polygon(rng)
        assert p.is_convex() and 5 <= len(p.vertices) <= 8


def test_ac_suite_thin_rectangle():
    rows = ac_gap_suite([("thin", rectangle(4.0, 0.25))], potentials=lambda poly: [], levels=5)
    (row,) = rows
    assert row.R ** 2 == pytest.approx(16.0625)
    assert abs(row.gap - 3 * PI2 / 16) <= row.tol
    assert row.holds and row.margin > 0


def test_ac_suite_rejects_nonconvex():
    L = Polygon([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]])
    with pytest.raises(ValueError):
        ac_gap_suite([("L", L)])


# --- triangles --------------------------------------------------------------

def test_moduli_grid():
    pts = moduli_grid(12)
    assert any(np.allclose(p, (0.5, np.sqrt(3) / 2)) for p in pts)
    assert all(p[1] > 0 and p[0] >= 0.5 for p in pts)
    assert all(diameter(make_triangle_from_moduli(p)) == pytest.approx(1.0) for p in pts)


def test_thin_triangles_blow_up():
    fit = thin_triangle_scaling((0.2, 0.1, 0.05, 0.025), levels=3)
    assert fit.increasing
    assert fit.slope < -1.0
    assert fit.points[0][1] > 2 * EQUILATERAL_XI


def test_thin_scaling_input_guard():
    with pytest.raises(ValueError):
        thin_triangle_scaling((0.1, 0.2, 0.05, 0.025))
    with pytest.raises(ValueError):
        thin_triangle_scaling((0.2, 0.1, 0.05))


def test_equilateral_is_lower_than_neighbours():
    xi0 = fundamental_gap(make_triangle_from_moduli((0.5, np.sqrt(3) / 2)), 3, d=1.0).xi
    for p in ((0.55, 0.8), (0.6, 0.7), (0.5, 0.75)):
        assert fundamental_gap(make_triangle_from_moduli(p), 3, d=1.0).xi > xi0


def test_pencil_square_neumann_mesh_reuse():
    m = mesh_sequence(rectangle(1.0, 1.0), 2)[-1]
    p = build_pencil(m, "neumann")
    assert smallest_eigenpairs(p, 2).eigenvalues[1] == pytest.approx(PI2, rel=0.05)
