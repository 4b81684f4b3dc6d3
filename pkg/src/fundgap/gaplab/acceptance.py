"""The twelve acceptance criteria, each a function returning a :class:`Criterion`.

``quick=True`` lowers refinement levels and trial counts for CI; the
pass thresholds are the same in both modes.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..assembly import build_pencil
from ..domains import equilateral_triangle, mesh_sequence, rectangle, triangulate
from ..eigensolve import DEFAULT_SEED, dense_eigenpairs, smallest_eigenpairs
from ..oned import interval_pencil, schrodinger_eigs_1d
from .collapse import collapse_corollary1
from .gap import fundamental_gap, rectangle_gap_exact
from .identities import orthogonal_family, prop2_identity_1d, prop2_identity_check, prop4_sum_bound_check
from .modulus import log_concavity_check
from .suites import ac_gap_suite, lavine_suite, random_convex_polygon
from .triangles import EQUILATERAL_XI, thin_triangle_scaling, triangle_moduli_scan

__all__ = ["Criterion", "CRITERIA", "run_all", "oracle_corpus", "oracle_discrepancy"]

PI2 = np.pi**2


@dataclass
class Criterion:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return "[%s] %2d %-28s %s (%.1fs)" % ("PASS" if self.passed else "FAIL", self.number, self.name,
                                             self.detail, self.seconds)

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed, "detail": self.detail,
                "seconds": round(self.seconds, 3)}


def _timed(number, name):
    def wrap(fn):
        def run(quick=False, seed=DEFAULT_SEED):
            t0 = time.perf_counter()
            ok, detail = fn(quick, seed)
            return Criterion(number, name, bool(ok), detail, time.perf_counter() - t0)

        run.number, run.title = number, name
        run.__doc__ = fn.__doc__
        return run

    return wrap


@_timed(1, "interval gap")
def interval_gap(quick, seed):
    """Dirichlet gap on [0, 1] is 3 pi^2 within 1e-6 (n = 512, 1024) in under a second."""
    t0 = time.perf_counter()
    lam = schrodinger_eigs_1d(0.0, "dirichlet", 512, 2).eigenvalues
    dt = time.perf_counter() - t0
    err = abs(lam[1] - lam[0] - 3 * PI2)
    return err <= 1e-6 and dt < 1.0, "gap error %.2e" % err


@_timed(2, "rectangle closed form")
def rectangle_closed_form(quick, seed):
    """FEM xi of the unit square within 0.5% of 6 pi^2; exact path matches 3 pi^2/a^2 on 10 random rectangles."""
    g = fundamental_gap(rectangle(1.0, 1.0), 3 if quick else 5, seed=seed)
    rel = abs(g.xi / (6 * PI2) - 1.0)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(10):
        a, b = sorted(rng.uniform(0.1, 5.0, 2), reverse=True)
        lam, gap, _ = rectangle_gap_exact(a, b)
        worst = max(worst, abs(lam[1] - lam[0] - 3 * PI2 / a**2) / (3 * PI2 / a**2), abs(gap - 3 * PI2 / a**2))
    return rel <= 5e-3 and worst <= 1e-12, "xi rel err %.2e, exact-path err %.1e" % (rel, worst)


@_timed(3, "equilateral gap")
def equilateral_gap(quick, seed):
    """FEM xi of the equilateral triangle within 0.5% of 64 pi^2 / 9 in under 60 s."""
    t0 = time.perf_counter()
    g = fundamental_gap(equilateral_triangle(), 3 if quick else 5, seed=seed)
    dt = time.perf_counter() - t0
    rel = abs(g.xi / EQUILATERAL_XI - 1.0)
    return rel <= 5e-3 and dt < 60.0, "xi %.4f (rel err %.2e)" % (g.xi, rel)


@_timed(4, "gap/drift identity")
def gap_drift_identity(quick, seed):
    """lambda_2 - lambda_1 against mu_1: 1e-4 relative on [0, 1], 2% on the unit square."""
    r1 = prop2_identity_1d(k=2)[1].relative
    rows, _ = prop2_identity_check(rectangle(1.0, 1.0), k=2, levels=3 if quick else 4)
    r2 = rows[1].relative
    return r1 <= 1e-4 and r2 <= 2e-2, "interval %.1e, square %.1e" % (r1, r2)


@_timed(5, "collapse to 3 pi^2")
def collapse(quick, seed):
    """Thin domains shaped by sin^2(pi x): mu_1 -> 3 pi^2, error decreasing in eps, last error <= 10%."""
    t0 = time.perf_counter()
    tab = collapse_corollary1((0.4, 0.2, 0.1, 0.05), nx=48 if quick else 96, seed=seed)
    dt = time.perf_counter() - t0
    rel = tab.errors[:, 1] / (3 * PI2)
    dec = bool(np.all(np.diff(tab.errors[:, 1]) < 0))
    return dec and rel[-1] <= 0.10 and dt < 300.0, "rel errors " + ", ".join("%.3f" % r for r in rel)


@_timed(6, "1D gap bounds")
def lavine(quick, seed):
    """100 random convex potentials: no violations, equality at V = 0 within 1e-6."""
    rep = lavine_suite(100, 1.0, seed)
    return rep.passed, "%d trials, %d violations, %d strict failures, equality err %.1e" % (
        len(rep.rows), rep.violations, rep.strict_failures, max(rep.equality_error))


@_timed(7, "convex domain gap bound")
def ac_corollary(quick, seed):
    """Square, equilateral and 3 random convex polygons with V = 0 and two convex potentials."""
    rng = np.random.default_rng(seed)
    domains = [("square", rectangle(1.0, 1.0)), ("equilateral", equilateral_triangle())]
    domains += [("polygon%d" % i, random_convex_polygon(rng)) for i in range(3)]
    rows = ac_gap_suite(domains, levels=3 if quick else 4, seed=seed)
    bad = [r for r in rows if not r.holds]
    worst = min(rows, key=lambda r: r.margin / r.bound)
    return not bad, "%d pairs, %d violations, min margin %.3g (%s/%s)" % (
        len(rows), len(bad), worst.margin, worst.domain, worst.potential)


@_timed(8, "log-concavity")
def log_concavity(quick, seed):
    """Second differences of log phi_1 on square and equilateral within the C h slack."""
    levels = 3 if quick else 4
    reps = [log_concavity_check(rectangle(1.0, 1.0), levels, seed=seed),
            log_concavity_check(equilateral_triangle(), levels, seed=seed)]
    ok = all(r.holds for r in reps)
    return ok, "margins %s (tol %s)" % (", ".join("%.2e" % r.margin for r in reps),
                                          ", ".join("%.3f" % r.tolerance for r in reps))


@_timed(9, "thin-triangle blow-up")
def thin_triangles(quick, seed):
    """xi strictly increasing as h decreases over {0.2, 0.1, 0.05, 0.025}, fitted slope <= -1.2."""
    fit = thin_triangle_scaling((0.2, 0.1, 0.05, 0.025), levels=3 if quick else 4, seed=seed)
    return fit.increasing and fit.slope <= -1.2, "xi %s, slope %.3f" % (
        ", ".join("%.1f" % p[1] for p in fit.points), fit.slope)


@_timed(10, "moduli scan")
def moduli_scan(quick, seed):
    """grid_n = 12: argmin at the grid point nearest (1/2, sqrt(3)/2), min xi in [69.66, 70.66]."""
    scan = triangle_moduli_scan(12, 3 if quick else 4, seed)
    lo, hi = 69.66, 70.66
    ok = scan.argmin == scan.nearest_to_equilateral() and lo <= scan.min_xi <= hi
    thin = min(r[2] for r in scan.thin_rows())
    return ok, "argmin (%.4f, %.4f), min xi %.4f, thin-row min %.1f" % (*scan.argmin, scan.min_xi, thin)


def _square_neumann(levels):
    mesh = mesh_sequence(rectangle(1.0, 1.0), levels)[-1]
    return build_pencil(mesh, "neumann"), mesh


@_timed(11, "eigenvalue-sum bound")
def sum_bound(quick, seed):
    """20 orthogonal families per pencil satisfy the bound; exact eigenvectors give equality."""
    rng = np.random.default_rng(seed)
    ip, x = interval_pencil(128, bc="neumann")
    sp_, mesh = _square_neumann(3)
    fails, eq_err, n = 0, 0.0, 0
    for pencil in (ip, sp_):
        spec = smallest_eigenpairs(pencil, 5, seed=seed)
        mu = spec.eigenvalues
        for _ in range(20):
            k = int(rng.integers(1, 5))
            res = prop4_sum_bound_check(pencil, orthogonal_family(pencil, k, rng), eigenvalues=mu)
            fails += not res.holds
            n += 1
        for k in (1, 2, 3, 4):
            res = prop4_sum_bound_check(pencil, spec.eigenvectors[:, 1:k + 1], eigenvalues=mu)
            fails += not res.holds
            eq_err = max(eq_err, abs(res.rhs - res.lhs) / res.rhs)
    # continuum eigenfunction cos(pi x): its quotient is pi^2 up to O(h^2)
    c = prop4_sum_bound_check(ip, np.cos(np.pi * x)[:, None], eigenvalues=smallest_eigenpairs(ip, 2).eigenvalues)
    cos_err = abs(c.rhs - PI2) / PI2
    ok = fails == 0 and eq_err <= 1e-9 and c.holds and cos_err <= 1e-3
    return ok, "%d families, %d failures, equality err %.1e, cos quotient err %.1e" % (n, fails, eq_err, cos_err)


def oracle_corpus(seed: int = DEFAULT_SEED) -> list:
    """Small pencils (dimension <= 200) used for the solver equivalence check."""
    from ..assembly import Weight

    out = []
    for n in (32, 100, 199):
        out.append(("interval-dirichlet-%d" % n, interval_pencil(n, bc="dirichlet")[0]))
        out.append(("interval-neumann-%d" % n, interval_pencil(n - 1, bc="neumann")[0]))
    out.append(("interval-drift", interval_pencil(150, bc="neumann", weight=lambda t: np.sin(np.pi * t) ** 2)[0]))
    out.append(("interval-potential", interval_pencil(120, V=lambda t: 50 * np.abs(t - 0.3))[0]))
    for name, poly in (("square", rectangle(1.0, 1.0)), ("equilateral", equilateral_triangle()),
                       ("rectangle", rectangle(2.0, 1.0))):
        for lv in (1, 2):
            mesh = mesh_sequence(poly, lv)[-1]
            for bc in ("dirichlet", "neumann"):
                p = build_pencil(mesh, bc)
                if p.dim <= 200:
                    out.append(("%s-%s-%d" % (name, bc, lv), p))
    rng = np.random.default_rng(seed)
    poly = random_convex_polygon(rng)
    mesh = triangulate(poly, 0.25)
    w = Weight(1.0 + rng.uniform(0.0, 1.0, mesh.n_vertices))
    for bc in ("dirichlet", "neumann"):
        p = build_pencil(mesh, bc, w, rng.uniform(0.0, 5.0, mesh.n_vertices))
        if p.dim <= 200:
            out.append(("polygon-weighted-" + bc, p))
    return [(name, p) for name, p in out if 6 <= p.dim <= 200]


def oracle_discrepancy(pencil, k: int, seed: int = DEFAULT_SEED):
    """Largest eigenvalue and eigenvector discrepancy between shift-invert and dense solves.

    Eigenvalues are compared relative to ``max(|lambda|, |sigma|)``, the
    solver's own residual scale, so a zero eigenvalue is compared against the
    shift rather than against roundoff. Eigenvectors of isolated eigenvalues
    are compared through ``1 - |<u, M v>|``.
    """
    a = smallest_eigenpairs(pencil, k, seed=seed)
    b = dense_eigenpairs(pencil, k + 1)
    lam, mu = a.eigenvalues, b.eigenvalues[:k]
    dv = float(np.max(np.abs(lam - mu) / np.maximum(np.abs(mu), abs(a.sigma))))
    dvec = 0.0
    for j in range(k):
        others = np.delete(b.eigenvalues, j)
        if np.min(np.abs(others - mu[j])) > 1e-6 * max(abs(mu[j]), abs(a.sigma)):
            c = abs(a.eigenvectors[:, j] @ (pencil.M @ b.eigenvectors[:, j]))
            dvec = max(dvec, 1.0 - c)
    return dv, dvec


@_timed(12, "solver oracle")
def solver_oracle(quick, seed):
    """Shift-invert eigenpairs agree with a dense solve to 1e-8 relative on the small-pencil corpus."""
    worst_val, worst_vec, count = 0.0, 0.0, 0
    for _, p in oracle_corpus(seed):
        dv, dvec = oracle_discrepancy(p, min(6, p.dim - 2), seed)
        worst_val, worst_vec = max(worst_val, dv), max(worst_vec, dvec)
        count += 1
    ok = worst_val <= 1e-8 and worst_vec <= 1e-8 and count > 0
    return ok, "%d pencils, max rel eigenvalue diff %.1e, max vector defect %.1e" % (count, worst_val, worst_vec)


CRITERIA = [interval_gap, rectangle_closed_form, equilateral_gap, gap_drift_identity, collapse, lavine, ac_corollary,
            log_concavity, thin_triangles, moduli_scan, sum_bound, solver_oracle]


def run_all(quick: bool = False, seed: int = DEFAULT_SEED, only=None, echo=None) -> list:
    """Run the criteria in order; ``echo`` receives each result as it finishes."""
    out = []
    for c in CRITERIA:
        if only and c.number not in only:
            continue
        r = c(quick=quick, seed=seed)
        if echo:
            echo(r)
        out.append(r)
    return out
