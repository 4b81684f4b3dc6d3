"""Randomized gap-bound suites: 1D Schrodinger operators with convex potentials
and 2D convex domains with convex potentials."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..domains import Polygon, diameter
from ..eigensolve import DEFAULT_SEED
from ..oned import random_convex_potential, schrodinger_eigs_1d
from .gap import fundamental_gap

__all__ = ["LavineRow", "LavineReport", "lavine_suite", "ACRow", "ac_gap_suite", "random_convex_polygon",
           "default_convex_potentials"]

ABS_TOL = 1e-6
STRICT_MARGIN = 1e-3


@dataclass
class LavineRow:
    trial: int
    constant: bool
    amplitude: float
    gap_dirichlet: float
    gap_neumann: float
    bound_dirichlet: float
    bound_neumann: float

    @property
    def violation(self) -> bool:
        return (self.gap_dirichlet < self.bound_dirichlet - ABS_TOL) or (self.gap_neumann < self.bound_neumann - ABS_TOL)

    @property
    def strict_ok(self) -> bool:
        """Nonconstant potentials with amplitude >= 1 must beat both bounds by ``STRICT_MARGIN``."""
        if self.constant or self.amplitude < 1.0:
            return True
        return (self.gap_dirichlet - self.bound_dirichlet > STRICT_MARGIN
                and self.gap_neumann - self.bound_neumann > STRICT_MARGIN)


@dataclass
class LavineReport:
    rows: list
    seed: int
    R: float
    equality_error: tuple = (np.nan, np.nan)

    @property
    def violations(self) -> int:
        return sum(r.violation for r in self.rows)

    @property
    def strict_failures(self) -> int:
        return sum(not r.strict_ok for r in self.rows)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.strict_failures == 0 and max(self.equality_error) <= ABS_TOL


def _gaps(V, R, n):
    d = schrodinger_eigs_1d(V, "dirichlet", n, 2, R).eigenvalues
    nm = schrodinger_eigs_1d(V, "neumann", n, 2, R).eigenvalues
    return d[1] - d[0], nm[1] - nm[0]


def lavine_suite(trials: int = 100, R: float = 1.0, seed: int = DEFAULT_SEED, n: int = 512) -> LavineReport:
    """Gap bounds ``3 pi^2 / R^2`` (Dirichlet) and ``pi^2 / R^2`` (Neumann) for random convex ``V``.

    Trial 0 is ``V = 0`` (the equality case). Failures are counted, not raised.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    bd, bn = 3 * np.pi**2 / R**2, np.pi**2 / R**2
    gd0, gn0 = _gaps(0.0, R, n)
    rows = [LavineRow(0, True, 0.0, gd0, gn0, bd, bn)]
    x = np.linspace(0.0, R, 2049)
    for t in range(1, trials):
        V, _ = random_convex_potential(rng, R)
        vals = V(x)
        amp = float(vals.max() - vals.min())
        gd, gn = _gaps(V, R, n)
        rows.append(LavineRow(t, amp == 0.0, amp, gd, gn, bd, bn))
    return LavineReport(rows, seed, R, (abs(gd0 - bd), abs(gn0 - bn)))


def random_convex_polygon(rng: np.random.Generator, n_min: int = 5, n_max: int = 8) -> Polygon:
    """Vertices at sorted random angles on a random ellipse (hence convex)."""
    n = int(rng.integers(n_min, n_max + 1))
    while True:
        t = np.sort(rng.uniform(0.0, 2 * np.pi, n))
        gaps = np.diff(np.concatenate([t, [t[0] + 2 * np.pi]]))
        if gaps.min() > 0.3 and gaps.max() < np.pi - 0.3:
            break
    a, b = 1.0, rng.uniform(0.5, 1.0)
    rot = rng.uniform(0.0, np.pi)
    pts = np.column_stack([a * np.cos(t), b * np.sin(t)])
    c, s = np.cos(rot), np.sin(rot)
    return Polygon(pts @ np.array([[c, s], [-s, c]]))


def default_convex_potentials(poly: Polygon) -> list:
    """Two convex potentials centred at the polygon's vertex mean: a paraboloid and a wedge."""
    cx, cy = poly.vertices.mean(axis=0)
    d = diameter(poly)

    def bowl(x, y):
        return 40.0 * ((x - cx) ** 2 + (y - cy) ** 2) / d**2

    def wedge(x, y):
        return 20.0 * (np.maximum(0.0, (x - cx) / d) + np.abs(y - cy) / d)

    return [("bowl", bowl), ("wedge", wedge)]


@dataclass
class ACRow:
    domain: str
    potential: str
    R: float
    gap: float
    bound: float
    tol: float
    meta: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.gap - self.bound

    @property
    def holds(self) -> bool:
        return self.gap >= self.bound - self.tol


def ac_gap_suite(domains, potentials=None, levels: int = 4, seed: int = DEFAULT_SEED) -> list:
    """Dirichlet gap of ``-Delta + V`` against ``3 pi^2 / R^2`` for convex domains and potentials.

    ``domains`` is a list of ``(name, Polygon)``; ``potentials`` maps a polygon
    to a list of ``(name, V)`` with ``V(x, y)`` convex (``None`` entries mean
    ``V = 0``). Defaults to ``V = 0`` plus :func:`default_convex_potentials`.
    """
    rows = []
    for name, poly in domains:
        if not poly.is_convex():
            raise ValueError("domain %s is not convex" % name)
        R = diameter(poly)
        pots = [("zero", None)] + (default_convex_potentials(poly) if potentials is None else potentials(poly))
        for pname, V in pots:
            g = fundamental_gap(poly, levels, V=V, seed=seed)
            rows.append(ACRow(name, pname, R, g.gap, 3 * np.pi**2 / R**2, g.gap_tol, {"xi": g.xi}))
    return rows
