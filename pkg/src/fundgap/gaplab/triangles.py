"""The gap function on triangles: thin isosceles families and the moduli space."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from ..domains import in_fundamental_region, make_triangle_from_moduli
from ..eigensolve import DEFAULT_SEED
from .gap import fundamental_gap

__all__ = ["ScalingFit", "thin_triangle_scaling", "ModuliScan", "moduli_grid", "triangle_moduli_scan",
           "EQUILATERAL_XI"]

EQUILATERAL_XI = 64.0 * np.pi**2 / 9.0
APEX = np.array([0.5, np.sqrt(3.0) / 2.0])


@dataclass
class ScalingFit:
    points: list  # (h, xi)
    slope: float
    intercept: float
    tolerances: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("a scaling fit needs at least 2 points")

    @property
    def increasing(self) -> bool:
        """``xi`` strictly increases as the height decreases."""
        xi = [p[1] for p in self.points]
        return all(b > a for a, b in zip(xi[:-1], xi[1:]))

    def local_slopes(self) -> np.ndarray:
        h, xi = np.log(np.array(self.points)).T
        return np.diff(xi) / np.diff(h)


def _xi_at(p, levels, seed):
    g = fundamental_gap(make_triangle_from_moduli(p), levels, seed=seed, d=1.0)
    return g.xi, g.xi_tol


def _map(fn, items, workers):
    """Ordered map, in a process pool when ``workers > 1``."""
    if workers is None or workers <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def thin_triangle_scaling(h_list=(0.2, 0.1, 0.05, 0.025), levels: int = 4, seed: int = DEFAULT_SEED,
                          workers: int = 1) -> ScalingFit:
    """``xi`` of triangles ``(0,0), (1,0), (1/2, h)`` and the log-log slope of ``xi`` against ``h``."""
    h_list = [float(h) for h in h_list]
    if len(h_list) < 4 or any(b >= a for a, b in zip(h_list[:-1], h_list[1:])):
        raise ValueError("h_list must be strictly decreasing with at least 4 entries")
    if h_list[-1] <= 0 or h_list[0] > np.sqrt(3.0) / 2.0:
        raise ValueError("heights must lie in (0, sqrt(3)/2]")
    res = _map(partial(_xi_at, levels=levels, seed=seed), [(0.5, h) for h in h_list], workers)
    points = [(h, xi) for h, (xi, _) in zip(h_list, res)]
    tols = [t for _, t in res]
    lh, lx = np.log(np.array(points)).T
    slope, intercept = np.polyfit(lh, lx, 1)
    return ScalingFit(points, float(slope), float(intercept), tols)


def moduli_grid(grid_n: int) -> list:
    """Points ``(1/2 + i/(2(n-1)), (sqrt(3)/2) j/(n-1))`` inside the fundamental region, ``j >= 1``.

    The equilateral apex ``(1/2, sqrt(3)/2)`` is a grid point.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    pts = []
    for j in range(1, grid_n):
        for i in range(grid_n):
            p = (0.5 + 0.5 * i / (grid_n - 1), APEX[1] * j / (grid_n - 1))
            if in_fundamental_region(p, tol=1e-12):
                pts.append(p)
    return pts


@dataclass
class ModuliScan:
    rows: list  # (x, y, xi, xi_tol)
    grid_n: int
    levels: int

    @property
    def argmin(self) -> tuple:
        r = min(self.rows, key=lambda r: r[2])
        return (r[0], r[1])

    @property
    def min_xi(self) -> float:
        return min(r[2] for r in self.rows)

    @property
    def spacing(self) -> float:
        return 0.5 / (self.grid_n - 1)

    def nearest_to_equilateral(self) -> tuple:
        r = min(self.rows, key=lambda r: np.hypot(r[0] - APEX[0], r[1] - APEX[1]))
        return (r[0], r[1])

    def thin_rows(self) -> list:
        """Rows in the lowest grid row (the most degenerate triangles sampled)."""
        ymin = min(r[1] for r in self.rows)
        return [r for r in self.rows if r[1] == ymin]


def triangle_moduli_scan(grid_n: int = 12, levels: int = 4, seed: int = DEFAULT_SEED,
                         workers: int = 1) -> ModuliScan:
    """Evaluate ``xi`` over the moduli grid of triangles with unit diameter.

    Points are independent; ``workers > 1`` spreads them over processes.
    Row order is the grid order either way.
    """
    pts = moduli_grid(grid_n)
    res = _map(partial(_xi_at, levels=levels, seed=seed), pts, workers)
    rows = [(float(p[0]), float(p[1]), xi, tol) for p, (xi, tol) in zip(pts, res)]
    return ModuliScan(rows, grid_n, levels)
