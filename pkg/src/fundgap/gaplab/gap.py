"""The gap function ``xi = d^2 (lambda_2 - lambda_1)`` on refinement ladders."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..assembly import Weight, build_pencil
from ..domains import Domain, diameter, mesh_sequence
from ..eigensolve import DEFAULT_SEED, clusters, richardson_extrapolate, smallest_eigenpairs

__all__ = ["GapResult", "dirichlet_ladder", "fundamental_gap", "rectangle_gap_exact", "tolerance"]

# absolute floor for self-reported tolerances
TOL_FLOOR = 1e-6


def tolerance(extrapolated, finest, floor: float = TOL_FLOOR) -> float:
    """Twice the extrapolation correction, never below ``floor``."""
    return float(max(2.0 * abs(extrapolated - finest), floor))


@dataclass
class GapResult:
    lambda1: float
    lambda2: float
    d: float
    xi: float
    per_level: list
    extrapolated: bool
    gap_tol: float
    cluster_flag: bool
    seed: int = DEFAULT_SEED
    extra: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.lambda2 - self.lambda1

    @property
    def xi_tol(self) -> float:
        return self.d**2 * self.gap_tol

    def to_dict(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "gap": self.gap,
            "d": self.d,
            "xi": self.xi,
            "gap_tol": self.gap_tol,
            "xi_tol": self.xi_tol,
            "extrapolated": self.extrapolated,
            "cluster_flag": self.cluster_flag,
            "seed": self.seed,
            "per_level": [list(map(float, row)) for row in self.per_level],
        }


def _nodal_potential(V, mesh):
    if V is None:
        return None
    if callable(V):
        return np.asarray(V(mesh.vertices[:, 0], mesh.vertices[:, 1]), dtype=float) * np.ones(mesh.n_vertices)
    return float(V)


def dirichlet_ladder(domain: Domain, levels: int = 4, k: int = 3, V=None, h0=None, seed: int = DEFAULT_SEED,
                     meshes=None):
    """Dirichlet spectra of ``-Delta + V`` on successively refined meshes."""
    meshes = mesh_sequence(domain, levels, h0) if meshes is None else meshes
    out = []
    for mesh in meshes:
        pencil = build_pencil(mesh, "dirichlet", Weight.uniform(), _nodal_potential(V, mesh))
        out.append((mesh, pencil, smallest_eigenpairs(pencil, k, seed=seed, h=mesh.h_max)))
    return out


def fundamental_gap(domain: Domain, levels: int = 4, V=None, h0=None, seed: int = DEFAULT_SEED,
                    d: float | None = None) -> GapResult:
    """Gap function of a domain, Richardson-extrapolated from the two finest levels.

    ``V`` is an optional potential ``V(x, y)``. The second eigenvalue is
    counted with multiplicity; ``cluster_flag`` marks a degenerate
    ``lambda_2``.
    """
    if levels < 2:
        raise ValueError("levels must be >= 2")
    ladder = dirichlet_ladder(domain, levels, 3, V, h0, seed)
    per_level = [(m.h_max, s.eigenvalues[0], s.eigenvalues[1]) for m, _, s in ladder]
    (_, l1c, l2c), (_, l1f, l2f) = per_level[-2], per_level[-1]
    l1 = richardson_extrapolate(l1c, l1f)
    l2 = richardson_extrapolate(l2c, l2f)
    gap_tol = tolerance(l2 - l1, l2f - l1f)
    d = diameter(domain) if d is None else d
    ev = ladder[-1][2].eigenvalues
    cluster = any(1 in g and len(g) > 1 for g in clusters(ev))
    return GapResult(
        lambda1=float(l1),
        lambda2=float(l2),
        d=float(d),
        xi=float(d**2 * (l2 - l1)),
        per_level=per_level,
        extrapolated=True,
        gap_tol=gap_tol,
        cluster_flag=bool(cluster),
        seed=seed,
        extra={"finest_lambda3": float(ev[2])},
    )


def rectangle_gap_exact(a: float, b: float, jmax: int = 4):
    """Sorted ``pi^2 (j^2/a^2 + k^2/b^2)`` for ``j, k <= jmax``, the gap and ``xi``."""
    if not a >= b > 0:
        raise ValueError("need a >= b > 0")
    j = np.arange(1, jmax + 1)
    lam = np.sort((np.pi**2 * (j[:, None] ** 2 / a**2 + j[None, :] ** 2 / b**2)).ravel())
    gap = 3.0 * np.pi**2 / a**2
    xi = 3.0 * np.pi**2 * (a**2 + b**2) / a**2
    return lam, gap, xi
