"""Neumann spectra of thin graph domains ``0 <= y <= eps w(x)`` as ``eps -> 0``.

The flat Laplacian on the thin domain is compared with the one-dimensional
drift Laplacian for the measure ``w(x) dx``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..assembly import Weight, build_pencil
from ..domains import GraphDomain, mesh_graph_domain
from ..eigensolve import DEFAULT_SEED, richardson_extrapolate, smallest_eigenpairs
from ..oned import Profile1D, bakry_emery_eigs_1d

__all__ = ["CollapseTable", "collapse_theorem1", "collapse_corollary1", "graph_neumann_eigs", "MIN_EPS"]

# below this relative thickness the mapped mesh would need prohibitive aspect ratios
MIN_EPS = 1e-3


@dataclass
class CollapseTable:
    eps: list
    mu_eps: np.ndarray  # (n_eps, k+1) extrapolated thin-domain eigenvalues
    mu_limit: np.ndarray  # (k+1,) limiting one-dimensional eigenvalues
    errors: np.ndarray  # |mu_eps - mu_limit|
    tol: np.ndarray  # extrapolation error estimates, (n_eps, k+1)
    rows: list = field(default_factory=list)  # (eps, level, nx, ny, mu_0..mu_k)

    def to_dict(self) -> dict:
        return {
            "eps": [float(e) for e in self.eps],
            "mu_eps": self.mu_eps.tolist(),
            "mu_limit": self.mu_limit.tolist(),
            "errors": self.errors.tolist(),
            "tol": self.tol.tolist(),
        }

    def errors_decreasing(self, j: int = 1, noise: float = 0.1) -> bool:
        """Errors nonincreasing along the eps list, allowing ``noise`` relative slack."""
        e = self.errors[:, j]
        return bool(np.all(e[1:] <= e[:-1] * (1.0 + noise)))


def graph_neumann_eigs(gd: GraphDomain, k: int, nx: int, ny: int, seed: int = DEFAULT_SEED):
    mesh = mesh_graph_domain(gd, nx, ny)
    pencil = build_pencil(mesh, "neumann", Weight.uniform())
    spec = smallest_eigenpairs(pencil, k + 1, seed=seed, h=mesh.h_max)
    return spec.eigenvalues


def _weight_function(phi):
    if isinstance(phi, Profile1D):
        return lambda x: np.exp(-phi(x))
    if callable(phi):
        return lambda x: np.exp(-np.asarray(phi(x), dtype=float))
    c = float(phi)
    return lambda x: np.full_like(np.asarray(x, dtype=float), np.exp(-c))


def _run(w, k, eps_list, nx, ny, seed, L=1.0):
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 3:
        raise ValueError("eps_list needs at least 3 entries")
    if any(b >= a for a, b in zip(eps_list[:-1], eps_list[1:])):
        raise ValueError("eps_list must be decreasing")
    if min(eps_list) < MIN_EPS * L:
        raise ValueError("eps %g below the aspect-ratio guard %g" % (min(eps_list), MIN_EPS * L))
    limit = bakry_emery_eigs_1d(w, "neumann", n=1024, k=k + 1, R=L).eigenvalues
    mu, tol, rows = [], [], []
    for eps in eps_list:
        gd = GraphDomain(L, w, eps)
        coarse = graph_neumann_eigs(gd, k, nx, ny, seed)
        fine = graph_neumann_eigs(gd, k, 2 * nx, 2 * ny, seed)
        ext = richardson_extrapolate(coarse, fine)
        rows.append((eps, 0, nx, ny, *coarse))
        rows.append((eps, 1, 2 * nx, 2 * ny, *fine))
        mu.append(ext)
        tol.append(2.0 * np.abs(ext - fine))
    mu = np.array(mu)
    return CollapseTable(eps_list, mu, limit, np.abs(mu - limit), np.array(tol), rows)


def collapse_theorem1(phi, k: int = 2, eps_list=(0.4, 0.2, 0.1, 0.05), nx: int = 96, ny: int = 4,
                      seed: int = DEFAULT_SEED) -> CollapseTable:
    """Thin domains ``0 <= y <= eps exp(-phi(x))`` over ``[0, 1]``.

    ``phi`` is a callable, a constant or a :class:`Profile1D`. Reports the
    Neumann eigenvalues ``mu_{j, eps}``, ``j <= k``, against the drift
    Laplacian eigenvalues ``mu_j`` of ``([0, 1], exp(-phi) dx)``.
    """
    return _run(_weight_function(phi), k, eps_list, nx, ny, seed)


def collapse_corollary1(eps_list=(0.4, 0.2, 0.1, 0.05), k: int = 1, nx: int = 96, ny: int = 4,
                        seed: int = DEFAULT_SEED) -> CollapseTable:
    """Thin domains over ``[0, 1]`` shaped by the squared ground state ``sin^2(pi x)``.

    The limit of ``mu_{j, eps}`` is ``lambda_{j+1} - lambda_1`` of the
    interval, i.e. ``((j + 1)^2 - 1) pi^2``; the 1D drift solver provides it
    and ``mu_limit`` is replaced by the closed form.
    """
    table = _run(lambda x: np.sin(np.pi * np.asarray(x, dtype=float)) ** 2, k, eps_list, nx, ny, seed)
    j = np.arange(k + 1)
    exact = ((j + 1) ** 2 - 1) * np.pi**2
    table.mu_limit = exact
    table.errors = np.abs(table.mu_eps - exact)
    return table
