"""Checks relating Dirichlet eigenfunctions to the drift Laplacian of ``phi_1^2 dx``.

* ``psi_k = phi_k / phi_1`` solves the weighted eigenproblem with eigenvalue
  ``lambda_k - lambda_1`` (residual check);
* the Neumann spectrum of the weighted problem equals the shifted Dirichlet
  spectrum (identity check);
* sums of the lowest drift eigenvalues are bounded by sums of Rayleigh
  quotients of orthogonal families (sum bound).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..assembly import SymPencil, Weight, build_pencil
from ..domains import Domain, GraphDomain, TriMesh, mesh_sequence
from ..eigensolve import DEFAULT_SEED, rayleigh_quotient, richardson_extrapolate, smallest_eigenpairs
from ..oned import bakry_emery_eigs_1d, schrodinger_eigs_1d

__all__ = [
    "ground_state_weight",
    "prop1_residual",
    "prop1_residual_check",
    "Prop2Row",
    "prop2_identity_1d",
    "prop2_identity_check",
    "SumBound",
    "prop4_sum_bound_check",
    "orthogonal_family",
]


def _dirichlet(mesh: TriMesh, k: int, seed: int):
    pencil = build_pencil(mesh, "dirichlet")
    spec = smallest_eigenpairs(pencil, k, seed=seed, h=mesh.h_max)
    nodal = pencil.to_nodal(spec.eigenvectors)
    if nodal[:, 0].sum() < 0:
        nodal[:, 0] *= -1
    return spec.eigenvalues, nodal


def ground_state_weight(mesh: TriMesh, seed: int = DEFAULT_SEED) -> Weight:
    """Nodal ``phi_1^2`` with ``phi_1`` the positive Dirichlet ground state, sup norm one."""
    _, nodal = _dirichlet(mesh, 1, seed)
    phi1 = np.clip(nodal[:, 0], 0.0, None)
    phi1 /= phi1.max()
    return Weight(phi1**2)


def _interior_layer(mesh: TriMesh) -> np.ndarray:
    """Vertices that are neither on the boundary nor adjacent to it."""
    bad = mesh.boundary.copy()
    t = mesh.triangles
    touch = mesh.boundary[t].any(axis=1)
    near = np.zeros(mesh.n_vertices, dtype=bool)
    near[t[touch].ravel()] = True
    return ~(bad | near)


def prop1_residual(mesh: TriMesh, k: int, seed: int = DEFAULT_SEED) -> float:
    """Weighted weak-form residual of ``psi_k = phi_k / phi_1`` on one mesh.

    Returns ``||A_w psi - (lam_k - lam_1) M_w psi||_I / (lam_k ||M_w psi||_I)``,
    with weight ``phi_1^2`` and norms over vertices one layer away from the
    boundary. Vertices where ``phi_1 < 1e-12 max(phi_1)`` take the value of
    ``psi`` at their nearest retained neighbour.
    """
    lam, nodal = _dirichlet(mesh, k, seed)
    phi1 = nodal[:, 0]
    scale = phi1.max()
    phi1n = phi1 / scale
    phik = nodal[:, k - 1] / scale
    good = phi1n > 1e-12
    psi = np.zeros(mesh.n_vertices)
    psi[good] = phik[good] / phi1n[good]
    if k == 1:
        psi[:] = 1.0
    elif not good.all():
        from scipy.spatial import cKDTree

        tree = cKDTree(mesh.vertices[good])
        _, idx = tree.query(mesh.vertices[~good])
        psi[~good] = psi[good][idx]
    w = Weight(phi1n**2)
    from ..assembly import assemble_mass, assemble_stiffness

    A = assemble_stiffness(mesh, w)
    M = assemble_mass(mesh, w)
    gap = lam[k - 1] - lam[0]
    r = A @ psi - gap * (M @ psi)
    inner = _interior_layer(mesh)
    if not inner.any():
        raise ValueError("mesh too coarse: no vertices away from the boundary layer")
    den = lam[k - 1] * np.linalg.norm((M @ psi)[inner])
    return float(np.linalg.norm(r[inner]) / den)


def prop1_residual_check(domain: Domain, k: int = 2, levels: int = 4, h0=None, seed: int = DEFAULT_SEED) -> list:
    """``(h, residual)`` for each mesh of the refinement ladder."""
    return [(m.h_max, prop1_residual(m, k, seed)) for m in mesh_sequence(domain, levels, h0)]


@dataclass
class Prop2Row:
    k: int
    gap: float  # lambda_k - lambda_1
    mu: float  # mu_{k-1}
    difference: float

    @property
    def relative(self) -> float:
        # k = 1 compares 0 with mu_0: absolute
        return abs(self.difference) / abs(self.gap) if self.gap > 0 else abs(self.difference)


def prop2_identity_1d(k: int = 4, n: int = 512, R: float = 1.0) -> list:
    """Interval version with the two independent 1D solvers.

    The Dirichlet side is the finite-difference Laplacian; the drift side uses
    ``sin^2(pi x / R)``, the squared ground state, as weight.
    """
    lam = schrodinger_eigs_1d(0.0, "dirichlet", n, k, R).eigenvalues
    mu = bakry_emery_eigs_1d(lambda x: np.sin(np.pi * x / R) ** 2, "neumann", n, k, R).eigenvalues
    return [Prop2Row(j, lam[j - 1] - lam[0], mu[j - 1], lam[j - 1] - lam[0] - mu[j - 1]) for j in range(1, k + 1)]


def _prop2_on_mesh(mesh: TriMesh, k: int, seed: int):
    lam, nodal = _dirichlet(mesh, k, seed)
    phi1 = np.clip(nodal[:, 0], 0.0, None)
    w = Weight((phi1 / phi1.max()) ** 2)
    pencil = build_pencil(mesh, "neumann", w)
    mu = smallest_eigenpairs(pencil, k, seed=seed, h=mesh.h_max).eigenvalues
    return lam, mu


def prop2_identity_check(domain: Domain, k: int = 2, levels: int = 4, h0=None, seed: int = DEFAULT_SEED):
    """Rows ``(k, lambda_k - lambda_1, mu_{k-1}, difference)`` from extrapolated FEM values.

    Both sides are computed on the same meshes; the drift problem uses the
    computed ``phi_1^2`` as nodal weight. Returns the rows and the per-level
    raw values ``(h, lam, mu)``.
    """
    if k > 4:
        raise ValueError("k must be <= 4")
    meshes = mesh_sequence(domain, levels, h0)
    levels_out = [(m.h_max, *_prop2_on_mesh(m, k, seed)) for m in meshes]
    (_, lc, mc), (_, lf, mf) = levels_out[-2], levels_out[-1]
    lam = richardson_extrapolate(lc, lf)
    mu = richardson_extrapolate(mc, mf)
    rows = [Prop2Row(j, lam[j - 1] - lam[0], mu[j - 1], lam[j - 1] - lam[0] - mu[j - 1]) for j in range(1, k + 1)]
    return rows, levels_out


@dataclass
class SumBound:
    lhs: float
    rhs: float
    holds: bool
    quotients: np.ndarray
    eigenvalues: np.ndarray
    orthogonal_to_ground: bool


def prop4_sum_bound_check(pencil: SymPencil, test_vectors, tol: float = 1e-9, seed: int = DEFAULT_SEED,
                          eigenvalues=None) -> SumBound:
    """Compare ``sum_{j=0}^{k} mu_j`` with the Rayleigh quotients of ``k`` orthogonal vectors.

    ``test_vectors`` has shape ``(dim, k)``; its columns must be pairwise
    ``M``-orthogonal (normalized Gram off-diagonals at most 1e-8).
    """
    X = np.asarray(test_vectors, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    k = X.shape[1]
    G = X.T @ (pencil.M @ X)
    d = np.sqrt(np.diag(G))
    if np.any(d == 0):
        raise ValueError("test vectors must be nontrivial")
    C = G / np.outer(d, d)
    if np.max(np.abs(C - np.eye(k))) > 1e-8:
        raise ValueError("test vectors are not M-orthogonal")
    if eigenvalues is None:
        eigenvalues = smallest_eigenpairs(pencil, k + 1, seed=seed).eigenvalues
    eigenvalues = np.asarray(eigenvalues)[: k + 1]
    rq = np.array([rayleigh_quotient(pencil, X[:, j]) for j in range(k)])
    lhs, rhs = float(eigenvalues.sum()), float(rq.sum())
    ones = np.ones(pencil.dim)
    c1 = np.abs(ones @ (pencil.M @ X)) / (d * np.sqrt(ones @ (pencil.M @ ones)))
    return SumBound(lhs, rhs, lhs <= rhs + tol * max(1.0, abs(rhs)), rq, eigenvalues, bool(np.all(c1 <= 1e-8)))


def orthogonal_family(pencil: SymPencil, k: int, rng: np.random.Generator, against_constants: bool = True):
    """``k`` random ``M``-orthonormal vectors, optionally orthogonal to constants."""
    n = pencil.dim
    cols = [np.ones(n)] if against_constants else []
    out = []
    M = pencil.M
    while len(out) < k:
        v = rng.standard_normal(n)
        for _ in range(2):
            for q in cols + out:
                v -= q * ((q @ (M @ v)) / (q @ (M @ q)))
        nv = np.sqrt(v @ (M @ v))
        if nv > 1e-12:
            out.append(v / nv)
    return np.column_stack(out)
