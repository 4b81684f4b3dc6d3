"""Sampled certificates for moduli of continuity, expansion, contraction and concavity.

A check never proves anything: it evaluates the defining inequality on a
finite set of point pairs and reports the worst margin and where it occurs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from ..assembly import build_pencil
from ..domains import Polygon, Simplex, TriMesh, diameter, mesh_sequence
from ..eigensolve import DEFAULT_SEED, smallest_eigenpairs

__all__ = [
    "ModulusReport",
    "check_modulus_continuity",
    "check_modulus_expansion",
    "check_modulus_contraction",
    "check_modulus_convexity",
    "check_modulus_concavity",
    "MeshFunction",
    "recover_gradient",
    "interior_pairs",
    "comparison_modulus",
    "log_concavity_check",
    "ac_concavity_check",
    "LOG_CONCAVITY_SLACK",
    "calibrate_log_concavity_slack",
]

# slack constant C in tol_h = C * h for second differences of log(phi_1);
# see calibrate_log_concavity_slack
LOG_CONCAVITY_SLACK = 1.0


@dataclass
class ModulusReport:
    holds: bool
    worst_pair: tuple
    margin: float
    tolerance: float
    n_pairs: int

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "worst_pair": [np.asarray(p).tolist() for p in self.worst_pair],
            "margin": self.margin,
            "tolerance": self.tolerance,
            "n_pairs": self.n_pairs,
        }


def _points(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def _report(margins: np.ndarray, x: np.ndarray, y: np.ndarray, tol: float) -> ModulusReport:
    i = int(np.argmin(margins))
    m = float(margins[i])
    return ModulusReport(m >= -tol, (x[i].copy(), y[i].copy()), m, float(tol), len(margins))


def _vector(X, pts):
    v = np.asarray(X(pts), dtype=float)
    return v.reshape(len(pts), -1)


def check_modulus_continuity(f: Callable, eta: Callable, pairs, tol: float = 1e-12) -> ModulusReport:
    """Check ``|f(y) - f(x)| <= 2 eta(|y - x| / 2)`` on ``pairs = (x, y)``."""
    x, y = map(_points, pairs)
    r = np.linalg.norm(y - x, axis=1)
    lhs = np.abs(np.asarray(f(y), dtype=float).ravel() - np.asarray(f(x), dtype=float).ravel())
    return _report(2.0 * np.asarray(eta(r / 2.0), dtype=float) - lhs, x, y, tol)


def check_modulus_expansion(X: Callable, omega: Callable, pairs, tol: float = 1e-12) -> ModulusReport:
    """Check ``(X(y) - X(x)) . (y - x)/|y - x| >= 2 omega(|y - x| / 2)``."""
    x, y = map(_points, pairs)
    d = y - x
    r = np.linalg.norm(d, axis=1)
    if np.any(r == 0):
        raise ValueError("coincident pair")
    inc = np.sum((_vector(X, y) - _vector(X, x)) * d, axis=1) / r
    return _report(inc - 2.0 * np.asarray(omega(r / 2.0), dtype=float), x, y, tol)


def check_modulus_contraction(X: Callable, omega: Callable, pairs, tol: float = 1e-12) -> ModulusReport:
    """``omega`` contracts ``X`` iff ``-omega`` is an expansion modulus of ``-X``."""
    return check_modulus_expansion(lambda p: -_vector(X, p), lambda s: -np.asarray(omega(s)), pairs, tol)


def check_modulus_convexity(grad_f: Callable, omega: Callable, pairs, tol: float = 1e-12) -> ModulusReport:
    return check_modulus_expansion(grad_f, omega, pairs, tol)


def check_modulus_concavity(grad_f: Callable, omega: Callable, pairs, tol: float = 1e-12) -> ModulusReport:
    return check_modulus_contraction(grad_f, omega, pairs, tol)


class MeshFunction:
    """Piecewise-linear interpolant of nodal values (scalar or vector) on a mesh."""

    def __init__(self, mesh: TriMesh, values: np.ndarray):
        self.mesh = mesh
        self.values = np.asarray(values, dtype=float)
        p = mesh.vertices[mesh.triangles]
        self._p0 = p[:, 0]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        self._inv = np.stack([np.stack([e2[:, 1], -e2[:, 0]], -1), np.stack([-e1[:, 1], e1[:, 0]], -1)], 1)
        self._inv /= det[:, None, None]
        self._tree = cKDTree(p.mean(axis=1))

    def _bary(self, pts, tri):
        st = np.einsum("...ij,...j->...i", self._inv[tri], pts - self._p0[tri])
        return np.concatenate([1.0 - st.sum(-1, keepdims=True), st], axis=-1)

    def locate(self, pts: np.ndarray):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        kq = min(16, self.mesh.n_triangles)
        _, cand = self._tree.query(pts, k=kq)
        cand = cand.reshape(len(pts), kq)
        lam = self._bary(pts[:, None, :], cand)
        ok = lam.min(axis=-1) >= -1e-10
        found = ok.any(axis=1)
        first = np.argmax(ok, axis=1)
        tri = cand[np.arange(len(pts)), first]
        for i in np.flatnonzero(~found):
            lam_all = self._bary(np.broadcast_to(pts[i], (self.mesh.n_triangles, 2)), np.arange(self.mesh.n_triangles))
            j = int(np.argmax(lam_all.min(axis=-1)))
            if lam_all[j].min() < -1e-8:
                raise ValueError("point %s outside the mesh" % (pts[i],))
            tri[i] = j
        return tri, self._bary(pts, tri)

    def __call__(self, pts):
        tri, lam = self.locate(pts)
        vals = self.values[self.mesh.triangles[tri]]  # (P, 3, ...)
        return np.einsum("pk,pk...->p...", lam, vals)


def recover_gradient(mesh: TriMesh, values: np.ndarray) -> np.ndarray:
    """Nodal gradients by area-weighted averaging of the elementwise P1 gradients."""
    p = mesh.vertices[mesh.triangles]
    e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    area = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    u = np.asarray(values, dtype=float)[mesh.triangles]
    du1, du2 = u[:, 1] - u[:, 0], u[:, 2] - u[:, 0]
    gx = (du1 * e2[:, 1] - du2 * e1[:, 1]) / (2 * area)
    gy = (du2 * e1[:, 0] - du1 * e2[:, 0]) / (2 * area)
    out = np.zeros((mesh.n_vertices, 2))
    wsum = np.zeros(mesh.n_vertices)
    for c in range(3):
        np.add.at(out, mesh.triangles[:, c], np.column_stack([gx, gy]) * area[:, None])
        np.add.at(wsum, mesh.triangles[:, c], area)
    return out / wsum[:, None]


def _dist_to_boundary(poly: np.ndarray, pts: np.ndarray) -> np.ndarray:
    a = poly
    b = np.roll(poly, -1, axis=0)
    ab = b - a
    t = np.einsum("pkj,kj->pk", pts[:, None, :] - a[None], ab) / np.sum(ab * ab, axis=1)
    t = np.clip(t, 0.0, 1.0)
    proj = a[None] + t[..., None] * ab[None]
    return np.min(np.linalg.norm(pts[:, None, :] - proj, axis=-1), axis=1)


def _inside(poly: np.ndarray, pts: np.ndarray) -> np.ndarray:
    a = poly
    b = np.roll(poly, -1, axis=0)
    cross = (b[None, :, 0] - a[None, :, 0]) * (pts[:, None, 1] - a[None, :, 1]) - (
        b[None, :, 1] - a[None, :, 1]
    ) * (pts[:, None, 0] - a[None, :, 0])
    return np.all(cross > 0, axis=1)


def interior_pairs(poly: Polygon, margin: float = 0.1, n_random: int = 2000, lattice: int = 12,
                   seed: int = DEFAULT_SEED):
    """Point pairs inside a convex polygon, at least ``margin * diameter`` from its boundary.

    A fixed lattice (neighbour offsets up to two steps) plus a seeded random
    batch. Midpoints stay in the admissible region by convexity.
    """
    v = poly.vertices
    d = diameter(poly)
    lo, hi = v.min(axis=0), v.max(axis=0)
    step = (hi - lo).max() / lattice
    gx = np.arange(lo[0], hi[0] + step / 2, step)
    gy = np.arange(lo[1], hi[1] + step / 2, step)
    grid = np.array([(x, y) for y in gy for x in gx])

    def admissible(p):
        return _inside(v, p) & (_dist_to_boundary(v, p) >= margin * d)

    xs, ys = [], []
    for off in [(1, 0), (0, 1), (1, 1), (1, -1), (2, 0), (0, 2), (2, 1), (1, 2)]:
        q = grid + step * np.asarray(off, dtype=float)
        ok = admissible(grid) & admissible(q)
        xs.append(grid[ok])
        ys.append(q[ok])
    rng = np.random.default_rng(seed)
    pts = []
    while sum(len(p) for p in pts) < 2 * n_random:
        cand = lo + (hi - lo) * rng.random((4 * n_random, 2))
        pts.append(cand[admissible(cand)])
    pts = np.vstack(pts)[: 2 * n_random]
    xs.append(pts[:n_random])
    ys.append(pts[n_random:])
    return np.vstack(xs), np.vstack(ys)


def comparison_modulus(D: float) -> Callable:
    """``(log phi~_1)'`` for the Dirichlet ground state ``cos(pi s / D)`` of ``[-D/2, D/2]``."""
    return lambda s: -(np.pi / D) * np.tan(np.pi * np.asarray(s, dtype=float) / D)


def _ground_state(poly: Polygon, levels: int, h0, seed: int):
    mesh = mesh_sequence(poly, levels, h0)[-1]
    pencil = build_pencil(mesh, "dirichlet")
    spec = smallest_eigenpairs(pencil, 1, seed=seed, h=mesh.h_max)
    phi = pencil.to_nodal(spec.eigenvectors[:, 0])
    if phi.sum() < 0:
        phi = -phi
    return mesh, phi / phi.max()


def log_concavity_check(domain, levels: int = 4, h0=None, margin: float = 0.1, n_random: int = 2000,
                        slack: float = LOG_CONCAVITY_SLACK, seed: int = DEFAULT_SEED) -> ModulusReport:
    """Second differences ``log phi(x) + log phi(y) - 2 log phi((x+y)/2) <= slack * h``.

    ``phi`` is the computed Dirichlet ground state on the finest mesh; the
    report's margin is the minimum of ``-(second difference)``.
    """
    poly = domain.to_polygon() if isinstance(domain, Simplex) else domain
    if not poly.is_convex():
        raise ValueError("log-concavity check needs a convex domain")
    mesh, phi = _ground_state(poly, levels, h0, seed)
    x, y = interior_pairs(poly, margin, n_random, seed=seed)
    f = MeshFunction(mesh, phi)
    lx, ly, lm = np.log(f(x)), np.log(f(y)), np.log(f(0.5 * (x + y)))
    second = lx + ly - 2.0 * lm
    return _report(-second, x, y, slack * mesh.h_max)


def ac_concavity_check(domain, levels: int = 4, h0=None, margin: float = 0.1, n_random: int = 2000,
                       slack: float = LOG_CONCAVITY_SLACK, seed: int = DEFAULT_SEED) -> ModulusReport:
    """Check that the 1D comparison modulus on ``[-D/2, D/2]`` is a concavity modulus of ``log phi_1``.

    Gradients of ``log phi_1`` are recovered at vertices and interpolated.
    """
    poly = domain.to_polygon() if isinstance(domain, Simplex) else domain
    mesh, phi = _ground_state(poly, levels, h0, seed)
    D = diameter(poly)
    logphi = np.log(np.maximum(phi, 1e-300))
    g = recover_gradient(mesh, np.where(phi > 0, logphi, 0.0))
    x, y = interior_pairs(poly, margin, n_random, seed=seed)
    # gradient recovery is first order: O(h) slack
    return check_modulus_concavity(MeshFunction(mesh, g), comparison_modulus(D), (x, y), slack * mesh.h_max)


def calibrate_log_concavity_slack(levels: int = 4, seed: int = DEFAULT_SEED) -> float:
    """Largest positive second difference divided by ``h`` on the strip ``[0,1] x [0,1/4]``.

    The strip's ground state ``sin(pi x) sin(4 pi y)`` is exactly log-concave,
    so anything positive is discretization error.
    """
    from ..domains import rectangle

    poly = rectangle(1.0, 0.25)
    mesh, phi = _ground_state(poly, levels, None, seed)
    x, y = interior_pairs(poly, 0.1, seed=seed)
    f = MeshFunction(mesh, phi)
    second = np.log(f(x)) + np.log(f(y)) - 2.0 * np.log(f(0.5 * (x + y)))
    return float(max(second.max(), 0.0) / mesh.h_max)
