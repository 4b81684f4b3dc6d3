"""P1 finite element assembly of weighted stiffness, mass and potential matrices.

All element integrals use the three-edge-midpoint rule, which is exact for
quadratics. Nodal weights represent ``exp(-phi)`` and are interpolated
linearly inside each triangle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .domains import TriMesh

__all__ = [
    "Weight",
    "SymPencil",
    "assemble_stiffness",
    "assemble_mass",
    "assemble_potential",
    "apply_dirichlet",
    "apply_neumann",
    "build_pencil",
    "export_triplets",
]

# barycentric coordinates of the edge midpoints m01, m12, m20
_MID = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])


@dataclass(frozen=True)
class Weight:
    """Density ``exp(-phi)`` of the reference measure, sampled at mesh vertices."""

    values: np.ndarray | None = None

    def __post_init__(self):
        if self.values is not None:
            v = np.asarray(self.values, dtype=float)
            if np.any(v < 0) or not np.all(np.isfinite(v)):
                raise ValueError("weight values must be finite and nonnegative")
            if not np.any(v > 0):
                raise ValueError("weight is identically zero")
            object.__setattr__(self, "values", v)

    @property
    def kind(self) -> str:
        return "uniform" if self.values is None else "nodal"

    @classmethod
    def uniform(cls) -> "Weight":
        return cls(None)

    def nodal(self, n: int) -> np.ndarray:
        if self.values is None:
            return np.ones(n)
        if len(self.values) != n:
            raise ValueError("weight has %d values for a mesh with %d vertices" % (len(self.values), n))
        return self.values


@dataclass(frozen=True)
class SymPencil:
    """Symmetric pencil ``(A, M)`` on the retained degrees of freedom.

    ``dof_map[v]`` is the dof index of mesh vertex ``v`` or -1 when the vertex
    was eliminated.
    """

    A: sp.csr_matrix
    M: sp.csr_matrix
    dof_map: np.ndarray
    bc: str = "neumann"

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def to_dofs(self, nodal: np.ndarray) -> np.ndarray:
        return np.asarray(nodal)[self.dof_map >= 0]

    def to_nodal(self, v: np.ndarray, fill: float = 0.0) -> np.ndarray:
        """Scatter dof vector(s) back to mesh vertices."""
        v = np.asarray(v)
        shape = (len(self.dof_map),) + v.shape[1:]
        out = np.full(shape, fill, dtype=v.dtype)
        keep = self.dof_map >= 0
        out[keep] = v[self.dof_map[keep]]
        return out


def _geometry(mesh: TriMesh):
    p = mesh.vertices[mesh.triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    area = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    # gradients of the hat functions: rotate opposite edges
    opp = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    grads = np.stack([-opp[..., 1], opp[..., 0]], axis=-1) / (2.0 * area[:, None, None])
    return area, grads


def _scatter(mesh: TriMesh, local: np.ndarray) -> sp.csr_matrix:
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = mesh.n_vertices
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def assemble_stiffness(mesh: TriMesh, w: Weight | None = None) -> sp.csr_matrix:
    """Weighted stiffness ``int grad(u) . grad(v) w``."""
    w = Weight.uniform() if w is None else w
    wn = w.nodal(mesh.n_vertices)
    area, g = _geometry(mesh)
    wbar = wn[mesh.triangles].mean(axis=1)  # midpoint rule on a linear weight
    local = np.einsum("tia,tja->tij", g, g) * (area * wbar)[:, None, None]
    return _scatter(mesh, local)


def _weighted_mass_local(mesh: TriMesh, nodal: np.ndarray) -> np.ndarray:
    area, _ = _geometry(mesh)
    wm = nodal[mesh.triangles] @ _MID.T  # (T, 3) weight at the midpoints
    local = np.einsum("tm,mi,mj->tij", wm, _MID, _MID)
    return local * (area / 3.0)[:, None, None]


def assemble_mass(mesh: TriMesh, w: Weight | None = None) -> sp.csr_matrix:
    """Weighted mass ``int u v w``."""
    w = Weight.uniform() if w is None else w
    return _scatter(mesh, _weighted_mass_local(mesh, w.nodal(mesh.n_vertices)))


def assemble_potential(mesh: TriMesh, V) -> sp.csr_matrix:
    """Potential matrix ``int V u v``; indefinite when ``V`` changes sign."""
    V = np.asarray(V, dtype=float)
    if V.ndim == 0:
        V = np.full(mesh.n_vertices, float(V))
    if len(V) != mesh.n_vertices:
        raise ValueError("potential has %d values for a mesh with %d vertices" % (len(V), mesh.n_vertices))
    if not np.all(np.isfinite(V)):
        raise ValueError("potential must be finite")
    return _scatter(mesh, _weighted_mass_local(mesh, V))


def _restrict(A, M, keep: np.ndarray, bc: str) -> SymPencil:
    dof_map = -np.ones(len(keep), dtype=np.int64)
    dof_map[keep] = np.arange(int(keep.sum()))
    idx = np.flatnonzero(keep)
    A = A.tocsr()[idx][:, idx].tocsr()
    M = M.tocsr()[idx][:, idx].tocsr()
    return SymPencil(A, M, dof_map, bc)


def apply_dirichlet(A, M, mesh: TriMesh) -> SymPencil:
    """Eliminate boundary vertices (homogeneous Dirichlet condition)."""
    keep = ~mesh.boundary
    if not keep.any():
        raise ValueError("mesh has no interior vertices")
    M = M.tocsr()
    keep &= M.diagonal() > 0
    return _restrict(A, M, keep, "dirichlet")


def apply_neumann(A, M, mesh: TriMesh) -> SymPencil:
    """Natural boundary condition: keep every vertex in the support of the weight.

    Vertices whose mass diagonal vanishes (all incident quadrature points carry
    zero weight) are decoupled and dropped.
    """
    M = M.tocsr()
    keep = M.diagonal() > 0
    return _restrict(A, M, keep, "neumann")


def build_pencil(mesh: TriMesh, bc: str = "dirichlet", weight: Weight | None = None, V=None) -> SymPencil:
    """Assemble ``(K_w + V_w, M_w)`` and apply the boundary condition."""
    K = assemble_stiffness(mesh, weight)
    M = assemble_mass(mesh, weight)
    if V is not None:
        Vn = np.asarray(V, dtype=float) * np.ones(mesh.n_vertices)
        if weight is not None and weight.values is not None:
            Vn = Vn * weight.values
        # V * w is interpolated; exact for constant V
        K = K + assemble_potential(mesh, Vn)
    if bc == "dirichlet":
        return apply_dirichlet(K, M, mesh)
    if bc == "neumann":
        return apply_neumann(K, M, mesh)
    raise ValueError("bc must be 'dirichlet' or 'neumann'")


def export_triplets(mat, path=None) -> str:
    """Sorted ``row col value`` lines of a sparse matrix."""
    c = sp.coo_matrix(mat)
    order = np.lexsort((c.col, c.row))
    lines = ["%d %d %.17g" % (c.row[k], c.col[k], c.data[k]) for k in order]
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
