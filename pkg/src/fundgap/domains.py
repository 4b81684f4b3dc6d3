"""Geometric domains, moduli parametrizations and conforming triangle meshes.

Domains are immutable dataclasses. Meshes are plain arrays wrapped in
:class:`TriMesh`; every mesh generator returns counterclockwise triangles and
boundary flags derived from the mesh topology (edges owned by one triangle).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy.spatial.distance import pdist

__all__ = [
    "Polygon",
    "Simplex",
    "GraphDomain",
    "TriMesh",
    "Domain",
    "rectangle",
    "equilateral_triangle",
    "regular_polygon",
    "diameter",
    "area",
    "make_triangle_from_moduli",
    "in_fundamental_region",
    "simplex_height",
    "triangulate",
    "mesh_graph_domain",
    "mesh_triangle_mapped",
    "refine",
    "mesh_sequence",
]


def _signed_area(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 * d2 < 0 and d3 * d4 < 0:
        return True
    return False


@dataclass(frozen=True)
class Polygon:
    """Simple polygon with vertices stored counterclockwise.

    Clockwise input is reversed; self-intersecting input raises ``ValueError``.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("polygon vertices must be an (N, 2) array")
        if len(v) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise ValueError("polygon vertices must be finite")
        if np.any(np.linalg.norm(v - np.roll(v, -1, axis=0), axis=1) == 0.0):
            raise ValueError("consecutive polygon vertices must be distinct")
        n = len(v)
        for i in range(n):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                if _segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                    raise ValueError("polygon is not simple (edges %d and %d cross)" % (i, j))
        a = _signed_area(v)
        if a == 0.0:
            raise ValueError("polygon has zero area")
        if a < 0:
            v = v[::-1].copy()
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def area(self) -> float:
        return _signed_area(self.vertices)

    def is_convex(self) -> bool:
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
        return bool(np.all(cross >= -1e-14 * np.max(np.abs(e)) ** 2))

    def scaled(self, t: float) -> "Polygon":
        return Polygon(t * self.vertices)


@dataclass(frozen=True)
class Simplex:
    """``n + 1`` affinely independent points in R^n."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] + 1:
            raise ValueError("a simplex in R^n needs n+1 vertices of dimension n")
        if not np.all(np.isfinite(v)):
            raise ValueError("simplex vertices must be finite")
        edges = v[1:] - v[0]
        vol = abs(np.linalg.det(edges))
        if vol <= 1e-14 * max(1.0, np.max(np.abs(edges))) ** v.shape[1]:
            raise ValueError("simplex is degenerate (edge vectors linearly dependent)")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def to_polygon(self) -> Polygon:
        if self.dim != 2:
            raise ValueError("only 2-simplices are polygons")
        return Polygon(self.vertices)


@dataclass(frozen=True)
class GraphDomain:
    """Thin domain ``{(x, y): 0 <= x <= L, 0 <= y <= epsilon * w(x)}``.

    ``profile`` is either a callable ``w(x)`` or samples of ``w`` at equispaced
    points of ``[0, L]`` (linearly interpolated). ``kinks`` lists abscissae where
    ``w`` is not smooth; mesh generators put grid lines there.
    """

    L: float
    profile: Union[Callable[[np.ndarray], np.ndarray], np.ndarray]
    epsilon: float
    kinks: tuple = field(default=())

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("base length must be positive")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not callable(self.profile):
            s = np.asarray(self.profile, dtype=float)
            if s.ndim != 1 or len(s) < 2:
                raise ValueError("profile samples must be a 1D array with >= 2 entries")
            s.setflags(write=False)
            object.__setattr__(self, "profile", s)
        check = self.w(np.linspace(0.0, self.L, 257))
        if np.any(check < 0) or not np.all(np.isfinite(check)):
            raise ValueError("profile must be finite and nonnegative")
        if not np.any(check > 0):
            raise ValueError("profile is identically zero")

    def w(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if callable(self.profile):
            return np.asarray(self.profile(x), dtype=float) * np.ones_like(x)
        s = self.profile
        return np.interp(x, np.linspace(0.0, self.L, len(s)), s)

    def height(self, x) -> np.ndarray:
        return self.epsilon * self.w(x)


Domain = Union[Polygon, Simplex, GraphDomain]


def rectangle(a: float, b: float) -> Polygon:
    """Axis-aligned rectangle ``[0, a] x [0, b]``."""
    if not (a > 0 and b > 0):
        raise ValueError("rectangle sides must be positive")
    return Polygon(np.array([[0.0, 0.0], [a, 0.0], [a, b], [0.0, b]]))


def equilateral_triangle(side: float = 1.0) -> Polygon:
    return Polygon(np.array([[0.0, 0.0], [side, 0.0], [0.5 * side, 0.5 * np.sqrt(3.0) * side]]))


def regular_polygon(n: int, radius: float = 1.0) -> Polygon:
    t = 2.0 * np.pi * np.arange(n) / n
    return Polygon(radius * np.column_stack([np.cos(t), np.sin(t)]))


def _graph_boundary_points(gd: GraphDomain, n: int = 2049) -> np.ndarray:
    x = np.linspace(0.0, gd.L, n)
    x = np.union1d(x, np.asarray(gd.kinks, dtype=float))
    top = np.column_stack([x, gd.height(x)])
    bottom = np.column_stack([x, np.zeros_like(x)])
    return np.vstack([bottom, top])


def diameter(domain: Domain) -> float:
    """Largest distance between two points of the domain.

    Polygons and simplices attain it at a pair of vertices; graph domains are
    sampled along their boundary.
    """
    if isinstance(domain, (Polygon, Simplex)):
        pts = domain.vertices
    elif isinstance(domain, GraphDomain):
        pts = _graph_boundary_points(domain)
        from scipy.spatial import ConvexHull

        pts = pts[ConvexHull(pts).vertices]
    else:
        raise TypeError("unsupported domain type %r" % type(domain).__name__)
    if len(pts) < 2:
        raise ValueError("empty vertex list")
    return float(np.max(pdist(pts)))


def area(domain: Domain) -> float:
    if isinstance(domain, Polygon):
        return domain.area
    if isinstance(domain, Simplex):
        from math import factorial

        return abs(np.linalg.det(domain.vertices[1:] - domain.vertices[0])) / factorial(domain.dim)
    if isinstance(domain, GraphDomain):
        from scipy.integrate import quad

        pts = sorted(set([0.0, domain.L, *domain.kinks]))
        return sum(quad(lambda s: float(domain.height(s)), a, b, limit=200)[0] for a, b in zip(pts[:-1], pts[1:]))
    raise TypeError("unsupported domain type %r" % type(domain).__name__)


# ---------------------------------------------------------------------------
# triangle moduli space


def in_fundamental_region(p, tol: float = 1e-14) -> bool:
    x, y = float(p[0]), float(p[1])
    return y > 0 and x >= 0.5 - tol and x * x + y * y <= 1 + tol and (x - 1) ** 2 + y * y <= 1 + tol


def make_triangle_from_moduli(p) -> Simplex:
    """Triangle with vertices ``(0,0), (1,0), p``; its diameter is the unit base.

    ``p`` must lie in ``{y > 0, x >= 1/2, |p| <= 1, |p - (1,0)| <= 1}``.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (2,) or not in_fundamental_region(p):
        raise ValueError("moduli point %r outside the fundamental region" % (p.tolist(),))
    return Simplex(np.array([[0.0, 0.0], [1.0, 0.0], p]))


def simplex_height(X: Simplex, facet_index: int) -> float:
    """Distance from vertex ``facet_index`` to the affine hull of the opposite facet."""
    v = X.vertices
    n = X.dim
    if not 0 <= facet_index <= n:
        raise IndexError("facet index out of range")
    apex = v[facet_index]
    facet = np.delete(v, facet_index, axis=0)
    basis = (facet[1:] - facet[0]).T  # n x (n-1)
    if basis.size and np.linalg.matrix_rank(basis) < n - 1:
        raise ValueError("degenerate facet")
    r = apex - facet[0]
    if basis.size:
        coef, *_ = np.linalg.lstsq(basis, r, rcond=None)
        r = r - basis @ coef
    return float(np.linalg.norm(r))


# ---------------------------------------------------------------------------
# meshes


@dataclass(frozen=True)
class TriMesh:
    """Conforming P1 triangle mesh.

    ``boundary`` flags vertices lying on the domain boundary.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=float)
        t = np.ascontiguousarray(self.triangles, dtype=np.int64)
        b = np.ascontiguousarray(self.boundary, dtype=bool)
        if len(b) != len(v):
            raise ValueError("boundary flags must align with vertices")
        for arr in (v, t, b):
            arr.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "boundary", b)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def edges(self) -> np.ndarray:
        """Unique undirected edges, shape (E, 2), sorted vertex pairs."""
        return _unique_edges(self.triangles)[0]

    @property
    def h_max(self) -> float:
        e = self.edges()
        return float(np.max(np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)))

    def boundary_edges(self) -> np.ndarray:
        edges, counts = _unique_edges(self.triangles)[::2]
        return edges[counts == 1]


def _unique_edges(tris: np.ndarray):
    e = np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    e.sort(axis=1)
    edges, inverse, counts = np.unique(e, axis=0, return_inverse=True, return_counts=True)
    return edges, inverse.reshape(-1), counts


def _finish_mesh(vertices: np.ndarray, tris: np.ndarray) -> TriMesh:
    """Orient triangles counterclockwise, drop zero-area ones, flag boundary vertices."""
    vertices = np.asarray(vertices, dtype=float)
    tris = np.asarray(tris, dtype=np.int64).reshape(-1, 3)
    p = vertices[tris]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    a = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    scale = max(np.ptp(vertices[:, 0]), np.ptp(vertices[:, 1])) ** 2
    tris = tris[np.abs(a) > 1e-24 * scale]
    a = a[np.abs(a) > 1e-24 * scale]
    flip = a < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    used = np.zeros(len(vertices), dtype=bool)
    used[tris.ravel()] = True
    if not used.all():
        remap = -np.ones(len(vertices), dtype=np.int64)
        remap[used] = np.arange(used.sum())
        vertices = vertices[used]
        tris = remap[tris]
    edges, _, counts = _unique_edges(tris)
    boundary = np.zeros(len(vertices), dtype=bool)
    boundary[edges[counts == 1].ravel()] = True
    return TriMesh(vertices, tris, boundary)


def refine(mesh: TriMesh) -> TriMesh:
    """Split every triangle into four through its edge midpoints."""
    tris = mesh.triangles
    edges, inverse, counts = _unique_edges(tris)
    nv = mesh.n_vertices
    mid = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
    vertices = np.vstack([mesh.vertices, mid])
    nt = len(tris)
    # inverse is stacked as [edge01 of all tris, edge12, edge20]
    m01 = nv + inverse[:nt]
    m12 = nv + inverse[nt : 2 * nt]
    m20 = nv + inverse[2 * nt :]
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    new = np.vstack(
        [
            np.column_stack([a, m01, m20]),
            np.column_stack([m01, b, m12]),
            np.column_stack([m20, m12, c]),
            np.column_stack([m01, m12, m20]),
        ]
    )
    boundary = np.concatenate([mesh.boundary, counts == 1])
    return TriMesh(vertices, new, boundary)


def _ear_clip(v: np.ndarray) -> np.ndarray:
    idx = list(range(len(v)))
    out = []

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 10 * len(v) ** 2:
            raise ValueError("ear clipping failed; polygon not simple?")
        n = len(idx)
        for k in range(n):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % n]
            a, b, c = v[i0], v[i1], v[i2]
            if cross(a, b, c) <= 0:
                continue
            inside = False
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                p = v[j]
                if cross(a, b, p) >= 0 and cross(b, c, p) >= 0 and cross(c, a, p) >= 0:
                    inside = True
                    break
            if not inside:
                out.append((i0, i1, i2))
                idx.pop(k)
                break
    out.append(tuple(idx))
    return np.array(out, dtype=np.int64)


def triangulate(poly: Polygon, target_h: float) -> TriMesh:
    """Conforming mesh of ``poly`` with longest edge at most ``target_h``.

    The coarse mesh is the triangle itself, a centroid fan (convex polygons)
    or an ear-clipping triangulation; it is then uniformly refined.
    """
    if not target_h > 0:
        raise ValueError("target_h must be positive")
    v = poly.vertices
    if len(v) == 3:
        mesh = _finish_mesh(v, np.array([[0, 1, 2]]))
    elif poly.is_convex():
        c = _polygon_centroid(v)
        n = len(v)
        tris = np.column_stack([np.arange(n), (np.arange(n) + 1) % n, np.full(n, n)])
        mesh = _finish_mesh(np.vstack([v, c]), tris)
    else:
        mesh = _finish_mesh(v, _ear_clip(v))
    while mesh.h_max > target_h * (1 + 1e-12):
        mesh = refine(mesh)
    return mesh


def _polygon_centroid(v: np.ndarray) -> np.ndarray:
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cr = x * yn - xn * y
    a = 0.5 * cr.sum()
    return np.array([((x + xn) * cr).sum(), ((y + yn) * cr).sum()]) / (6.0 * a)


def _graph_x_nodes(gd: GraphDomain, nx: int) -> np.ndarray:
    breaks = sorted(set([0.0, gd.L] + [float(k) for k in gd.kinks if 0 < k < gd.L]))
    if len(breaks) == 2:
        return np.linspace(0.0, gd.L, nx + 1)
    lengths = np.diff(breaks)
    counts = np.maximum(1, np.round(nx * lengths / gd.L).astype(int))
    # keep the total at nx where possible
    while counts.sum() > nx and counts.max() > 1:
        counts[np.argmax(counts)] -= 1
    while counts.sum() < nx:
        counts[np.argmax(lengths / counts)] += 1
    xs = [np.linspace(a, b, c + 1)[:-1] for a, b, c in zip(breaks[:-1], breaks[1:], counts)]
    return np.concatenate(xs + [np.array([gd.L])])


def mesh_graph_domain(gd: GraphDomain, nx: int, ny: int) -> TriMesh:
    """Mapped structured mesh of a graph domain.

    Node ``(i, j)`` sits at ``(x_i, (j / ny) * epsilon * w(x_i))``. Columns with
    zero height collapse to one vertex; cells between two such columns are
    dropped. Diagonals are mirrored about ``L / 2``.
    """
    if nx < 2 or ny < 2:
        raise ValueError("nx and ny must be >= 2")
    x = _graph_x_nodes(gd, nx)
    hts = gd.height(x)
    collapsed = hts <= 1e-12 * gd.L
    verts = []
    col_index = []
    for i, xi in enumerate(x):
        start = len(verts)
        if collapsed[i]:
            verts.append((xi, 0.0))
            col_index.append(np.full(ny + 1, start))
        else:
            for j in range(ny + 1):
                verts.append((xi, hts[i] * j / ny))
            col_index.append(start + np.arange(ny + 1))
    tris = []
    for i in range(len(x) - 1):
        cl, cr = col_index[i], col_index[i + 1]
        if collapsed[i] and collapsed[i + 1]:
            continue
        left_half = 0.5 * (x[i] + x[i + 1]) < 0.5 * gd.L
        for j in range(ny):
            a, b, c, d = cl[j], cr[j], cr[j + 1], cl[j + 1]
            if collapsed[i]:
                tris.append((a, b, c))
            elif collapsed[i + 1]:
                tris.append((a, b, d))
            elif left_half:
                tris.append((a, b, c))
                tris.append((a, c, d))
            else:
                tris.append((a, b, d))
                tris.append((b, c, d))
    return _finish_mesh(np.array(verts), np.array(tris))


def _triangle_as_graph(tri: np.ndarray):
    """Rigid motion putting the longest side of ``tri`` on [0, L] x {0}."""
    lengths = [np.linalg.norm(tri[(k + 1) % 3] - tri[k]) for k in range(3)]
    k = int(np.argmax(lengths))
    p0, p1, apex = tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]
    L = lengths[k]
    ex = (p1 - p0) / L
    ey = np.array([-ex[1], ex[0]])
    if np.dot(apex - p0, ey) < 0:
        p0, p1 = p1, p0
        ex = -ex
        ey = -ey
    ax, ay = np.dot(apex - p0, ex), np.dot(apex - p0, ey)
    return p0, ex, ey, L, ax, ay


def mesh_triangle_mapped(tri, nx: int, ny: int) -> TriMesh:
    """Anisotropic mapped mesh of a triangle viewed as a graph over its longest side."""
    tri = np.asarray(tri.vertices if isinstance(tri, (Simplex, Polygon)) else tri, dtype=float)
    p0, ex, ey, L, ax, ay = _triangle_as_graph(tri)

    def tent(x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= ax, x / ax, (L - x) / (L - ax)) * ay

    gd = GraphDomain(L, tent, 1.0, kinks=(ax,))
    m = mesh_graph_domain(gd, nx, ny)
    pts = p0 + m.vertices[:, :1] * ex + m.vertices[:, 1:] * ey
    return TriMesh(pts, m.triangles, m.boundary)


def _max_angle(tri: np.ndarray) -> float:
    angs = []
    for k in range(3):
        a, b, c = tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]
        u, v = b - a, c - a
        angs.append(np.arccos(np.clip(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)), -1, 1)))
    return float(np.degrees(max(angs)))


def _is_axis_rectangle(poly: Polygon) -> bool:
    v = poly.vertices
    if len(v) != 4:
        return False
    xs, ys = np.unique(np.round(v[:, 0], 14)), np.unique(np.round(v[:, 1], 14))
    return len(xs) == 2 and len(ys) == 2


def mesh_sequence(domain: Domain, levels: int, h0: float | None = None, ny0: int = 2) -> list:
    """Meshes with halving mesh size, coarse to fine.

    Triangles with an angle of 120 degrees or more and graph domains get
    anisotropic mapped meshes; axis-aligned rectangles a structured grid;
    other polygons :func:`triangulate`. Straight-edged meshes are nested
    (uniform refinement); graph domains with curved tops are regenerated.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if isinstance(domain, Simplex):
        domain = domain.to_polygon()
    if isinstance(domain, GraphDomain):
        if h0 is None:
            h0 = domain.L / 16
        nx0 = max(2, int(np.ceil(domain.L / h0)))
        return [mesh_graph_domain(domain, nx0 * 2**k, ny0 * 2**k) for k in range(levels)]
    if not isinstance(domain, Polygon):
        raise TypeError("unsupported domain type %r" % type(domain).__name__)
    d = diameter(domain)
    v = domain.vertices
    if len(v) == 3 and _max_angle(v) >= 120.0:
        _, _, _, L, _, ay = _triangle_as_graph(v)
        if h0 is None:
            h0 = ay / ny0
        nx0 = max(4, int(np.ceil(L / h0)))
        mesh = mesh_triangle_mapped(v, nx0, ny0)
    elif _is_axis_rectangle(domain):
        if h0 is None:
            h0 = d / 8
        lo, hi = v.min(axis=0), v.max(axis=0)
        a, b = hi - lo
        nx0 = max(2, int(np.ceil(a / h0)))
        ny0r = max(2, int(np.ceil(b / h0)))
        gd = GraphDomain(float(a), lambda x: np.ones_like(x), float(b))
        m = mesh_graph_domain(gd, nx0, ny0r)
        mesh = TriMesh(m.vertices + lo, m.triangles, m.boundary)
    else:
        if h0 is None:
            h0 = d / 6
        mesh = triangulate(domain, h0)
    out = [mesh]
    for _ in range(levels - 1):
        out.append(refine(out[-1]))
    return out
