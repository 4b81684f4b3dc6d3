"""One-dimensional spectra on ``[0, R]``.

Schrodinger operators ``-u'' + V u`` use the 3-point stencil (ghost-point
closure for Neumann ends, which is the symmetric pencil with half-weight end
masses). The Bakry-Emery operator is discretized through its quadratic forms
``sum w_{i+1/2} (u_{i+1} - u_i)^2 / h`` and ``sum m_i u_i^2`` with masses
lumped from the cell-midpoint weights, so weights vanishing at the ends need
no special treatment.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .eigensolve import Spectrum, richardson_extrapolate

__all__ = [
    "Profile1D",
    "schrodinger_eigs_1d",
    "bakry_emery_eigs_1d",
    "exact_interval_eigs",
    "ground_state_1d",
    "load_profile_csv",
    "random_convex_potential",
    "interval_pencil",
]


@dataclass(frozen=True)
class Profile1D:
    """Samples of a function at ``n + 1`` equispaced nodes of ``[0, R]``."""

    R: float
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if not self.R > 0:
            raise ValueError("R must be positive")
        if s.ndim != 1 or len(s) < 3:
            raise ValueError("need at least 3 samples (n >= 2)")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return len(self.samples) - 1

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.R, self.n + 1)

    def __call__(self, x):
        return np.interp(x, self.x, self.samples)

    @classmethod
    def from_function(cls, f: Callable, R: float = 1.0, n: int = 1024) -> "Profile1D":
        x = np.linspace(0.0, R, n + 1)
        return cls(R, np.asarray(f(x), dtype=float) * np.ones_like(x))


FunctionLike = Union[Profile1D, Callable, float, int]


def _as_callable(f: FunctionLike, R: float):
    if isinstance(f, Profile1D):
        return f, f.R
    if callable(f):
        return f, R
    c = float(f)
    return (lambda x: np.full_like(np.asarray(x, dtype=float), c)), R


def _check_bc(bc: str) -> str:
    if bc not in ("dirichlet", "neumann"):
        raise ValueError("bc must be 'dirichlet' or 'neumann'")
    return bc


def _solve_form(wm: np.ndarray, pot: np.ndarray, h: float, bc: str, k: int):
    """Eigenpairs of the form pair with midpoint weights ``wm`` and nodal potential ``pot``.

    Returns eigenvalues and nodal eigenvectors (zeros at Dirichlet ends),
    normalized in the lumped mass inner product.
    """
    n = len(wm)
    mass = np.zeros(n + 1)
    mass[:-1] += 0.5 * h * wm
    mass[1:] += 0.5 * h * wm
    diag = np.zeros(n + 1)
    diag[:-1] += wm / h
    diag[1:] += wm / h
    diag += mass * pot
    off = -wm / h
    idx = np.arange(n + 1) if bc == "neumann" else np.arange(1, n)
    m = mass[idx]
    if np.any(m <= 0):
        raise ValueError("weight vanishes on an interior subinterval (disconnected measure)")
    s = 1.0 / np.sqrt(m)
    d = diag[idx] * s * s
    e = off[idx[:-1]] * s[:-1] * s[1:]
    k = min(k, len(idx))
    vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1))
    full = np.zeros((n + 1, k))
    full[idx] = vecs * s[:, None]
    return vals, full


def _spectrum(run, n: int, k: int, extrapolate: bool, R: float) -> Spectrum:
    vals_c, vecs_c = run(n)
    if not extrapolate:
        return Spectrum(vals_c, vecs_c, np.zeros(len(vals_c)), h=R / n, meta={"n": n})
    vals_f, vecs_f = run(2 * n)
    ext = richardson_extrapolate(vals_c, vals_f, order=2)
    return Spectrum(
        ext,
        vecs_f,
        np.abs(ext - vals_f),
        h=R / (2 * n),
        meta={"n": [n, 2 * n], "coarse": vals_c.tolist(), "fine": vals_f.tolist(), "extrapolated": True},
    )


def schrodinger_eigs_1d(
    V: FunctionLike = 0.0,
    bc: str = "dirichlet",
    n: int = 512,
    k: int = 4,
    R: float = 1.0,
    extrapolate: bool = True,
) -> Spectrum:
    """Lowest ``k`` eigenvalues of ``-d^2/dx^2 + V`` on ``[0, R]``.

    With ``extrapolate`` the result combines grids ``n`` and ``2n`` by
    Richardson extrapolation; ``residuals`` then hold ``|extrapolated - fine|``
    as an error estimate. Eigenvectors come from the finer grid.
    """
    _check_bc(bc)
    if n < 16:
        raise ValueError("n must be >= 16")
    Vf, R = _as_callable(V, R)

    def run(m):
        x = np.linspace(0.0, R, m + 1)
        pot = np.asarray(Vf(x), dtype=float) * np.ones(m + 1)
        return _solve_form(np.ones(m), pot, R / m, bc, k)

    return _spectrum(run, n, k, extrapolate, R)


def bakry_emery_eigs_1d(
    weight: FunctionLike,
    bc: str = "neumann",
    n: int = 512,
    k: int = 4,
    R: float = 1.0,
    extrapolate: bool = True,
) -> Spectrum:
    """Eigenvalues of the drift Laplacian for the measure ``weight(x) dx``.

    ``weight`` is ``exp(-phi)``; it is sampled at cell midpoints.
    """
    _check_bc(bc)
    wf, R = _as_callable(weight, R)

    def run(m):
        h = R / m
        xm = (np.arange(m) + 0.5) * h
        wm = np.asarray(wf(xm), dtype=float) * np.ones(m)
        if np.any(wm < 0) or not np.all(np.isfinite(wm)):
            raise ValueError("weight must be finite and nonnegative")
        if np.any(wm[1:-1] <= 0):
            raise ValueError("weight vanishes on an interior subinterval (disconnected measure)")
        return _solve_form(wm, np.zeros(m + 1), h, bc, k)

    return _spectrum(run, n, k, extrapolate, R)


def exact_interval_eigs(R: float, bc: str, k: int) -> np.ndarray:
    """``(j pi / R)^2`` for ``j = 1..k`` (Dirichlet) or ``j = 0..k-1`` (Neumann)."""
    _check_bc(bc)
    if not R > 0:
        raise ValueError("R must be positive")
    j = np.arange(1, k + 1) if bc == "dirichlet" else np.arange(k)
    return (j * np.pi / R) ** 2


def ground_state_1d(V: FunctionLike = 0.0, bc: str = "dirichlet", n: int = 512, R: float = 1.0) -> np.ndarray:
    """Nodal first eigenfunction, positive with sup norm one."""
    Vf, R = _as_callable(V, R)
    x = np.linspace(0.0, R, n + 1)
    pot = np.asarray(Vf(x), dtype=float) * np.ones(n + 1)
    _, vec = _solve_form(np.ones(n), pot, R / n, _check_bc(bc), 1)
    v = vec[:, 0]
    if v.sum() < 0:
        v = -v
    return v / np.max(np.abs(v))


def load_profile_csv(path) -> Profile1D:
    """Read ``x, value`` rows (equispaced ``x`` starting at 0)."""
    xs, vs = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                xs.append(float(row[0]))
                vs.append(float(row[1]))
            except ValueError:
                continue  # header
    x = np.asarray(xs)
    if len(x) < 3 or abs(x[0]) > 1e-12:
        raise ValueError("profile must start at x = 0 with at least 3 rows")
    if not np.allclose(np.diff(x), x[1] - x[0], rtol=1e-9, atol=1e-12):
        raise ValueError("profile abscissae must be equispaced")
    return Profile1D(float(x[-1]), np.asarray(vs))


def random_convex_potential(rng: np.random.Generator, R: float = 1.0, max_pieces: int = 5, amplitude: float = 50.0):
    """``V(x) = max_i (a_i x + b_i)`` with ``m <= max_pieces`` pieces and ``|V| <= amplitude`` on ``[0, R]``.

    Returns the callable and its coefficients.
    """
    m = int(rng.integers(1, max_pieces + 1))
    slopes = rng.uniform(-1.0, 1.0, m) * amplitude / R
    # choose intercepts so each piece is active somewhere and V stays in range
    anchors = rng.uniform(0.0, R, m)
    values = rng.uniform(0.0, 0.5, m) * amplitude
    intercepts = values - slopes * anchors
    x = np.linspace(0.0, R, 4097)
    vmax = np.max(np.max(slopes[:, None] * x + intercepts[:, None], axis=0))
    vmin = np.min(np.max(slopes[:, None] * x + intercepts[:, None], axis=0))
    span = max(abs(vmax), abs(vmin), 1e-300)
    if span > amplitude:
        slopes = slopes * amplitude / span
        intercepts = intercepts * amplitude / span

    def V(x):
        x = np.asarray(x, dtype=float)
        return np.max(slopes[:, None] * x[None, ...].reshape(1, -1) + intercepts[:, None], axis=0).reshape(x.shape)

    return V, (slopes.copy(), intercepts.copy())


def interval_pencil(n: int = 256, R: float = 1.0, bc: str = "neumann", weight: FunctionLike = 1.0, V: FunctionLike = 0.0):
    """Sparse tridiagonal pencil of the 1D forms, usable with the 2D tooling.

    Returns the :class:`~fundgap.assembly.SymPencil` and the node abscissae.
    """
    import scipy.sparse as sp

    from .assembly import SymPencil

    _check_bc(bc)
    wf, R = _as_callable(weight, R)
    Vf, _ = _as_callable(V, R)
    h = R / n
    x = np.linspace(0.0, R, n + 1)
    wm = np.asarray(wf(x[:-1] + 0.5 * h), dtype=float) * np.ones(n)
    mass = np.zeros(n + 1)
    mass[:-1] += 0.5 * h * wm
    mass[1:] += 0.5 * h * wm
    diag = np.zeros(n + 1)
    diag[:-1] += wm / h
    diag[1:] += wm / h
    diag += mass * (np.asarray(Vf(x), dtype=float) * np.ones(n + 1))
    A = sp.diags([-wm / h, diag, -wm / h], [-1, 0, 1], format="csr")
    M = sp.diags(mass, 0, format="csr")
    keep = mass > 0
    if bc == "dirichlet":
        keep[[0, -1]] = False
    dof_map = -np.ones(n + 1, dtype=np.int64)
    dof_map[keep] = np.arange(int(keep.sum()))
    idx = np.flatnonzero(keep)
    return SymPencil(A[idx][:, idx].tocsr(), M[idx][:, idx].tocsr(), dof_map, bc), x
