"""Smallest eigenpairs of symmetric pencils ``A v = lam M v`` with ``M`` positive definite.

The main solver is a shift-invert block Lanczos iteration with full
reorthogonalization in the ``M`` inner product. The shifted matrix
``A - sigma M`` is factorized once with a symmetric fill-reducing ordering and
diagonal pivoting, so the pivots double as a positive-definiteness test.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import SymPencil

__all__ = [
    "Spectrum",
    "FactorizationError",
    "ConvergenceError",
    "SymmetricFactor",
    "factorize",
    "smallest_eigenpairs",
    "dense_eigenpairs",
    "rayleigh_quotient",
    "richardson_extrapolate",
    "observed_order",
    "clusters",
]

log = logging.getLogger(__name__)

DEFAULT_SEED = 20240601


class FactorizationError(RuntimeError):
    """Raised when a matrix expected to be positive definite is not."""

    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message)
        self.pivot = pivot


class ConvergenceError(RuntimeError):
    pass


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residuals: np.ndarray
    h: float | None = None
    seed: int | None = None
    iterations: int = 0
    sigma: float | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.eigenvalues)

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "residuals": [float(x) for x in self.residuals],
            "h": None if self.h is None else float(self.h),
            "seed": self.seed,
            "iterations": int(self.iterations),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


class SymmetricFactor:
    """Factorization of a sparse symmetric positive definite matrix.

    SuperLU is run with a symmetric (``A + A^T``) minimum-degree ordering and
    no off-diagonal pivoting, which makes it an ``L D L^T``-type factorization;
    a nonpositive pivot means the matrix is not positive definite.
    """

    def __init__(self, K):
        K = sp.csc_matrix(K)
        try:
            self._lu = spla.splu(
                K,
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.0,
                options={"SymmetricMode": True},
            )
        except RuntimeError as exc:
            raise FactorizationError("factorization failed: %s" % exc) from exc
        piv = self._lu.U.diagonal()
        bad = np.flatnonzero(~(piv > 0))
        if bad.size:
            pos = int(bad[0])
            orig = int(self._lu.perm_c[pos]) if pos < len(self._lu.perm_c) else pos
            raise FactorizationError(
                "matrix not positive definite: pivot %d (row %d) = %g" % (pos, orig, piv[pos]), pivot=orig
            )
        self.pivots = piv
        self.shape = K.shape

    def solve(self, b: np.ndarray) -> np.ndarray:
        return self._lu.solve(np.asarray(b, dtype=float))


def factorize(K) -> SymmetricFactor:
    return SymmetricFactor(K)


def _default_sigma(pencil: SymPencil) -> float:
    if pencil.bc == "dirichlet":
        return -1.0
    scale = float(np.max(np.abs(pencil.A.data))) if pencil.A.nnz else 1.0
    return -0.1 * scale


def _m_orthonormalize(V, MV_fn, Q, MQ, rng, drop_tol=1e-10):
    """M-orthonormalize the columns of ``V`` against ``Q`` and each other.

    Columns that vanish are replaced by random directions; if the space is
    exhausted they are dropped.
    """
    n = V.shape[0]
    cols, mcols = [], []
    basis_dim = 0 if Q is None else Q.shape[1]
    for c in range(V.shape[1]):
        v = V[:, c].copy()
        for attempt in range(3):
            ref = np.sqrt(abs(v @ MV_fn(v))) or 1.0
            for _ in range(2):
                if Q is not None and Q.shape[1]:
                    v -= Q @ (MQ.T @ v)
                for q, mq in zip(cols, mcols):
                    v -= q * (mq @ v)
            mv = MV_fn(v)
            nrm = np.sqrt(max(v @ mv, 0.0))
            if nrm > drop_tol * ref:
                cols.append(v / nrm)
                mcols.append(mv / nrm)
                break
            if basis_dim + len(cols) >= n:
                break
            v = rng.standard_normal(n)
    if not cols:
        return np.zeros((n, 0)), np.zeros((n, 0))
    return np.column_stack(cols), np.column_stack(mcols)


def smallest_eigenpairs(
    pencil: SymPencil,
    k: int,
    tol: float = 1e-9,
    sigma: float | None = None,
    block_size: int | None = None,
    max_basis: int | None = None,
    max_restarts: int = 500,
    seed: int = DEFAULT_SEED,
    h: float | None = None,
) -> Spectrum:
    """The ``k`` smallest eigenpairs of ``A v = lam M v``.

    Parameters
    ----------
    pencil : SymPencil
        ``M`` must be positive definite.
    k : int
        Number of eigenpairs, ``1 <= k < dim``.
    tol : float
        Bound on ``||A v - lam M v|| / (||M v|| max(|lam|, |sigma|))``.
    sigma : float, optional
        Shift below the spectrum. Defaults to -1 for Dirichlet pencils and
        ``-0.1 * max|A_ij|`` for Neumann pencils.

    Returns
    -------
    Spectrum
        Ascending eigenvalues with ``M``-orthonormal eigenvectors.
    """
    A, M = pencil.A.tocsr(), pencil.M.tocsr()
    n = A.shape[0]
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < dim (k=%d, dim=%d)" % (k, n))
    sigma = _default_sigma(pencil) if sigma is None else float(sigma)
    for attempt in range(4):
        try:
            factor = SymmetricFactor(A - sigma * M)
            break
        except FactorizationError:
            if attempt == 3:
                raise
            log.info("shift %g not below the spectrum, moving down", sigma)
            sigma -= 10.0 * max(1.0, abs(sigma))
    rng = np.random.default_rng(seed)
    b = block_size or max(2, k)
    b = min(b, n)
    if max_basis is None:
        max_basis = max(3 * b, 30 * b)
    max_basis = min(max_basis, n)

    def mv(x):
        return M @ x

    Q, MQ = _m_orthonormalize(rng.standard_normal((n, b)), mv, None, None, rng)
    iterations = 0
    lam = vecs = res = None
    for restart in range(max_restarts + 1):
        H = np.zeros((max_basis, max_basis))
        blocks = [(0, Q.shape[1])]
        Qall, MQall = Q, MQ
        while True:
            lo, hi = blocks[-1]
            W = factor.solve(MQall[:, lo:hi])
            iterations += 1
            H[:hi, lo:hi] = MQall.T @ W
            H[lo:hi, :hi] = H[:hi, lo:hi].T
            m = hi
            Hm = 0.5 * (H[:m, :m] + H[:m, :m].T)
            theta, Y = np.linalg.eigh(Hm)
            order = np.argsort(-theta)
            theta, Y = theta[order], Y[:, order]
            kk = min(k, m)
            pos = theta[:kk] > 0
            if kk == k and np.all(pos):
                lam = sigma + 1.0 / theta[:k]
                vecs = Qall @ Y[:, :k]
                R = A @ vecs - (M @ vecs) * lam
                scale = np.linalg.norm(M @ vecs, axis=0) * np.maximum(np.abs(lam), abs(sigma))
                res = np.linalg.norm(R, axis=0) / scale
                if np.all(res <= tol):
                    order = np.argsort(lam)
                    return Spectrum(lam[order], vecs[:, order], res[order], h=h, seed=seed,
                                    iterations=iterations, sigma=sigma)
            if m >= max_basis or m >= n:
                break
            Wn, MWn = _m_orthonormalize(W, mv, Qall, MQall, rng)
            room = min(max_basis, n) - m
            if Wn.shape[1] == 0 or room <= 0:
                break
            Wn, MWn = Wn[:, :room], MWn[:, :room]
            Qall = np.hstack([Qall, Wn])
            MQall = np.hstack([MQall, MWn])
            blocks.append((m, m + Wn.shape[1]))
        if m >= n:
            # the Krylov space is the whole space: Ritz pairs are exact up to roundoff
            if lam is not None:
                order = np.argsort(lam)
                return Spectrum(lam[order], vecs[:, order], res[order], h=h, seed=seed,
                                iterations=iterations, sigma=sigma)
        keep = min(max(b, k), m)
        Q, MQ = _m_orthonormalize(Qall @ Y[:, :keep], mv, None, None, rng)
    raise ConvergenceError(
        "shift-invert Lanczos did not converge after %d restarts (residuals %s)" % (max_restarts, res)
    )


def dense_eigenpairs(pencil: SymPencil, k: int) -> Spectrum:
    """Direct dense generalized eigensolver, used as an oracle."""
    A = pencil.A.toarray()
    M = pencil.M.toarray()
    w, v = sla.eigh(A, M, subset_by_index=[0, k - 1])
    R = A @ v - (M @ v) * w
    res = np.linalg.norm(R, axis=0) / (np.linalg.norm(M @ v, axis=0) * np.maximum(np.abs(w), 1.0))
    return Spectrum(w, v, res)


def rayleigh_quotient(pencil: SymPencil, v: np.ndarray) -> float:
    v = np.asarray(v, dtype=float)
    den = float(v @ (pencil.M @ v))
    if not den > 0:
        raise ValueError("vector has zero M-norm")
    return float(v @ (pencil.A @ v)) / den


def richardson_extrapolate(coarse, fine, order: float = 2, ratio: float = 2.0):
    """Remove the leading ``h**order`` error term from two refinements."""
    return fine + (fine - coarse) / (ratio**order - 1.0)


def observed_order(coarse, fine, exact=None, finer=None, ratio: float = 2.0):
    """Convergence order from errors against ``exact`` or from three levels."""
    if exact is not None:
        return np.log(np.abs(coarse - exact) / np.abs(fine - exact)) / np.log(ratio)
    if finer is None:
        raise ValueError("need either the exact value or a third level")
    return np.log(np.abs(fine - coarse) / np.abs(finer - fine)) / np.log(ratio)


def clusters(values, rtol: float = 1e-8) -> list:
    """Groups of indices whose eigenvalues agree to ``rtol`` relative."""
    values = np.asarray(values, dtype=float)
    groups = [[0]] if len(values) else []
    for i in range(1, len(values)):
        ref = max(abs(values[i]), abs(values[i - 1]), 1e-300)
        if abs(values[i] - values[i - 1]) <= rtol * ref:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups
