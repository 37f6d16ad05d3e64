"""Smallest eigenpairs of the symmetric pencil K x = lambda M x."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import MassNotPD, NoConvergence, NotEnoughDof
from .sparse import SymSparse

DENSE_THRESHOLD = 3000
DEFAULT_TOL = 1e-8


@dataclass
class EigResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, M-orthonormal
    residuals: np.ndarray
    method: str


def _as_sparse(a) -> sp.csr_matrix:
    if isinstance(a, SymSparse):
        return a.full
    return sp.csr_matrix(a)


def relative_residuals(K, M, values, vectors) -> np.ndarray:
    """||K x - lambda M x||_2 / ||M x||_2 per column."""
    K, M = _as_sparse(K), _as_sparse(M)
    Mx = M @ vectors
    r = K @ vectors - Mx * values[None, :]
    return np.linalg.norm(r, axis=0) / np.linalg.norm(Mx, axis=0)


def _m_normalize(M, vectors):
    norms = np.sqrt(np.einsum("ij,ij->j", vectors, M @ vectors))
    return vectors / norms[None, :]


def _dense(K, M, count):
    Kd, Md = K.toarray(), M.toarray()
    try:
        L = la.cholesky(Md, lower=True)
    except la.LinAlgError as exc:
        raise MassNotPD(f"mass matrix Cholesky factorization failed: {exc}") from exc
    # C = L^{-1} K L^{-T}
    tmp = la.solve_triangular(L, Kd, lower=True)
    C = la.solve_triangular(L, tmp.T, lower=True).T
    C = 0.5 * (C + C.T)
    w, y = la.eigh(C, subset_by_index=[0, count - 1])
    x = la.solve_triangular(L, y, lower=True, trans="T")
    return w, x


def _polish(K, M, w, x, sweeps=3, tol=DEFAULT_TOL):
    """Refine approximate eigenpairs by shifted subspace iteration + Rayleigh-Ritz."""
    sigma = _safe_shift(K, M)
    lu = spla.splu(sp.csc_matrix(K - sigma * M))
    for _ in range(sweeps):
        if np.all(relative_residuals(K, M, w, x) <= tol):
            break
        y = lu.solve(np.asarray(M @ x))
        kr = y.T @ (K @ y)
        mr = y.T @ (M @ y)
        w, c = la.eigh(0.5 * (kr + kr.T), 0.5 * (mr + mr.T))
        x = y @ c
    return w, x


def _safe_shift(K, M):
    # small negative shift keeps K - sigma M nonsingular when K has a kernel
    scale = float(K.diagonal().sum() / M.diagonal().sum())
    return -1e-6 * scale


def _shift_invert(K, M, count, tol, maxiter=None):
    n = K.shape[0]
    sigma = _safe_shift(K, M)
    ncv = min(n, max(2 * count + 1, count + 20))
    best = None
    for attempt in range(3):
        try:
            w, x = spla.eigsh(K, k=count, M=M, sigma=sigma, which="LM", ncv=ncv,
                              tol=0.0, maxiter=maxiter)
        except spla.ArpackNoConvergence as exc:
            best = exc
            sigma *= 10.0
            ncv = min(n, 2 * ncv)
            continue
        order = np.argsort(w)
        return w[order], x[:, order]
    raise NoConvergence(f"shift-invert iteration did not converge: {best}",
                        best_residual=None)


def solve_gevp(K, M, count: int, tol: float = DEFAULT_TOL, method: str = "auto") -> EigResult:
    """Return the ``count`` smallest eigenpairs of ``K x = lambda M x``.

    ``method`` is ``"dense"``, ``"shift_invert"`` or ``"auto"`` (dense up to
    ``DENSE_THRESHOLD`` unknowns).  Raises NoConvergence when the residual
    contract ``||K x - lambda M x|| <= tol ||M x||`` is not met.
    """
    K, M = _as_sparse(K), _as_sparse(M)
    n = K.shape[0]
    if count < 1:
        raise ValueError("count must be >= 1")
    if count > n:
        raise NotEnoughDof(f"requested {count} eigenpairs from a {n}-dimensional problem")
    if method == "auto":
        method = "dense" if n <= DENSE_THRESHOLD or count >= n - 1 else "shift_invert"
    if method == "dense":
        w, x = _dense(K, M, count)
        if not np.all(relative_residuals(K, M, w, _m_normalize(M, x)) <= tol):
            w, x = _polish(K, M, w, x, tol=tol)
    elif method == "shift_invert":
        if count >= n - 1:
            raise NotEnoughDof("shift-invert needs count < n - 1; use the dense path")
        w, x = _shift_invert(K, M, count, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    x = _m_normalize(M, x)
    res = relative_residuals(K, M, w, x)
    if not np.all(res <= tol):
        raise NoConvergence(
            f"{method} solve missed residual target {tol:g}: worst {res.max():.3e}",
            best_residual=float(res.max()))
    return EigResult(w, x, res, method)
