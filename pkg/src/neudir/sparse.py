"""Symmetric sparse matrices stored by their upper triangle."""

from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.sparse as sp


class SymSparse:
    """Symmetric matrix holding only entries with ``row <= col``.

    Built from any (possibly duplicated, possibly lower-triangular) COO
    triplets of a symmetric matrix: off-diagonal entries are folded into the
    upper triangle, so symmetry holds by construction.
    """

    def __init__(self, rows, cols, values, n: int):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=float)
        lo = rows > cols
        # a full symmetric triplet list contributes (i,j) and (j,i); keep the upper copy
        keep = ~lo
        r, c, v = rows[keep], cols[keep], values[keep]
        self.upper = sp.csr_matrix((v, (r, c)), shape=(n, n))
        self.upper.sum_duplicates()
        self.upper.eliminate_zeros()
        self.n = n

    @classmethod
    def from_matrix(cls, a) -> "SymSparse":
        """Wrap a symmetric scipy/numpy matrix (only its upper triangle is read)."""
        coo = sp.coo_matrix(sp.triu(sp.csr_matrix(a)))
        return cls(coo.row, coo.col, coo.data, a.shape[0])

    @cached_property
    def full(self) -> sp.csr_matrix:
        u = self.upper
        d = sp.diags(u.diagonal())
        return sp.csr_matrix(u + u.T - d)

    def toarray(self) -> np.ndarray:
        return self.full.toarray()

    def diagonal(self) -> np.ndarray:
        return self.upper.diagonal()

    def entries(self):
        """Stored (row, col, value) triplets, row <= col."""
        coo = self.upper.tocoo()
        return list(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))

    def energy(self, x) -> float:
        """Quadratic form x^T A x."""
        x = np.asarray(x, dtype=float)
        return float(x @ (self.full @ x))

    def __matmul__(self, x):
        return self.full @ x

    def restrict(self, idx) -> "SymSparse":
        """Principal submatrix on the index set ``idx``."""
        sub = self.full[idx][:, idx]
        return SymSparse.from_matrix(sub)

    def congruence(self, p) -> "SymSparse":
        """P^T A P for a (sparse) basis matrix P."""
        p = sp.csr_matrix(p)
        return SymSparse.from_matrix(p.T @ self.full @ p)

    def __repr__(self):
        return f"SymSparse(n={self.n}, nnz_upper={self.upper.nnz})"
