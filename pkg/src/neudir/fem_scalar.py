"""P1 stiffness/mass assembly and scalar Laplacian spectra."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eig import DEFAULT_TOL, solve_gevp
from .errors import NotEnoughDof
from .geometry import TriMesh
from .sparse import SymSparse

MULTIPLICITY_RTOL = 1e-2
ZERO_MODE_RTOL = 1e-8


def p1_gradients(mesh: TriMesh):
    """Barycentric gradients per triangle, shape (T, 3, 2), and triangle areas."""
    p = mesh.points[mesh.triangles]
    area = mesh.areas
    # grad of the hat function at vertex a is rot(p_c - p_b) / (2 area)
    opp = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    grads = np.stack([-opp[..., 1], opp[..., 0]], axis=-1) / (2 * area[:, None, None])
    return grads, area


def _scatter(mesh, local):
    tri = mesh.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    return SymSparse(rows, cols, local.ravel(), mesh.n_points)


def assemble_scalar(mesh: TriMesh):
    """Return the P1 (stiffness, mass) pair on all mesh vertices."""
    grads, area = p1_gradients(mesh)
    ke = np.einsum("tad,tbd->tab", grads, grads) * area[:, None, None]
    me = (np.full((3, 3), 1.0) + np.eye(3))[None] * (area / 12.0)[:, None, None]
    return _scatter(mesh, ke), _scatter(mesh, me)


def multiplicity_groups(values, rtol=MULTIPLICITY_RTOL):
    """Chain consecutive eigenvalues closer than ``rtol`` (relative) into clusters.

    Values at or below the zero-mode cutoff never join a positive cluster.
    """
    values = np.asarray(values, dtype=float)
    groups = []
    for i, v in enumerate(values):
        if groups:
            prev = values[groups[-1][-1]]
            if abs(v - prev) <= rtol * max(abs(v), abs(prev)) and min(abs(v), abs(prev)) > 0:
                groups[-1].append(i)
                continue
        groups.append([i])
    return groups


def zero_mode_count(values) -> int:
    """Number of eigenvalues below the zero-mode cutoff 1e-8 * (second eigenvalue)."""
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        return 0
    if len(values) == 1:
        return int(abs(values[0]) < 1e-12)
    return int(np.sum(values < ZERO_MODE_RTOL * values[1]))


@dataclass
class Spectrum:
    """Ascending eigenvalues with metadata.

    ``bc_label`` is one of dirichlet, neumann, vector_A, merged, optionally
    prefixed with ``analytic:`` for closed-form reference spectra.
    """

    values: np.ndarray
    bc_label: str
    residuals: np.ndarray | None = None
    mesh_h: float | None = None
    dof: int | None = None
    domain: str | None = None
    tol: float | None = None
    vectors: np.ndarray | None = field(default=None, repr=False)
    multiplicity_groups: list = field(init=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.residuals is not None:
            self.residuals = np.asarray(self.residuals, dtype=float)
        self.multiplicity_groups = multiplicity_groups(self.values)

    @property
    def bc(self) -> str:
        return self.bc_label.removeprefix("analytic:")

    def __len__(self):
        return len(self.values)

    def multiplicity(self, i: int) -> int:
        """Cluster size of the 0-based eigenvalue index ``i``."""
        for g in self.multiplicity_groups:
            if i in g:
                return len(g)
        raise IndexError(i)

    def to_json(self) -> dict:
        return {
            "bc": self.bc_label,
            "values": self.values.tolist(),
            "residuals": [] if self.residuals is None else self.residuals.tolist(),
            "mesh_h": self.mesh_h,
            "dof": self.dof,
            "domain": self.domain,
            "multiplicities": [len(g) for g in self.multiplicity_groups],
        }


def scalar_spectrum(mesh: TriMesh, bc: str, count: int, tol: float = DEFAULT_TOL,
                    method: str = "auto") -> Spectrum:
    """Smallest ``count`` eigenvalues of the Dirichlet or Neumann Laplacian.

    Dirichlet eliminates the boundary vertices; eigenvectors in the returned
    spectrum are always expanded to all mesh vertices (zero on the boundary).
    """
    if bc not in ("dirichlet", "neumann"):
        raise ValueError(f"bc must be dirichlet or neumann, got {bc!r}")
    K, M = mesh_matrices(mesh)
    if bc == "dirichlet":
        free = mesh.interior_vertices
        if len(free) == 0:
            raise NotEnoughDof("mesh has no interior vertex")
        K, M = K.restrict(free), M.restrict(free)
    else:
        free = np.arange(mesh.n_points)
    if count > K.n:
        raise NotEnoughDof(f"{bc} problem has {K.n} dofs, {count} eigenvalues requested")
    res = solve_gevp(K, M, count, tol, method=method)
    vectors = np.zeros((mesh.n_points, count))
    vectors[free] = res.eigenvectors
    return Spectrum(res.eigenvalues, bc, res.residuals, mesh.h, K.n, mesh.name, tol, vectors)


def mesh_matrices(mesh: TriMesh):
    """Cached ``assemble_scalar`` (meshes are immutable)."""
    if "scalar" not in mesh._cache:
        mesh._cache["scalar"] = assemble_scalar(mesh)
    return mesh._cache["scalar"]
