"""Continuous P1 vector fields for the form  a[u] = int |div u|^2 + |curl u|^2.

Fields are stored blockwise: dof ``c * n + i`` is component ``c`` at vertex
``i``.  The tangential boundary condition is imposed strongly through a basis
matrix ``P`` so that every reduced coefficient vector ``y`` gives the
admissible field ``P @ y``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .eig import DEFAULT_TOL, solve_gevp
from .errors import NonConvexCorner, NotEnoughDof
from .fem_scalar import Spectrum, mesh_matrices, multiplicity_groups, p1_gradients
from .geometry import TriMesh
from .sparse import SymSparse

CLASSIFY_THRESHOLD = 0.1


def _block_scatter(mesh, local):
    # local: (T, 6, 6) over [u1_a, u1_b, u1_c, u2_a, u2_b, u2_c]
    n = mesh.n_points
    dofs = np.hstack([mesh.triangles, mesh.triangles + n])
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    return SymSparse(rows, cols, local.ravel(), 2 * n)


def div_curl_operators(mesh: TriMesh):
    """Per-triangle coefficient rows of div u and curl u, each of shape (T, 6)."""
    g, area = p1_gradients(mesh)
    gx, gy = g[..., 0], g[..., 1]
    div = np.hstack([gx, gy])
    curl = np.hstack([-gy, gx])
    return div, curl, area


def div_curl_matrices(mesh: TriMesh):
    """Full-space (unconstrained) matrices of int |div u|^2 and int |curl u|^2."""
    key = "divcurl"
    if key not in mesh._cache:
        div, curl, area = div_curl_operators(mesh)
        d = np.einsum("ta,tb->tab", div, div) * area[:, None, None]
        c = np.einsum("ta,tb->tab", curl, curl) * area[:, None, None]
        mesh._cache[key] = (_block_scatter(mesh, d), _block_scatter(mesh, c))
    return mesh._cache[key]


def vector_mass(mesh: TriMesh) -> SymSparse:
    _, M = mesh_matrices(mesh)
    return SymSparse.from_matrix(sp.block_diag([M.full, M.full]))


@dataclass(frozen=True)
class TangentialConstraintSet:
    """Per-vertex boundary rule and the basis of admissible P1 fields.

    ``kind[i]`` is 2 (interior, both components free), 1 (non-corner boundary
    vertex, tangential component free) or 0 (corner, pinned to zero).
    ``basis`` has shape (2n, r); its transpose is the reduction map.
    """

    kind: np.ndarray
    tangent: np.ndarray
    basis: sp.csr_matrix

    @property
    def n_reduced(self) -> int:
        return self.basis.shape[1]

    def expand(self, y) -> np.ndarray:
        """Reduced coefficients -> full blockwise field."""
        return self.basis @ y

    def reduce(self, u) -> np.ndarray:
        return self.basis.T @ u

    def contains(self, u, atol=0.0) -> bool:
        """True when the full field ``u`` satisfies the constraints."""
        n = len(self.kind)
        u1, u2 = u[:n], u[n:]
        pinned = self.kind == 0
        bnd = self.kind == 1
        normal = np.column_stack([self.tangent[:, 1], -self.tangent[:, 0]])
        ok_pin = np.all(np.abs(u1[pinned]) <= atol) and np.all(np.abs(u2[pinned]) <= atol)
        un = u1[bnd] * normal[bnd, 0] + u2[bnd] * normal[bnd, 1]
        return bool(ok_pin and np.all(np.abs(un) <= atol))


def vertex_normals(mesh: TriMesh) -> np.ndarray:
    """Angle-bisector normal at every boundary vertex (in cycle order)."""
    n_out = mesh.normals
    n_in = np.roll(mesh.normals, 1, axis=0)
    v = n_in + n_out
    return v / np.linalg.norm(v, axis=1)[:, None]


def tangential_constraints(mesh: TriMesh) -> TangentialConstraintSet:
    n = mesh.n_points
    kind = np.full(n, 2, dtype=np.int8)
    tangent = np.zeros((n, 2))
    bverts = mesh.boundary_vertices
    nu = vertex_normals(mesh)
    kind[bverts] = 1
    tangent[bverts] = np.column_stack([-nu[:, 1], nu[:, 0]])
    kind[mesh.corner_vertices] = 0
    tangent[mesh.corner_vertices] = 0.0
    rows, cols, vals = [], [], []
    col = 0
    for i in range(n):
        if kind[i] == 2:
            rows += [i, n + i]
            cols += [col, col + 1]
            vals += [1.0, 1.0]
            col += 2
        elif kind[i] == 1:
            rows += [i, n + i]
            cols += [col, col]
            vals += [tangent[i, 0], tangent[i, 1]]
            col += 1
    basis = sp.csr_matrix((vals, (rows, cols)), shape=(2 * n, col))
    return TangentialConstraintSet(kind, tangent, basis)


def assemble_vector_form(mesh: TriMesh):
    """Reduced (form, mass, constraints) for the div-curl form on tangential fields."""
    D, C = div_curl_matrices(mesh)
    form = SymSparse.from_matrix(D.full + C.full)
    mass = vector_mass(mesh)
    cons = tangential_constraints(mesh)
    return form.congruence(cons.basis), mass.congruence(cons.basis), cons


@dataclass
class VectorEigenfield:
    coefficients: np.ndarray
    eigenvalue: float
    div_energy: float
    curl_energy: float
    l2_norm_sq: float = 1.0
    label: str | None = None

    @property
    def rayleigh_defect(self) -> float:
        return abs(self.div_energy + self.curl_energy - self.eigenvalue * self.l2_norm_sq)


def reentrant_corners(mesh: TriMesh) -> np.ndarray:
    """Boundary vertices where the boundary turns clockwise (interior angle > pi)."""
    t_out = mesh.tangents
    t_in = np.roll(mesh.tangents, 1, axis=0)
    turn = t_in[:, 0] * t_out[:, 1] - t_in[:, 1] * t_out[:, 0]
    return mesh.boundary_vertices[turn < -1e-12]


def vector_spectrum(mesh: TriMesh, count: int, tol: float = DEFAULT_TOL, method: str = "auto"):
    """Smallest ``count`` eigenpairs of the discrete div-curl operator.

    Returns ``(Spectrum, [VectorEigenfield, ...])``.  Meshes of polygons with
    a reentrant corner are refused: there the continuous eigenfields leave
    H^1 and nodal elements converge to the wrong limit.
    """
    bad = reentrant_corners(mesh)
    if len(bad):
        raise NonConvexCorner(f"reentrant corner at vertex {int(bad[0])}; "
                              "the nodal vector discretisation requires convex corners")
    A, Mv, cons = assemble_vector_form(mesh)
    if count > A.n:
        raise NotEnoughDof(f"vector problem has {A.n} dofs, {count} eigenvalues requested")
    res = solve_gevp(A, Mv, count, tol, method=method)
    D, C = div_curl_matrices(mesh)
    Y = _split_clusters(res.eigenvalues, res.eigenvectors, cons, D)
    fields = []
    for j in range(count):
        y = Y[:, j]
        u = cons.expand(y)
        norm_sq = float(Mv.energy(y))
        div_e, curl_e = D.energy(u), C.energy(u)
        f = VectorEigenfield(y, (div_e + curl_e) / norm_sq, div_e, curl_e, norm_sq)
        f.label = classify_eigenfield(f)
        fields.append(f)
    spec = Spectrum(res.eigenvalues, "vector_A", res.residuals, mesh.h, A.n, mesh.name, tol)
    spec.vectors = Y
    return spec, fields


def _split_clusters(values, Y, cons, D):
    """Rotate each eigenvalue cluster so the div energy is diagonal on it.

    Inside a (near-)degenerate cluster the solver may return any mixture of
    gradient-like and rot-gradient-like fields; diagonalising the div energy
    over the cluster recovers the purest basis.  Columns stay M-orthonormal.
    """
    Y = Y.copy()
    Dfull = D.full
    for g in multiplicity_groups(values):
        if len(g) < 2:
            continue
        U = cons.expand(Y[:, g])
        dg = U.T @ (Dfull @ U)
        _, q = np.linalg.eigh(0.5 * (dg + dg.T))
        Y[:, g] = Y[:, g] @ q
    return Y


def classify_eigenfield(field: VectorEigenfield, threshold: float = CLASSIFY_THRESHOLD) -> str:
    """gradient_type, perp_gradient_type or mixed, by the energy split."""
    total = field.div_energy + field.curl_energy
    if field.curl_energy <= threshold * total and field.div_energy <= threshold * total:
        return "mixed"
    if field.curl_energy <= threshold * total:
        return "gradient_type"
    if field.div_energy <= threshold * total:
        return "perp_gradient_type"
    return "mixed"


def perp_gradient(mesh: TriMesh, phi) -> np.ndarray:
    """Elementwise constant rot-gradient (-d2 phi, d1 phi), shape (T, 2)."""
    g, _ = p1_gradients(mesh)
    grad = np.einsum("tad,ta->td", g, np.asarray(phi)[mesh.triangles])
    return np.column_stack([-grad[:, 1], grad[:, 0]])


def normal_trace_perp_gradient(mesh: TriMesh, phi) -> np.ndarray:
    """<rot-grad phi, nu> on every boundary edge, from the triangle owning the edge."""
    if "edge_owner" not in mesh._cache:
        owner = {}
        tri = mesh.triangles
        for t, (a, b, c) in enumerate(tri.tolist()):
            for e in ((a, b), (b, c), (c, a)):
                owner[e] = t
        # CCW boundary edges appear with the same orientation in their triangle
        mesh._cache["edge_owner"] = np.array([owner[(int(i), int(j))]
                                              for i, j in mesh.boundary_edges])
    w = perp_gradient(mesh, phi)[mesh._cache["edge_owner"]]
    return (w * mesh.normals).sum(axis=1)


def eigenfield_to_json(field: VectorEigenfield, cons: TangentialConstraintSet) -> dict:
    u = cons.expand(field.coefficients)
    n = len(cons.kind)
    return {
        "eigenvalue": field.eigenvalue,
        "div_energy": field.div_energy,
        "curl_energy": field.curl_energy,
        "label": field.label,
        "vectors": np.column_stack([u[:n], u[n:]]).tolist(),
    }
