import numpy as np
import pytest
import scipy.linalg as la
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from neudir.eig import relative_residuals, solve_gevp
from neudir.errors import MassNotPD, NotEnoughDof
from neudir.fem_scalar import mesh_matrices
from neudir.geometry import builtin_domain, triangulate
from neudir.sparse import SymSparse


def _random_pencil(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    b = rng.standard_normal((n, n))
    K = a @ a.T
    M = b @ b.T + n * np.eye(n)
    return K, M


# --------------------------------------------------------------------------- SymSparse


def test_symsparse_folds_duplicates_and_lower_entries():
    # full triplet list of [[2, -1], [-1, 3]] with the diagonal split in two pieces
    a = SymSparse([0, 0, 0, 1, 1], [0, 0, 1, 0, 1], [1.0, 1.0, -1.0, -1.0, 3.0], 2)
    np.testing.assert_array_equal(a.toarray(), [[2, -1], [-1, 3]])
    assert a.entries() == [(0, 0, 2.0), (0, 1, -1.0), (1, 1, 3.0)]


def test_symsparse_ops():
    K, _ = _random_pencil(0, 6)
    a = SymSparse.from_matrix(K)
    x = np.arange(6.0)
    assert a.energy(x) == pytest.approx(x @ K @ x)
    np.testing.assert_allclose(a @ x, K @ x)
    idx = np.array([1, 3, 4])
    np.testing.assert_allclose(a.restrict(idx).toarray(), K[np.ix_(idx, idx)])
    p = sp.csr_matrix(np.eye(6)[:, :2] + np.eye(6)[:, 2:4])
    np.testing.assert_allclose(a.congruence(p).toarray(), p.T @ K @ p, atol=1e-12)


# --------------------------------------------------------------------------- solver


def test_two_by_two_pencil():
    # (1, 1): 2 / 6 = 1/3, (1, -1): 6 / 2 = 3
    K = np.array([[2.0, -1.0], [-1.0, 2.0]])
    M = np.array([[2.0, 1.0], [1.0, 2.0]])
    res = solve_gevp(K, M, 2)
    np.testing.assert_allclose(res.eigenvalues, [1 / 3, 3.0], rtol=1e-14)
    np.testing.assert_allclose(res.eigenvectors.T @ M @ res.eigenvectors, np.eye(2), atol=1e-14)


def test_not_enough_dof():
    with pytest.raises(NotEnoughDof):
        solve_gevp(np.eye(3), np.eye(3), 4)


def test_mass_not_pd():
    with pytest.raises(MassNotPD):
        solve_gevp(np.eye(3), np.diag([1.0, 0.0, 1.0]), 2, method="dense")


def test_unknown_method():
    with pytest.raises(ValueError):
        solve_gevp(np.eye(3), np.eye(3), 1, method="qr")


@pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
def test_dense_and_shift_invert_agree(bc):
    mesh = triangulate(builtin_domain("lshape"), 3)
    K, M = mesh_matrices(mesh)
    if bc == "dirichlet":
        K, M = K.restrict(mesh.interior_vertices), M.restrict(mesh.interior_vertices)
    d = solve_gevp(K, M, 8, method="dense")
    s = solve_gevp(K, M, 8, method="shift_invert")
    assert d.method == "dense" and s.method == "shift_invert"
    np.testing.assert_allclose(d.eigenvalues, s.eigenvalues, rtol=1e-8, atol=1e-10)
    assert np.all(d.residuals <= 1e-8) and np.all(s.residuals <= 1e-8)


def test_auto_switches_to_shift_invert_on_large_problems():
    mesh = triangulate(builtin_domain("square"), 6)
    K, M = mesh_matrices(mesh)
    assert K.n == 4225
    res = solve_gevp(K, M, 3)
    assert res.method == "shift_invert"
    assert abs(res.eigenvalues[0]) < 1e-8


def test_residual_helper_matches_definition():
    K, M = _random_pencil(3, 5)
    res = solve_gevp(K, M, 5)
    r = relative_residuals(K, M, res.eigenvalues, res.eigenvectors)
    x = res.eigenvectors[:, 0]
    expected = np.linalg.norm(K @ x - res.eigenvalues[0] * M @ x) / np.linalg.norm(M @ x)
    assert r[0] == pytest.approx(expected)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 12))
def test_eigenvalues_match_scipy_and_are_sorted(seed, n):
    K, M = _random_pencil(seed, n)
    ref = la.eigh(K, M, eigvals_only=True)
    res = solve_gevp(K, M, n)
    np.testing.assert_allclose(res.eigenvalues, ref, rtol=1e-8, atol=1e-10 * ref.max())
    assert np.all(np.diff(res.eigenvalues) >= 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 10), st.data())
def test_permutation_invariance(seed, n, data):
    K, M = _random_pencil(seed, n)
    perm = np.array(data.draw(st.permutations(range(n))))
    a = solve_gevp(K, M, n).eigenvalues
    b = solve_gevp(K[np.ix_(perm, perm)], M[np.ix_(perm, perm)], n).eigenvalues
    np.testing.assert_allclose(a, b, rtol=1e-8, atol=1e-10 * a.max())


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 10))
def test_principal_submatrix_raises_eigenvalues(seed, n):
    # Cauchy interlacing for pencils: deleting a dof cannot lower the j-th eigenvalue
    K, M = _random_pencil(seed, n)
    full = solve_gevp(K, M, n - 1).eigenvalues
    sub = solve_gevp(K[1:, 1:], M[1:, 1:], n - 1).eigenvalues
    assert np.all(sub >= full * (1 - 1e-9) - 1e-12)
