import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from steklov_lab.assembly import build_problem
from steklov_lab.eigensolve import (
    EigenError,
    _clusters,
    generalized_symmetric_eig,
    rayleigh_quotient,
    solve_on_mesh,
    steklov_dirichlet_eigenvalues,
)
from steklov_lab.geometry import ArcSet, BoundaryCurve, lgl_sequence
from steklov_lab.meshing import mesh_domain, retag

from conftest import DISK, SQUARE

PI = math.pi


def count_below(S, M, sigma):
    """Number of pencil eigenvalues below ``sigma`` via Sylvester inertia."""
    _, d, _ = sla.ldl(S - sigma * M)
    return int(np.sum(np.linalg.eigvalsh(d) < 0))


def bisect_eigenvalues(S, M, k, tol=1e-13):
    hi0 = np.abs(np.linalg.eigvals(np.linalg.solve(M, S))).max() * 2 + 1
    out = []
    for j in range(1, k + 1):
        lo, hi = -hi0, hi0
        while hi - lo > tol * max(1.0, abs(hi)):
            mid = 0.5 * (lo + hi)
            if count_below(S, M, mid) >= j:
                hi = mid
            else:
                lo = mid
        out.append(0.5 * (lo + hi))
    return np.array(out)


def test_diagonal_pencil():
    lam, Y = generalized_symmetric_eig(np.diag([2.0, 6.0]), np.diag([1.0, 2.0]), 2)
    np.testing.assert_allclose(lam, [2.0, 3.0], rtol=1e-14)
    np.testing.assert_allclose(np.abs(Y), [[1, 0], [0, 1 / math.sqrt(2)]], atol=1e-14)


def test_scaled_pencil_gives_constant():
    rng = np.random.default_rng(1)
    G = rng.standard_normal((6, 6))
    M = G @ G.T + 6 * np.eye(6)
    lam, _ = generalized_symmetric_eig(2 * M, M, 6)
    np.testing.assert_allclose(lam, 2.0, rtol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_random_pencil_matches_inertia_bisection(seed):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((20, 20))
    H = rng.standard_normal((20, 20))
    S = G @ G.T + 0.1 * np.eye(20)
    M = H @ H.T + 20 * np.eye(20)
    lam, Y = generalized_symmetric_eig(S, M, 6)
    ref = bisect_eigenvalues(S, M, 6)
    np.testing.assert_allclose(lam, ref, rtol=1e-10)
    np.testing.assert_allclose(Y.T @ M @ Y, np.eye(6), atol=1e-12)


def test_k_too_large():
    with pytest.raises(EigenError, match="k=3"):
        generalized_symmetric_eig(np.eye(2), np.eye(2), 3)


def test_non_spd_mass_rejected():
    with pytest.raises(EigenError):
        generalized_symmetric_eig(np.eye(2), np.diag([1.0, -1.0]), 1)


def test_sign_convention():
    rng = np.random.default_rng(3)
    G = rng.standard_normal((8, 8))
    _, Y = generalized_symmetric_eig(G @ G.T, np.eye(8), 4)
    for col in Y.T:
        assert col[np.argmax(np.abs(col))] > 0


@pytest.fixture(scope="module")
def half_disk_problem():
    m = mesh_domain(DISK, ArcSet(DISK, [(0, PI)]), 0.1)
    return build_problem(m)


def test_rayleigh_quotient_examples(half_disk_problem):
    p = half_disk_problem
    res = solve_on_mesh(p.mesh, 3, p)
    for j in range(3):
        assert rayleigh_quotient(p, res.eigenvectors[:, j]) == pytest.approx(res.eigenvalues[j], rel=1e-12)
    zero_trace = np.zeros(p.mesh.n_vertices)
    with pytest.raises(ValueError):
        rayleigh_quotient(p, zero_trace)


def test_rayleigh_bounded_below_by_lambda1(half_disk_problem):
    p = half_disk_problem
    lam1 = solve_on_mesh(p.mesh, 1, p).eigenvalues[0]
    rng = np.random.default_rng(7)
    for _ in range(200):
        v = rng.standard_normal(p.n_free)
        assert rayleigh_quotient(p, v) >= lam1 * (1 - 1e-12)


def test_scaling_covariance():
    small = steklov_dirichlet_eigenvalues(DISK, ArcSet(DISK, [(0, PI)]), 0.1, 3).eigenvalues
    big_curve = BoundaryCurve.circle(2.0)
    big = steklov_dirichlet_eigenvalues(big_curve, ArcSet(big_curve, [(0, 2 * PI)]), 0.2, 3).eigenvalues
    np.testing.assert_allclose(big, small / 2, rtol=1e-3)


def test_cluster_detection():
    assert _clusters(np.array([1.0, 2.0, 2.0 * (1 + 1e-10), 3.0])) == [[1, 2]]
    assert _clusters(np.array([1.0, 1.0 + 1e-6, 2.0])) == []
    # unstructured meshes break the 4-fold symmetry, so the near pair is not flagged
    res = steklov_dirichlet_eigenvalues(DISK, lgl_sequence(DISK, 0.5, 4), 0.1, 3)
    assert abs(res.eigenvalues[1] - res.eigenvalues[2]) <= 1e-2 * res.eigenvalues[1]


def test_result_dict_keys():
    res = steklov_dirichlet_eigenvalues(SQUARE, ArcSet(SQUARE, [(2, 3)]), 0.2, 2)
    d = res.to_dict()
    assert set(d) == {"lambda", "residuals", "h", "k", "clusters", "provenance"}
    assert len(d["lambda"]) == 2 and d["provenance"]["settings_hash"]
    assert np.all(np.diff(d["lambda"]) >= 0)
    assert max(d["residuals"]) <= 1e-8


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 2 * PI), st.floats(0.4, 2.0), st.floats(0.25, 1.0))
def test_shared_mesh_domain_monotonicity(start, inner, extra):
    """Enlarging the Steklov part on a fixed mesh cannot raise any eigenvalue."""
    small = ArcSet(DISK, [(start, start + inner)])
    big = ArcSet(DISK, [(start, start + inner + extra)])
    mesh = mesh_domain(DISK, small, 0.1, extra_breakpoints=[np.mod(start + inner + extra, 2 * PI)])
    ls = solve_on_mesh(retag(mesh, small), 2).eigenvalues
    lb = solve_on_mesh(retag(mesh, big), 2).eigenvalues
    assert np.all(lb <= ls * (1 + 1e-9))
