"""P1 assembly of the Steklov-Dirichlet pencil and its boundary (Schur) reduction."""

from __future__ import annotations

import io
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .meshing import DIRICHLET, INTERIOR, STEKLOV, Mesh

__all__ = [
    "AssemblyError",
    "DiscreteProblem",
    "assemble_stiffness",
    "assemble_boundary_mass",
    "apply_dirichlet",
    "schur_reduce",
    "build_problem",
    "solve_mixed_bvp",
    "spd_factor",
    "coo_dump",
]


SCHUR_BLOCK = 64


class AssemblyError(RuntimeError):
    """Assembly or factorization failure."""


def element_stiffness(p: np.ndarray) -> np.ndarray:
    """Element matrices ``area * G G^T`` for triangles ``p`` of shape (T, 3, 2)."""
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    area2 = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    if np.any(area2 <= 0):
        raise AssemblyError("degenerate or inverted triangle in stiffness assembly")
    # rotated opposite edges give the barycentric gradients times 2*area
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    g = np.stack([-e[..., 1], e[..., 0]], axis=-1)
    return np.einsum("tik,tjk->tij", g, g) / (2 * area2)[:, None, None]


def assemble_stiffness(mesh: Mesh) -> sp.csr_matrix:
    """Dirichlet-energy matrix on all vertices; constants lie in its kernel."""
    t = mesh.triangles
    ke = element_stiffness(mesh.vertices[t])
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = mesh.n_vertices
    return sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def assemble_boundary_mass(mesh: Mesh) -> sp.csr_matrix:
    """Lumped-free 1D P1 mass over the Steklov-tagged boundary edges."""
    e = mesh.boundary_edges[mesh.steklov_edge]
    ell = np.linalg.norm(mesh.vertices[e[:, 0]] - mesh.vertices[e[:, 1]], axis=1)
    block = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6
    vals = (ell[:, None, None] * block).ravel()
    rows = np.repeat(e, 2, axis=1).ravel()
    cols = np.tile(e, (1, 2)).ravel()
    n = mesh.n_vertices
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


class SPDFactor:
    """Sparse LU with diagonal pivoting only; success certifies positive definiteness."""

    def __init__(self, A: sp.spmatrix, what: str = "matrix"):
        A = sp.csc_matrix(A)
        if A.shape[0] == 0:
            self._lu = None
            return
        try:
            lu = splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                      options={"SymmetricMode": True})
        except RuntimeError as err:
            raise AssemblyError(f"factorization of {what} failed: {err}") from err
        d = lu.U.diagonal()
        if not np.all(d > 0) or not np.all(lu.perm_r == lu.perm_c):
            raise AssemblyError(f"{what} is not positive definite (ill-conditioned mesh?)")
        self._lu = lu

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self._lu is None:
            return np.zeros_like(b, dtype=float)
        return self._lu.solve(np.asarray(b, dtype=float))


def spd_factor(A, what="matrix") -> SPDFactor:
    return SPDFactor(A, what)


@dataclass(frozen=True, eq=False)
class DiscreteProblem:
    """Pencil on the free (non-Dirichlet) vertices plus its boundary reduction.

    ``steklov_dofs`` and ``interior_dofs`` index into ``free``; ``S``/``Ms``
    are filled by :func:`schur_reduce`.
    """

    mesh: Mesh
    K: sp.csr_matrix
    B: sp.csr_matrix
    free: np.ndarray
    A: sp.csr_matrix
    M: sp.csr_matrix
    steklov_dofs: np.ndarray
    interior_dofs: np.ndarray
    S: Optional[np.ndarray] = None
    Ms: Optional[np.ndarray] = None
    interior_factor: Optional[SPDFactor] = None

    @property
    def n_free(self) -> int:
        return len(self.free)

    def extend(self, y: np.ndarray) -> np.ndarray:
        """Harmonic extension of Steklov-dof values ``y`` (columns) to all vertices."""
        if self.interior_factor is None:
            raise AssemblyError("problem has not been Schur-reduced")
        y = np.asarray(y, dtype=float)
        cols = y.reshape(len(self.steklov_dofs), -1)
        A_ib = self.A[self.interior_dofs][:, self.steklov_dofs]
        xi = -self.interior_factor.solve(np.asarray(A_ib @ cols))
        u = np.zeros((self.mesh.n_vertices, cols.shape[1]))
        u[self.free[self.steklov_dofs]] = cols
        u[self.free[self.interior_dofs]] = xi.reshape(len(self.interior_dofs), -1)
        return u.reshape((self.mesh.n_vertices,) + y.shape[1:])


def apply_dirichlet(K: sp.spmatrix, B: sp.spmatrix, mesh: Mesh, check: bool = True) -> DiscreteProblem:
    """Eliminate the rows and columns of Dirichlet-flagged vertices."""
    flags = mesh.vertex_flags
    if not np.any(flags == DIRICHLET):
        raise AssemblyError("mesh has no Dirichlet vertices; the pencil would be singular")
    free = np.flatnonzero(flags != DIRICHLET)
    A = sp.csr_matrix(K[free][:, free])
    M = sp.csr_matrix(B[free][:, free])
    ff = flags[free]
    p = DiscreteProblem(mesh, sp.csr_matrix(K), sp.csr_matrix(B), free, A, M,
                        np.flatnonzero(ff == STEKLOV), np.flatnonzero(ff == INTERIOR))
    if check:
        SPDFactor(A, "stiffness on free dofs")
    return p


def schur_reduce(p: DiscreteProblem) -> DiscreteProblem:
    """Condense interior unknowns: ``S = A_bb - A_bi A_ii^{-1} A_ib``."""
    b, i = p.steklov_dofs, p.interior_dofs
    A = p.A
    A_bb = A[b][:, b].toarray()
    fac = SPDFactor(A[i][:, i], "interior stiffness block")
    if len(i):
        A_ib = sp.csc_matrix(A[i][:, b])
        S = A_bb.copy()
        # column blocks bound the dense workspace on fine meshes
        for j in range(0, len(b), SCHUR_BLOCK):
            cols = slice(j, min(j + SCHUR_BLOCK, len(b)))
            X = fac.solve(A_ib[:, cols].toarray())
            S[:, cols] -= A_ib.T @ X
    else:
        S = A_bb
    asym = np.abs(S - S.T).max(initial=0.0)
    if asym > 1e-12 * max(np.abs(S).max(initial=0.0), 1.0) * max(len(b), 1):
        raise AssemblyError(f"Schur complement lost symmetry (max deviation {asym:.3e})")
    S = 0.5 * (S + S.T)
    Ms = p.M[b][:, b].toarray()
    return replace(p, S=S, Ms=Ms, interior_factor=fac)


def build_problem(mesh: Mesh, reduce: bool = True) -> DiscreteProblem:
    """Assemble, eliminate Dirichlet dofs and (by default) Schur-reduce."""
    p = apply_dirichlet(assemble_stiffness(mesh), assemble_boundary_mass(mesh), mesh, check=not reduce)
    return schur_reduce(p) if reduce else p


def solve_mixed_bvp(p: DiscreteProblem, neumann_data, dirichlet_data) -> np.ndarray:
    """Solve the harmonic problem with flux data on the Steklov part.

    ``neumann_data`` holds flux values on ``mesh.steklov_closure_vertices``
    (interface endpoints included, so the data can be interpolated along
    every Steklov edge); ``dirichlet_data`` holds values on
    ``mesh.dirichlet_vertices``.  Returns nodal values on all vertices.
    """
    mesh = p.mesh
    nv = mesh.steklov_closure_vertices
    dv = mesh.dirichlet_vertices
    g = np.zeros(mesh.n_vertices)
    gN = np.asarray(neumann_data, dtype=float)
    uD = np.asarray(dirichlet_data, dtype=float)
    if gN.shape != (len(nv),) or uD.shape != (len(dv),):
        raise ValueError(f"expected {len(nv)} Neumann and {len(dv)} Dirichlet values, "
                         f"got {gN.shape} and {uD.shape}")
    g[nv] = gN
    u = np.zeros(mesh.n_vertices)
    u[dv] = uD
    rhs = p.B @ g - p.K @ u
    f = p.free
    uf = SPDFactor(p.A, "stiffness on free dofs").solve(rhs[f])
    res = np.linalg.norm(p.A @ uf - rhs[f])
    if res > 1e-10 * max(np.linalg.norm(rhs[f]), 1e-300) and np.linalg.norm(rhs[f]) > 0:
        raise AssemblyError(f"mixed BVP residual {res:.3e} above tolerance")
    u[f] = uf
    return u


def coo_dump(A: sp.spmatrix) -> str:
    """Sorted ``row col value`` lines for external verification."""
    c = sp.coo_matrix(sp.csr_matrix(A))
    order = np.lexsort((c.col, c.row))
    buf = io.StringIO()
    for r, k, v in zip(c.row[order], c.col[order], c.data[order]):
        buf.write(f"{int(r)} {int(k)} {float(v)!r}\n")
    return buf.getvalue()
