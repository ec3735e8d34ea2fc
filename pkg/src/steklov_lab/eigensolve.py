"""Generalized symmetric eigensolves and the Steklov-Dirichlet pipeline."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .assembly import DiscreteProblem, build_problem
from .geometry import ArcSet, BoundaryCurve
from .meshing import Mesh, mesh_domain, refine

__all__ = [
    "EigenError",
    "SpectralResult",
    "generalized_symmetric_eig",
    "full_pencil_eigenvalues",
    "solve_on_mesh",
    "steklov_dirichlet_eigenvalues",
    "rayleigh_quotient",
    "settings_hash",
]

CLUSTER_RTOL = 1e-8


class EigenError(RuntimeError):
    """Eigensolver failure or violated spectral invariant."""


def settings_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vecs), axis=0)
    s = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    s[s == 0] = 1.0
    return vecs * s


def generalized_symmetric_eig(S: np.ndarray, M: np.ndarray, k: int):
    """Smallest ``k`` eigenpairs of ``S y = lam M y`` with ``M`` SPD.

    Cholesky-reduces to the standard problem ``L^{-1} S L^{-T} z = lam z``.
    Eigenvectors are ``M``-orthonormal, each with its largest-magnitude
    entry positive.
    """
    S = np.asarray(S, dtype=float)
    M = np.asarray(M, dtype=float)
    n = S.shape[0]
    if not 1 <= k <= n:
        raise EigenError(f"requested k={k} eigenpairs from a pencil of dimension {n}")
    try:
        L = sla.cholesky(M, lower=True)
    except np.linalg.LinAlgError as err:
        raise EigenError(f"boundary mass matrix is not positive definite: {err}") from err
    X = sla.solve_triangular(L, S, lower=True)
    C = sla.solve_triangular(L, X.T, lower=True)
    C = 0.5 * (C + C.T)
    lam, Z = sla.eigh(C, subset_by_index=[0, k - 1])
    Y = sla.solve_triangular(L.T, Z, lower=False)
    return lam, _fix_signs(Y)


def full_pencil_eigenvalues(p: DiscreteProblem, k: int) -> np.ndarray:
    """Smallest finite eigenvalues of the unreduced pencil ``(A, M)``.

    ``M`` is singular on interior dofs, so the reciprocal pencil
    ``M x = mu A x`` (``A`` SPD) is solved densely and ``lam = 1/mu`` is
    taken over the largest ``mu``.  Independent of the Schur path.
    """
    A = p.A.toarray()
    M = p.M.toarray()
    n = A.shape[0]
    mu = sla.eigh(M, A, eigvals_only=True, subset_by_index=[n - k, n - 1])
    return np.sort(1.0 / mu[::-1])


@dataclass
class SpectralResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    h: float
    k: int
    provenance: dict = field(default_factory=dict)
    clusters: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "lambda": [float(x) for x in self.eigenvalues],
            "residuals": [float(x) for x in self.residuals],
            "h": float(self.h),
            "k": int(self.k),
            "clusters": [list(c) for c in self.clusters],
            "provenance": self.provenance,
        }

    def eigenvector_csv(self, mesh: Mesh) -> str:
        head = ["vertex", "x", "y"] + [f"u_{j + 1}" for j in range(self.k)]
        lines = [",".join(head)]
        for i, (x, y) in enumerate(mesh.vertices):
            row = [str(i), repr(float(x)), repr(float(y))] + [repr(float(v)) for v in self.eigenvectors[i]]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def _clusters(lam: np.ndarray) -> list:
    out, cur = [], [0]
    for j in range(1, len(lam)):
        if abs(lam[j] - lam[j - 1]) <= CLUSTER_RTOL * abs(lam[j]):
            cur.append(j)
        else:
            if len(cur) > 1:
                out.append(cur)
            cur = [j]
    if len(cur) > 1:
        out.append(cur)
    return out


def solve_on_mesh(mesh: Mesh, k: int, problem: DiscreteProblem | None = None,
                  provenance: dict | None = None) -> SpectralResult:
    """Spectrum of the Schur pair on an existing mesh, with invariant checks."""
    p = problem if problem is not None else build_problem(mesh)
    if k < 1:
        raise EigenError("k must be at least 1")
    lam, Y = generalized_symmetric_eig(p.S, p.Ms, k)
    if lam[0] <= 0:
        raise EigenError(f"first eigenvalue {lam[0]:.3e} is not positive")
    U = p.extend(Y)
    Uf = U[p.free]
    AU = p.A @ Uf
    MU = p.M @ Uf
    res = np.linalg.norm(AU - MU * lam, axis=0)
    scale = np.linalg.norm(AU, axis=0)
    if np.any(res > 1e-8 * scale):
        raise EigenError(f"eigenpair residual too large: {(res / scale).max():.3e}")
    gram = Uf.T @ MU
    if np.abs(gram - np.eye(k)).max() > 1e-9:
        raise EigenError("eigenvectors lost boundary-mass orthonormality")
    rq = np.einsum("ij,ij->j", Uf, AU) / np.einsum("ij,ij->j", Uf, MU)
    if np.any(np.abs(rq - lam) > 1e-9 * lam):
        raise EigenError("Rayleigh identity violated")
    return SpectralResult(lam, U, res / scale, mesh.h, k, provenance or {}, _clusters(lam))


def steklov_dirichlet_eigenvalues(curve: BoundaryCurve, arcs: ArcSet, h_target: float, k: int,
                                  refinements: int = 0, endpoint_h: float | None = None) -> SpectralResult:
    """Mesh, assemble, eliminate, reduce and solve for the ``k`` smallest eigenvalues."""
    mesh = mesh_domain(curve, arcs, h_target, endpoint_h=endpoint_h)
    for _ in range(refinements):
        mesh = refine(mesh)
    prov = {
        "curve": curve.to_dict(),
        "arcs": arcs.to_dict()["arcs"],
        "h_target": h_target,
        "refinements": refinements,
        "endpoint_h": endpoint_h,
        "k": k,
    }
    prov["settings_hash"] = settings_hash(prov)
    return solve_on_mesh(mesh, k, provenance=prov)


def rayleigh_quotient(p: DiscreteProblem, v) -> float:
    """``v^T A v / v^T M v`` over free dofs.

    ``v`` may be indexed by free dofs or by all vertices; in the latter case
    values on Dirichlet vertices are discarded (the quotient lives on the
    constrained space).
    """
    v = np.asarray(v, dtype=float)
    if v.shape[0] == p.mesh.n_vertices and v.shape[0] != p.n_free:
        v = v[p.free]
    elif v.shape[0] != p.n_free:
        raise ValueError(f"vector of length {v.shape[0]} matches neither free dofs nor vertices")
    den = float(v @ (p.M @ v))
    if den <= 0:
        raise ValueError("vector has zero trace on the Steklov part; quotient undefined")
    return float(v @ (p.A @ v)) / den
