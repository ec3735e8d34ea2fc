"""Conforming triangulations with Steklov/Dirichlet boundary tags.

The boundary polyline is sampled on the exact curve with forced vertices at
every corner and every arc endpoint; the interior is filled by constrained
Delaunay refinement (Shewchuk's Triangle, through the ``triangle`` package)
without inserting extra boundary vertices, so that the boundary sampling
and its tags are fully controlled here.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np
import triangle

from .geometry import ArcSet, BoundaryCurve, SNAP, complement

__all__ = [
    "MeshingError",
    "Mesh",
    "MeshQuality",
    "INTERIOR",
    "STEKLOV",
    "DIRICHLET",
    "mesh_domain",
    "retag",
    "refine",
    "rotate_mesh",
    "deform_to",
    "mesh_quality",
    "max_admissible_h",
]

INTERIOR, STEKLOV, DIRICHLET = 0, 1, 2

MIN_ANGLE_DEG = 15.0
# boundary spacing grows away from short forced segments at this rate
GRADING = 0.3


class MeshingError(ValueError):
    """Mesh cannot be produced for the requested inputs."""

    def __init__(self, msg, max_h=None):
        super().__init__(msg)
        self.max_h = max_h


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangulation of the domain bounded by ``curve``.

    Boundary edge ``i`` joins ``boundary_vertices[i]`` to
    ``boundary_vertices[i + 1]`` (cyclically), following the positive
    orientation of the curve; ``boundary_s`` holds the arclength of each
    boundary vertex.
    """

    curve: BoundaryCurve
    arcs: ArcSet
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_vertices: np.ndarray
    boundary_s: np.ndarray
    steklov_edge: np.ndarray
    edge_interval: np.ndarray
    vertex_flags: np.ndarray

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def boundary_edges(self) -> np.ndarray:
        b = self.boundary_vertices
        return np.stack([b, np.roll(b, -1)], axis=1)

    @property
    def edges(self) -> np.ndarray:
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    @property
    def h(self) -> float:
        e = self.edges
        return float(np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1).max())

    @property
    def dirichlet_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.vertex_flags == DIRICHLET)

    @property
    def steklov_vertices(self) -> np.ndarray:
        """Vertices strictly inside the Steklov part (the boundary unknowns)."""
        return np.flatnonzero(self.vertex_flags == STEKLOV)

    @property
    def steklov_closure_vertices(self) -> np.ndarray:
        """Vertices touched by a Steklov edge, interface endpoints included."""
        return np.unique(self.boundary_edges[self.steklov_edge])

    def tagged_length(self) -> float:
        """Length of the Steklov-tagged boundary polyline."""
        e = self.boundary_edges[self.steklov_edge]
        return float(np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1).sum())

    def to_dict(self) -> dict:
        return {
            "vertices": self.vertices.tolist(),
            "triangles": self.triangles.tolist(),
            "boundary_edges": [
                {"v": [int(i), int(j)], "tag": "S" if s else "D", "interval": int(k)}
                for (i, j), s, k in zip(self.boundary_edges, self.steklov_edge, self.edge_interval)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    def to_csv(self) -> str:
        """Flat vertex table: id, x, y, flag."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex", "x", "y", "flag"])
        names = {INTERIOR: "interior", STEKLOV: "steklov", DIRICHLET: "dirichlet"}
        for i, ((x, y), f) in enumerate(zip(self.vertices, self.vertex_flags)):
            w.writerow([i, repr(float(x)), repr(float(y)), names[int(f)]])
        return buf.getvalue()


@dataclass(frozen=True)
class MeshQuality:
    min_angle_deg: float
    max_aspect_ratio: float
    h: float
    n_vertices: int
    n_triangles: int
    n_boundary_edges: int
    n_steklov_edges: int


# ---------------------------------------------------------------------------


def max_admissible_h(arcs: ArcSet) -> float:
    """Largest ``h_target`` resolving every arc and gap with two edges."""
    pieces = [ln for _, ln in arcs.components] + [ln for _, ln in complement(arcs).pieces]
    if complement(arcs).full:
        pieces = [arcs.length]
    return min(pieces) / 2


def _check_admissible(arcs: ArcSet, h_target: float) -> None:
    if not h_target > 0:
        raise MeshingError(f"h_target must be positive, got {h_target}")
    hmax = max_admissible_h(arcs)
    if h_target <= hmax * (1 + 1e-12):
        return
    for i, (a, ln) in enumerate(arcs.components):
        if ln / 2 == hmax:
            raise MeshingError(
                f"Steklov interval {i} [{a:.6g}, {a + ln:.6g}) of length {ln:.6g} is too thin for "
                f"h_target={h_target:.6g}; maximum admissible h_target is {hmax:.6g}",
                max_h=hmax,
            )
    for i, (a, ln) in enumerate(complement(arcs).pieces):
        if ln / 2 == hmax:
            raise MeshingError(
                f"Dirichlet gap {i} [{a:.6g}, {a + ln:.6g}] of length {ln:.6g} is too thin for "
                f"h_target={h_target:.6g}; maximum admissible h_target is {hmax:.6g}",
                max_h=hmax,
            )
    raise MeshingError(f"h_target={h_target:.6g} exceeds the admissible bound {hmax:.6g}", max_h=hmax)


def _breakpoints(curve: BoundaryCurve, arcs: ArcSet, extra) -> np.ndarray:
    L = curve.total_length
    pts = np.mod(np.asarray(list(curve.corners) + arcs.endpoints() + [float(x) for x in extra]), L)
    pts = np.sort(np.where(L - pts <= SNAP * L, 0.0, pts))
    if len(pts) == 0:
        return np.array([0.0])
    keep = np.concatenate([[True], np.diff(pts) > 1e-12 * L])
    pts = pts[keep]
    if len(pts) > 1 and L - pts[-1] + pts[0] <= 1e-12 * L:
        pts = pts[:-1]
    return pts


def _sample_boundary(curve: BoundaryCurve, breaks: np.ndarray, h: float, focus=(), focus_h=None) -> np.ndarray:
    L = curve.total_length
    seg_start = breaks
    seg_len = np.diff(np.concatenate([breaks, [breaks[0] + L]]))
    small = [(a, ln) for a, ln in zip(seg_start, seg_len) if ln < h]
    if focus_h is not None and focus_h < h:
        small += [(float(f), focus_h) for f in focus]

    def size(s):
        g = np.full(np.shape(s), h)
        for a, ln in small:
            t = np.mod(s - a, L)
            d = np.where(t <= ln, 0.0, np.minimum(t - ln, L - t))
            g = np.minimum(g, ln + GRADING * d)
        return g

    out = []
    for a, ln in zip(seg_start, seg_len):
        if not small:
            n = max(int(math.ceil(ln / h - 1e-9)), 1)
            out.append(a + ln * np.arange(n) / n)
            continue
        u = np.linspace(0.0, ln, 4097)
        dens = 1.0 / size(a + u)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(u))])
        n = max(int(math.ceil(cum[-1] - 1e-9)), 1)
        out.append(a + np.interp(np.arange(n) * cum[-1] / n, cum, u))
    s = np.concatenate(out)
    return np.mod(s, L)


def _tags(curve: BoundaryCurve, arcs: ArcSet, bs: np.ndarray):
    L = curve.total_length
    nxt = np.roll(bs, -1)
    span = np.mod(nxt - bs, L)
    mid = np.mod(bs + 0.5 * span, L)
    steklov = arcs.contains(mid)
    interval = np.full(len(bs), -1, dtype=np.int64)
    for k, (a, ln) in enumerate(arcs.components):
        interval[(np.mod(mid - a, L) < ln) & steklov] = k
    comp = complement(arcs)
    pieces = [(0.0, L)] if comp.full else comp.pieces
    for k, (a, ln) in enumerate(pieces):
        interval[(np.mod(mid - a, L) < ln) & ~steklov] = k
    return steklov, interval


def _flags(n_vertices: int, boundary_vertices: np.ndarray, steklov_edge: np.ndarray) -> np.ndarray:
    flags = np.full(n_vertices, INTERIOR, dtype=np.int8)
    both = steklov_edge & np.roll(steklov_edge, 1)
    flags[boundary_vertices] = np.where(both, STEKLOV, DIRICHLET)
    return flags


def _assert_endpoints_resolved(arcs: ArcSet, bs: np.ndarray) -> None:
    L = arcs.length
    for e in arcs.endpoints():
        d = np.abs(np.mod(bs - e + L / 2, L) - L / 2).min()
        if d > 1e-12 * max(L, 1.0):
            raise MeshingError(f"arc endpoint s={e:.15g} is not a boundary vertex of the mesh")


def _triangle_angles(v: np.ndarray, t: np.ndarray) -> np.ndarray:
    p = v[t]
    a = np.linalg.norm(p[:, 1] - p[:, 2], axis=1)
    b = np.linalg.norm(p[:, 2] - p[:, 0], axis=1)
    c = np.linalg.norm(p[:, 0] - p[:, 1], axis=1)
    A = np.arccos(np.clip((b * b + c * c - a * a) / (2 * b * c), -1, 1))
    B = np.arccos(np.clip((a * a + c * c - b * b) / (2 * a * c), -1, 1))
    return np.degrees(np.stack([A, B, np.pi - A - B], axis=1))


def _signed_areas(v: np.ndarray, t: np.ndarray) -> np.ndarray:
    p = v[t]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def mesh_domain(curve: BoundaryCurve, arcs: ArcSet, h_target: float, extra_breakpoints=(),
                endpoint_h: float | None = None) -> Mesh:
    """Triangulate the domain with boundary vertices at every arc endpoint.

    ``extra_breakpoints`` forces additional boundary vertices (arclength
    positions), which lets several arc sets share one mesh; boundary spacing
    is graded down near forced segments shorter than ``h_target``.  With
    ``endpoint_h`` the spacing is also graded down to ``endpoint_h`` at each
    arc endpoint, where eigenfunctions are singular.

    Raises:
        MeshingError: if an arc or gap of ``arcs`` is shorter than
            ``2 * h_target``; ``err.max_h`` carries the admissible bound.
    """
    if arcs.curve != curve:
        raise MeshingError("arc set belongs to a different curve")
    _check_admissible(arcs, h_target)
    breaks = _breakpoints(curve, arcs, extra_breakpoints)
    bs = _sample_boundary(curve, breaks, h_target, arcs.endpoints(), endpoint_h)
    nb = len(bs)
    pts = curve.point(bs)
    segs = np.stack([np.arange(nb), (np.arange(nb) + 1) % nb], axis=1)
    area = math.sqrt(3) / 4 * h_target**2
    out = triangle.triangulate({"vertices": pts, "segments": segs}, f"pq30a{area:.20f}YQ")
    verts = np.asarray(out["vertices"], dtype=float)
    tris = np.asarray(out["triangles"], dtype=np.int64)
    if not np.array_equal(verts[:nb], pts):
        raise MeshingError("mesh generator reordered boundary vertices")
    markers = np.asarray(out.get("vertex_markers", np.zeros((len(verts), 1)))).ravel()
    if np.any(markers[nb:] != 0):
        raise MeshingError("mesh generator inserted boundary vertices")
    neg = _signed_areas(verts, tris) < 0
    tris[neg] = tris[neg][:, [0, 2, 1]]
    if np.any(_signed_areas(verts, tris) <= 0):
        raise MeshingError("degenerate triangle produced")
    if _triangle_angles(verts, tris).min() < MIN_ANGLE_DEG:
        raise MeshingError(f"mesh violates the {MIN_ANGLE_DEG} degree minimum-angle bound")
    bv = np.arange(nb)
    steklov, interval = _tags(curve, arcs, bs)
    _assert_endpoints_resolved(arcs, bs)
    return Mesh(curve, arcs, verts, tris, bv, bs, steklov, interval, _flags(len(verts), bv, steklov))


def retag(mesh: Mesh, arcs: ArcSet) -> Mesh:
    """Same triangulation, boundary tags recomputed for another arc set.

    Every endpoint of ``arcs`` must already be a boundary vertex.
    """
    if arcs.curve != mesh.curve:
        raise MeshingError("arc set belongs to a different curve")
    _assert_endpoints_resolved(arcs, mesh.boundary_s)
    steklov, interval = _tags(mesh.curve, arcs, mesh.boundary_s)
    flags = _flags(mesh.n_vertices, mesh.boundary_vertices, steklov)
    return Mesh(mesh.curve, arcs, mesh.vertices, mesh.triangles, mesh.boundary_vertices,
                mesh.boundary_s, steklov, interval, flags)


def rotate_mesh(mesh: Mesh, shift: float) -> Mesh:
    """Rigidly rotate a disk mesh so that arclength ``s`` moves to ``s + shift``.

    The rotated triangulation is congruent to the original, so spectra of a
    rotated arc set on it differ from the original only by rounding.  Tags
    are kept (rotated with the mesh); use :func:`retag` to change them.
    """
    if mesh.curve.kind != "circle":
        raise MeshingError("rigid rotation is only defined for circle meshes")
    p = dict(mesh.curve.params)
    c = np.asarray(p["center"])
    t = shift / p["radius"]
    rot = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    verts = (mesh.vertices - c) @ rot.T + c
    L = mesh.curve.total_length
    bs = np.mod(mesh.boundary_s + shift, L)
    verts[mesh.boundary_vertices] = mesh.curve.point(bs)
    return Mesh(mesh.curve, mesh.arcs, verts, mesh.triangles, mesh.boundary_vertices, bs,
                mesh.steklov_edge, mesh.edge_interval, mesh.vertex_flags)


def deform_to(mesh: Mesh, arcs: ArcSet, min_angle_deg: float = 5.0) -> Mesh:
    """Move a mesh so that its arc endpoints land on those of ``arcs``.

    Boundary vertices slide along the curve under the piecewise-linear
    arclength map sending the mesh's endpoints to the new ones (matched
    cyclically with least total displacement); interior vertices follow the
    discrete harmonic extension of the boundary displacement.  The mesh
    connectivity is unchanged, so quantities computed on deformed meshes
    vary smoothly with the endpoints.  Only curves without corners are
    supported.

    Raises:
        MeshingError: on a component-count mismatch, a cornered curve, or a
            deformed mesh with a triangle angle below ``min_angle_deg``.
    """
    from scipy.sparse.linalg import spsolve

    from .assembly import assemble_stiffness

    curve = mesh.curve
    if curve.corners:
        raise MeshingError("mesh deformation needs a curve without corners")
    if arcs.curve != curve:
        raise MeshingError("arc set belongs to a different curve")
    ref = np.asarray(mesh.arcs.endpoints())
    new = np.asarray(arcs.endpoints())
    if len(ref) != len(new) or len(ref) == 0:
        raise MeshingError("deformation needs the same number of arc components")
    L = curve.total_length
    n = len(ref)
    # unwrap both endpoint sequences to increasing lifts starting at ref[0]
    r = ref[0] + np.mod(ref - ref[0], L)
    best = None
    for j in range(0, n, 2):
        t = np.roll(new, -j)
        t = t[0] + np.mod(t - t[0], L)
        t = t + np.round((r[0] - t[0]) / L) * L
        cost = np.abs(t - r).sum()
        if best is None or cost < best[0]:
            best = (cost, t)
    t = best[1]
    knots_r = np.concatenate([r, [r[0] + L]])
    knots_t = np.concatenate([t, [t[0] + L]])
    if np.any(np.diff(knots_t) <= 0):
        raise MeshingError("endpoint matching is not order preserving")
    s_old = r[0] + np.mod(mesh.boundary_s - r[0], L)
    s_new = np.mod(np.interp(s_old, knots_r, knots_t), L)
    verts = mesh.vertices.copy()
    bv = mesh.boundary_vertices
    disp = np.zeros_like(verts)
    disp[bv] = curve.point(s_new) - verts[bv]
    inner = np.setdiff1d(np.arange(mesh.n_vertices), bv)
    if len(inner):
        K = assemble_stiffness(mesh).tocsr()
        K_ii = K[inner][:, inner].tocsc()
        rhs = -(K[inner][:, bv] @ disp[bv])
        disp[inner] = np.column_stack([spsolve(K_ii, rhs[:, c]) for c in range(2)])
    verts = verts + disp
    verts[bv] = curve.point(s_new)
    if np.any(_signed_areas(verts, mesh.triangles) <= 0) or \
            _triangle_angles(verts, mesh.triangles).min() < min_angle_deg:
        raise MeshingError("deformed mesh is too distorted")
    steklov, interval = _tags(curve, arcs, s_new)
    _assert_endpoints_resolved(arcs, s_new)
    return Mesh(curve, arcs, verts, mesh.triangles, bv, s_new, steklov, interval,
                _flags(mesh.n_vertices, bv, steklov))


def refine(mesh: Mesh) -> Mesh:
    """Split every triangle into four; boundary midpoints go onto the exact curve."""
    V = mesh.n_vertices
    t = mesh.triangles
    local = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    edges, inv = np.unique(np.sort(local, axis=1), axis=0, return_inverse=True)
    inv = inv.ravel()
    nt = len(t)
    m01, m12, m20 = V + inv[:nt], V + inv[nt:2 * nt], V + inv[2 * nt:]
    mids = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])

    L = mesh.curve.total_length
    be = np.sort(mesh.boundary_edges, axis=1)
    key = edges[:, 0] * V + edges[:, 1]
    order = np.argsort(key)
    bidx = order[np.searchsorted(key[order], be[:, 0] * V + be[:, 1])]
    bs = mesh.boundary_s
    bmid = np.mod(bs + 0.5 * np.mod(np.roll(bs, -1) - bs, L), L)
    mids[bidx] = mesh.curve.point(bmid)

    verts = np.concatenate([mesh.vertices, mids])
    tris = np.concatenate([
        np.stack([t[:, 0], m01, m20], 1),
        np.stack([t[:, 1], m12, m01], 1),
        np.stack([t[:, 2], m20, m12], 1),
        np.stack([m01, m12, m20], 1),
    ])
    if np.any(_signed_areas(verts, tris) <= 0):
        raise MeshingError("boundary projection inverted a triangle during refinement")
    nb = len(bs)
    bv = np.empty(2 * nb, dtype=np.int64)
    bv[0::2], bv[1::2] = mesh.boundary_vertices, V + bidx
    new_s = np.empty(2 * nb)
    new_s[0::2], new_s[1::2] = bs, bmid
    steklov = np.repeat(mesh.steklov_edge, 2)
    interval = np.repeat(mesh.edge_interval, 2)
    return Mesh(mesh.curve, mesh.arcs, verts, tris, bv, new_s, steklov, interval,
                _flags(len(verts), bv, steklov))


def mesh_quality(mesh: Mesh) -> MeshQuality:
    v, t = mesh.vertices, mesh.triangles
    p = v[t]
    la = np.linalg.norm(p[:, 1] - p[:, 2], axis=1)
    lb = np.linalg.norm(p[:, 2] - p[:, 0], axis=1)
    lc = np.linalg.norm(p[:, 0] - p[:, 1], axis=1)
    area = _signed_areas(v, t)
    circum = la * lb * lc / (4 * area)
    inr = 2 * area / (la + lb + lc)
    return MeshQuality(
        min_angle_deg=float(_triangle_angles(v, t).min()),
        max_aspect_ratio=float((circum / (2 * inr)).max()),
        h=mesh.h,
        n_vertices=mesh.n_vertices,
        n_triangles=len(t),
        n_boundary_edges=len(mesh.boundary_vertices),
        n_steklov_edges=int(mesh.steklov_edge.sum()),
    )
