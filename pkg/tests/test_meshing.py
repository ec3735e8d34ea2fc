import math

import numpy as np
import pytest

from steklov_lab.geometry import ArcSet, BoundaryCurve, lgl_sequence, measure
from steklov_lab.meshing import (
    DIRICHLET,
    INTERIOR,
    STEKLOV,
    Mesh,
    MeshingError,
    deform_to,
    max_admissible_h,
    mesh_domain,
    mesh_quality,
    refine,
    retag,
    rotate_mesh,
)

from conftest import DISK, SQUARE, STAR

PI = math.pi


def check_invariants(mesh: Mesh):
    v, t = mesh.vertices, mesh.triangles
    p = v[t]
    e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    area = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    assert np.all(area > 0)
    assert mesh_quality(mesh).min_angle_deg >= 15.0
    # conforming: interior edges in two triangles, boundary edges in one
    local = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
    edges, counts = np.unique(local, axis=0, return_counts=True)
    assert counts.max() == 2
    single = {tuple(e) for e in edges[counts == 1]}
    assert single == {tuple(sorted(e)) for e in mesh.boundary_edges}
    # Euler relation for a disk
    assert mesh.n_vertices - len(edges) + len(t) == 1
    # boundary cycle visits each boundary vertex once
    assert len(set(mesh.boundary_vertices.tolist())) == len(mesh.boundary_vertices)
    # endpoints are vertices and no edge straddles an endpoint
    L = mesh.curve.total_length
    for e in mesh.arcs.endpoints():
        assert np.abs(np.mod(mesh.boundary_s - e + L / 2, L) - L / 2).min() <= 1e-12
    bs = mesh.boundary_s
    mids = np.mod(bs + 0.5 * np.mod(np.roll(bs, -1) - bs, L), L)
    assert np.array_equal(mesh.arcs.contains(mids), mesh.steklov_edge)
    # Dirichlet flag iff vertex in closed Gamma_D
    flags = mesh.vertex_flags[mesh.boundary_vertices]
    assert np.array_equal(flags == STEKLOV, mesh.arcs.contains(bs))
    assert np.all(mesh.vertex_flags[np.setdiff1d(np.arange(mesh.n_vertices), mesh.boundary_vertices)] == INTERIOR)


def test_disk_half_mesh():
    arcs = ArcSet(DISK, [(0, PI)])
    m = mesh_domain(DISK, arcs, 0.2)
    check_invariants(m)
    assert len(m.boundary_edges) >= 32
    assert 0.0 in m.boundary_s and np.any(np.isclose(m.boundary_s, PI, atol=1e-15))
    assert m.h <= 2 * 0.2


def test_square_top_edge_tags():
    arcs = ArcSet(SQUARE, [(2, 3)])
    m = mesh_domain(SQUARE, arcs, 1 / 8)
    check_invariants(m)
    corners = SQUARE.point(np.array(SQUARE.corners))
    for c in corners:
        assert np.any(np.all(np.isclose(m.vertices[m.boundary_vertices], c, atol=1e-15), axis=1))
    top = (m.boundary_s >= 2) & (m.boundary_s < 3)
    assert np.all(m.steklov_edge[top]) and not np.any(m.steklov_edge[~top])


def test_thin_arc_error_names_interval_and_bound():
    arcs = ArcSet(DISK, [(1.0, 1.01)])
    with pytest.raises(MeshingError, match=r"Steklov interval 0.*0\.005") as err:
        mesh_domain(DISK, arcs, 0.2)
    assert err.value.max_h == pytest.approx(0.005)
    assert max_admissible_h(arcs) == pytest.approx(0.005)


def test_thin_gap_error():
    arcs = ArcSet(DISK, [(0.0, 1.0), (1.02, 3.0)])
    with pytest.raises(MeshingError, match="Dirichlet gap"):
        mesh_domain(DISK, arcs, 0.1)


@pytest.mark.parametrize("curve,arcs", [
    (STAR, ArcSet(STAR, [(0.5, 2.0), (3.0, 4.5)])),
    (BoundaryCurve.sector(1.0, PI), ArcSet(BoundaryCurve.sector(1.0, PI), [(1.0, 2.0 + PI)])),
    (DISK, lgl_sequence(DISK, 0.5, 8)),
])
def test_invariants_other_fixtures(curve, arcs):
    check_invariants(mesh_domain(curve, arcs, 0.1))


def test_refine_contracts():
    arcs = ArcSet(DISK, [(0, PI)])
    m0 = mesh_domain(DISK, arcs, 0.2)
    m1 = refine(m0)
    m2 = refine(m1)
    assert len(m1.triangles) == 4 * len(m0.triangles)
    r = np.linalg.norm(m2.vertices[m2.boundary_vertices], axis=1)
    np.testing.assert_allclose(r, 1.0, atol=1e-12)
    assert 0.45 <= m1.h / m0.h <= 0.55
    check_invariants(m2)


def test_tagged_length_converges_second_order():
    arcs = ArcSet(DISK, [(0.3, 0.3 + PI)])
    m = mesh_domain(DISK, arcs, 0.3)
    errs = []
    for _ in range(4):
        errs.append(abs(m.tagged_length() - measure(arcs)))
        m = refine(m)
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.9)


def test_mesh_quality_equilateral():
    v = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
    m = Mesh(DISK, ArcSet(DISK, []), v, np.array([[0, 1, 2]]), np.arange(3), np.zeros(3),
             np.zeros(3, bool), np.zeros(3, int), np.full(3, DIRICHLET, np.int8))
    q = mesh_quality(m)
    assert q.min_angle_deg == pytest.approx(60.0)
    assert q.max_aspect_ratio == pytest.approx(1.0)


def test_deterministic_meshes():
    arcs = lgl_sequence(DISK, 0.5, 3, phase=0.2)
    assert mesh_domain(DISK, arcs, 0.1).to_json() == mesh_domain(DISK, arcs, 0.1).to_json()


def test_json_schema_shape():
    m = mesh_domain(SQUARE, ArcSet(SQUARE, [(2, 3)]), 0.25)
    d = m.to_dict()
    assert set(d) == {"vertices", "triangles", "boundary_edges"}
    e = d["boundary_edges"][0]
    assert set(e) == {"v", "tag", "interval"} and e["tag"] in ("S", "D")
    assert m.to_csv().splitlines()[0] == "vertex,x,y,flag"


def test_retag_requires_resolved_endpoints():
    m = mesh_domain(DISK, ArcSet(DISK, [(0, PI)]), 0.2, extra_breakpoints=[PI + 0.05])
    r = retag(m, ArcSet(DISK, [(0, PI + 0.05)]))
    check_invariants(r)
    with pytest.raises(MeshingError):
        retag(m, ArcSet(DISK, [(0, PI + 0.07)]))


def test_endpoint_grading_adds_small_edges():
    arcs = ArcSet(DISK, [(0, PI)])
    m = mesh_domain(DISK, arcs, 0.1, endpoint_h=0.01)
    check_invariants(m)
    ell = np.linalg.norm(np.diff(m.vertices[np.append(m.boundary_vertices, m.boundary_vertices[0])], axis=0), axis=1)
    assert ell.min() <= 0.0101


def test_rotate_mesh_is_congruent():
    arcs = ArcSet(DISK, [(0, 1)])
    m = mesh_domain(DISK, arcs, 0.2)
    r = retag(rotate_mesh(m, 0.3), ArcSet(DISK, [(0.3, 1.3)]))
    check_invariants(r)
    d0 = np.linalg.norm(m.vertices[m.triangles[:, 0]] - m.vertices[m.triangles[:, 1]], axis=1)
    d1 = np.linalg.norm(r.vertices[r.triangles[:, 0]] - r.vertices[r.triangles[:, 1]], axis=1)
    np.testing.assert_allclose(d0, d1, atol=1e-13)


def test_deform_to_moves_endpoints():
    ref = lgl_sequence(DISK, 0.5, 2)
    m = mesh_domain(DISK, ref, 0.1)
    target = ArcSet.from_components(DISK, [(0.1, 1.4), (3.0, 1.8)])
    d = deform_to(m, target)
    assert d.arcs == target
    L = DISK.total_length
    for e in target.endpoints():
        assert np.abs(np.mod(d.boundary_s - e + L / 2, L) - L / 2).min() <= 1e-12
    np.testing.assert_allclose(np.linalg.norm(d.vertices[d.boundary_vertices], axis=1), 1.0, atol=1e-14)
    with pytest.raises(MeshingError):
        deform_to(m, ArcSet(DISK, [(0, 1)]))
    with pytest.raises(MeshingError):
        deform_to(mesh_domain(SQUARE, ArcSet(SQUARE, [(2, 3)]), 0.2), ArcSet(SQUARE, [(2.1, 3)]))
