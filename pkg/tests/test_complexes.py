import math

import numpy as np
import pytest

from polycal.complexes import (
    BoundaryRegion,
    build_complex,
    complex_from_json,
    interior_faces,
    pushforward_complex,
    subdivide,
    validate_geometry,
)


def segment_triangle_intersects(p0, p1, tri, tol=1e-12):
    """Oracle: does the open segment cross the triangle's affine patch?"""
    p0, p1, tri = np.asarray(p0, float), np.asarray(p1, float), np.asarray(tri, float)
    e1, e2 = tri[1] - tri[0], tri[2] - tri[0]
    d = p1 - p0
    mat = np.column_stack([d, -e1, -e2])
    if abs(np.linalg.det(mat)) < tol:
        return False
    t, u, v = np.linalg.solve(mat, tri[0] - p0)
    return tol < t < 1 - tol and u > tol and v > tol and u + v < 1 - tol


def y_complex():
    verts = [[0.0, 0.0], [0.0, 1.0], [-math.sqrt(3) / 2, -0.5], [math.sqrt(3) / 2, -0.5]]
    return build_complex(verts, [(0, 1), (0, 2), (0, 3)])


# ---------------------------------------------------------------------------
# construction

def test_single_triangle_counts():
    K = build_complex([[0, 0], [1, 0], [0, 1]], [(0, 1, 2)])
    assert [K.n_simplices(d) for d in range(3)] == [3, 3, 1]


def test_two_triangles_sharing_an_edge():
    K = build_complex([[0, 0], [1, 0], [0, 1], [1, 1]], [(0, 1, 2), (1, 2, 3)])
    assert [K.n_simplices(d) for d in range(3)] == [4, 5, 2]


def test_tetrahedron_boundary():
    verts = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
    tris = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
    K = build_complex(verts, tris)
    assert [K.n_simplices(d) for d in range(3)] == [4, 6, 4]


def test_build_rejects_bad_input():
    with pytest.raises(ValueError, match="out of range"):
        build_complex([[0, 0], [1, 0]], [(0, 5)])
    with pytest.raises(ValueError, match="degenerate"):
        build_complex([[0, 0], [1, 0], [2, 0]], [(0, 1, 2)])
    with pytest.raises(ValueError, match="duplicate"):
        build_complex([[0, 0], [1, 0], [0, 1]], [(0, 1, 2), (2, 0, 1)])
    with pytest.raises(ValueError, match="repeats"):
        build_complex([[0, 0], [1, 0]], [(0, 0)])


def test_ids_are_sorted_and_deterministic():
    K = build_complex([[0, 0], [1, 0], [0, 1], [1, 1]], [(1, 2, 3), (0, 1, 2)])
    assert K.simplices[2] == [(0, 1, 2), (1, 2, 3)]
    assert K.simplices[1][0] == (0, 1)


def test_double_incidence_cancellation():
    verts = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]]
    K = build_complex(verts, [(0, 1, 2, 3), (1, 2, 3, 4)])
    for d in range(2, K.dim + 1):
        prod = K.boundary_matrix(d - 1) @ K.boundary_matrix(d)
        assert prod.nnz == 0 or np.all(prod.toarray() == 0)


# ---------------------------------------------------------------------------
# boundary regions / interior faces

def test_interior_faces_of_y_complex():
    K = y_complex()
    gamma = BoundaryRegion.from_tuples(K, [(1,), (2,), (3,)])
    inside = interior_faces(K, 1, gamma)
    assert [K.simplex_tuple(0, i) for i in inside] == [(0,)]


def test_interior_faces_triangle_fully_designated():
    K = build_complex([[0, 0], [1, 0], [0, 1]], [(0, 1, 2)])
    gamma = BoundaryRegion.from_tuples(K, [(0, 1), (0, 2), (1, 2)])
    assert interior_faces(K, 2, gamma) == []


def test_interior_faces_fan_of_three_triangles():
    verts = [[0, 0, 0], [0, 0, 1], [1, 0, 0], [-0.5, 0.8, 0], [-0.5, -0.8, 0]]
    K = build_complex(verts, [(0, 1, 2), (0, 1, 3), (0, 1, 4)])
    outer = [t for t in K.simplices[1] if t != (0, 1)]
    gamma = BoundaryRegion.from_tuples(K, outer)
    inside = interior_faces(K, 2, gamma)
    assert [K.simplex_tuple(1, i) for i in inside] == [(0, 1)]


def test_boundary_region_validates_ids():
    K = y_complex()
    with pytest.raises(ValueError, match="out of range"):
        BoundaryRegion(K, 0, frozenset({99}))


# ---------------------------------------------------------------------------
# geometry validation

def test_disjoint_triangles_are_valid():
    verts = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [5, 5, 5], [6, 5, 5], [5, 6, 5]]
    K = build_complex(verts, [(0, 1, 2), (3, 4, 5)])
    assert validate_geometry(K).valid


def test_triangles_sharing_one_vertex_are_valid():
    verts = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]]
    K = build_complex(verts, [(0, 1, 2), (0, 3, 4)])
    assert validate_geometry(K).valid


def test_crossing_triangles_are_reported():
    # second triangle's edge passes through the first one's interior
    verts = [
        [0, 0, 0], [2, 0, 0], [0, 2, 0],
        [0.5, 0.5, -1], [0.5, 0.5, 1], [3, 3, 1],
    ]
    K = build_complex(verts, [(0, 1, 2), (3, 4, 5)])
    # oracle: that edge really does puncture the triangle
    assert segment_triangle_intersects(verts[3], verts[4], verts[:3])
    report = validate_geometry(K)
    assert not report.valid
    assert report.violations[0][0] == (0, 1, 2)


def test_conforming_mesh_passes():
    K = build_complex([[0, 0], [1, 0], [0, 1], [1, 1]], [(0, 1, 2), (1, 2, 3)])
    assert validate_geometry(K).valid


def test_t_junction_is_reported():
    # edge (3,4) touches triangle (0,1,2) along half of its edge (0,1)
    verts = [[0, 0], [2, 0], [0, 2], [1, 0], [3, 0]]
    K = build_complex(verts, [(0, 1, 2), (3, 4)])
    assert not validate_geometry(K).valid


# ---------------------------------------------------------------------------
# subdivision

def test_barycentric_triangle_gives_six_children():
    K = build_complex([[0, 0], [1, 0], [0, 1]], [(0, 1, 2)])
    refined, corr = subdivide(K, "barycentric")
    assert refined.n_simplices(2) == 6
    children = corr.children[(2, 0)]
    assert len(children) == 6
    total = sum(refined.volume(2, cid) for cid, _ in children)
    assert total == pytest.approx(0.5, rel=1e-12)


def test_edge_midpoint_split_of_triangle():
    K = build_complex([[0, 0], [1, 0], [0, 1]], [(0, 1, 2)])
    refined, corr = subdivide(K, "edge_midpoint", edge=(0, 1))
    assert refined.n_simplices(2) == 2
    assert len(corr.children[(2, 0)]) == 2
    d, eid = K.simplex_id((0, 2))
    assert corr.children[(d, eid)] == [(refined.simplex_id((0, 2))[1], 1)]


def test_subdivision_preserves_volumes():
    rng = np.random.default_rng(41)
    verts = rng.standard_normal((5, 3))
    K = build_complex(verts, [(0, 1, 2, 3), (1, 2, 3, 4)])
    refined, corr = subdivide(K, "barycentric")
    for d in range(1, K.dim + 1):
        for sid in range(K.n_simplices(d)):
            total = sum(refined.volume(d, cid) for cid, _ in corr.children[(d, sid)])
            assert total == pytest.approx(K.volume(d, sid), rel=1e-12)


def test_subdivision_signs_match_parent_orientation():
    rng = np.random.default_rng(43)
    verts = rng.standard_normal((4, 3))
    K = build_complex(verts, [(0, 1, 2, 3)])
    refined, corr = subdivide(K, "barycentric")
    for (d, sid), kids in corr.children.items():
        if d == 0:
            continue
        parent = K.unit_blade(d, sid)
        for cid, sign in kids:
            child = refined.unit_blade(d, cid)
            assert child.allclose(sign * parent, tol=1e-9)


def test_subdivide_unknown_rule_and_missing_edge():
    K = build_complex([[0, 0], [1, 0], [0, 1]], [(0, 1, 2)])
    with pytest.raises(ValueError, match="unknown"):
        subdivide(K, "trisect")
    with pytest.raises(ValueError, match="not an edge"):
        subdivide(K, "edge_midpoint", edge=(0, 7))


# ---------------------------------------------------------------------------
# pushforward of the embedding

def test_pushforward_identity_keeps_everything():
    K = y_complex()
    image, smap, dropped = pushforward_complex(K, K.vertices)
    assert dropped == []
    assert image.simplices == K.simplices


def test_pushforward_drops_collapsed_triangle():
    K = build_complex([[0, 0], [1, 0], [0, 1], [1, 1]], [(0, 1, 2), (1, 2, 3)])
    images = K.vertices.copy()
    images[3] = [0.5, 0.5]  # onto the shared edge: triangle (1,2,3) flattens
    image, smap, dropped = pushforward_complex(K, images)
    d, sid = K.simplex_id((1, 2, 3))
    assert (d, sid) in dropped
    assert image.n_simplices(2) == 1


def test_pushforward_accepts_vertex_dict():
    K = y_complex()
    image, smap, dropped = pushforward_complex(K, {0: [0.2, 0.1]})
    assert dropped == []
    assert np.allclose(image.vertices[0], [0.2, 0.1])
    assert np.allclose(image.vertices[1:], K.vertices[1:])


def test_pushforward_rejects_frozen_move_and_collision():
    K = y_complex()
    moved = K.vertices.copy()
    moved[1] = [0.5, 0.5]
    with pytest.raises(ValueError, match="frozen"):
        pushforward_complex(K, moved, frozen=[1])
    collided = K.vertices.copy()
    collided[1] = collided[2]
    with pytest.raises(ValueError, match="collision"):
        pushforward_complex(K, collided)


# ---------------------------------------------------------------------------
# serialization

def test_complex_json_round_trip():
    K = build_complex([[0, 0], [1, 0], [0, 1], [1, 1]], [(0, 1, 2), (1, 2, 3)])
    gamma = BoundaryRegion.from_tuples(K, [(0, 1), (0, 2)])
    doc = K.to_json(gamma)
    K2, gamma2 = complex_from_json(doc)
    assert K2.simplices == K.simplices
    assert np.array_equal(K2.vertices, K.vertices)
    assert gamma2.face_ids == gamma.face_ids
    assert K2.content_hash() == K.content_hash()
