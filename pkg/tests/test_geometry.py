import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anglesums.errors import DegenerateInput
from anglesums.geometry import (
    PolyCone,
    convex_hull,
    euler_check,
    f_vector,
    face_survives_projection,
    image_face_preimages,
    normal_cone,
    polytope_from_json,
    polytope_to_json,
    project,
    tangent_cone,
)
from anglesums.models import fixture


def test_cube():
    P = fixture("cube", 3)
    assert f_vector(P) == (8, 12, 6)
    assert euler_check(P) == 1
    assert f_vector(fixture("cube", 4)) == (16, 32, 24, 8)


def test_interior_points_are_not_vertices():
    pts = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]], dtype=float)
    P = convex_hull(pts)
    assert f_vector(P) == (4, 4)


def test_segment_hull():
    P = convex_hull(np.array([[0.3], [2.0], [-1.0], [1.1]]))
    assert f_vector(P) == (2,)
    assert sorted(P.vertices[:, 0]) == [-1.0, 2.0]


def test_degenerate_input():
    with pytest.raises(DegenerateInput):
        convex_hull(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], dtype=float))


def test_simplex_and_orthoscheme():
    assert f_vector(fixture("regular-simplex", 4)) == (4, 6, 4)
    assert f_vector(fixture("orthoscheme", 3)) == (4, 6, 4)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10), st.integers(0, 2**32 - 1))
def test_euler_relation_random(d, extra, seed):
    pts = np.random.default_rng(seed).standard_normal((d + 1 + extra, d))
    assert euler_check(convex_hull(pts)) == 1


def test_tangent_cone_contains_polytope_directions():
    rng = np.random.default_rng(1)
    P = convex_hull(rng.standard_normal((12, 3)))
    for j in range(3):
        for F in P.lattice[j]:
            x = P.vertices[list(F.vertex_indices)].mean(axis=0)
            T = tangent_cone(P, F)
            assert T.lineality_dim == j
            assert np.all(T.contains(P.vertices - x, tol=1e-9))


def test_normal_cone_is_polar_of_tangent_cone():
    rng = np.random.default_rng(2)
    P = convex_hull(rng.standard_normal((10, 3)))
    for j in range(3):
        for F in P.lattice[j]:
            T, N = tangent_cone(P, F), normal_cone(P, F)
            assert N.dim == 3 - j
            # every generator of N is nonpositive on T: <n, v - x> <= 0 for all vertices v
            x = P.vertices[list(F.vertex_indices)].mean(axis=0)
            assert np.all((P.vertices - x) @ N.generators.T <= 1e-9)
            assert np.all(N.contains(N.generators, tol=1e-9))


def test_polycone_subspace():
    C = PolyCone.subspace(np.array([[1.0, 0, 0], [0, 1.0, 0]]), 3)
    assert C.is_subspace and C.dim == 2


def test_cube_to_generic_plane_keeps_six_vertices():
    P = fixture("cube", 3)
    B = np.linalg.qr(np.random.default_rng(3).standard_normal((3, 2)))[0].T
    Q = project(P, B)
    assert f_vector(Q) == (6, 6)
    survived = [face_survives_projection(P, F, B, dual_check=True) for F in P.lattice[0]]
    assert sum(survived) == 6


def test_survival_primary_and_dual_agree():
    rng = np.random.default_rng(4)
    checked = 0
    for _ in range(100):
        d = int(rng.integers(2, 5))
        P = convex_hull(rng.standard_normal((d + 4, d)))
        k = int(rng.integers(1, d))
        B = rng.standard_normal((k, d))
        for j in range(k):
            for F in P.lattice[j]:
                face_survives_projection(P, F, B, dual_check=True)  # raises on disagreement
                checked += 1
    assert checked > 100


def test_image_face_preimages_unique():
    rng = np.random.default_rng(5)
    P = convex_hull(rng.standard_normal((9, 3)))
    B = rng.standard_normal((2, 3))
    pre = image_face_preimages(P, B)
    for j, rows in pre.items():
        assert all(len(r) == 1 for r in rows)
        for r in rows:
            assert face_survives_projection(P, r[0], B)


def test_json_roundtrip():
    P = fixture("cube", 3)
    data = polytope_to_json(P)
    assert data["f_vector"] == [8, 12, 6]
    Q = polytope_from_json(json.dumps(data))
    assert f_vector(Q) == f_vector(P)
    with pytest.raises(ValueError):
        polytope_from_json({"dim": 2, "vertices": [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]})
