import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anglesums.combinatorics import binomial
from anglesums.cones import (
    AngleEstimate,
    SubspaceBasis,
    cone_faces,
    cone_from_generators,
    conic_intrinsic_volumes_mc,
    crofton_consistency,
    grassmann_angle_mc,
    orthant,
    random_subspace,
    solid_angle_mc,
    subspace_intersects_cone,
)
from anglesums.geometry import PolyCone, tangent_cone
from anglesums.models import fixture


def test_quadrant():
    Q = orthant(2)
    a = solid_angle_mc(Q, 40000, seed=1)
    assert abs(a.mean - 0.25) < 4 * a.stderr
    g = grassmann_angle_mc(Q, 1, 40000, seed=2)
    assert abs(g.mean - 0.5) < 4 * g.stderr


def test_reproducible():
    C = orthant(3)
    assert solid_angle_mc(C, 1000, seed=9) == solid_angle_mc(C, 1000, seed=9)
    assert grassmann_angle_mc(C, 1, 200, seed=9) == grassmann_angle_mc(C, 1, 200, seed=9)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_orthant_intrinsic_volumes(n):
    ups = conic_intrinsic_volumes_mc(orthant(n), 30000, seed=n)
    for k, u in enumerate(ups):
        exact = binomial(n, k) / 2**n
        assert abs(u.mean - exact) < 4 * u.stderr + 1e-12


def test_halfplane():
    H = PolyCone(np.array([[0.0, -1.0]]))
    ups = conic_intrinsic_volumes_mc(H, 20000, seed=0)
    assert ups[0].mean == 0.0
    for u in ups[1:]:
        assert abs(u.mean - 0.5) < 4 * u.stderr


def test_exact_shortcuts():
    C = orthant(3)
    assert grassmann_angle_mc(C, 0, 10).mean == 1.0
    assert grassmann_angle_mc(C, 3, 10).mean == 0.0
    L = PolyCone.subspace(np.array([[1.0, 0, 0], [0, 1.0, 0]]), 3)
    assert grassmann_angle_mc(L, 1, 10).mean == 1.0
    assert grassmann_angle_mc(L, 2, 10).mean == 0.0
    wedge = PolyCone(np.array([[0.0, 0.0, -1.0]]))  # halfspace, lineality 2
    assert grassmann_angle_mc(wedge, 1, 10).mean == 1.0
    # a line always meets a halfspace
    assert grassmann_angle_mc(wedge, 2, 500, seed=1).mean == 1.0


def test_orthant_grassmann_angles():
    # gamma_k = 2 (v_{k+1} + v_{k+3} + ...) with v_i = C(3,i)/8
    exact = [1.0, 0.75, 0.25, 0.0]
    for k in range(4):
        g = grassmann_angle_mc(orthant(3), k, 20000, seed=k)
        assert abs(g.mean - exact[k]) < 4 * g.stderr + 1e-12


def test_subspace_intersection():
    C = orthant(3)
    diag = SubspaceBasis(np.ones((3, 1)) / math.sqrt(3))
    assert subspace_intersects_cone(C, diag)
    anti = SubspaceBasis(np.array([[1.0], [-1.0], [0.0]]) / math.sqrt(2))
    assert not subspace_intersects_cone(C, anti)


def test_subspace_basis_validation():
    with pytest.raises(ValueError):
        SubspaceBasis(np.array([[1.0], [1.0]]))
    W = random_subspace(5, 3, np.random.default_rng(0))
    np.testing.assert_allclose(W.basis.T @ W.basis, np.eye(3), atol=1e-12)


@pytest.mark.parametrize("name", ["orthant", "cube-vertex"])
def test_crofton(name):
    C = orthant(3) if name == "orthant" else tangent_cone(fixture("cube", 3), fixture("cube", 3).lattice[0][0])
    for k in range(3):
        r = crofton_consistency(C, k, 20000, seed=k)
        assert r.residual <= 3 * r.stderr + 1e-12
        assert r.relation_residual <= 3 * r.relation_stderr + 1e-12


def test_cone_faces_of_orthant():
    dims = sorted(f.dim for f in cone_faces(orthant(3)))
    assert dims == [0, 1, 1, 1, 2, 2, 2, 3]


def test_cone_from_generators():
    C = cone_from_generators(np.eye(3))
    assert C.effective_halfspaces.shape[0] == 3
    full = cone_from_generators(np.array([[1.0, 0], [0, 1.0], [-1.0, -1.0]]))
    assert full.effective_halfspaces.shape[0] == 0


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_intrinsic_volumes_sum_to_one(d, seed):
    rng = np.random.default_rng(seed)
    C = cone_from_generators(rng.standard_normal((d + 1, d)) + 2.0)
    ups = conic_intrinsic_volumes_mc(C, 4000, seed=seed)
    total = math.fsum(u.mean for u in ups)
    se = math.sqrt(math.fsum(u.variance for u in ups))
    assert abs(total - 1) <= 4 * se + 1e-12


def test_estimate_types():
    e = AngleEstimate.bernoulli(30, 100)
    assert e.mean == 0.3 and abs(e.stderr - math.sqrt(0.21 / 100)) < 1e-15
    with pytest.raises(ValueError):
        AngleEstimate.bernoulli(0, 0)
