"""Polytopes, face lattices, tangent and normal cones, linear images.

Desk-scale computational geometry (ambient dimension up to about 6).  Hulls
come from Qhull; coplanar simplicial facets are merged so non-simplicial
polytopes such as the cube get their true facets.  All incidence decisions
use one relative tolerance, :data:`EPS_GEOM`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateInput, InternalInconsistency

__all__ = [
    "EPS_GEOM",
    "Polytope",
    "Face",
    "PolyCone",
    "convex_hull",
    "face_lattice",
    "f_vector",
    "euler_check",
    "tangent_cone",
    "normal_cone",
    "project",
    "face_survives_projection",
    "image_face_preimages",
    "affine_rank",
    "orthonormal_basis",
    "null_space",
    "polytope_from_json",
    "polytope_to_json",
]

EPS_GEOM = 1e-9


def orthonormal_basis(vectors: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (as columns) of the row span of ``vectors``."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    if vectors.size == 0:
        return np.zeros((vectors.shape[1], 0))
    _, s, vt = np.linalg.svd(vectors, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return vt[:rank].T


def null_space(rows: np.ndarray, dim: int, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of ``{v : rows @ v = 0}`` in R^dim."""
    rows = np.asarray(rows, dtype=float).reshape(-1, dim)
    if rows.shape[0] == 0:
        return np.eye(dim)
    _, s, vt = np.linalg.svd(rows, full_matrices=True)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 1.0)))
    return vt[rank:].T


def affine_rank(points: np.ndarray, tol: float = EPS_GEOM) -> int:
    """Dimension of the affine hull of ``points`` (rows)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] <= 1:
        return 0
    diff = points[1:] - points[0]
    s = np.linalg.svd(diff, compute_uv=False)
    scale = max(1.0, float(np.abs(points).max()))
    return int(np.sum(s > tol * scale * max(1, points.shape[0])))


@dataclass(frozen=True, eq=False)
class PolyCone:
    """Polyhedral cone ``{v : A v <= 0, E v = 0}``.

    ``generators`` is optional; when present the cone is assumed to be
    full-dimensional inside their linear span, which is then used as
    ``lin C``.  Without generators the cone must be full-dimensional inside
    ``ker E`` or have no effective inequality (a linear subspace).
    """

    halfspaces: np.ndarray
    equations: np.ndarray | None = None
    generators: np.ndarray | None = None

    def __post_init__(self):
        a = np.asarray(self.halfspaces, dtype=float)
        if a.ndim != 2:
            raise ValueError("halfspaces must be a 2-d array (possibly with zero rows)")
        object.__setattr__(self, "halfspaces", a)
        d = a.shape[1]
        if self.equations is not None:
            object.__setattr__(self, "equations",
                               np.asarray(self.equations, dtype=float).reshape(-1, d))
        if self.generators is not None:
            object.__setattr__(self, "generators",
                               np.asarray(self.generators, dtype=float).reshape(-1, d))

    @classmethod
    def subspace(cls, basis_rows: np.ndarray, dim: int) -> "PolyCone":
        """The linear span of ``basis_rows`` as a cone."""
        basis_rows = np.asarray(basis_rows, dtype=float).reshape(-1, dim)
        eq = null_space(basis_rows, dim).T
        return cls(np.zeros((0, dim)), equations=eq, generators=np.vstack([basis_rows, -basis_rows]))

    @property
    def dim_ambient(self) -> int:
        return self.halfspaces.shape[1]

    @cached_property
    def span_basis(self) -> np.ndarray:
        """Orthonormal columns spanning ``lin C``."""
        if self.generators is not None:
            return orthonormal_basis(self.generators)
        if self.equations is not None and self.equations.shape[0]:
            return null_space(self.equations, self.dim_ambient)
        return np.eye(self.dim_ambient)

    @property
    def dim(self) -> int:
        return self.span_basis.shape[1]

    @cached_property
    def effective_halfspaces(self) -> np.ndarray:
        """Inequality rows that do not vanish on ``lin C`` (others hold with equality there)."""
        a = self.halfspaces
        if a.shape[0] == 0:
            return a
        proj = a @ self.span_basis
        norms = np.linalg.norm(proj, axis=1)
        keep = norms > 1e-10 * np.maximum(1.0, np.linalg.norm(a, axis=1))
        return a[keep]

    @cached_property
    def lineality_dim(self) -> int:
        """Dimension of ``{v in lin C : A v = 0}``."""
        a = self.effective_halfspaces
        if a.shape[0] == 0:
            return self.dim
        m = a @ self.span_basis
        return self.dim - int(np.linalg.matrix_rank(m, tol=1e-10 * max(1.0, np.abs(m).max())))

    @property
    def is_subspace(self) -> bool:
        return self.lineality_dim == self.dim

    def contains(self, v: np.ndarray, tol: float = 0.0) -> np.ndarray:
        """Membership of the rows of ``v`` (assumed to lie in ``lin C``)."""
        v = np.atleast_2d(v)
        a = self.effective_halfspaces
        if a.shape[0] == 0:
            return np.ones(v.shape[0], dtype=bool)
        return np.all(v @ a.T <= tol, axis=1)


@dataclass(frozen=True)
class Face:
    dim: int
    vertex_indices: tuple[int, ...]
    facet_indices: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Polytope:
    """Full-dimensional polytope with its facets and facet-vertex incidence.

    ``normals[i] @ x <= offsets[i]`` for every facet ``i``; normals are unit
    outer normals.  ``incidence[i, v]`` is true when vertex ``v`` lies on facet ``i``.
    """

    vertices: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray
    incidence: np.ndarray

    @property
    def dim_ambient(self) -> int:
        return self.vertices.shape[1]

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @cached_property
    def scale(self) -> float:
        return max(1.0, float(np.abs(self.vertices).max()))

    @cached_property
    def facet_masks(self) -> list[int]:
        masks = []
        for row in self.incidence:
            m = 0
            for v in np.flatnonzero(row):
                m |= 1 << int(v)
            masks.append(m)
        return masks

    @cached_property
    def lattice(self) -> dict[int, list[Face]]:
        return _face_lattice(self)

    def transformed(self, matrix: np.ndarray) -> "Polytope":
        """Image under an invertible linear map, as a fresh hull."""
        return convex_hull(self.vertices @ np.asarray(matrix, dtype=float).T)


def _merge_facets(eqs: np.ndarray, scale: float) -> np.ndarray:
    normals = eqs[:, :-1]
    offsets = -eqs[:, -1] / scale
    keep: list[int] = []
    for i in range(len(eqs)):
        dup = False
        for j in keep:
            if (np.abs(normals[i] - normals[j]).max() < 1e-7
                    and abs(offsets[i] - offsets[j]) < 1e-7):
                dup = True
                break
        if not dup:
            keep.append(i)
    return eqs[keep]


def convex_hull(points) -> Polytope:
    """Convex hull of a full-dimensional point set.

    Raises :class:`DegenerateInput` when the points do not affinely span
    their ambient space.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = pts.shape
    if n < d + 1 or affine_rank(pts) < d:
        raise DegenerateInput(f"{n} points do not span R^{d}")
    scale = max(1.0, float(np.abs(pts).max()))
    if d == 1:
        lo, hi = int(np.argmin(pts[:, 0])), int(np.argmax(pts[:, 0]))
        verts = pts[[lo, hi]]
        normals = np.array([[-1.0], [1.0]])
        offsets = np.array([-verts[0, 0], verts[1, 0]])
        incidence = np.array([[True, False], [False, True]])
        return Polytope(verts, normals, offsets, incidence)
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateInput(str(exc)) from exc
    verts = pts[np.sort(hull.vertices)]
    eqs = _merge_facets(hull.equations, scale)
    normals = eqs[:, :-1]
    offsets = -eqs[:, -1]
    slack = verts @ normals.T - offsets
    incidence = (np.abs(slack) <= EPS_GEOM * scale * 10).T
    return Polytope(verts, normals, offsets, incidence)


def _mask_indices(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _face_lattice(P: Polytope) -> dict[int, list[Face]]:
    d = P.dim_ambient
    facets = P.facet_masks
    seen = set(facets)
    frontier = set(facets)
    while frontier:
        new = set()
        for a in frontier:
            for f in facets:
                x = a & f
                if x and x not in seen:
                    new.add(x)
        seen |= new
        frontier = new
    facet_set = set(facets)
    out: dict[int, list[Face]] = {k: [] for k in range(d + 1)}
    for mask in sorted(seen):
        verts = _mask_indices(mask)
        if mask in facet_set:
            dim = d - 1
        elif len(verts) <= 2:
            dim = len(verts) - 1
        else:
            dim = affine_rank(P.vertices[list(verts)])
        containing = tuple(i for i, f in enumerate(facets) if f & mask == mask)
        out[dim].append(Face(dim, verts, containing))
    out[d] = [Face(d, tuple(range(P.n_vertices)), ())]
    return out


def face_lattice(P: Polytope) -> dict[int, list[Face]]:
    """All faces of ``P`` grouped by dimension; ``result[d]`` holds ``P`` itself."""
    return P.lattice


def f_vector(P: Polytope) -> tuple[int, ...]:
    lat = P.lattice
    return tuple(len(lat[k]) for k in range(P.dim_ambient))


def euler_check(P: Polytope) -> int:
    """Alternating face count including ``P`` itself; 1 for every polytope."""
    return sum((-1) ** k * len(faces) for k, faces in P.lattice.items())


def tangent_cone(P: Polytope, F: Face) -> PolyCone:
    """Cone of feasible directions at a relative-interior point of ``F``."""
    if not F.facet_indices:
        return PolyCone(np.zeros((0, P.dim_ambient)))
    return PolyCone(P.normals[list(F.facet_indices)])


def normal_cone(P: Polytope, F: Face) -> PolyCone:
    """Polar of the tangent cone: positive hull of the outer normals of facets containing ``F``."""
    d = P.dim_ambient
    if not F.facet_indices:
        return PolyCone(np.zeros((0, d)), equations=np.eye(d), generators=np.zeros((0, d)))
    gens = P.normals[list(F.facet_indices)]
    inside = set(F.vertex_indices)
    others = [v for v in range(P.n_vertices) if v not in inside]
    center = P.vertices[list(F.vertex_indices)].mean(axis=0)
    rows = P.vertices[others] - center
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    face_dirs = P.vertices[list(F.vertex_indices)] - center
    eq = orthonormal_basis(face_dirs).T if F.dim > 0 else np.zeros((0, d))
    return PolyCone(rows, equations=eq, generators=gens)


def project(P: Polytope, B) -> Polytope:
    """Hull of the image of ``P`` under the ``k x d`` matrix ``B``."""
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if B.shape[1] != P.dim_ambient:
        raise ValueError("B has the wrong number of columns")
    if np.linalg.matrix_rank(B) < B.shape[0]:
        raise ValueError("B must have full row rank")
    return convex_hull(P.vertices @ B.T)


def _match_points(points: np.ndarray, targets: np.ndarray, tol: float) -> list[int]:
    """Index of the row of ``targets`` equal to each row of ``points`` (-1 if none)."""
    out = []
    for p in points:
        dist = np.abs(targets - p).max(axis=1)
        i = int(np.argmin(dist))
        out.append(i if dist[i] <= tol else -1)
    return out


def _image_is_face(P: Polytope, F: Face, B: np.ndarray) -> bool:
    Q = project(P, B)
    tol = EPS_GEOM * 10 * max(Q.scale, 1.0)
    images = P.vertices[list(F.vertex_indices)] @ B.T
    slack = images @ Q.normals.T - Q.offsets
    on_all = np.all(np.abs(slack) <= tol, axis=0)
    if not np.any(on_all):
        return False  # smallest face containing the image is Q itself, and F is proper
    mask = np.all(Q.incidence[on_all], axis=0)
    face_verts = Q.vertices[mask]
    if affine_rank(face_verts) != F.dim:
        return False
    return all(i >= 0 for i in _match_points(face_verts, images, tol))


def face_survives_projection(P: Polytope, F: Face, B, dual_check: bool = False) -> bool:
    """Whether ``B F`` is a face of ``B P`` (of the same dimension as ``F``).

    The primary test is ``T_F(P) & ker B == {0}``, decided by the
    strict-margin LP.  With ``dual_check`` the image hull is built as well
    and the two answers must agree.
    """
    from .cones import SubspaceBasis, subspace_intersects_cone

    B = np.atleast_2d(np.asarray(B, dtype=float))
    k, d = B.shape
    if k <= F.dim:
        raise ValueError("need rank(B) > dim F")
    kernel = null_space(B, d)
    if kernel.shape[1] == 0:
        primary = True
    else:
        primary = not subspace_intersects_cone(tangent_cone(P, F), SubspaceBasis(kernel))
    if dual_check:
        dual = _image_is_face(P, F, B)
        if dual != primary:
            raise InternalInconsistency(
                f"face survival disagreement: kernel test {primary}, image test {dual}"
            )
    return primary


def image_face_preimages(P: Polytope, B) -> dict[int, list[list[Face]]]:
    """For every proper face of ``B P``, the faces ``G`` of ``P`` of equal dimension with ``B G`` equal to it."""
    B = np.atleast_2d(np.asarray(B, dtype=float))
    Q = project(P, B)
    tol = EPS_GEOM * 10 * Q.scale
    images = P.vertices @ B.T
    pre = _match_points(Q.vertices, images, tol)  # vertex of Q -> vertex of P
    out: dict[int, list[list[Face]]] = {}
    for j in range(Q.dim_ambient):
        rows = []
        for face in Q.lattice[j]:
            normals = Q.normals[list(face.facet_indices)]
            offsets = Q.offsets[list(face.facet_indices)]
            need = {pre[v] for v in face.vertex_indices}
            hits = []
            for G in P.lattice[j]:
                gv = set(G.vertex_indices)
                if not need <= gv:
                    continue
                slack = images[list(gv)] @ normals.T - offsets
                if np.all(np.abs(slack) <= tol):
                    hits.append(G)
            rows.append(hits)
        out[j] = rows
    return out


def polytope_from_json(text_or_obj) -> Polytope:
    """Build a polytope from ``{"dim": d, "vertices": [[...], ...]}`` (``dim`` optional)."""
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
    verts = np.asarray(obj["vertices"], dtype=float)
    if verts.ndim != 2 or verts.shape[1] != int(obj.get("dim", verts.shape[1])):
        raise ValueError("vertex coordinates do not match 'dim'")
    return convex_hull(verts)


def polytope_to_json(P: Polytope) -> dict:
    return {
        "dim": P.dim_ambient,
        "vertices": P.vertices.tolist(),
        "facets": [
            {"normal": n.tolist(), "offset": float(b),
             "vertices": [int(v) for v in np.flatnonzero(row)]}
            for n, b, row in zip(P.normals, P.offsets, P.incidence)
        ],
        "f_vector": list(f_vector(P)),
    }
