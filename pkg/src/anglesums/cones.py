"""Monte Carlo solid angles, Grassmann angles and conic intrinsic volumes.

Estimators draw from :mod:`anglesums.rng` streams, so the same seed always
gives bit-identical estimates.  Exact values are returned (with zero
standard error) wherever the answer is forced by dimension counting or by
the cone being a linear subspace.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GeneralPositionViolation
from .geometry import PolyCone, null_space, orthonormal_basis
from .lp import strict_margin
from .rng import as_generator

__all__ = [
    "EPS_LP",
    "AngleEstimate",
    "SubspaceBasis",
    "random_subspace",
    "sphere_points",
    "solid_angle_mc",
    "subspace_intersects_cone",
    "grassmann_angle_mc",
    "ConeFace",
    "cone_faces",
    "cone_face_angles",
    "face_tangent_cone",
    "conic_intrinsic_volumes_mc",
    "CroftonResult",
    "crofton_consistency",
    "cone_from_generators",
    "orthant",
]

EPS_LP = 1e-9


@dataclass(frozen=True)
class AngleEstimate:
    """Monte Carlo estimate with its standard error.

    For plain hit-or-miss estimators ``stderr == sqrt(mean (1 - mean) / samples)``;
    exact answers carry ``stderr == 0``.
    """

    mean: float
    stderr: float
    samples: int
    seed: int | None = None
    discarded: int = 0

    @classmethod
    def exact(cls, value: float, samples: int = 1, seed=None) -> "AngleEstimate":
        return cls(float(value), 0.0, samples, seed)

    @classmethod
    def bernoulli(cls, hits: int, samples: int, seed=None, discarded: int = 0) -> "AngleEstimate":
        if samples <= 0:
            raise ValueError("no usable samples")
        p = hits / samples
        return cls(p, math.sqrt(p * (1.0 - p) / samples), samples, seed, discarded)

    @property
    def variance(self) -> float:
        return self.stderr**2


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """Orthonormal columns spanning a linear subspace."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2:
            raise ValueError("basis must be a 2-d array of columns")
        if b.shape[1] and np.abs(b.T @ b - np.eye(b.shape[1])).max() > 1e-12:
            raise ValueError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def random_subspace(d: int, m: int, rng: np.random.Generator) -> SubspaceBasis:
    """Uniform random ``m``-dimensional subspace of ``R^d`` (QR of a Gaussian frame)."""
    if m == 0:
        return SubspaceBasis(np.zeros((d, 0)))
    q, _ = np.linalg.qr(rng.standard_normal((d, m)))
    return SubspaceBasis(q)


def sphere_points(basis: np.ndarray, samples: int, rng: np.random.Generator) -> np.ndarray:
    """``samples`` uniform points on the unit sphere of the span of ``basis`` columns (rows out)."""
    z = rng.standard_normal((samples, basis.shape[1]))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z @ basis.T


def solid_angle_mc(C: PolyCone, samples: int, seed=0) -> AngleEstimate:
    """Fraction of the unit sphere of ``lin C`` lying in ``C``."""
    rng, seed_value = as_generator(seed)
    if C.dim == 0 or C.is_subspace:
        return AngleEstimate.exact(1.0, samples, seed_value)
    if C.effective_halfspaces.shape[0] == 1:
        return AngleEstimate.exact(0.5, samples, seed_value)  # a halfspace of lin C
    pts = sphere_points(C.span_basis, samples, rng)
    hits = int(np.count_nonzero(C.contains(pts)))
    return AngleEstimate.bernoulli(hits, samples, seed_value)


def _margin(C: PolyCone, W: np.ndarray) -> float:
    """LP margin for ``C`` against the subspace spanned by the columns of ``W``; ``inf`` if trivially inside."""
    d = C.dim_ambient
    if C.equations is not None and C.equations.shape[0]:
        inner = null_space(C.equations @ W, W.shape[1])
        W = W @ inner
    if C.generators is not None:
        # keep only the part of W inside lin C
        span = C.span_basis
        comp = null_space(span.T, d).T
        if comp.shape[0]:
            W = W @ null_space(comp @ W, W.shape[1])
    if W.shape[1] == 0:
        return 0.0
    A = C.effective_halfspaces
    if A.shape[0] == 0:
        return math.inf
    G = A @ W
    G /= np.maximum(np.linalg.norm(A, axis=1), 1e-300)[:, None]
    return strict_margin(G)


def subspace_intersects_cone(C: PolyCone, W: SubspaceBasis, eps_lp: float = EPS_LP) -> bool:
    """Whether ``W`` meets the interior of ``C`` (relative to ``lin C``).

    Decided by the strict-margin LP; margins in ``(0, eps_lp]`` cannot be
    certified and raise :class:`GeneralPositionViolation`.
    """
    t = _margin(C, W.basis)
    if t > eps_lp:
        return True
    if t <= eps_lp * 1e-3:
        return False
    raise GeneralPositionViolation(f"LP margin {t:.3e} within eps_lp of zero")


def _line_hits(C: PolyCone, u: np.ndarray) -> np.ndarray:
    return C.contains(u) | C.contains(-u)


def grassmann_angle_mc(C: PolyCone, k: int, samples: int, seed=0,
                       eps_lp: float = EPS_LP) -> AngleEstimate:
    """Probability that a uniform ``(d-k)``-subspace meets ``C`` nontrivially.

    Subspaces whose LP margin is too small to certify are discarded, counted
    and replaced by fresh draws.
    """
    rng, seed_value = as_generator(seed)
    d = C.dim_ambient
    if not 0 <= k <= d:
        raise ValueError(f"k must lie in 0..{d}")
    m = d - k
    if C.dim == 0:
        return AngleEstimate.exact(0.0, samples, seed_value)
    if k == 0:
        return AngleEstimate.exact(1.0, samples, seed_value)
    if m + C.dim <= d:
        return AngleEstimate.exact(0.0, samples, seed_value)
    if C.is_subspace:
        return AngleEstimate.exact(1.0 if k <= C.dim - 1 else 0.0, samples, seed_value)
    if k < C.lineality_dim:
        return AngleEstimate.exact(1.0, samples, seed_value)
    if m == 1 and C.dim == d:
        u = rng.standard_normal((samples, d))
        hits = int(np.count_nonzero(_line_hits(C, u)))
        return AngleEstimate.bernoulli(hits, samples, seed_value)
    hits = 0
    discarded = 0
    used = 0
    while used < samples:
        # uncertified frames are redrawn so every call uses exactly ``samples`` subspaces
        for frame in rng.standard_normal((samples - used, d, m)):
            q, _ = np.linalg.qr(frame)
            t = _margin(C, q)
            if t > eps_lp:
                hits += 1
            elif t > eps_lp * 1e-3:
                discarded += 1
                continue
            used += 1
        if discarded > 10 * samples:
            raise GeneralPositionViolation("too many LP margins within eps_lp of zero")
    return AngleEstimate.bernoulli(hits, samples, seed_value, discarded)


# -- face structure of a polyhedral cone ------------------------------------

@dataclass(frozen=True, eq=False)
class ConeFace:
    """A face of a cone: its dimension, linear hull and the constraints tight on it."""

    dim: int
    basis: np.ndarray          # orthonormal columns spanning lin F (ambient coordinates)
    tight: tuple[int, ...]     # indices into the effective halfspaces
    rays: tuple[int, ...]      # extreme rays (of the pointed part) lying in F


@dataclass(frozen=True, eq=False)
class _ConeStructure:
    span: np.ndarray           # d x p, lin C
    halfspaces: np.ndarray     # r x d effective, unit rows
    rays: np.ndarray           # R x d unit extreme rays of the pointed part
    lineality: np.ndarray      # d x l
    faces: list[ConeFace] = field(default_factory=list)


def _extreme_rays(App: np.ndarray, tol: float = 1e-9) -> list[np.ndarray]:
    r, q = App.shape
    if q == 1:
        cands = [np.array([1.0]), np.array([-1.0])]
        return [y for y in cands if np.all(App @ y <= tol)]
    rays: list[np.ndarray] = []
    for combo in itertools.combinations(range(r), q - 1):
        sub = App[list(combo)]
        _, s, vt = np.linalg.svd(sub)
        if s.size < q - 1 or s[-1] < 1e-10:
            continue
        y = vt[-1]
        for cand in (y, -y):
            if np.all(App @ cand <= tol):
                if not any(np.abs(cand - z).max() < 1e-7 for z in rays):
                    rays.append(cand)
                break
    return rays


def _structure(C: PolyCone) -> _ConeStructure:
    Z = C.span_basis
    A = C.effective_halfspaces
    A = A / np.linalg.norm(A, axis=1, keepdims=True) if A.shape[0] else A
    p = Z.shape[1]
    if A.shape[0] == 0:
        face = ConeFace(p, Z, (), ())
        return _ConeStructure(Z, A, np.zeros((0, C.dim_ambient)), Z, [face])
    Ap = A @ Z
    Lp = null_space(Ap, p)
    U = orthonormal_basis(Ap)
    App = Ap @ U
    rays_q = _extreme_rays(App)
    q = U.shape[1]
    if not rays_q:
        raise ValueError("cone has implicit equalities; pass them as equations")
    L = Z @ Lp
    rays = np.array([Z @ (U @ y) for y in rays_q])
    tight = np.abs(App @ np.array(rays_q).T) <= 1e-9  # r x R
    n_rays = len(rays_q)

    def mask_of(cols) -> int:
        m = 0
        for c in cols:
            m |= 1 << int(c)
        return m

    facet_masks = []
    for i in range(A.shape[0]):
        cols = np.flatnonzero(tight[i])
        rank = np.linalg.matrix_rank(rays[cols]) if cols.size else 0
        if rank == q - 1:
            facet_masks.append(mask_of(cols))
    seen = set(facet_masks) | {0, (1 << n_rays) - 1}
    frontier = set(facet_masks)
    while frontier:
        new = set()
        for a in frontier:
            for f in facet_masks:
                x = a & f
                if x not in seen:
                    new.add(x)
        seen |= new
        frontier = new
    faces = []
    for mask in sorted(seen):
        idx = [i for i in range(n_rays) if mask >> i & 1]
        rank = int(np.linalg.matrix_rank(rays[idx])) if idx else 0
        dim = L.shape[1] + rank
        tight_rows = tuple(int(i) for i in range(A.shape[0]) if np.all(tight[i, idx]))
        cols = [L] + ([rays[idx].T] if idx else [])
        basis = orthonormal_basis(np.hstack(cols).T) if dim else np.zeros((C.dim_ambient, 0))
        faces.append(ConeFace(dim, basis, tight_rows, tuple(idx)))
    return _ConeStructure(Z, A, rays, L, faces)


def cone_faces(C: PolyCone) -> list[ConeFace]:
    """All nonempty faces of ``C`` (including its lineality space and ``C`` itself)."""
    return _structure(C).faces


def _face_angles(struct: _ConeStructure, face: ConeFace, samples: int,
                 rng: np.random.Generator) -> tuple[AngleEstimate, AngleEstimate]:
    """Internal angle of the face and the external angle of ``C`` at it."""
    A = struct.halfspaces
    loose = [i for i in range(A.shape[0]) if i not in set(face.tight)]
    if not loose:
        inner = AngleEstimate.exact(1.0, samples)
    else:
        pts = sphere_points(face.basis, samples, rng)
        hits = int(np.count_nonzero(np.all(pts @ A[loose].T <= 0.0, axis=1)))
        inner = AngleEstimate.bernoulli(hits, samples)
    if not face.tight:
        outer = AngleEstimate.exact(1.0, samples)
    else:
        # normal cone: pos of the tight normals (projected into lin C)
        normals = A[list(face.tight)] @ struct.span @ struct.span.T
        nb = orthonormal_basis(normals)
        others = [i for i in range(struct.rays.shape[0]) if i not in set(face.rays)]
        if not others:
            outer = AngleEstimate.exact(1.0, samples)
        else:
            pts = sphere_points(nb, samples, rng)
            hits = int(np.count_nonzero(np.all(pts @ struct.rays[others].T <= 0.0, axis=1)))
            outer = AngleEstimate.bernoulli(hits, samples)
    return inner, outer


def cone_face_angles(C: PolyCone, samples: int, seed=0):
    """Each face of ``C`` with MC estimates of its internal angle and of the external angle of ``C`` at it."""
    rng, _ = as_generator(seed)
    struct = _structure(C)
    return [(face, *_face_angles(struct, face, samples, rng)) for face in struct.faces]


def face_tangent_cone(C: PolyCone, face: ConeFace) -> PolyCone:
    """Tangent cone of ``C`` along ``face``: the constraints tight on it."""
    A = C.effective_halfspaces
    A = A / np.linalg.norm(A, axis=1, keepdims=True) if A.shape[0] else A
    return PolyCone(A[list(face.tight)] if face.tight else np.zeros((0, C.dim_ambient)))


def _product(a: AngleEstimate, b: AngleEstimate) -> tuple[float, float]:
    mean = a.mean * b.mean
    var = a.mean**2 * b.variance + b.mean**2 * a.variance + a.variance * b.variance
    return mean, var


def conic_intrinsic_volumes_mc(C: PolyCone, samples: int, seed=0) -> list[AngleEstimate]:
    """Estimates of the conic intrinsic volumes ``v_0 .. v_d`` of ``C``.

    Each ``v_k`` is the sum over ``k``-faces ``F`` of the internal angle of
    ``F`` times the external angle of ``C`` at ``F``; both angles are
    estimated independently with ``samples`` sphere draws.
    """
    rng, seed_value = as_generator(seed)
    d = C.dim_ambient
    struct = _structure(C)
    means = [0.0] * (d + 1)
    vars_ = [0.0] * (d + 1)
    for face in struct.faces:
        inner, outer = _face_angles(struct, face, samples, rng)
        m, v = _product(inner, outer)
        means[face.dim] += m
        vars_[face.dim] += v
    return [AngleEstimate(means[k], math.sqrt(vars_[k]), samples, seed_value) for k in range(d + 1)]


@dataclass(frozen=True)
class CroftonResult:
    k: int
    grassmann: AngleEstimate
    crofton_sum: float
    residual: float
    stderr: float
    relation_residual: float
    relation_stderr: float


def crofton_consistency(C: PolyCone, k: int, samples: int, seed=0) -> CroftonResult:
    """Compare ``gamma_k`` with ``2 (v_{k+1} + v_{k+3} + ...)`` and ``v_k`` with ``(gamma_{k-1} - gamma_{k+1})/2``.

    ``gamma_{-1}`` is 1.  Grassmann angles and intrinsic volumes come from
    independent streams, so standard errors add in quadrature.
    """
    rng, _ = as_generator(seed)
    if C.is_subspace:
        raise ValueError("the Crofton relation needs a cone that is not a linear subspace")
    d = C.dim_ambient
    ups = conic_intrinsic_volumes_mc(C, samples, rng)
    gammas = {-1: AngleEstimate.exact(1.0)}
    for i in (k - 1, k, k + 1):
        if 0 <= i <= d:
            gammas[i] = grassmann_angle_mc(C, i, samples, rng)
        elif i > d:
            gammas[i] = AngleEstimate.exact(0.0)
    odd = [i for i in range(k + 1, d + 1, 2)]
    crofton = 2.0 * sum(ups[i].mean for i in odd)
    crofton_var = 4.0 * sum(ups[i].variance for i in odd)
    g = gammas[k]
    residual = abs(g.mean - crofton)
    stderr = math.sqrt(g.variance + crofton_var)
    rel = 0.5 * (gammas[k - 1].mean - gammas[k + 1].mean)
    rel_var = 0.25 * (gammas[k - 1].variance + gammas[k + 1].variance)
    uk = ups[k] if k <= d else AngleEstimate.exact(0.0)
    return CroftonResult(k, g, crofton, residual, stderr, abs(uk.mean - rel),
                         math.sqrt(uk.variance + rel_var))


def cone_from_generators(generators) -> PolyCone:
    """Halfspace description of ``pos(generators)`` (generators spanning ``R^d``).

    The result is the whole space (no halfspaces) when the generators
    positively span ``R^d``.
    """
    G = np.atleast_2d(np.asarray(generators, dtype=float))
    n, d = G.shape
    if np.linalg.matrix_rank(G) < d:
        raise ValueError("generators must span the ambient space")
    Gn = G / np.linalg.norm(G, axis=1, keepdims=True)
    normals: list[np.ndarray] = []
    for combo in itertools.combinations(range(n), d - 1):
        sub = Gn[list(combo)]
        if d > 1:
            _, s, vt = np.linalg.svd(sub)
            if s[-1] < 1e-10:
                continue
            a = vt[-1]
        else:
            a = np.ones(1)
        vals = Gn @ a
        for cand, v in ((a, vals), (-a, -vals)):
            if np.all(v <= 1e-10):
                if not any(np.abs(cand - b).max() < 1e-7 for b in normals):
                    normals.append(cand)
                break
    if d == 1:
        normals = [a for a in (np.array([1.0]), np.array([-1.0])) if np.all(Gn @ a <= 1e-10)]
    A = np.array(normals) if normals else np.zeros((0, d))
    return PolyCone(A, generators=G)


def orthant(n: int) -> PolyCone:
    """The nonnegative orthant of ``R^n``."""
    return PolyCone(-np.eye(n), generators=np.eye(n))
