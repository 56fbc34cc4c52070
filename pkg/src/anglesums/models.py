"""Samplers for the random polytope models and the deterministic fixtures."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .cones import orthant
from .errors import GPViolation
from .geometry import Polytope, PolyCone, convex_hull, orthonormal_basis
from .rng import as_generator

__all__ = [
    "WalkIncrementModel",
    "GP_TOL",
    "sample_gaussian_points",
    "sample_walk_points",
    "check_general_position",
    "gaussian_projection_points",
    "fixture",
    "FIXTURES",
]

GP_TOL = 1e-10
FIXTURES = ("regular-simplex", "orthoscheme", "cube", "orthant")


@dataclass(frozen=True, eq=False)
class WalkIncrementModel:
    """Law of the increments of an exchangeable walk.

    ``iid-gaussian`` draws independent standard Gaussian increments;
    ``permuted-fixed`` shuffles a fixed list of increments uniformly.
    """

    kind: str
    d: int
    increments: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("iid-gaussian", "permuted-fixed"):
            raise ValueError(f"unknown increment model {self.kind!r}")
        if self.kind == "permuted-fixed":
            if self.increments is None:
                raise ValueError("permuted-fixed needs an increment list")
            inc = np.asarray(self.increments, dtype=float)
            if inc.ndim != 2 or inc.shape[1] != self.d:
                raise ValueError("increments must be an (n, d) array")
            object.__setattr__(self, "increments", inc)

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "iid-gaussian":
            return rng.standard_normal((n, self.d))
        if self.increments.shape[0] != n:
            raise ValueError(f"model holds {self.increments.shape[0]} increments, asked for {n}")
        return self.increments[rng.permutation(n)]


def sample_gaussian_points(n: int, d: int, seed=0) -> np.ndarray:
    """``n`` independent standard Gaussian points in ``R^d`` (rows)."""
    rng, _ = as_generator(seed)
    return rng.standard_normal((n, d))


def check_general_position(partial_sums: np.ndarray, tol: float = GP_TOL) -> None:
    """Raise :class:`GPViolation` if some ``d`` of the partial sums are nearly linearly dependent.

    Dependence is measured by ``|det| / prod(norms)``, the volume of the
    parallelepiped spanned by the normalized vectors.
    """
    S = np.asarray(partial_sums, dtype=float)
    n, d = S.shape
    norms = np.linalg.norm(S, axis=1)
    if np.any(norms <= tol):
        raise GPViolation("a partial sum vanishes", indices=tuple(np.flatnonzero(norms <= tol)))
    unit = S / norms[:, None]
    combos = np.array(list(itertools.combinations(range(n), d)))
    dets = np.abs(np.linalg.det(unit[combos]))
    bad = int(np.argmin(dets))
    if dets[bad] <= tol:
        raise GPViolation(
            f"partial sums {tuple(int(i) + 1 for i in combos[bad])} are linearly dependent "
            f"(normalized volume {dets[bad]:.2e})",
            indices=tuple(int(i) + 1 for i in combos[bad]),
        )


def sample_walk_points(n: int, model: WalkIncrementModel, seed=0,
                       check_gp: bool = True, tol: float = GP_TOL) -> np.ndarray:
    """Positions ``S_0 = 0, S_1, ..., S_n`` of the walk, as ``n + 1`` rows."""
    if n < model.d:
        raise ValueError("need n >= d")
    rng, _ = as_generator(seed)
    steps = model.draw(n, rng)
    path = np.vstack([np.zeros((1, model.d)), np.cumsum(steps, axis=0)])
    if check_gp:
        check_general_position(path[1:], tol)
    return path


def gaussian_projection_points(fixture_obj, d: int, seed=0) -> np.ndarray:
    """Images ``A v`` of the fixture's vertices (or cone generators) under a ``d x n`` Gaussian matrix."""
    rng, _ = as_generator(seed)
    if isinstance(fixture_obj, PolyCone):
        pts = fixture_obj.generators
    elif isinstance(fixture_obj, Polytope):
        pts = fixture_obj.vertices
    else:
        pts = np.atleast_2d(np.asarray(fixture_obj, dtype=float))
    n = pts.shape[1]
    if d > n:
        raise ValueError(f"cannot project R^{n} onto R^{d} with d > n")
    A = rng.standard_normal((d, n))
    return pts @ A.T


def _regular_simplex_vertices(n: int) -> np.ndarray:
    """``e_1 .. e_n`` written in isometric coordinates of their affine hull (R^{n-1})."""
    e = np.eye(n)
    centered = e - e.mean(axis=0)
    basis = orthonormal_basis(centered)  # n x (n-1)
    return centered @ basis


def fixture(name: str, param: int) -> Polytope | PolyCone:
    """Deterministic fixtures: ``regular-simplex``, ``orthoscheme``, ``cube``, ``orthant``.

    ``regular-simplex`` with parameter ``n`` is ``conv(e_1..e_n)`` placed
    isometrically in ``R^{n-1}``; ``orthoscheme`` is
    ``conv(0, e_1, e_1+e_2, ..., e_1+...+e_n)``; ``cube`` is ``[0, 1]^d``;
    ``orthant`` is the cone ``R^n_+``.
    """
    if param < 1:
        raise ValueError("fixture parameter must be >= 1")
    if name == "regular-simplex":
        if param < 2:
            raise ValueError("regular-simplex needs n >= 2")
        return convex_hull(_regular_simplex_vertices(param))
    if name == "orthoscheme":
        verts = np.tril(np.ones((param + 1, param)), -1)
        return convex_hull(verts)
    if name == "cube":
        return convex_hull(np.array(list(itertools.product((0.0, 1.0), repeat=param))))
    if name == "orthant":
        return orthant(param)
    raise ValueError(f"unknown fixture {name!r}; expected one of {FIXTURES}")
