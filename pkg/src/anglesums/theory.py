"""Closed-form expectations for Gaussian polytopes, random-walk hulls and Gaussian projections.

Walk-model values are exact rationals built from Stirling numbers.
Gaussian-model values are sums of products of regular-simplex angle sums and
carry an additive error bound propagated from the quadrature tolerance.
Every quantity that has two equivalent closed forms is evaluated both ways;
disagreement raises :class:`~anglesums.errors.InternalInconsistency`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .combinatorics import binomial, stirling_first, stirling_second
from .errors import InternalInconsistency
from .simplex_angles import DEFAULT_TOL, external_angle_sum, internal_angle_sum

__all__ = [
    "TheoryValue",
    "ef_gaussian",
    "ef_walk",
    "grassmann_sum_gaussian",
    "grassmann_sum_walk",
    "internal_angle_sum_gaussian",
    "internal_angle_sum_walk",
    "intrinsic_sum_gaussian",
    "intrinsic_sum_walk",
    "external_angle_sum_gaussian",
    "external_angle_sum_walk",
    "FixtureAngleData",
    "fixture_angle_data",
    "projection_grassmann_sum",
    "projection_intrinsic_sum",
    "projection_ef",
    "gram_euler_residual",
]


@dataclass(frozen=True)
class TheoryValue:
    """A closed-form value: exact when ``exact`` is set, otherwise ``approx +- abs_error_bound``."""

    exact: Fraction | None
    approx: float
    abs_error_bound: float

    @classmethod
    def from_exact(cls, value) -> "TheoryValue":
        value = Fraction(value)
        return cls(value, float(value), 0.0)

    @classmethod
    def approximate(cls, value: float, bound: float) -> "TheoryValue":
        return cls(None, float(value), float(bound))

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def __float__(self) -> float:
        return self.approx

    def exact_str(self) -> str:
        if self.exact is None:
            return ""
        return str(self.exact)


# -- building blocks --------------------------------------------------------

class _GaussTerms:
    """``a(m) = ext(n, m) * int(m, j+1)`` with per-term error bounds."""

    def __init__(self, n: int, j: int, tol: float):
        self.n, self.j, self.tol = n, j, tol

    def __call__(self, m: int) -> tuple[float, float]:
        if not self.j + 1 <= m <= self.n:
            return 0.0, 0.0
        e = external_angle_sum(self.n, m, self.tol).value
        i = internal_angle_sum(m, self.j + 1, self.tol).value
        t = self.tol
        return e * i, (e + t) * t + (i + t) * t

    def combine(self, coeffs: dict[int, int]) -> TheoryValue:
        total = math.fsum(c * self(m)[0] for m, c in coeffs.items())
        err = math.fsum(abs(c) * self(m)[1] for m, c in coeffs.items())
        return TheoryValue.approximate(total, err)


def _walk_term(n: int, j: int, m: int) -> Fraction:
    """``(j!/n!) * s(n+1, m) * S(m, j+1)``; zero outside the natural index range."""
    if m < 0:
        return Fraction(0)
    return Fraction(math.factorial(j) * stirling_first(n + 1, m) * stirling_second(m, j + 1),
                    math.factorial(n))


def _walk_combine(n: int, j: int, coeffs: dict[int, int]) -> TheoryValue:
    return TheoryValue.from_exact(sum((c * _walk_term(n, j, m) for m, c in coeffs.items()),
                                      Fraction(0)))


def _down(start: int, step: int = 2) -> list[int]:
    """``start, start - step, ...`` down to 0 (inclusive)."""
    return list(range(start, -1, -step))


def _up(start: int, stop: int, step: int = 2) -> list[int]:
    return list(range(start, stop + 1, step))


def _add(coeffs: dict[int, int], ms, c: int) -> dict[int, int]:
    for m in ms:
        coeffs[m] = coeffs.get(m, 0) + c
    return coeffs


def _agree(primary: TheoryValue, other: TheoryValue, what: str, tol: float) -> TheoryValue:
    if primary.is_exact and other.is_exact:
        if primary.exact != other.exact:
            raise InternalInconsistency(f"{what}: {primary.exact} != {other.exact}")
        return primary
    bound = 10 * tol
    if abs(primary.approx - other.approx) > bound:
        raise InternalInconsistency(
            f"{what}: {primary.approx!r} vs {other.approx!r} differ by more than {bound:.1e}")
    return primary


def _check_gauss(n: int, d: int, j: int):
    if d < 1 or n < d + 1:
        raise ValueError("Gaussian-polytope formulas need d >= 1 and n >= d + 1")
    if not 0 <= j <= d - 1:
        raise ValueError(f"j must lie in 0..{d - 1}")


def _check_walk(n: int, d: int, j: int):
    if d < 1 or n < d:
        raise ValueError("random-walk formulas need d >= 1 and n >= d")
    if not 0 <= j <= d - 1:
        raise ValueError(f"j must lie in 0..{d - 1}")


# -- expected face numbers --------------------------------------------------

def ef_gaussian(n: int, d: int, j: int, tol: float = DEFAULT_TOL) -> TheoryValue:
    """Expected number of ``j``-faces of the Gaussian polytope with ``n`` points in ``R^d``."""
    _check_gauss(n, d, j)
    return _GaussTerms(n, j, tol).combine(_add({}, _down(d), 2))


def ef_walk(n: int, d: int, j: int) -> TheoryValue:
    """Expected number of ``j``-faces of the hull of an ``n``-step walk in ``R^d`` (exact)."""
    _check_walk(n, d, j)
    return _walk_combine(n, j, _add({}, _down(d), 2))


# -- Grassmann angle sums ---------------------------------------------------

def _grassmann_coeffs(n: int, d: int, k: int) -> tuple[dict[int, int], dict[int, int]]:
    primary = _add(_add({}, _down(d), 2), _down(k), -2)
    alternative = _add(_add({}, _up(k + 2, n + 1), 2), _up(d + 2, n + 1), -2)
    return primary, alternative


def grassmann_sum_gaussian(n: int, d: int, j: int, k: int, tol: float = DEFAULT_TOL) -> TheoryValue:
    """Expected sum over ``j``-faces of the ``k``-th Grassmann angle of the tangent cones (Gaussian polytope)."""
    _check_gauss(n, d, j)
    if not 0 <= k <= d:
        raise ValueError(f"k must lie in 0..{d}")
    terms = _GaussTerms(n, j, tol)
    p, a = _grassmann_coeffs(n, d, k)
    return _agree(terms.combine(p), terms.combine(a), f"grassmann_sum_gaussian{(n, d, j, k)}", tol)


def grassmann_sum_walk(n: int, d: int, j: int, k: int) -> TheoryValue:
    """Walk-model counterpart of :func:`grassmann_sum_gaussian` (exact)."""
    _check_walk(n, d, j)
    if not 0 <= k <= d:
        raise ValueError(f"k must lie in 0..{d}")
    p, a = _grassmann_coeffs(n + 1, d, k)
    return _agree(_walk_combine(n, j, p), _walk_combine(n, j, a),
                  f"grassmann_sum_walk{(n, d, j, k)}", 0.0)


# -- conic intrinsic volume sums --------------------------------------------

def _alternating(d: int, top: int) -> tuple[dict[int, int], dict[int, int]]:
    down = {d - s: (-1) ** s for s in range(d + 1)}
    up = {d + s: (-1) ** (s + 1) for s in range(1, top - d + 1)}
    return down, up


def intrinsic_sum_gaussian(n: int, d: int, j: int, k: int, tol: float = DEFAULT_TOL) -> TheoryValue:
    """Expected sum over ``j``-faces of the ``k``-th conic intrinsic volume of the tangent cones."""
    _check_gauss(n, d, j)
    if not j <= k <= d:
        raise ValueError(f"k must lie in {j}..{d}")
    terms = _GaussTerms(n, j, tol)
    what = f"intrinsic_sum_gaussian{(n, d, j, k)}"
    if k < d:
        primary = terms.combine({k + 1: 1})
        upper = grassmann_sum_gaussian(n, d, j, k + 1, tol)
        lower = ef_gaussian(n, d, j, tol) if k == 0 else grassmann_sum_gaussian(n, d, j, k - 1, tol)
        via_gamma = TheoryValue.approximate(0.5 * (lower.approx - upper.approx),
                                            0.5 * (lower.abs_error_bound + upper.abs_error_bound))
        return _agree(primary, via_gamma, what, tol)
    down, up = _alternating(d, n)
    primary = terms.combine(down)
    _agree(primary, terms.combine(up), what, tol)
    half = grassmann_sum_gaussian(n, d, j, d - 1, tol)
    return _agree(primary, TheoryValue.approximate(0.5 * half.approx, 0.5 * half.abs_error_bound),
                  what, tol)


def intrinsic_sum_walk(n: int, d: int, j: int, k: int) -> TheoryValue:
    """Walk-model counterpart of :func:`intrinsic_sum_gaussian` (exact)."""
    _check_walk(n, d, j)
    if not j <= k <= d:
        raise ValueError(f"k must lie in {j}..{d}")
    what = f"intrinsic_sum_walk{(n, d, j, k)}"
    if k < d:
        primary = _walk_combine(n, j, {k + 1: 1})
        upper = grassmann_sum_walk(n, d, j, k + 1).exact
        lower = ef_walk(n, d, j).exact if k == 0 else grassmann_sum_walk(n, d, j, k - 1).exact
        return _agree(primary, TheoryValue.from_exact((lower - upper) / 2), what, 0.0)
    down, up = _alternating(d, n + 1)
    primary = _walk_combine(n, j, down)
    _agree(primary, _walk_combine(n, j, up), what, 0.0)
    half = grassmann_sum_walk(n, d, j, d - 1).exact / 2
    return _agree(primary, TheoryValue.from_exact(half), what, 0.0)


def internal_angle_sum_gaussian(n: int, d: int, j: int, tol: float = DEFAULT_TOL) -> TheoryValue:
    """Expected sum of internal angles at the ``j``-faces of the Gaussian polytope."""
    return intrinsic_sum_gaussian(n, d, j, d, tol)


def internal_angle_sum_walk(n: int, d: int, j: int) -> TheoryValue:
    """Expected sum of internal angles at the ``j``-faces of the walk hull (exact)."""
    return intrinsic_sum_walk(n, d, j, d)


def external_angle_sum_gaussian(n: int, d: int, j: int, tol: float = DEFAULT_TOL) -> TheoryValue:
    """Expected sum of external angles at the ``j``-faces: ``ext(n, j+1)``."""
    return intrinsic_sum_gaussian(n, d, j, j, tol)


def external_angle_sum_walk(n: int, d: int, j: int) -> TheoryValue:
    """Expected sum of external angles at the ``j``-faces: ``(j!/n!) s(n+1, j+1)``."""
    return intrinsic_sum_walk(n, d, j, j)


def gram_euler_residual(model: str, n: int, d: int, tol: float = DEFAULT_TOL) -> float:
    """``sum_j (-1)^j E(internal angle sum at j-faces) + (-1)^d``; zero in theory."""
    if model == "walk":
        total = sum(((-1) ** j * internal_angle_sum_walk(n, d, j).exact for j in range(d)),
                    Fraction(0)) + (-1) ** d
        return float(total)
    return math.fsum([(-1) ** j * internal_angle_sum_gaussian(n, d, j, tol).approx
                      for j in range(d)] + [(-1) ** d])


# -- Gaussian projections of fixtures ---------------------------------------

@dataclass(frozen=True)
class FixtureAngleData:
    """Face counts and tangent-cone intrinsic-volume sums of a fixed polyhedral set.

    ``upsilon_sum(j, k)`` is the sum over ``j``-faces ``G`` of the ``k``-th
    conic intrinsic volume of the tangent cone at ``G``.
    """

    name: str
    dim: int
    f: tuple[int, ...]
    upsilon_sum: Callable[[int, int], TheoryValue]

    def grassmann_sum(self, j: int, i: int) -> TheoryValue:
        """Sum over ``j``-faces of ``gamma_i`` of the tangent cones, via the conic Crofton formula."""
        if i == -1:
            return TheoryValue.from_exact(self.f[j])
        parts = [self.upsilon_sum(j, i + s) for s in range(1, self.dim - i + 1, 2)]
        return _sum_values(parts, 2)


def _sum_values(parts, scale=1) -> TheoryValue:
    if all(p.is_exact for p in parts):
        return TheoryValue.from_exact(scale * sum((p.exact for p in parts), Fraction(0)))
    return TheoryValue.approximate(scale * math.fsum(p.approx for p in parts),
                                   abs(scale) * math.fsum(p.abs_error_bound for p in parts))


def _diff(a: TheoryValue, b: TheoryValue, scale=1) -> TheoryValue:
    if a.is_exact and b.is_exact:
        return TheoryValue.from_exact(scale * (a.exact - b.exact))
    return TheoryValue.approximate(scale * (a.approx - b.approx),
                                   abs(scale) * (a.abs_error_bound + b.abs_error_bound))


def fixture_angle_data(name: str, param: int, tol: float = DEFAULT_TOL) -> FixtureAngleData:
    """Known intrinsic-volume sums for the fixture catalogue (see :func:`anglesums.models.fixture`)."""
    n = param
    if name == "orthant":
        def ups(j, k):
            return TheoryValue.from_exact(
                Fraction(binomial(n, j) * binomial(n - j, k - j), 2 ** (n - j)))
        return FixtureAngleData(name, n, tuple(binomial(n, j) for j in range(n + 1)), ups)
    if name == "cube":
        def ups(j, k):
            return TheoryValue.from_exact(binomial(n, j) * binomial(n - j, k - j))
        return FixtureAngleData(name, n, tuple(binomial(n, j) * 2 ** (n - j) for j in range(n + 1)),
                                ups)
    if name == "orthoscheme":
        f = tuple(binomial(n + 1, j + 1) for j in range(n + 1))

        def ups(j, k):
            if k < j or k > n:
                return TheoryValue.from_exact(0)
            value = _walk_term(n, j, k + 1)
            if k == n:
                rest = sum((_walk_term(n, j, m + 1) for m in range(j, n)), Fraction(0))
                if f[j] - rest != value:
                    raise InternalInconsistency("orthoscheme intrinsic volumes do not sum to f_j")
            return TheoryValue.from_exact(value)
        return FixtureAngleData(name, n, f, ups)
    if name == "regular-simplex":
        dim = n - 1
        f = tuple(binomial(n, j + 1) for j in range(dim + 1))

        def ups(j, k):
            if k < j or k > dim:
                return TheoryValue.from_exact(0)
            return _GaussTerms(n, j, tol).combine({k + 1: 1})
        return FixtureAngleData(name, dim, f, ups)
    raise ValueError(f"no angle data for fixture {name!r}")


def projection_grassmann_sum(data: FixtureAngleData, d: int, j: int, k: int) -> TheoryValue:
    """Expected ``gamma_k`` sum over ``j``-faces of the Gaussian image ``A P`` in ``R^d``.

    Equals the fixture's sum of ``gamma_k - gamma_d`` over its ``j``-faces,
    for ``0 <= j <= d-1`` and ``j-1 <= k <= d-1``.
    """
    if not 1 <= d <= data.dim:
        raise ValueError(f"d must lie in 1..{data.dim}")
    if not 0 <= j <= d - 1 or not j - 1 <= k <= d:
        raise ValueError("need 0 <= j <= d-1 and j-1 <= k <= d")
    return _diff(data.grassmann_sum(j, k), data.grassmann_sum(j, d))


def projection_ef(data: FixtureAngleData, d: int, j: int) -> TheoryValue:
    """Expected number of ``j``-faces of the Gaussian image ``A P`` in ``R^d``."""
    return projection_grassmann_sum(data, d, j, j - 1)


def projection_intrinsic_sum(data: FixtureAngleData, d: int, j: int, k: int,
                             tol: float = DEFAULT_TOL) -> TheoryValue:
    """Expected ``upsilon_k`` sum over ``j``-faces of the Gaussian image ``A P`` in ``R^d``."""
    if not 0 <= j <= k <= d:
        raise ValueError("need 0 <= j <= k <= d")
    what = f"projection_intrinsic_sum({data.name}, d={d}, j={j}, k={k})"
    if k < d:
        primary = data.upsilon_sum(j, k)
        via_gamma = _diff(projection_grassmann_sum(data, d, j, k - 1),
                          projection_grassmann_sum(data, d, j, k + 1), Fraction(1, 2))
        return _agree(primary, via_gamma, what, tol)
    parts = [data.upsilon_sum(j, d + s) for s in range(0, data.dim - d + 1)]
    signed = [p if s % 2 == 0 else _diff(TheoryValue.from_exact(0), p) for s, p in enumerate(parts)]
    primary = _sum_values(signed)
    half = projection_grassmann_sum(data, d, j, d - 1)
    return _agree(primary, _diff(half, TheoryValue.from_exact(0), Fraction(1, 2)), what, tol)
