"""Internal and external angle sums of the regular simplex.

``internal_angle_sum(n, k)`` is the total internal angle of the regular simplex
``conv(e_1, ..., e_n)`` over its ``k``-vertex faces, ``external_angle_sum(n, k)``
the total external angle.  Both are one-dimensional integrals involving the
standard normal distribution function on the real and imaginary axes.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import erfc

from .combinatorics import binomial
from .errors import PhiOverflow
from .quadrature import gauss_kronrod

__all__ = [
    "AngleSumValue",
    "ComplexPhiValue",
    "DEFAULT_TOL",
    "Z_MAX",
    "phi_real",
    "phi_imag",
    "log_phi_imag",
    "internal_angle_sum",
    "external_angle_sum",
    "simplex_angle_identity_check",
    "simplex_tangent_cone_upsilon",
]

DEFAULT_TOL = 1e-10
Z_MAX = 40.0

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
# sup_x 2x D(x) for Dawson's function D, rounded up; bounds Im Phi(iy) <= 0.52 e^{y^2/2} / y.
_IMAG_BOUND = 0.52
_LOG_MAX_FLOAT = math.log(sys.float_info.max)


@dataclass(frozen=True)
class AngleSumValue:
    value: float
    abs_error_bound: float
    n: int
    k: int
    kind: str  # "internal" | "external"

    def __post_init__(self):
        if self.abs_error_bound <= 0:
            raise ValueError("abs_error_bound must be positive")
        if self.value < -self.abs_error_bound:
            raise ValueError(f"negative angle sum {self.value}")

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class ComplexPhiValue:
    re: float
    im: float

    def __complex__(self) -> complex:
        return complex(self.re, self.im)


def phi_real(x):
    """Standard normal CDF, via ``erfc`` so that both tails keep full relative accuracy."""
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(-float(x) / math.sqrt(2.0))
    return 0.5 * erfc(-np.asarray(x, dtype=float) / math.sqrt(2.0))


def _scaled_exp_integral(y: float) -> float:
    """``exp(-y^2/2) * int_0^y exp(t^2/2) dt`` for ``y >= 0``, relative error about 1e-13."""
    if y == 0.0:
        return 0.0
    half = 0.5 * y * y
    value, _ = gauss_kronrod(lambda t: np.exp(0.5 * t * t - half), 0.0, y,
                             epsabs=0.0, epsrel=1e-13)
    return value


def log_phi_imag(y) -> tuple[np.ndarray, np.ndarray]:
    """``(log|Phi(iy)|, arg Phi(iy))`` for real ``y``, without overflow for any ``y``."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    ay = np.abs(y)
    scaled = np.array([_scaled_exp_integral(v) for v in ay]) * _INV_SQRT_2PI
    damp = 0.5 * np.exp(-0.5 * ay * ay)
    log_mod = 0.5 * ay * ay + 0.5 * np.log(damp * damp + scaled * scaled)
    arg = np.sign(y) * np.arctan2(scaled, damp)
    return log_mod, arg


def phi_imag(z: float, z_max: float = Z_MAX) -> ComplexPhiValue:
    """``Phi(iz) = 1/2 + i/sqrt(2 pi) int_0^z exp(t^2/2) dt`` for real ``z``.

    Raises :class:`PhiOverflow` for ``|z| > z_max`` and whenever the imaginary
    part is not representable as a double (``|z|`` above about 37.7); use
    :func:`log_phi_imag` there.
    """
    z = float(z)
    if not math.isfinite(z):
        raise ValueError("phi_imag needs a finite argument")
    if abs(z) > z_max:
        raise PhiOverflow(f"|z| = {abs(z)} exceeds z_max = {z_max}; use log_phi_imag")
    scaled = _scaled_exp_integral(abs(z))
    if scaled == 0.0:
        return ComplexPhiValue(0.5, 0.0)
    log_im = math.log(scaled) + 0.5 * z * z + math.log(_INV_SQRT_2PI)
    if log_im >= _LOG_MAX_FLOAT:
        raise PhiOverflow(f"Im Phi(i*{z}) overflows a double; use log_phi_imag")
    return ComplexPhiValue(0.5, math.copysign(math.exp(log_im), z))


def _internal_integrand(n: int, k: int):
    m = n - k
    root = math.sqrt(n)

    def f(x):
        if m == 0:
            return 2.0 * np.exp(-0.5 * x * x)
        log_mod, arg = log_phi_imag(x / root)
        return 2.0 * np.exp(m * log_mod - 0.5 * x * x) * np.cos(m * arg)

    return f


def _external_integrand(n: int, k: int):
    m = n - k
    root = math.sqrt(k)

    def f(x):
        u = x / root
        return (phi_real(u) ** m + phi_real(-u) ** m) * np.exp(-0.5 * x * x)

    return f


def _internal_cutoff(n: int, k: int, budget: float) -> float:
    """Truncation point whose analytic tail bound is below ``budget``."""
    m = n - k
    a = k / (2.0 * n)
    scale = binomial(n, k) * _INV_SQRT_2PI
    x = max(math.sqrt(n), 1.0)
    while True:
        y = x / math.sqrt(n)
        c = 0.5 * math.exp(-0.5 * y * y) + _IMAG_BOUND / y
        tail = scale * 2.0 * c**m * math.exp(-a * x * x) / (2.0 * a * x)
        if tail < budget:
            return x
        x *= 1.1


def _external_cutoff(n: int, k: int, budget: float) -> float:
    scale = binomial(n, k)
    x = 1.0
    while scale * 2.0 * phi_real(-x) >= budget:
        x += 0.25
    return x


@lru_cache(maxsize=None)
def _angle_sum(n: int, k: int, kind: str, tol: float) -> AngleSumValue:
    if not 1 <= k <= n:
        return AngleSumValue(0.0, tol, n, k, kind)
    if kind == "internal":
        f = _internal_integrand(n, k)
        cutoff = _internal_cutoff(n, k, tol / 10)
    else:
        f = _external_integrand(n, k)
        cutoff = _external_cutoff(n, k, tol / 10)
    scale = binomial(n, k) * _INV_SQRT_2PI
    value, _ = gauss_kronrod(f, 0.0, cutoff, epsabs=0.9 * tol / scale,
                             initial_panels=max(2, int(cutoff)))
    return AngleSumValue(max(scale * value, 0.0), tol, n, k, kind)


def internal_angle_sum(n: int, k: int, tol: float = DEFAULT_TOL) -> AngleSumValue:
    """Sum of the internal angles of ``conv(e_1..e_n)`` at its ``k``-vertex faces.

    Zero for ``k`` outside ``1..n``.  Raises :class:`~anglesums.errors.ToleranceNotMet`
    if adaptive refinement cannot reach ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    return _angle_sum(int(n), int(k), "internal", float(tol))


def external_angle_sum(n: int, k: int, tol: float = DEFAULT_TOL) -> AngleSumValue:
    """Sum of the external angles of ``conv(e_1..e_n)`` at its ``k``-vertex faces."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    return _angle_sum(int(n), int(k), "external", float(tol))


def simplex_angle_identity_check(n: int, k: int, tol: float = DEFAULT_TOL,
                                 perturbation: float = 0.0) -> float:
    """Largest residual of the two inversion identities linking internal and external sums.

    ``sum_m (-1)^(n-m) ext(n,m) int(m,k) = [n == k]`` and
    ``sum_m ext(n,m) int(m,k) = C(n,k)``.  ``perturbation`` is added to every
    internal sum; it exists to confirm that the check is sensitive.
    """
    if not n >= k >= 1:
        raise ValueError("need n >= k >= 1")
    alt = 0.0
    plain = 0.0
    for m in range(k, n + 1):
        term = external_angle_sum(n, m, tol).value * (internal_angle_sum(m, k, tol).value
                                                      + perturbation)
        alt += (-1) ** (n - m) * term
        plain += term
    return max(abs(alt - (1.0 if n == k else 0.0)), abs(plain - binomial(n, k)))


def simplex_tangent_cone_upsilon(n: int, k: int, m: int, tol: float = DEFAULT_TOL) -> float:
    """Conic intrinsic volume of index ``m-1`` of the tangent cone of ``conv(e_1..e_n)`` at a ``k``-vertex face."""
    if not 1 <= k <= n or not 1 <= m <= n:
        raise ValueError("need 1 <= k, m <= n")
    if m < k:
        return 0.0
    return (external_angle_sum(n, m, tol).value * internal_angle_sum(m, k, tol).value
            / binomial(n, k))
