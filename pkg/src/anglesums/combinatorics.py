"""Exact combinatorial numbers: Stirling numbers of both kinds, Lah numbers,
harmonic numbers and the Stirling inversion identities.

Everything here is exact (Python ``int`` / :class:`fractions.Fraction`).
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction

__all__ = [
    "MAX_N",
    "binomial",
    "stirling_first",
    "stirling_second",
    "lah",
    "harmonic",
    "stirling_identity_check",
    "stirling_gf_check",
]

#: Largest ``n`` kept in the memo tables.  Larger arguments still work but
#: are computed on a throwaway table.
MAX_N = 200


class _Triangle:
    """Row-by-row memo of a triangular recurrence ``T(n+1, m) = w(n, m) T(n, m) + T(n, m-1)``."""

    def __init__(self, weight, cap: int = MAX_N):
        self._weight = weight
        self._cap = cap
        self._rows: list[list[int]] = [[1]]
        self._lock = threading.Lock()

    def _extend(self, rows: list[list[int]], n: int) -> None:
        while len(rows) <= n:
            k = len(rows) - 1
            prev = rows[k]
            row = [0] * (k + 2)
            for m in range(1, k + 2):
                left = prev[m] if m <= k else 0
                row[m] = self._weight(k, m) * left + prev[m - 1]
            rows.append(row)

    def __call__(self, n: int, m: int) -> int:
        if n < 0 or m < 0:
            raise ValueError("Stirling numbers need nonnegative arguments")
        if m > n:
            return 0
        if n > self._cap:
            rows = [r[:] for r in self._rows]
            self._extend(rows, n)
            return rows[n][m]
        if n >= len(self._rows):
            with self._lock:
                self._extend(self._rows, n)
        return self._rows[n][m]


_first = _Triangle(lambda n, m: n)
_second = _Triangle(lambda n, m: m)


def binomial(n: int, k: int) -> int:
    """Binomial coefficient, zero outside ``0 <= k <= n``."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def stirling_first(n: int, m: int) -> int:
    """Signless Stirling number of the first kind: permutations of ``n`` items with ``m`` cycles.

    Zero for ``m`` outside ``1..n`` except ``stirling_first(0, 0) == 1``.
    Negative ``m`` gives 0 so that index arithmetic in the theory sums
    never needs special cases.
    """
    if m < 0:
        return 0
    return _first(n, m)


def stirling_second(n: int, m: int) -> int:
    """Stirling number of the second kind: partitions of an ``n``-set into ``m`` blocks."""
    if m < 0:
        return 0
    return _second(n, m)


def lah(n: int, k: int) -> int:
    """Unsigned Lah number ``n!/k! * C(n-1, k-1)`` for ``1 <= k <= n``."""
    if k < 1 or n < 1:
        raise ValueError("lah(n, k) needs n, k >= 1")
    if k > n:
        raise ValueError(f"lah(n, k) needs k <= n, got n={n}, k={k}")
    return math.factorial(n) // math.factorial(k) * math.comb(n - 1, k - 1)


def harmonic(n: int, order: int = 1) -> Fraction:
    """Exact generalized harmonic number ``sum_{i=1}^n i**-order`` (order 1 or 2)."""
    if n < 1:
        raise ValueError("harmonic(n) needs n >= 1")
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    total = Fraction(0)
    for i in range(1, n + 1):
        total += Fraction(1, i**order)
    return total


def stirling_identity_check(n: int, k: int) -> bool:
    """Check the two Stirling convolutions exactly.

    ``sum_m (-1)**(n-m) s(n,m) S(m,k) == [n == k]`` and
    ``sum_m s(n,m) S(m,k) == L(n,k)``.
    """
    if not n >= k >= 1:
        raise ValueError("need n >= k >= 1")
    alt = 0
    plain = 0
    for m in range(k, n + 1):
        term = stirling_first(n, m) * stirling_second(m, k)
        alt += (-1) ** (n - m) * term
        plain += term
    return alt == (1 if n == k else 0) and plain == lah(n, k)


# -- exact truncated power series, used by the generating-function check ----

def _poly_mul(a: list[Fraction], b: list[Fraction], size: int) -> list[Fraction]:
    out = [Fraction(0)] * size
    for i, ai in enumerate(a[:size]):
        if ai == 0:
            continue
        for j, bj in enumerate(b[: size - i]):
            out[i + j] += ai * bj
    return out


def _series_in_y(log_coeffs: list[Fraction], order: int) -> list[list[Fraction]]:
    """Coefficients ``c[n][m]`` of ``exp(y * g(t))`` where ``g`` has t-coefficients ``log_coeffs``."""
    # exp(y g) = sum_m y^m g^m / m!
    size = order + 1
    result = [[Fraction(0)] * size for _ in range(size)]
    power = [Fraction(1)] + [Fraction(0)] * order
    for m in range(size):
        for n in range(size):
            result[n][m] = power[n] / math.factorial(m)
        power = _poly_mul(power, log_coeffs, size)
    return result


def stirling_gf_check(order: int = 12) -> bool:
    """Compare both Stirling tables with the bivariate generating functions.

    ``(1 - t)**(-y) = exp(y * log(1/(1-t)))`` and ``exp(y (e^t - 1))`` are
    expanded as exact truncated series in ``t`` up to ``t**order``; the
    coefficient of ``t**n y**m`` must equal ``s(n, m)/n!`` and ``S(n, m)/n!``.
    """
    size = order + 1
    log_inv = [Fraction(0)] + [Fraction(1, i) for i in range(1, size)]
    exp_m1 = [Fraction(0)] + [Fraction(1, math.factorial(i)) for i in range(1, size)]
    first = _series_in_y(log_inv, order)
    second = _series_in_y(exp_m1, order)
    for n in range(size):
        fact = math.factorial(n)
        for m in range(size):
            if first[n][m] != Fraction(stirling_first(n, m), fact):
                return False
            if second[n][m] != Fraction(stirling_second(n, m), fact):
                return False
    return True
