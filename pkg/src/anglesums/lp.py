"""Dense tableau simplex method for tiny linear programs.

Only the form ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0`` is
supported, so the slack basis is feasible and no phase one is needed.
Bland's rule is used for both entering and leaving variables, which rules
out cycling on the highly degenerate feasibility problems solved here.
"""

from __future__ import annotations

import numpy as np

__all__ = ["simplex_max", "strict_margin", "UnboundedLP"]

_EPS = 1e-12


class UnboundedLP(ArithmeticError):
    pass


def simplex_max(c, A, b, max_iter: int = 10_000) -> tuple[float, np.ndarray]:
    """Solve ``max c.x`` subject to ``A x <= b``, ``x >= 0`` (requires ``b >= 0``)."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    if np.any(b < 0):
        raise ValueError("simplex_max needs b >= 0")
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -c
    basis = list(range(n, n + m))
    for _ in range(max_iter):
        cost = T[m, :-1]
        candidates = np.flatnonzero(cost < -_EPS)
        if candidates.size == 0:
            break
        col = int(candidates[0])
        column = T[:m, col]
        pos = column > _EPS
        if not np.any(pos):
            raise UnboundedLP("objective is unbounded")
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / column[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + _EPS * max(1.0, abs(best)))
        row = int(min(ties, key=lambda r: basis[r]))
        T[row] /= T[row, col]
        others = np.arange(m + 1) != row
        T[others] -= np.outer(T[others, col], T[row])
        basis[row] = col
    else:
        raise RuntimeError("simplex iteration limit reached")
    x = np.zeros(n + m)
    x[basis] = T[:m, -1]
    return float(T[m, -1]), x[:n]


def strict_margin(G) -> float:
    """Optimal ``t`` of ``max t  s.t.  G y <= -t, |y|_inf <= 1, 0 <= t <= 1``.

    Positive exactly when some ``y`` has ``G y < 0`` componentwise.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    r, m = G.shape
    # variables: y+ (m), y- (m), t
    A = np.zeros((r + 2 * m + 1, 2 * m + 1))
    A[:r, :m] = G
    A[:r, m:2 * m] = -G
    A[:r, -1] = 1.0
    A[r:r + 2 * m, :2 * m] = np.eye(2 * m)
    A[-1, -1] = 1.0
    b = np.zeros(r + 2 * m + 1)
    b[r:] = 1.0
    c = np.zeros(2 * m + 1)
    c[-1] = 1.0
    value, _ = simplex_max(c, A, b)
    return value
