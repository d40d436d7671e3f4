"""Per-edge min-max bandwidth sharing (MLBS).

For the users ``A`` of one edge the optimal shares make every user finish at the
same time ``mu``.  Each share is then ``beta_m / (mu - alpha_m)`` and the shares
must add up to one, so ``mu`` is the root of

    g(mu) = sum_m beta_m / (mu - alpha_m) = 1

on ``(max alpha, inf)``.  ``g`` is strictly decreasing there, which makes plain
bisection exact to the requested width.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import Assignment, BandwidthAllocation, Scenario

DEFAULT_BUDGET = 200
RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class EdgeAllocation:
    mu: float
    theta_col: np.ndarray
    converged: bool = True
    iterations: int = 0


def share_sum(alpha: np.ndarray, beta: np.ndarray, mu: float) -> float:
    return float(np.sum(beta / (mu - alpha)))


def mlbs_solve(
    s: Scenario, n: int, members: Iterable[int], max_iter: int = DEFAULT_BUDGET
) -> EdgeAllocation:
    """Optimal shares of edge ``n`` among ``members``.

    ``converged`` is False when the iteration budget ran out before the bracket
    shrank below ``RTOL`` relative width; ``mu`` is still feasible then.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    idx = np.array(sorted(set(members)), dtype=np.intp)
    col = np.zeros(s.num_users)
    if idx.size == 0:
        return EdgeAllocation(0.0, col)
    alpha = s.alpha[idx]
    beta = s.beta[idx, n]
    if idx.size == 1:
        col[idx] = 1.0
        return EdgeAllocation(float(alpha[0] + beta[0]), col)

    top = float(alpha.max())
    lo = top + 1e-9 * max(1.0, top)
    # every term at hi is at most beta_m / sum(beta), so g(hi) <= 1
    hi = top + float(beta.sum())
    it = 0
    converged = True
    if share_sum(alpha, beta, lo) <= 1.0:
        hi = lo
    else:
        converged = False
        while it < max_iter:
            if hi - lo <= RTOL * hi:
                converged = True
                break
            mid = 0.5 * (lo + hi)
            if share_sum(alpha, beta, mid) > 1.0:
                lo = mid
            else:
                hi = mid
            it += 1
        else:
            converged = hi - lo <= RTOL * hi
    col[idx] = beta / (hi - alpha)
    return EdgeAllocation(hi, col, converged, it)


def solve_allocation(
    s: Scenario, a: Assignment, max_iter: int = DEFAULT_BUDGET
) -> tuple[BandwidthAllocation, list[EdgeAllocation]]:
    """MLBS on every edge of ``a``."""
    edges = [mlbs_solve(s, n, a.members(n), max_iter) for n in range(s.num_edges)]
    theta = np.column_stack([e.theta_col for e in edges])
    return BandwidthAllocation(theta), edges
