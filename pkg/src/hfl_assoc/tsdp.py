"""Exact two-edge association by twin sorting dynamic programming.

Notation: users are 0-based, while the load ``k = |A_1|`` and the primary rank
``r`` are 1-based counts.  Rank 1 is the slowest user on edge 0 when it serves
``k`` users.  A class ``(k, r)`` holds every partition with ``|A_1| = k`` whose
fastest-ranked (lowest rank number) member of ``A_1`` has rank ``r``.  Inside a
class, the rank-``r`` user (the leader) fixes edge 0's finish time, so edge 1
should take the users that are cheapest for it.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Assignment,
    BandwidthAllocation,
    Scenario,
    SolveReport,
    UnsupportedDimensionError,
)


def _require_two_edges(s: Scenario):
    if s.num_edges != 2:
        raise UnsupportedDimensionError(
            f"TSDP needs exactly 2 edge servers, got {s.num_edges}; "
            "use the tsdp-assisted pipeline instead"
        )


def phi(s: Scenario, n: int, k: int) -> np.ndarray:
    """Finish time of every user on edge ``n`` when that edge serves ``k`` users."""
    return s.alpha + k * s.beta[:, n]


@dataclass(frozen=True, eq=False)
class RankTables:
    k: int
    r: int
    phi1: np.ndarray
    phi2: np.ndarray
    gamma1: np.ndarray
    leader: int
    candidate_set: tuple[int, ...]
    gamma2: tuple[int, ...]


class _Counter:
    def __init__(self):
        self.n = 0


def _sorted_by(keys, users, counter: _Counter | None, decreasing: bool):
    """Sort ``users`` by ``keys`` with smaller index first on ties."""
    sign = -1.0 if decreasing else 1.0

    def cmp(i, j):
        if counter is not None:
            counter.n += 1
        ki, kj = sign * keys[i], sign * keys[j]
        if ki != kj:
            return -1 if ki < kj else 1
        return -1 if i < j else (1 if i > j else 0)

    return sorted(users, key=functools.cmp_to_key(cmp))


def _primary_order(s: Scenario, k: int, counter=None) -> list[int]:
    return _sorted_by(phi(s, 0, k), range(s.num_users), counter, decreasing=True)


def primary_ranks(s: Scenario, k: int) -> np.ndarray:
    """``gamma[m]`` = 1-based rank of user ``m`` by decreasing edge-0 finish time."""
    _require_two_edges(s)
    if not 1 <= k <= s.num_users:
        raise ValueError(f"k={k} outside [1, {s.num_users}]")
    ranks = np.empty(s.num_users, dtype=np.int64)
    ranks[_primary_order(s, k)] = np.arange(1, s.num_users + 1)
    return ranks


def is_feasible(M: int, k: int, r: int) -> bool:
    """A class is nonempty iff enough users rank below ``r`` to fill edge 0."""
    return 1 <= k <= M and 1 <= r <= M and k + r <= M + 1


def rank_tables(s: Scenario, k: int, r: int, counter=None) -> RankTables:
    _require_two_edges(s)
    M = s.num_users
    if not (1 <= k <= M and 1 <= r <= M):
        raise ValueError(f"(k, r)=({k}, {r}) outside [1, {M}]^2")
    order = _primary_order(s, k, counter)
    gamma1 = np.empty(M, dtype=np.int64)
    gamma1[order] = np.arange(1, M + 1)
    leader = order[r - 1]
    lam = tuple(sorted(order[r:]))
    phi2 = phi(s, 1, M - k)
    secondary = _sorted_by(phi2, lam, counter, decreasing=False)
    pos = {m: i + 1 for i, m in enumerate(secondary)}
    return RankTables(
        k=k,
        r=r,
        phi1=phi(s, 0, k),
        phi2=phi2,
        gamma1=gamma1,
        leader=leader,
        candidate_set=lam,
        gamma2=tuple(pos[m] for m in lam),
    )


def candidate_partition(s: Scenario, k: int, r: int, tables: RankTables | None = None):
    """Best partition ``(xi1, xi2)`` inside class ``(k, r)``; ``None`` if the class is empty."""
    _require_two_edges(s)
    M = s.num_users
    if not is_feasible(M, k, r):
        return None
    t = tables if tables is not None else rank_tables(s, k, r)
    take = M - r - k + 1
    xi2 = {m for m in range(M) if t.gamma1[m] < r}
    xi2.update(m for m, g in zip(t.candidate_set, t.gamma2) if g <= take)
    xi1 = tuple(m for m in range(M) if m not in xi2)
    return xi1, tuple(sorted(xi2))


def subproblem_latency(s: Scenario, k: int, r: int, xi) -> float:
    """Round latency of the class-``(k, r)`` candidate ``xi``."""
    xi1, xi2 = xi
    M = s.num_users
    zeta1 = float(np.max(phi(s, 0, k)[list(xi1)]))
    h = zeta1 + s.d2[0]
    if xi2:
        zeta2 = float(np.max(phi(s, 1, M - k)[list(xi2)]))
        h = max(h, zeta2 + s.d2[1])
    return float(h)


def h_zero(s: Scenario) -> float:
    """Latency with every user on edge 1."""
    _require_two_edges(s)
    return float(np.max(phi(s, 1, s.num_users)) + s.d2[1])


def _report(s: Scenario, name: str, h: float, xi1, work: int, info) -> SolveReport:
    edge_of = [1] * s.num_users
    for m in xi1:
        edge_of[m] = 0
    a = Assignment(tuple(edge_of), 2)
    return SolveReport(name, h, a, BandwidthAllocation.equal(a), work, "eba", info)


def tsdp_reference(s: Scenario) -> SolveReport:
    """Cell-by-cell sweep with a fresh pair of sorts per class.

    Slow (``O(M^3 log M)`` comparisons, all in Python) but a direct reading of
    the algorithm; ``work`` is the exact number of key comparisons made.
    """
    _require_two_edges(s)
    M = s.num_users
    counter = _Counter()
    best_h = h_zero(s)
    best_xi1: tuple[int, ...] = ()
    best_kr = (0, 0)
    for k in range(1, M + 1):
        for r in range(1, M + 1):
            if not is_feasible(M, k, r):
                continue
            t = rank_tables(s, k, r, counter)
            xi = candidate_partition(s, k, r, t)
            h = subproblem_latency(s, k, r, xi)
            if h < best_h:
                best_h, best_xi1, best_kr = h, xi[0], (k, r)
    return _report(s, "tsdp-reference", best_h, best_xi1, counter.n, {"class": best_kr})


def _sort_charge(n: int) -> int:
    return n * max(1, math.ceil(math.log2(n))) if n > 1 else 0


def tsdp_solve(s: Scenario) -> SolveReport:
    """Optimal two-edge association under equal bandwidth sharing.

    For each load ``k`` the users are sorted once by edge-0 and once by edge-1
    finish time.  Filtering the edge-1 order down to the users ranked below
    ``r`` gives the secondary ranking of every class ``(k, r)`` at once, so all
    classes of one ``k`` are scored in a single vectorized pass.

    ``work`` counts elementary comparisons: each sort is charged
    ``n * ceil(log2 n)``, and each scored class costs ``3 M`` (membership
    test, running count, threshold search).
    """
    _require_two_edges(s)
    M = s.num_users
    alpha, b1, b2 = s.alpha, s.beta[:, 0], s.beta[:, 1]
    d1, d2 = s.d2[0], s.d2[1]
    best_h = h_zero(s)
    best_kr = (0, 0)
    work = M
    ranks = np.empty(M, dtype=np.int32)
    for k in range(1, M + 1):
        phi1 = alpha + k * b1
        phi2 = alpha + (M - k) * b2
        order1 = np.argsort(-phi1, kind="stable")
        order2 = np.argsort(phi2, kind="stable")
        ranks[order1] = np.arange(1, M + 1, dtype=np.int32)
        R = M - k + 1
        rs = np.arange(1, R + 1, dtype=np.int32)
        need = R - rs

        zeta1 = phi1[order1[:R]]
        forced = np.full(R, -np.inf)
        if R > 1:
            forced[1:] = np.maximum.accumulate(phi2[order1[: R - 1]])
        free = np.full(R, -np.inf)
        rows = np.flatnonzero(need > 0)
        if rows.size:
            below = ranks[order2][None, :] > rs[rows, None]
            count = np.cumsum(below, axis=1, dtype=np.int32)
            pos = np.argmax(count >= need[rows, None], axis=1)
            free[rows] = phi2[order2[pos]]
        zeta2 = np.maximum(forced, free)
        h = np.where(np.isneginf(zeta2), zeta1 + d1, np.maximum(zeta1 + d1, zeta2 + d2))
        work += 2 * _sort_charge(M) + 3 * M * R

        i = int(np.argmin(h))
        if h[i] < best_h:
            best_h, best_kr = float(h[i]), (k, i + 1)

    if best_kr == (0, 0):
        xi1: tuple[int, ...] = ()
    else:
        k, r = best_kr
        xi1, xi2 = candidate_partition(s, k, r)
        assert subproblem_latency(s, k, r, (xi1, xi2)) == best_h
    return _report(s, "tsdp", best_h, xi1, work, {"class": best_kr})


def partition_class(s: Scenario, xi1) -> tuple[int, int]:
    """Class index ``(k, r)`` of the partition with edge-0 set ``xi1``; ``(0, 0)`` if empty."""
    xi1 = list(xi1)
    if not xi1:
        return 0, 0
    k = len(xi1)
    return k, int(primary_ranks(s, k)[xi1].min())
