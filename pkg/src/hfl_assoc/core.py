"""Problem instances, assignments and the round-latency objective.

Users and edge servers are indexed from 0.  All times are plain float64
values in abstract time units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

# Slack allowed on a column sum of bandwidth shares.
SHARE_SLACK = 1e-9


class InvalidAssignmentError(ValueError):
    pass


class InvalidAllocationError(ValueError):
    pass


class UnsupportedDimensionError(ValueError):
    """Raised when a solver is called on an edge count it cannot handle."""


class InstanceTooLargeError(ValueError):
    """Raised by enumeration-based solvers past their size guard."""


def _frozen_array(values, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Scenario:
    """One round of the association problem.

    ``alpha[m]`` is the local update time of user ``m``, ``beta[m, n]`` the time
    user ``m`` needs to upload its model to edge ``n`` with the whole edge
    bandwidth, and ``d2[n]`` the edge-to-cloud upload time of edge ``n``.
    """

    alpha: np.ndarray
    beta: np.ndarray
    d2: np.ndarray

    def __post_init__(self):
        alpha = _frozen_array(self.alpha, 1, "alpha")
        beta = _frozen_array(self.beta, 2, "beta")
        d2 = _frozen_array(self.d2, 1, "d2")
        M, N = beta.shape
        if M < 1 or N < 1:
            raise ValueError("need at least one user and one edge server")
        if alpha.shape != (M,):
            raise ValueError(f"alpha has length {alpha.shape[0]}, expected {M}")
        if d2.shape != (N,):
            raise ValueError(f"d2 has length {d2.shape[0]}, expected {N}")
        if np.any(alpha < 0) or np.any(d2 < 0):
            raise ValueError("alpha and d2 must be nonnegative")
        if np.any(beta <= 0):
            raise ValueError("beta must be strictly positive")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "d2", d2)

    @property
    def num_users(self) -> int:
        return self.beta.shape[0]

    @property
    def num_edges(self) -> int:
        return self.beta.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            np.array_equal(self.alpha, other.alpha)
            and np.array_equal(self.beta, other.beta)
            and np.array_equal(self.d2, other.d2)
        )

    def __repr__(self):
        return f"Scenario(M={self.num_users}, N={self.num_edges}, d2={self.d2.tolist()})"

    def with_d2(self, index: int, value: float) -> "Scenario":
        d2 = self.d2.copy()
        d2[index] = value
        return Scenario(self.alpha, self.beta, d2)

    def subproblem(self, users: Sequence[int], edges: Sequence[int]) -> "Scenario":
        """Restrict to ``users`` and ``edges``; row i of the result is ``users[i]``."""
        users = list(users)
        edges = list(edges)
        return Scenario(
            self.alpha[users], self.beta[np.ix_(users, edges)], self.d2[edges]
        )


@dataclass(frozen=True)
class Assignment:
    """Dense user -> edge map.  ``edge_of[m]`` is the edge serving user ``m``."""

    edge_of: tuple[int, ...]
    num_edges: int

    def __post_init__(self):
        edge_of = tuple(int(n) for n in self.edge_of)
        if not edge_of:
            raise InvalidAssignmentError("assignment must cover at least one user")
        for m, n in enumerate(edge_of):
            if not 0 <= n < self.num_edges:
                raise InvalidAssignmentError(
                    f"user {m} mapped to edge {n}, outside [0, {self.num_edges})"
                )
        object.__setattr__(self, "edge_of", edge_of)

    @classmethod
    def from_sets(cls, sets: Sequence[Sequence[int]], num_users: int | None = None):
        if num_users is None:
            num_users = sum(len(s) for s in sets)
        edge_of = [-1] * num_users
        for n, members in enumerate(sets):
            for m in members:
                if edge_of[m] != -1:
                    raise InvalidAssignmentError(f"user {m} appears in two edge sets")
                edge_of[m] = n
        if -1 in edge_of:
            raise InvalidAssignmentError(f"user {edge_of.index(-1)} is not assigned")
        return cls(tuple(edge_of), len(sets))

    @classmethod
    def from_matrix(cls, X) -> "Assignment":
        X = np.asarray(X)
        if X.ndim != 2:
            raise InvalidAssignmentError("association matrix must be 2-D")
        if not np.all((X == 0) | (X == 1)):
            raise InvalidAssignmentError("association matrix must be binary")
        rows = X.sum(axis=1)
        bad = np.flatnonzero(rows != 1)
        if bad.size:
            raise InvalidAssignmentError(
                f"row {bad[0]} of the association matrix has {int(rows[bad[0]])} ones"
            )
        return cls(tuple(int(n) for n in X.argmax(axis=1)), X.shape[1])

    @property
    def num_users(self) -> int:
        return len(self.edge_of)

    def members(self, n: int) -> tuple[int, ...]:
        return tuple(m for m, e in enumerate(self.edge_of) if e == n)

    def sets(self) -> list[tuple[int, ...]]:
        return [self.members(n) for n in range(self.num_edges)]

    def loads(self) -> np.ndarray:
        return np.bincount(np.asarray(self.edge_of), minlength=self.num_edges)

    def to_matrix(self) -> np.ndarray:
        X = np.zeros((self.num_users, self.num_edges), dtype=np.int8)
        X[np.arange(self.num_users), self.edge_of] = 1
        return X

    def moved(self, m: int, n: int) -> "Assignment":
        edge_of = list(self.edge_of)
        edge_of[m] = n
        return Assignment(tuple(edge_of), self.num_edges)

    def swapped(self, i: int, j: int) -> "Assignment":
        edge_of = list(self.edge_of)
        edge_of[i], edge_of[j] = edge_of[j], edge_of[i]
        return Assignment(tuple(edge_of), self.num_edges)


def partition_to_matrix(a: Assignment) -> np.ndarray:
    return a.to_matrix()


def matrix_to_partition(X) -> Assignment:
    return Assignment.from_matrix(X)


@dataclass(frozen=True, eq=False)
class BandwidthAllocation:
    """``theta[m, n]`` is the share of edge ``n``'s bandwidth given to user ``m``."""

    theta: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.float64)
        if theta.ndim != 2:
            raise InvalidAllocationError("theta must be an M x N matrix")
        if not np.all(np.isfinite(theta)) or np.any(theta < 0) or np.any(theta > 1):
            raise InvalidAllocationError("shares must lie in [0, 1]")
        cols = theta.sum(axis=0)
        if np.any(cols > 1 + SHARE_SLACK):
            n = int(np.argmax(cols))
            raise InvalidAllocationError(f"edge {n} hands out {cols[n]!r} of its bandwidth")
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)

    @classmethod
    def equal(cls, a: Assignment) -> "BandwidthAllocation":
        """Equal split of every edge among its users."""
        loads = a.loads()
        theta = np.zeros((a.num_users, a.num_edges))
        for m, n in enumerate(a.edge_of):
            theta[m, n] = 1.0 / loads[n]
        return cls(theta)


@dataclass(frozen=True)
class PhysicalParams:
    """Link-level parameters from which upload times are derived."""

    model_bits: float
    bandwidth: Sequence[float]
    tx_power: Sequence[float]
    channel_gain: Sequence[Sequence[float]]
    noise_psd: float

    def arrays(self):
        B = np.asarray(self.bandwidth, dtype=np.float64)
        p = np.asarray(self.tx_power, dtype=np.float64)
        g = np.asarray(self.channel_gain, dtype=np.float64)
        if g.shape != (p.size, B.size):
            raise ValueError(f"channel_gain shape {g.shape} != ({p.size}, {B.size})")
        values = [self.model_bits, self.noise_psd, *B, *p, *g.ravel()]
        if not all(math.isfinite(v) and v > 0 for v in values):
            raise ValueError("physical parameters must be positive and finite")
        return B, p, g

    def snr(self) -> np.ndarray:
        """Full-bandwidth SNR ``p_m g_mn / (B_n N0)`` as an M x N matrix."""
        B, p, g = self.arrays()
        return p[:, None] * g / (B[None, :] * self.noise_psd)


def beta_from_physical(params: PhysicalParams) -> np.ndarray:
    """Upload time with the full band: ``L / (B_n log2(1 + SNR_mn))``."""
    B, _, _ = params.arrays()
    return params.model_bits / (B[None, :] * np.log2(1.0 + params.snr()))


@dataclass(frozen=True)
class SolveReport:
    algorithm: str
    latency: float
    assignment: Assignment
    allocation: BandwidthAllocation
    work: int = 0
    mode: str = "eba"
    info: dict[str, Any] = field(default_factory=dict, compare=False)

    def recompute(self, scenario: Scenario) -> float:
        if self.mode == "eba":
            return round_latency_eba(scenario, self.assignment)
        return round_latency_dba(scenario, self.assignment, self.allocation)


def _check_dims(s: Scenario, a: Assignment):
    if a.num_users != s.num_users or a.num_edges != s.num_edges:
        raise InvalidAssignmentError(
            f"assignment is {a.num_users}x{a.num_edges}, scenario is "
            f"{s.num_users}x{s.num_edges}"
        )


def user_delays_eba(s: Scenario, a: Assignment) -> np.ndarray:
    """Per-user compute plus upload time under equal sharing."""
    _check_dims(s, a)
    edge = np.asarray(a.edge_of)
    loads = np.bincount(edge, minlength=s.num_edges)
    return s.alpha + loads[edge] * s.beta[np.arange(s.num_users), edge]


def device_delay_eba(s: Scenario, a: Assignment, m: int) -> float:
    if not 0 <= m < s.num_users:
        raise IndexError(f"user {m} out of range for M={s.num_users}")
    _check_dims(s, a)
    n = a.edge_of[m]
    k = a.edge_of.count(n)
    return float(s.alpha[m] + k * s.beta[m, n])


def edge_latencies_eba(s: Scenario, a: Assignment) -> np.ndarray:
    """Cloud arrival time of each edge's model; ``-inf`` for edges with no users."""
    delays = user_delays_eba(s, a)
    edge = np.asarray(a.edge_of)
    worst = np.full(s.num_edges, -np.inf)
    np.maximum.at(worst, edge, delays)
    return worst + s.d2


def round_latency_eba(s: Scenario, a: Assignment) -> float:
    """Round length with equal sharing.  Edges without users are ignored."""
    return float(np.max(edge_latencies_eba(s, a)))


def user_latencies_dba(s: Scenario, a: Assignment, b: BandwidthAllocation) -> np.ndarray:
    """End-to-end path time ``alpha + beta/theta + d2`` of every user."""
    _check_dims(s, a)
    theta = b.theta
    if theta.shape != s.beta.shape:
        raise InvalidAllocationError(f"theta shape {theta.shape} != {s.beta.shape}")
    rows = np.arange(s.num_users)
    edge = np.asarray(a.edge_of)
    share = theta[rows, edge]
    if np.any(share <= 0):
        m = int(np.flatnonzero(share <= 0)[0])
        raise InvalidAllocationError(f"user {m} has no bandwidth on its edge {edge[m]}")
    if np.count_nonzero(theta) != s.num_users:
        raise InvalidAllocationError("bandwidth granted on an edge a user is not attached to")
    return s.alpha + s.beta[rows, edge] / share + s.d2[edge]


def round_latency_dba(s: Scenario, a: Assignment, b: BandwidthAllocation) -> float:
    return float(np.max(user_latencies_dba(s, a, b)))


def critical_path(s: Scenario, a: Assignment, b: BandwidthAllocation) -> tuple[int, int]:
    """User and edge on the slowest user-edge-cloud chain (lowest user on ties)."""
    m = int(np.argmax(user_latencies_dba(s, a, b)))
    return m, a.edge_of[m]
