"""Reference association policies: Max-SNR, backbone-aware greedy, exhaustive
search and a FedCH-style balanced clustering + matching heuristic."""

from __future__ import annotations

import functools
import itertools
import math

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import (
    Assignment,
    BandwidthAllocation,
    InstanceTooLargeError,
    PhysicalParams,
    Scenario,
    SolveReport,
    round_latency_eba,
)

# log2 of the largest state space exhaustive_solve will enumerate
EXHAUSTIVE_LOG2_LIMIT = 24


def _eba_report(s: Scenario, name: str, edge_of, work: int, **info) -> SolveReport:
    a = Assignment(tuple(int(n) for n in edge_of), s.num_edges)
    h = round_latency_eba(s, a)
    return SolveReport(name, h, a, BandwidthAllocation.equal(a), work, "eba", info)


def max_snr_assign(s: Scenario, physical: PhysicalParams | None = None) -> SolveReport:
    """Every user picks its best channel, ignoring load and backbone delay.

    Without ``physical`` the best channel is the smallest upload time, which is
    the same ordering as the SNR whenever all edges have the same bandwidth.
    """
    if physical is None:
        edge_of = np.argmin(s.beta, axis=1)
    else:
        edge_of = np.argmax(physical.snr(), axis=1)
    return _eba_report(s, "max-snr", edge_of, s.num_users * s.num_edges)


def bag_assign(s: Scenario) -> SolveReport:
    """Backbone-aware greedy: user ``m`` joins the edge that minimizes the round
    latency of users ``0..m`` (ties to the lower edge index)."""
    M, N = s.num_users, s.num_edges
    edge_of: list[int] = []
    work = 0
    for m in range(M):
        prefix = s.subproblem(range(m + 1), range(N))
        best_n, best_h = 0, math.inf
        for n in range(N):
            h = round_latency_eba(prefix, Assignment((*edge_of, n), N))
            work += m + 1
            if h < best_h:
                best_n, best_h = n, h
        edge_of.append(best_n)
    return _eba_report(s, "bag", edge_of, work)


@functools.lru_cache(maxsize=4)
def _state_index(M: int, N: int, start: int, stop: int) -> np.ndarray:
    """Flat lookup index of (user, edge, load on that edge) for states ``start..stop``.

    Depends only on the shape, so sweeps over one topology reuse it.
    """
    # user 0 is the most significant digit, so state order is lexicographic
    place = N ** np.arange(M - 1, -1, -1, dtype=np.int64)
    states = np.arange(start, stop, dtype=np.int64)
    E = ((states[:, None] // place[None, :]) % N).astype(np.int32)
    loads = np.stack([(E == n).sum(axis=1, dtype=np.int32) for n in range(N)], axis=1)
    L = np.take_along_axis(loads, E, axis=1)
    idx = (np.arange(M, dtype=np.int32) * (N * (M + 1)))[None, :] + E * (M + 1) + L
    idx.flags.writeable = False
    return idx


def exhaustive_solve(s: Scenario, chunk: int = 1 << 16) -> SolveReport:
    """Enumerate all ``N**M`` assignments; ties go to the lexicographically
    smallest ``edge_of`` sequence."""
    M, N = s.num_users, s.num_edges
    if M * math.log2(N) > EXHAUSTIVE_LOG2_LIMIT:
        raise InstanceTooLargeError(
            f"{N}^{M} assignments exceed the 2^{EXHAUSTIVE_LOG2_LIMIT} enumeration guard"
        )
    total = N**M
    # finish[m, n, L] = alpha_m + L beta_mn + d2_n; the round latency is the
    # largest finish time over users (empty edges never appear)
    L = np.arange(M + 1, dtype=np.float64)
    finish = (s.alpha[:, None, None] + L[None, None, :] * s.beta[:, :, None]) + s.d2[None, :, None]
    flat = finish.ravel()
    best_h, best_state = math.inf, 0
    for start in range(0, total, chunk):
        stop = min(total, start + chunk)
        h = flat[_state_index(M, N, start, stop)].max(axis=1)
        i = int(np.argmin(h))
        if h[i] < best_h:
            best_h, best_state = float(h[i]), start + i
    edge_of = [(best_state // N ** (M - 1 - m)) % N for m in range(M)]
    return _eba_report(s, "exhaustive", edge_of, total * M)


def balanced_kmeans(
    features, n_clusters: int, seed: int = 0, max_iter: int = 100
) -> np.ndarray:
    """k-means whose cluster sizes differ by at most one.

    The assignment step is an exact min-cost matching of points to cluster
    slots (``ceil`` or ``floor`` of ``M / K`` slots per cluster).
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    M = X.shape[0]
    caps = [M // n_clusters + (1 if c < M % n_clusters else 0) for c in range(n_clusters)]
    slots = np.repeat(np.arange(n_clusters), caps)
    rng = np.random.default_rng(seed)
    live = min(M, n_clusters)
    centers = np.zeros((n_clusters, X.shape[1]))
    centers[:live] = X[rng.choice(M, size=live, replace=False)]
    labels = np.full(M, -1)
    for _ in range(max_iter):
        dist = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        rows, cols = linear_sum_assignment(dist[:, slots])
        new = np.empty(M, dtype=np.int64)
        new[rows] = slots[cols]
        if np.array_equal(new, labels):
            break
        labels = new
        for c in range(n_clusters):
            if caps[c]:
                centers[c] = X[labels == c].mean(axis=0)
    return labels


def _min_weight_matching(W: np.ndarray) -> list[int]:
    """Edge for each cluster minimizing total weight (brute force up to 8 edges)."""
    K, N = W.shape
    if N <= 8:
        best, best_perm = math.inf, None
        for perm in itertools.permutations(range(N), K):
            total = sum(W[c, n] for c, n in enumerate(perm))
            if total < best:
                best, best_perm = total, perm
        return list(best_perm)
    rows, cols = linear_sum_assignment(W)
    return [int(c) for _, c in sorted(zip(rows, cols))]


def fedch_assign(s: Scenario, features=None, seed: int = 0) -> SolveReport:
    """Balanced clusters, one per edge, matched to edges through their heads.

    ``features`` defaults to the rows ``(alpha_m, beta_m0, ..., beta_mN)``; pass
    user coordinates for geometric layouts.  A cluster head is the member
    closest to its cluster mean.
    """
    M, N = s.num_users, s.num_edges
    if features is None:
        features = np.column_stack([s.alpha, s.beta])
    X = np.asarray(features, dtype=np.float64).reshape(M, -1)
    labels = balanced_kmeans(X, N, seed=seed)
    W = np.zeros((N, N))
    heads = []
    for c in range(N):
        members = np.flatnonzero(labels == c)
        if members.size == 0:
            heads.append(None)
            continue
        centre = X[members].mean(axis=0)
        head = int(members[np.argmin(((X[members] - centre) ** 2).sum(axis=1))])
        heads.append(head)
        W[c] = s.beta[head]
    edge_for_cluster = _min_weight_matching(W)
    edge_of = [edge_for_cluster[c] for c in labels]
    return _eba_report(
        s, "fedch", edge_of, M * N, heads=heads, clusters=labels.tolist()
    )
