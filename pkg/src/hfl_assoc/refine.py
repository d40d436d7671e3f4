"""TSDP-assisted association for any number of edges, plus its refinement passes.

Phases: (1) baseline association, (2) exact TSDP on each edge pair
(0,1), (2,3), ..., (3) greedy server transfer, (4) per-edge optimal bandwidth
shares, (5) critical path reduction by migrating or swapping the critical user.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import baselines
from .core import (
    Assignment,
    BandwidthAllocation,
    Scenario,
    SolveReport,
    UnsupportedDimensionError,
    critical_path,
    round_latency_dba,
    round_latency_eba,
)
from .dba import DEFAULT_BUDGET, mlbs_solve, solve_allocation
from .tsdp import tsdp_solve

BASELINES = {
    "max_snr": baselines.max_snr_assign,
    "bag": baselines.bag_assign,
    "fedch": baselines.fedch_assign,
}
CPR_MOVES = ("migrate", "swap")


@dataclass(frozen=True)
class PipelineConfig:
    baseline: str = "max_snr"
    cpr_rounds: int = 10
    mlbs_budget: int = DEFAULT_BUDGET
    pair_tsdp: bool = True
    gst: bool = True
    dba: bool = True
    cpr: bool = True
    cpr_moves: tuple[str, ...] = ("migrate",)

    def __post_init__(self):
        object.__setattr__(self, "baseline", self.baseline.replace("-", "_"))
        if self.baseline not in BASELINES:
            raise ValueError(f"unknown baseline {self.baseline!r}; choose from {sorted(BASELINES)}")
        if self.cpr_rounds < 0:
            raise ValueError("cpr_rounds must be nonnegative")
        if self.mlbs_budget < 1:
            raise ValueError("mlbs_budget must be at least 1")
        if self.cpr and not self.dba:
            raise ValueError("critical path reduction needs the bandwidth allocation phase")
        unknown = set(self.cpr_moves) - set(CPR_MOVES)
        if unknown:
            raise ValueError(f"unknown CPR moves {sorted(unknown)}")

    @property
    def name(self) -> str:
        parts = ["tsdp", self.baseline.replace("_", "")]
        if self.dba:
            parts.append("dba")
        if self.cpr and self.cpr_rounds:
            parts.append("cpr")
        return "-".join(parts)


class DbaState(NamedTuple):
    latency: float
    assignment: Assignment
    allocation: BandwidthAllocation


def gst_step(s: Scenario, y: Assignment, m: int) -> Assignment:
    """Move user ``m`` to the edge giving the lowest round latency.

    The current edge wins ties, then the lower index.
    """
    best_n = y.edge_of[m]
    best_h = round_latency_eba(s, y)
    for n in range(s.num_edges):
        if n == best_n:
            continue
        h = round_latency_eba(s, y.moved(m, n))
        if h < best_h:
            best_n, best_h = n, h
    return y.moved(m, best_n)


def gst_pass(s: Scenario, y0: Assignment) -> Assignment:
    y = y0
    for m in range(s.num_users):
        y = gst_step(s, y, m)
    return y


def dba_state(s: Scenario, a: Assignment, budget: int = DEFAULT_BUDGET) -> DbaState:
    b, _ = solve_allocation(s, a, budget)
    return DbaState(round_latency_dba(s, a, b), a, b)


def _resolve(s: Scenario, a: Assignment, b: BandwidthAllocation, edges, budget: int):
    theta = np.array(b.theta)
    for n in edges:
        theta[:, n] = mlbs_solve(s, n, a.members(n), budget).theta_col
    b2 = BandwidthAllocation(theta)
    return DbaState(round_latency_dba(s, a, b2), a, b2)


def cpr_migrate(s: Scenario, state: DbaState, budget: int = DEFAULT_BUDGET) -> DbaState:
    """Move the critical user to the first edge (by index) that shortens the round."""
    m, src = critical_path(s, state.assignment, state.allocation)
    for n in range(s.num_edges):
        if n == src:
            continue
        trial = _resolve(s, state.assignment.moved(m, n), state.allocation, (src, n), budget)
        if trial.latency < state.latency:
            return trial
    return state


def cpr_swap(s: Scenario, state: DbaState, budget: int = DEFAULT_BUDGET) -> DbaState:
    """Swap the critical user with the user elsewhere that shortens the round most."""
    a = state.assignment
    m, src = critical_path(s, a, state.allocation)
    best = state
    for other, n in enumerate(a.edge_of):
        if n == src:
            continue
        trial = _resolve(s, a.swapped(m, other), state.allocation, (src, n), budget)
        if trial.latency < best.latency:
            best = trial
    return best


def _pair_phase(s: Scenario, a: Assignment):
    """Re-solve the users of each edge pair exactly; returns (assignment, h, tsdp work)."""
    N = s.num_edges
    edge_of = list(a.edge_of)
    h_pairs = -math.inf
    work = 0
    for u in range(0, N - 1, 2):
        v = u + 1
        psi = [m for m in range(s.num_users) if edge_of[m] in (u, v)]
        if not psi:
            continue
        rep = tsdp_solve(s.subproblem(psi, (u, v)))
        work += rep.work
        h_pairs = max(h_pairs, rep.latency)
        for i, m in enumerate(psi):
            edge_of[m] = (u, v)[rep.assignment.edge_of[i]]
    if N % 2:
        last = [m for m in range(s.num_users) if edge_of[m] == N - 1]
        if last:
            k = len(last)
            h_pairs = max(h_pairs, float(np.max(s.alpha[last] + k * s.beta[last, N - 1]) + s.d2[N - 1]))
    out = Assignment(tuple(edge_of), N)
    h = round_latency_eba(s, out)
    assert math.isclose(h, h_pairs, rel_tol=1e-12), (h, h_pairs)
    return out, h, work


def tsdp_assisted(s: Scenario, cfg: PipelineConfig | None = None) -> SolveReport:
    """Run the enabled phases and report the final association and shares.

    ``info["trace"]`` lists ``(phase, mode, latency)`` after every phase and
    every CPR round.
    """
    cfg = cfg or PipelineConfig()
    if s.num_edges < 2:
        raise UnsupportedDimensionError("the TSDP-assisted pipeline needs at least 2 edges")
    base = BASELINES[cfg.baseline](s)
    a = base.assignment
    work = base.work
    trace = [("baseline", "eba", base.latency)]

    if cfg.pair_tsdp:
        a, h, w = _pair_phase(s, a)
        work += w
        trace.append(("pair-tsdp", "eba", h))
    if cfg.gst:
        a = gst_pass(s, a)
        work += s.num_users * s.num_edges * s.num_users
        trace.append(("gst", "eba", round_latency_eba(s, a)))
    if not cfg.dba:
        return SolveReport(
            cfg.name, round_latency_eba(s, a), a, BandwidthAllocation.equal(a), work, "eba",
            {"trace": trace},
        )

    state = dba_state(s, a, cfg.mlbs_budget)
    trace.append(("dba", "dba", state.latency))
    if cfg.cpr:
        moves = {"migrate": cpr_migrate, "swap": cpr_swap}
        for _ in range(cfg.cpr_rounds):
            for move in cfg.cpr_moves:
                state = moves[move](s, state, cfg.mlbs_budget)
            work += s.num_edges * s.num_users
            trace.append(("cpr", "dba", state.latency))
    return SolveReport(
        cfg.name, state.latency, state.assignment, state.allocation, work, "dba",
        {"trace": trace},
    )
