"""Experiment topologies, seeded random instances and scenario files."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import PhysicalParams, Scenario, beta_from_physical

MASK64 = (1 << 64) - 1
BETA_FLOOR = 1e-6


class SplitMix64:
    """SplitMix64 stream; floats take the top 53 bits of each output.

    Used for every seeded draw in this module so that a seed names the same
    instance on any platform.
    """

    GOLDEN = 0x9E3779B97F4A7C15

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + self.GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()


def two_type_alpha(M: int, fast: float = 10.0, slow: float = 20.0) -> np.ndarray:
    """Users in quarters 1 and 3 compute fast, quarters 2 and 4 slowly."""
    K = M // 4
    alpha = np.full(M, slow)
    alpha[:K] = fast
    alpha[2 * K : 3 * K] = fast
    return alpha


def two_edge_topology(K: int, d2_second: float = 10.0) -> Scenario:
    """Two user groups near edge 0 (beta 1 vs 16) and near edge 1 (beta 9 vs 4)."""
    if K < 1:
        raise ValueError("K must be positive")
    M = 4 * K
    beta = np.empty((M, 2))
    beta[: 2 * K] = (1.0, 16.0)
    beta[2 * K :] = (9.0, 4.0)
    return Scenario(two_type_alpha(M), beta, (10.0, d2_second))


def heterogeneous_topology(K: int, d2_second: float = 10.0) -> Scenario:
    """Four edges; upload times grow by 0.1 per user index within each group."""
    if K < 1:
        raise ValueError("K must be positive")
    M = 4 * K
    first = np.array([1.0, 16.0, 25.0, 25.0])
    second = np.array([9.0, 4.0, 25.0, 25.0])
    step = 0.1 * np.arange(2 * K)[:, None]
    beta = np.vstack([first + step, second + step])
    return Scenario(two_type_alpha(M), beta, (10.0, d2_second, 10.0, 10.0))


@dataclass(frozen=True, eq=False)
class GeometricLayout:
    user_coords: np.ndarray
    edge_coords: np.ndarray
    rho: float = 0.01

    def __post_init__(self):
        users = np.asarray(self.user_coords, dtype=np.float64).reshape(-1, 2)
        edges = np.asarray(self.edge_coords, dtype=np.float64).reshape(-1, 2)
        if not (np.all(np.isfinite(users)) and np.all(np.isfinite(edges))):
            raise ValueError("coordinates must be finite")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        object.__setattr__(self, "user_coords", users)
        object.__setattr__(self, "edge_coords", edges)

    def beta(self) -> np.ndarray:
        sq = ((self.user_coords[:, None, :] - self.edge_coords[None, :, :]) ** 2).sum(axis=2)
        return np.maximum(self.rho * sq, BETA_FLOOR)


def segment_points(start, end, count: int, rng: SplitMix64 | None = None) -> np.ndarray:
    """``count`` points on a segment: evenly spaced end to end, or uniform draws."""
    start = np.asarray(start, dtype=np.float64)
    end = np.asarray(end, dtype=np.float64)
    if rng is None:
        t = np.linspace(0.0, 1.0, count) if count > 1 else np.full(count, 0.5)
    else:
        t = np.array([rng.random() for _ in range(count)])
    return start[None, :] + t[:, None] * (end - start)[None, :]


FEDCH_EDGES = {
    2: [(-10.0, 10.0), (10.0, 10.0)],
    4: [(-10.0, 10.0), (10.0, 10.0), (-20.0, 10.0), (20.0, 10.0)],
}


def fedch_layout(M: int = 20, N: int = 2, rho: float = 0.01, seed: int | None = None) -> GeometricLayout:
    """Three quarters of the users near (10, 0), the rest near (-10, 0)."""
    if N not in FEDCH_EDGES:
        raise ValueError(f"edge placement known for N in {sorted(FEDCH_EDGES)}, got {N}")
    rng = None if seed is None else SplitMix64(seed)
    right = 3 * M // 4
    users = np.vstack([
        segment_points((9.5, 0.0), (10.5, 0.0), right, rng),
        segment_points((-10.5, 0.0), (-9.5, 0.0), M - right, rng),
    ])
    return GeometricLayout(users, FEDCH_EDGES[N], rho)


def geometric_topology(layout: GeometricLayout | None = None, alpha=None, d2=None) -> Scenario:
    """Upload time proportional to squared user-edge distance."""
    layout = layout or fedch_layout()
    M, N = layout.user_coords.shape[0], layout.edge_coords.shape[0]
    alpha = two_type_alpha(M) if alpha is None else alpha
    d2 = np.full(N, 10.0) if d2 is None else d2
    return Scenario(alpha, layout.beta(), d2)


@dataclass(frozen=True)
class Ranges:
    alpha: tuple[float, float] = (1.0, 20.0)
    beta: tuple[float, float] = (1.0, 10.0)
    d2: tuple[float, float] = (1.0, 100.0)

    def __post_init__(self):
        if not self.beta[0] > 0:
            raise ValueError("beta range must be strictly positive")
        if self.alpha[0] < 0 or self.d2[0] < 0:
            raise ValueError("alpha and d2 ranges must be nonnegative")


def random_instance(M: int, N: int, seed: int, ranges: Ranges = Ranges()) -> Scenario:
    """Uniform draws in the order alpha, beta (row-major), d2."""
    rng = SplitMix64(seed)
    alpha = [rng.uniform(*ranges.alpha) for _ in range(M)]
    beta = [[rng.uniform(*ranges.beta) for _ in range(N)] for _ in range(M)]
    d2 = [rng.uniform(*ranges.d2) for _ in range(N)]
    return Scenario(alpha, beta, d2)


# --- files -----------------------------------------------------------------

def scenario_to_dict(s: Scenario) -> dict:
    return {
        "num_users": s.num_users,
        "num_edges": s.num_edges,
        "alpha": s.alpha.tolist(),
        "beta": s.beta.tolist(),
        "d2": s.d2.tolist(),
    }


def scenario_from_dict(doc: dict) -> Scenario:
    has_beta = "beta" in doc
    has_phys = "physical" in doc
    if has_beta == has_phys:
        raise ValueError("scenario needs exactly one of 'beta' or 'physical'")
    if has_phys:
        p = doc["physical"]
        beta = beta_from_physical(PhysicalParams(p["L"], p["B"], p["p"], p["g"], p["N0"]))
    else:
        beta = doc["beta"]
    s = Scenario(doc["alpha"], beta, doc["d2"])
    for key, value in (("num_users", s.num_users), ("num_edges", s.num_edges)):
        if key in doc and doc[key] != value:
            raise ValueError(f"{key}={doc[key]} disagrees with array shapes ({value})")
    return s


def save_scenario(s: Scenario, path) -> None:
    text = json.dumps(scenario_to_dict(s), indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def load_scenario(path) -> Scenario:
    return scenario_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def fmt17(x: float) -> str:
    return format(float(x), ".17g")


def beta_csv(s: Scenario) -> str:
    return "".join(",".join(fmt17(v) for v in row) + "\n" for row in s.beta)
