import itertools
import math

import numpy as np
import pytest
from hypothesis import strategies as st

from hfl_assoc import Scenario


def s4(d2=(10.0, 10.0)):
    return Scenario([10, 20, 10, 20], [[1, 16], [1, 16], [9, 4], [9, 4]], d2)


@pytest.fixture
def s4_10():
    return s4()


@pytest.fixture
def s4_200():
    return s4((10.0, 200.0))


def brute_force(s):
    """Scalar enumeration of every assignment, independent of the package evaluators.

    Returns (best latency, list of all optimal edge_of tuples).
    """
    alpha = s.alpha.tolist()
    beta = s.beta.tolist()
    d2 = s.d2.tolist()
    M, N = s.num_users, s.num_edges
    best, argbest = math.inf, []
    for edge_of in itertools.product(range(N), repeat=M):
        loads = [edge_of.count(n) for n in range(N)]
        h = -math.inf
        for n in range(N):
            members = [m for m in range(M) if edge_of[m] == n]
            if members:
                h = max(h, max(alpha[m] + loads[n] * beta[m][n] for m in members) + d2[n])
        if h < best:
            best, argbest = h, [edge_of]
        elif h == best:
            argbest.append(edge_of)
    return best, argbest


@st.composite
def scenarios(draw, max_users=7, edges=st.integers(1, 3)):
    N = draw(edges)
    M = draw(st.integers(1, max_users))
    time = st.floats(0, 50, allow_nan=False, allow_infinity=False)
    upload = st.floats(0.01, 30, allow_nan=False, allow_infinity=False)
    alpha = draw(st.lists(time, min_size=M, max_size=M))
    beta = draw(st.lists(st.lists(upload, min_size=N, max_size=N), min_size=M, max_size=M))
    d2 = draw(st.lists(st.floats(0, 200), min_size=N, max_size=N))
    return Scenario(alpha, beta, d2)


@st.composite
def assigned(draw, **kw):
    """A scenario together with a random valid assignment of it."""
    from hfl_assoc import Assignment

    s = draw(scenarios(**kw))
    edge_of = draw(st.lists(st.integers(0, s.num_edges - 1),
                            min_size=s.num_users, max_size=s.num_users))
    return s, Assignment(tuple(edge_of), s.num_edges)


def grid_scenario(M, N, rng):
    """Integer-valued instance: lots of exact ties."""
    return Scenario(rng.integers(0, 5, M), rng.integers(1, 4, (M, N)), rng.integers(0, 5, N))


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
