import math

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import assigned, s4
from hfl_assoc import (
    Assignment,
    BandwidthAllocation,
    InvalidAllocationError,
    PhysicalParams,
    Scenario,
    beta_from_physical,
    critical_path,
    device_delay_eba,
    round_latency_dba,
    round_latency_eba,
)
from hfl_assoc.core import (
    InvalidAssignmentError,
    matrix_to_partition,
    partition_to_matrix,
    user_latencies_dba,
)

SPLIT = Assignment((0, 0, 1, 1), 2)
ALL_FIRST = Assignment((0, 0, 0, 0), 2)


def test_device_delay_examples():
    assert device_delay_eba(s4(), SPLIT, 1) == 22.0
    assert device_delay_eba(s4(), ALL_FIRST, 3) == 56.0


def test_device_delay_singleton():
    s = Scenario([3.0, 4.0], [[2.0, 7.0], [1.0, 1.0]], [0.0, 0.0])
    assert device_delay_eba(s, Assignment((1, 0), 2), 0) == 3.0 + 7.0


def test_device_delay_index_error():
    with pytest.raises(IndexError):
        device_delay_eba(s4(), SPLIT, 4)


def test_round_latency_eba_examples():
    assert round_latency_eba(s4(), SPLIT) == 38.0
    assert round_latency_eba(s4(), ALL_FIRST) == 66.0
    one = Scenario([5.0], [[1.0, 2.0]], [10.0, 1.0])
    assert round_latency_eba(one, Assignment((1,), 2)) == 8.0


def test_round_latency_dba_equals_eba_under_equal_shares():
    s = s4()
    assert round_latency_dba(s, SPLIT, BandwidthAllocation.equal(SPLIT)) == pytest.approx(38.0, rel=1e-12)


def test_round_latency_dba_two_user_edge():
    s = Scenario([10.0, 20.0], [[1.0], [1.0]], [0.0])
    a = Assignment((0, 0), 1)
    h = round_latency_dba(s, a, BandwidthAllocation([[0.0901], [0.9099]]))
    assert h == pytest.approx(16 + math.sqrt(26), abs=1e-3)


def test_round_latency_dba_full_share():
    s = s4()
    a = Assignment((0, 0, 0, 1), 2)
    theta = np.zeros((4, 2))
    theta[:3, 0] = 1 / 3
    theta[3, 1] = 1.0
    paths = user_latencies_dba(s, a, BandwidthAllocation(theta))
    assert paths[3] == 20 + 4 + 10
    assert round_latency_dba(s, a, BandwidthAllocation(theta)) == pytest.approx(10 + 27 + 10)


def test_round_latency_dba_rejects_unfunded_user():
    theta = np.zeros((4, 2))
    theta[0, 0] = theta[1, 0] = 0.5
    theta[2, 1] = 1.0
    with pytest.raises(InvalidAllocationError):
        round_latency_dba(s4(), SPLIT, BandwidthAllocation(theta))


def test_round_latency_dba_rejects_share_on_foreign_edge():
    theta = np.array([[0.5, 0.0], [0.5, 0.0], [0.0, 0.5], [0.1, 0.5]])
    with pytest.raises(InvalidAllocationError):
        round_latency_dba(s4(), SPLIT, BandwidthAllocation(theta))


def test_allocation_column_sum_guard():
    with pytest.raises(InvalidAllocationError):
        BandwidthAllocation([[0.6], [0.6]])
    BandwidthAllocation([[0.5 + 5e-10], [0.5]])


def test_critical_path_examples():
    eq = BandwidthAllocation.equal(SPLIT)
    assert critical_path(s4((10.0, 200.0)), SPLIT, eq) == (3, 1)
    assert critical_path(s4(), SPLIT, eq) == (3, 1)
    one = Scenario([1.0], [[3.0, 1.0]], [0.0, 0.0])
    a = Assignment((1,), 2)
    assert critical_path(one, a, BandwidthAllocation.equal(a)) == (0, 1)


def test_critical_path_tie_goes_to_lowest_user():
    s = Scenario([0.0, 0.0], [[1.0], [1.0]], [0.0])
    a = Assignment((0, 0), 1)
    assert critical_path(s, a, BandwidthAllocation.equal(a)) == (0, 0)


def _phys(snr, L=1e6, B=1e6, N0=1e-9):
    return PhysicalParams(L, [B], [1.0], [[snr * B * N0]], N0)


def test_beta_from_physical_examples():
    assert beta_from_physical(_phys(1.0))[0, 0] == pytest.approx(1.0, rel=1e-12)
    assert beta_from_physical(_phys(3.0))[0, 0] == pytest.approx(0.5, rel=1e-12)
    x = 2**1.25 - 1
    assert beta_from_physical(_phys(x, L=5e5, B=2e6))[0, 0] == pytest.approx(0.2, rel=1e-12)


def test_physical_params_must_be_positive():
    with pytest.raises(ValueError):
        beta_from_physical(PhysicalParams(1e6, [1e6], [0.0], [[1.0]], 1e-9))


def test_matrix_roundtrip():
    X = partition_to_matrix(SPLIT)
    assert X.tolist() == [[1, 0], [1, 0], [0, 1], [0, 1]]
    assert matrix_to_partition(X) == SPLIT
    last = Assignment((2,), 3)
    assert partition_to_matrix(last).tolist() == [[0, 0, 1]]
    assert matrix_to_partition(partition_to_matrix(last)) == last


@pytest.mark.parametrize("X", [[[1, 0], [0, 0]], [[1, 1], [0, 1]], [[2, 0]]])
def test_matrix_rejects_invalid_rows(X):
    with pytest.raises(InvalidAssignmentError):
        matrix_to_partition(X)


def test_assignment_from_sets():
    assert Assignment.from_sets([(0, 1), (2, 3)]) == SPLIT
    with pytest.raises(InvalidAssignmentError):
        Assignment.from_sets([(0, 1), (1,)], 2)
    with pytest.raises(InvalidAssignmentError):
        Assignment((0, 2), 2)


@pytest.mark.parametrize(
    "alpha,beta,d2",
    [
        ([-1.0], [[1.0]], [0.0]),
        ([1.0], [[0.0]], [0.0]),
        ([1.0], [[1.0]], [-2.0]),
        ([math.nan], [[1.0]], [0.0]),
        ([1.0, 2.0], [[1.0]], [0.0]),
    ],
)
def test_scenario_validation(alpha, beta, d2):
    with pytest.raises(ValueError):
        Scenario(alpha, beta, d2)


def test_scenario_is_immutable():
    s = s4()
    with pytest.raises(ValueError):
        s.alpha[0] = 3.0


@settings(max_examples=200, deadline=None)
@given(assigned())
def test_eba_dba_consistency(case):
    s, a = case
    eba = round_latency_eba(s, a)
    dba = round_latency_dba(s, a, BandwidthAllocation.equal(a))
    assert dba == pytest.approx(eba, rel=1e-12, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(assigned())
def test_latency_monotone_in_d2(case):
    s, a = case
    base = round_latency_eba(s, a)
    for n in range(s.num_edges):
        assert round_latency_eba(s.with_d2(n, s.d2[n] + 7.5), a) >= base


@settings(max_examples=200, deadline=None)
@given(assigned())
def test_unused_edge_can_be_dropped(case):
    s, a = case
    used = sorted(set(a.edge_of))
    if len(used) == s.num_edges:
        return
    sub = s.subproblem(range(s.num_users), used)
    relabel = {n: i for i, n in enumerate(used)}
    a2 = Assignment(tuple(relabel[n] for n in a.edge_of), len(used))
    assert round_latency_eba(sub, a2) == round_latency_eba(s, a)
