import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import s4
from hfl_assoc import Scenario, exhaustive_solve, tsdp_solve
from hfl_assoc.scenario import (
    BETA_FLOOR,
    GeometricLayout,
    Ranges,
    SplitMix64,
    beta_csv,
    fedch_layout,
    geometric_topology,
    heterogeneous_topology,
    load_scenario,
    random_instance,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    segment_points,
    two_edge_topology,
)


def test_splitmix_known_outputs():
    # first outputs of the reference SplitMix64 generator for seed 0
    rng = SplitMix64(0)
    assert rng.next_u64() == 0xE220A8397B1DCDAF
    assert rng.next_u64() == 0x6E789E6AA1B965F4
    assert 0.0 <= SplitMix64(123).random() < 1.0


def test_two_edge_topology_small_case_is_the_four_user_example():
    assert two_edge_topology(1) == s4()
    s = two_edge_topology(3, 55.0)
    assert s.num_users == 12 and s.d2.tolist() == [10.0, 55.0]
    assert s.alpha.tolist() == [10] * 3 + [20] * 3 + [10] * 3 + [20] * 3


def test_heterogeneous_topology():
    s = heterogeneous_topology(10)
    assert (s.num_users, s.num_edges) == (40, 4)
    assert s.beta[19, 0] == pytest.approx(1.0 + 1.9)
    assert s.beta[20].tolist() == [9.0, 4.0, 25.0, 25.0]
    assert s.d2.tolist() == [10.0, 10.0, 10.0, 10.0]
    assert heterogeneous_topology(1, 70.0).d2[1] == 70.0


def test_topologies_reject_empty():
    with pytest.raises(ValueError):
        two_edge_topology(0)


def test_geometric_layout_beta():
    layout = GeometricLayout([(0.0, 0.0), (3.0, 4.0)], [(0.0, 0.0), (0.0, 4.0)], rho=0.5)
    assert layout.beta().tolist() == [[BETA_FLOOR, 8.0], [12.5, 4.5]]
    doubled = GeometricLayout(layout.user_coords, layout.edge_coords, rho=1.0).beta()
    assert doubled[1].tolist() == [25.0, 9.0]


def test_fedch_layout_shapes():
    layout = fedch_layout(20, 2)
    assert layout.user_coords.shape == (20, 2)
    right = layout.user_coords[:15]
    assert right[0].tolist() == [9.5, 0.0] and right[-1].tolist() == [10.5, 0.0]
    assert np.all(layout.user_coords[15:, 0] < 0)
    beta = geometric_topology(layout).beta
    assert beta.min() == pytest.approx(0.01 * 100.0)
    assert beta[0, 1] == pytest.approx(0.01 * 100.25)
    assert fedch_layout(8, 4).edge_coords.shape == (4, 2)
    with pytest.raises(ValueError):
        fedch_layout(8, 3)


def test_seeded_layout_is_reproducible():
    a = fedch_layout(12, 2, seed=4).user_coords
    assert np.array_equal(a, fedch_layout(12, 2, seed=4).user_coords)
    assert np.all((a[:9, 0] >= 9.5) & (a[:9, 0] <= 10.5))
    assert not np.array_equal(a, fedch_layout(12, 2, seed=5).user_coords)


def test_segment_points_single():
    assert segment_points((0, 0), (2, 0), 1).tolist() == [[1.0, 0.0]]


def test_random_instance_deterministic():
    a = random_instance(6, 3, seed=11)
    b = random_instance(6, 3, seed=11)
    assert a == b
    assert random_instance(6, 3, seed=12) != a
    rng = SplitMix64(11)
    assert a.alpha[0] == 1.0 + 19.0 * rng.random()


def test_random_instance_ranges():
    s = random_instance(30, 4, seed=2, ranges=Ranges((0, 1), (2, 3), (4, 5)))
    assert s.alpha.min() >= 0 and s.alpha.max() < 1
    assert s.beta.min() >= 2 and s.beta.max() < 3
    assert s.d2.min() >= 4 and s.d2.max() < 5
    with pytest.raises(ValueError):
        Ranges(beta=(0.0, 1.0))


def test_random_instance_single_user_and_solvers():
    one = random_instance(1, 2, seed=0)
    assert one.num_users == 1
    s = random_instance(6, 2, seed=7)
    assert tsdp_solve(s).latency == exhaustive_solve(s).latency


@settings(max_examples=50, deadline=None)
@given(M=st.integers(1, 8), N=st.integers(1, 4), seed=st.integers(0, 2**64 - 1))
def test_file_roundtrip_is_bitwise(M, N, seed, tmp_path_factory):
    s = random_instance(M, N, seed)
    path = tmp_path_factory.mktemp("sc") / "s.json"
    save_scenario(s, path)
    back = load_scenario(path)
    assert back == s
    assert beta_csv(back) == beta_csv(s)


def test_physical_block(tmp_path):
    doc = {
        "alpha": [1.0],
        "d2": [0.0],
        "physical": {"L": 1e6, "B": [1e6], "p": [1.0], "g": [[3e-15]], "N0": 1e-21},
    }
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    s = load_scenario(path)
    assert s.beta[0, 0] == pytest.approx(0.5, rel=1e-12)


def test_file_errors():
    doc = scenario_to_dict(s4())
    with pytest.raises(ValueError):
        scenario_from_dict({**doc, "physical": {}})
    with pytest.raises(ValueError):
        scenario_from_dict({k: v for k, v in doc.items() if k != "beta"})
    with pytest.raises(ValueError):
        scenario_from_dict({**doc, "num_users": 5})


def test_beta_csv_full_precision():
    s = Scenario([0.0], [[0.1, 1 / 3]], [0.0, 0.0])
    line = beta_csv(s).strip().split(",")
    assert [float(x) for x in line] == [0.1, 1 / 3]
    assert line[1] == "0.33333333333333331"
