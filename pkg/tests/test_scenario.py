"""Tests for scenario parameters, topology draws and traffic draws."""
import numpy as np
import pytest
from pydantic import ValidationError

from ncf.coding import ConnectivityMatrix
from ncf.errors import InvalidConfig
from ncf.models.scenario_config import Mode, ScenarioConfig, gateways_for
from ncf.scenario import build_generation, gen_topology, gen_traffic, trial_stream


@pytest.mark.parametrize("n, expected", [(100, 5), (1000, 50), (30, 2), (10, 1), (9, 1), (1, 1)])
def test_gateways_from_ratio(n, expected):
    assert gateways_for(n) == expected
    assert ScenarioConfig(n=n, pt=0.5).m == expected


def test_explicit_gateways_ratio():
    assert ScenarioConfig(n=100, pt=0.5, gateways_ratio=0.1).m == 10


def test_m_and_ratio_must_agree():
    with pytest.raises(ValidationError):
        ScenarioConfig(n=100, m=7, gateways_ratio=0.05, pt=0.5)
    assert ScenarioConfig(n=100, m=5, gateways_ratio=0.05, pt=0.5).m == 5


def test_config_rebuilds_from_its_dump():
    config = ScenarioConfig(n=200, pt=0.3, mode=Mode.EQUAL, w=4, L=16)
    assert ScenarioConfig(**config.model_dump(by_alias=True)) == config
    assert config.payload_len == 16


@pytest.mark.parametrize("keys", [
    dict(n=10, pt=1.5),
    dict(n=10, pt=-0.1),
    dict(n=0, pt=0.5),
    dict(n=100, pt=0.5, mode="equal"),
    dict(n=100, pt=0.5, mode="equal", w=6),
    dict(n=100, pt=0.5, gf_exp=9),
])
def test_invalid_configs(keys):
    with pytest.raises(ValidationError):
        ScenarioConfig(**keys)


def test_gen_topology_rejects_unchecked_config():
    config = ScenarioConfig.model_construct(n=5, m=2, pt=0.5, mode=Mode.EQUAL, w=3)
    with pytest.raises(InvalidConfig):
        gen_topology(config, trial_stream(1, 0))


def test_equal_full_connectivity():
    config = ScenarioConfig(n=50, m=4, pt=0.5, mode=Mode.EQUAL, w=4)
    assert gen_topology(config, trial_stream(1, 0)).bits.all()


def test_equal_single_gateway():
    config = ScenarioConfig(n=7, m=1, pt=0.5, mode=Mode.EQUAL, w=1)
    c = gen_topology(config, trial_stream(1, 0))
    assert c.bits.tolist() == [[1]] * 7


def test_equal_row_weights_are_exact():
    config = ScenarioConfig(n=1000, pt=0.5, mode=Mode.EQUAL, w=3)
    c = gen_topology(config, trial_stream(2, 0))
    assert c.m == 50
    assert (c.row_weights == 3).all()


def test_rand_row_weights_are_uniform():
    config = ScenarioConfig(n=100_000, m=5, pt=0.5)
    c = gen_topology(config, trial_stream(3, 0))
    weights = c.row_weights
    assert abs(weights.mean() - 3.0) < 0.02
    counts = np.bincount(weights, minlength=6)
    assert counts[0] == 0
    # 20000 expected per weight, standard deviation about 126
    assert all(19_300 < count < 20_700 for count in counts[1:])
    # every gateway is picked with probability E[d] / m = 0.6
    assert np.allclose(c.bits.mean(axis=0), 0.6, atol=0.01)


@pytest.mark.parametrize("pt, expected", [(0.0, 0), (1.0, 40)])
def test_traffic_extremes(pt, expected):
    config = ScenarioConfig(n=40, m=2, pt=pt)
    rng = trial_stream(4, 0)
    c = gen_topology(config, rng)
    assert len(gen_traffic(config, c, 0, rng).transmitted) == expected


def test_traffic_half_load():
    config = ScenarioConfig(n=100_000, m=1, pt=0.5, mode=Mode.EQUAL, w=1)
    rng = trial_stream(5, 0)
    c = ConnectivityMatrix(np.ones((100_000, 1), dtype=np.uint8))
    assert abs(len(gen_traffic(config, c, 0, rng).transmitted) - 50_000) <= 500


def test_receptions_follow_connectivity():
    config = ScenarioConfig(n=60, m=4, pt=0.5, L=3)
    rng = trial_stream(6, 0)
    c = gen_topology(config, rng)
    generation = gen_traffic(config, c, 9, rng)
    transmitted = set(generation.transmitted.tolist())
    for j in range(4):
        expected = sorted(i for i in transmitted if c.bits[i, j])
        assert generation.receptions[j].tolist() == expected
        assert all(p.generation == 9 for p in generation.received(j))
    for node, payload in generation.payloads.items():
        assert payload.shape == (3,) and payload.max(initial=0) < 128


def test_traffic_rejects_foreign_topology():
    config = ScenarioConfig(n=10, m=2, pt=0.5)
    with pytest.raises(InvalidConfig):
        gen_traffic(config, ConnectivityMatrix.empty(10, 3), 0, trial_stream(1, 0))


def test_same_seed_same_draws():
    config = ScenarioConfig(n=80, m=4, pt=0.4, seed=11)
    draws = []
    for _ in range(2):
        rng = trial_stream(config.seed, 3)
        c = gen_topology(config, rng)
        generation = gen_traffic(config, c, 0, rng)
        draws.append((c, generation.transmitted.tolist(), {k: v.tolist() for k, v in generation.payloads.items()}))
    assert draws[0] == draws[1]


def test_trials_draw_different_streams():
    first = trial_stream(11, 0).integers(0, 2**32, size=4)
    second = trial_stream(11, 1).integers(0, 2**32, size=4)
    assert not np.array_equal(first, second)


def test_build_generation_keeps_payloads_with_their_nodes():
    c = ConnectivityMatrix(np.ones((5, 2), dtype=np.uint8))
    payloads = np.array([[40], [10], [30]], dtype=np.uint8)
    generation = build_generation(c, [4, 1, 3], payloads)
    assert generation.transmitted.tolist() == [1, 3, 4]
    assert {k: v.tolist() for k, v in generation.payloads.items()} == {4: [40], 1: [10], 3: [30]}
    assert [p.node for p in generation.native_packets()] == [1, 3, 4]


def test_build_generation_with_nobody_transmitting():
    c = ConnectivityMatrix(np.ones((3, 2), dtype=np.uint8))
    generation = build_generation(c, [], np.zeros((0, 4), dtype=np.uint8))
    assert generation.transmitted.size == 0
    assert all(r.size == 0 for r in generation.receptions)
