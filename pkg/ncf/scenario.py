"""Random topologies and traffic for Monte-Carlo trials."""
from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Tuple

import numpy as np

from ncf.coding import ConnectivityMatrix, NativePacket
from ncf.errors import InvalidConfig
from ncf.gf import field_for
from ncf.models.scenario_config import Mode, ScenarioConfig


def trial_stream(seed: int, trial: int) -> np.random.Generator:
    """
    Independent PCG64 stream for one trial.

    The stream is the child of the experiment's root seed keyed by the trial
    index, so a trial draws the same numbers whichever worker runs it.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def _check(config: ScenarioConfig) -> None:
    if config.m is None or config.m < 1:
        raise InvalidConfig(f"Gateway count must be at least 1, got {config.m}")
    if config.n < 1:
        raise InvalidConfig(f"Node count must be at least 1, got {config.n}")
    if not 0.0 <= config.pt <= 1.0:
        raise InvalidConfig(f"Transmission probability {config.pt} outside [0, 1]")
    if config.mode is Mode.EQUAL and (config.w is None or not 1 <= config.w <= config.m):
        raise InvalidConfig(f"EQUAL connectivity needs 1 <= w <= m, got w={config.w}, m={config.m}")


def gen_topology(config: ScenarioConfig, rng: np.random.Generator) -> ConnectivityMatrix:
    """
    Draw a connectivity matrix.

    Each node first draws how many gateways it reaches (uniform over 1..m under
    RAND, exactly w under EQUAL), then that many distinct gateways uniformly.

    Raises:
        InvalidConfig: parameters out of range
    """
    _check(config)
    n, m = config.n, config.m
    if config.mode is Mode.RAND:
        reach = rng.integers(1, m + 1, size=n)
    else:
        reach = np.full(n, config.w, dtype=np.int64)

    # Ranking i.i.d. keys gives each row a uniform random permutation of gateways;
    # keeping ranks below the reach count selects a uniform subset of that size.
    keys = rng.random((n, m))
    ranks = keys.argsort(axis=1, kind="stable").argsort(axis=1, kind="stable")
    return ConnectivityMatrix((ranks < reach[:, None]).astype(np.uint8))


@dataclass
class Generation:
    """
    One time slot of traffic.

    receptions[j] lists the transmitting nodes gateway j heard, ascending;
    payloads maps each transmitting node to its L symbols.
    """

    index: int
    transmitted: np.ndarray
    receptions: Tuple[np.ndarray, ...]
    payloads: Dict[int, np.ndarray]
    packets: Dict[int, NativePacket] = dc_field(init=False, repr=False)

    def __post_init__(self):
        self.packets = {
            node: NativePacket(node=node, generation=self.index, payload=payload)
            for node, payload in self.payloads.items()
        }

    def native_packets(self) -> List[NativePacket]:
        return [self.packets[int(i)] for i in self.transmitted]

    def received(self, j: int) -> List[NativePacket]:
        return [self.packets[int(i)] for i in self.receptions[j]]


def gen_traffic(
    config: ScenarioConfig,
    connectivity: ConnectivityMatrix,
    index: int,
    rng: np.random.Generator,
) -> Generation:
    """
    Draw one generation: every node transmits with probability pt, payload symbols are
    uniform over the field and every gateway in range receives the packet.
    """
    _check(config)
    if (connectivity.n, connectivity.m) != (config.n, config.m):
        raise InvalidConfig(
            f"Topology is {connectivity.n}x{connectivity.m} but scenario is {config.n}x{config.m}"
        )
    field = field_for(config.gf_exp)

    transmitted = np.flatnonzero(rng.random(config.n) < config.pt)
    symbols = field.random_symbols(rng, (len(transmitted), config.payload_len))
    return build_generation(connectivity, transmitted, symbols, index)


def build_generation(
    connectivity: ConnectivityMatrix,
    transmitted,
    payloads,
    index: int = 0,
) -> Generation:
    """
    Generation in which `transmitted` nodes send the rows of `payloads` and every
    gateway in range receives them.
    """
    transmitted = np.asarray(list(transmitted), dtype=np.int64)
    payloads = np.asarray(payloads, dtype=np.uint8)
    if payloads.ndim != 2:
        payloads = payloads.reshape(len(transmitted), -1 if payloads.size else 0)
    order = np.argsort(transmitted, kind="stable")
    transmitted, payloads = transmitted[order], payloads[order]
    heard = connectivity.bits[transmitted]
    receptions = tuple(transmitted[heard[:, j] == 1] for j in range(connectivity.m))
    return Generation(
        index=index,
        transmitted=transmitted,
        receptions=receptions,
        payloads={int(i): payloads[t] for t, i in enumerate(transmitted)},
    )
