"""Monte-Carlo comparison of NCF against standard LoRaWAN pure forwarding."""
import logging
from concurrent.futures import ProcessPoolExecutor
from functools import reduce
from typing import List, Optional

import numpy as np

from ncf.coding import (
    ConnectivityMatrix,
    EncodingVectorSet,
    decode_at_server,
    encode_at_gateway,
    generate_encoding_vectors,
    pure_forward,
)
from ncf.config import settings
from ncf.errors import DecodeCorruption, InconsistentSystem
from ncf.gf import FieldSpec, field_for
from ncf.models.scenario_config import ScenarioConfig
from ncf.models.stats import Accumulator, AggregateStats, TrialResult
from ncf.scenario import Generation, gen_topology, gen_traffic, trial_stream


def evaluate_generation(
    connectivity: ConnectivityMatrix,
    vectors: EncodingVectorSet,
    generation: Generation,
    field: FieldSpec,
) -> TrialResult:
    """
    Run both schemes on the same receptions and check NCF's decode against the sent payloads.

    Raises:
        DecodeCorruption: a decoded payload differs from the original or the system is inconsistent
    """
    received = [generation.received(j) for j in range(connectivity.m)]
    packets_lorawan = pure_forward(received)

    encoded = []
    for j in range(connectivity.m):
        encoded.extend(encode_at_gateway(j, vectors[j], received[j], field))

    try:
        decoded = decode_at_server(encoded, field)
    except InconsistentSystem as e:
        raise DecodeCorruption(f"Generation {generation.index}: {e}") from e

    for node, payload in decoded.recovered.items():
        original = generation.payloads.get(node)
        if original is None or not np.array_equal(payload, original):
            raise DecodeCorruption(f"Generation {generation.index}: node {node} decoded to a wrong payload")

    covered = connectivity.covered[generation.transmitted]
    return TrialResult(
        packets_ncf=len(encoded),
        packets_lorawan=packets_lorawan,
        decode_status=decoded.status,
        unrecovered_count=len(decoded.unrecovered),
        transmitted=len(generation.transmitted),
        covered_transmitted=int(covered.sum()),
    )


def run_trial(config: ScenarioConfig, trial: int) -> TrialResult:
    """One trial: fresh topology and vectors from the trial's stream, one generation of traffic."""
    rng = trial_stream(config.seed, trial)
    field = field_for(config.gf_exp)
    connectivity = gen_topology(config, rng)
    _, vectors = generate_encoding_vectors(connectivity, field, rng)
    generation = gen_traffic(config, connectivity, 0, rng)
    result = evaluate_generation(connectivity, vectors, generation, field)
    logging.debug(
        f"Trial {trial}: lorawan={result.packets_lorawan} ncf={result.packets_ncf} "
        f"status={result.decode_status.value}"
    )
    return result


def run_generations(config: ScenarioConfig, generations: int, trial: int = 0) -> List[TrialResult]:
    """
    Keep one topology and one vector set for several generations.

    Every generation consumes its gateway's vectors from the first one again.
    """
    rng = trial_stream(config.seed, trial)
    field = field_for(config.gf_exp)
    connectivity = gen_topology(config, rng)
    _, vectors = generate_encoding_vectors(connectivity, field, rng)
    return [
        evaluate_generation(connectivity, vectors, gen_traffic(config, connectivity, index, rng), field)
        for index in range(generations)
    ]


def _run_range(config: ScenarioConfig, start: int, stop: int) -> Accumulator:
    acc = Accumulator()
    for trial in range(start, stop):
        acc.add(run_trial(config, trial))
    return acc


def _chunks(trials: int, parts: int):
    bounds = np.linspace(0, trials, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def run_experiment(config: ScenarioConfig, trials: int, workers: Optional[int] = None) -> AggregateStats:
    """
    Aggregate `trials` independent trials of one scenario.

    Trial t always uses the child stream keyed by t and the per-trial counts are
    merged as exact integer sums, so the result does not depend on `workers`.
    """
    if trials < 2:
        raise ValueError(f"An experiment needs at least 2 trials, got {trials}")
    workers = workers or settings.WORKERS

    if workers <= 1:
        acc = _run_range(config, 0, trials)
    else:
        chunks = _chunks(trials, workers * 4)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_range, config, start, stop) for start, stop in chunks]
            acc = reduce(Accumulator.merge, (f.result() for f in futures), Accumulator())

    stats = AggregateStats.from_accumulator(acc, scenario=config.model_dump(mode="json", by_alias=True))
    logging.info(
        f"n={config.n} m={config.m} pt={config.pt:g} mode={config.mode.value}: "
        f"lorawan={stats.mean_lorawan:.2f} ncf={stats.mean_ncf:.2f} savings={stats.savings:.3f} "
        f"decoded={stats.decode_success_rate:.3f}"
    )
    return stats
