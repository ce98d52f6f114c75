"""Quick end-to-end checks behind the `selftest` command."""
import logging
from fractions import Fraction
from typing import Callable, List, Tuple

import numpy as np

from ncf.coding import (
    TOY_CONNECTIVITY,
    ConnectivityMatrix,
    DecodeStatus,
    EncodingVectorSet,
    GatewayVectors,
    analytic_bound,
    assign_owners,
    decode_at_server,
    encode_at_gateway,
    generate_encoding_vectors,
    infer_connectivity,
    pure_forward,
)
from ncf.gf import FieldMatrix, RankReport, field_for, mat_solve
from ncf.models.scenario_config import Mode, ScenarioConfig
from ncf.scenario import build_generation, gen_topology, gen_traffic, trial_stream
from ncf.sim import run_trial

CHECKS: List[Tuple[str, Callable[[], None]]] = []


def check(name: str):
    def register(fn: Callable[[], None]) -> Callable[[], None]:
        CHECKS.append((name, fn))
        return fn
    return register


@check("field identities in GF(2^7)")
def _field_identities():
    gf = field_for(7)
    for x in range(gf.q):
        assert gf.add(0, x) == x and gf.add(x, x) == 0
        assert gf.mul(1, x) == x and gf.mul(0, x) == 0
    assert gf.inv(1) == 1
    # x * (x^6 + 1) = x^7 + x = 1 modulo x^7 + x + 1
    assert gf.inv(0x02) == 0x41
    assert all(gf.mul(a, gf.inv(a)) == 1 for a in range(1, gf.q))


@check("solving identity and rank-deficient systems")
def _solve():
    gf = field_for(7)
    b = FieldMatrix.from_rows([[5, 6], [7, 8], [9, 10]])
    assert mat_solve(gf, FieldMatrix.identity(3), b) == b
    report = mat_solve(gf, FieldMatrix.from_rows([[3, 4], [3, 4]]), FieldMatrix.from_rows([[1], [1]]))
    assert isinstance(report, RankReport) and report.rank == 1 and len(report.free_cols) == 1


@check("connectivity inference from a forwarding log")
def _inference():
    c = infer_connectivity([(0, 0), (0, 0), (1, 2)], n=3, m=2)
    assert c.bits.tolist() == [[1, 0], [0, 0], [0, 1]]
    assert infer_connectivity([], 2, 2) == ConnectivityMatrix.empty(2, 2)


@check("ownership under disjoint coverage")
def _identity_ownership():
    ownership = assign_owners(ConnectivityMatrix(np.eye(3, dtype=np.uint8)))
    assert [o.tolist() for o in ownership.owned_nodes] == [[0], [1], [2]]


@check("toy topology: 7 raw packets against 3 encoded")
def _toy():
    gf = field_for(7)
    rng = trial_stream(1, 0)
    ownership, drawn = generate_encoding_vectors(TOY_CONNECTIVITY, gf, rng)
    assert drawn.total == 3
    # Vandermonde blocks over distinct nonzero points are always invertible.
    vectors = EncodingVectorSet(tuple(
        GatewayVectors(
            gateway=j,
            n=TOY_CONNECTIVITY.n,
            owned=owned,
            coeffs=np.array([[gf.pow(t + 1, k) for t in range(len(owned))] for k in range(len(owned))],
                            dtype=np.uint8).reshape(len(owned), len(owned)),
        )
        for j, owned in enumerate(ownership.owned_nodes)
    ))
    payloads = gf.random_symbols(rng, (3, 8))
    generation = build_generation(TOY_CONNECTIVITY, [0, 1, 2], payloads)
    received = [generation.received(j) for j in range(3)]
    assert pure_forward(received) == 7
    encoded = [p for j in range(3) for p in encode_at_gateway(j, vectors[j], received[j], gf)]
    assert len(encoded) == 3
    decoded = decode_at_server(encoded, gf)
    assert decoded.status is DecodeStatus.FULL
    assert all(np.array_equal(decoded.recovered[i], payloads[i]) for i in range(3))


@check("analytic bound")
def _bound():
    assert analytic_bound(21, 3) == (Fraction(7), Fraction(14))
    assert analytic_bound(10, 1) == (Fraction(10), Fraction(0))


@check("topology and traffic extremes")
def _scenario():
    rng = trial_stream(7, 0)
    full = ScenarioConfig(n=20, m=4, pt=1.0, mode=Mode.EQUAL, w=4)
    c = gen_topology(full, rng)
    assert int(c.bits.sum()) == 80
    assert len(gen_traffic(full, c, 0, rng).transmitted) == 20
    silent = full.model_copy(update={"pt": 0.0})
    assert len(gen_traffic(silent, c, 0, rng).transmitted) == 0


@check("trials at the traffic extremes")
def _trials():
    silent = run_trial(ScenarioConfig(n=40, m=3, pt=0.0, seed=3), 0)
    assert (silent.packets_ncf, silent.packets_lorawan, silent.decode_status) == (0, 0, DecodeStatus.EMPTY)
    busy = run_trial(ScenarioConfig(n=40, m=3, pt=1.0, mode=Mode.EQUAL, w=3, seed=3), 0)
    assert (busy.packets_ncf, busy.packets_lorawan) == (40, 120)


def run_selftest() -> List[str]:
    """Run every registered check; returns the names of the failing ones."""
    failures = []
    for name, fn in CHECKS:
        try:
            fn()
        except Exception as e:
            logging.error(f"FAIL {name}: {e!r}")
            failures.append(name)
        else:
            logging.info(f"ok   {name}")
    logging.info(f"{len(CHECKS) - len(failures)}/{len(CHECKS)} checks passed")
    return failures
