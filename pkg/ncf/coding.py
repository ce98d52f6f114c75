"""
Network-coding-based forwarding.

The network server learns which gateways hear which nodes, gives every
covered node to exactly one owning gateway and hands each gateway a set of
random encoding vectors over its owned nodes. Per generation, a gateway
replaces raw forwarding with one linear combination per received owned
packet, and the server solves the combined system to recover the natives.
"""
import logging
import struct
from dataclasses import dataclass, field as dc_field
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from ncf.errors import (
    DimensionMismatch,
    DuplicatePacket,
    GenerationMismatch,
    IndexOutOfRange,
    MalformedPacket,
    PayloadLengthMismatch,
    VectorsExhausted,
)
from ncf.gf import FieldMatrix, FieldSpec, RankReport, mat_solve


@dataclass(frozen=True, eq=False)
class ConnectivityMatrix:
    """n x m binary matrix; bits[i, j] == 1 iff gateway j hears node i."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.array(self.bits, dtype=np.uint8)
        if bits.ndim != 2:
            raise DimensionMismatch(f"Connectivity must be 2-D, got shape {bits.shape}")
        if bits.size and bits.max() > 1:
            raise ValueError("Connectivity entries must be 0 or 1")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "ConnectivityMatrix":
        return cls(np.array(rows, dtype=np.uint8))

    @classmethod
    def empty(cls, n: int, m: int) -> "ConnectivityMatrix":
        return cls(np.zeros((n, m), dtype=np.uint8))

    @property
    def n(self) -> int:
        return self.bits.shape[0]

    @property
    def m(self) -> int:
        return self.bits.shape[1]

    def column_weight(self, j: int) -> int:
        return int(self.bits[:, j].sum())

    @property
    def row_weights(self) -> np.ndarray:
        return self.bits.sum(axis=1).astype(np.int64)

    @property
    def covered(self) -> np.ndarray:
        """Boolean mask of nodes heard by at least one gateway."""
        return self.bits.any(axis=1)

    def gateways_of(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.bits[i])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ConnectivityMatrix) and np.array_equal(self.bits, other.bits)

    def __repr__(self) -> str:
        return f"ConnectivityMatrix(n={self.n}, m={self.m}, links={int(self.bits.sum())})"


# Three nodes, three gateways, seven links: raw forwarding sends 7 packets, NCF sends 3.
TOY_CONNECTIVITY = ConnectivityMatrix.from_rows([
    [1, 1, 0],
    [1, 1, 1],
    [0, 1, 1],
])


@dataclass(frozen=True, eq=False)
class OwnershipAssignment:
    """Which gateway encodes each covered node; owner is -1 for uncovered nodes."""

    owner: np.ndarray
    owned_nodes: Tuple[np.ndarray, ...]

    def owner_of(self, i: int) -> Optional[int]:
        j = int(self.owner[i])
        return None if j < 0 else j


@dataclass(frozen=True, eq=False)
class GatewayVectors:
    """
    The encoding vectors G_j of one gateway.

    coeffs[k, t] is the coefficient of vector k on node owned[t]; every vector is
    zero outside the owned nodes, so only that block is stored.
    """

    gateway: int
    n: int
    owned: np.ndarray
    coeffs: np.ndarray
    position: np.ndarray = dc_field(init=False, repr=False)

    def __post_init__(self):
        position = np.full(self.n, -1, dtype=np.int64)
        position[self.owned] = np.arange(len(self.owned))
        object.__setattr__(self, "position", position)

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    def vector(self, k: int) -> np.ndarray:
        """Vector k as a full length-n coefficient array."""
        full = np.zeros(self.n, dtype=np.uint8)
        full[self.owned] = self.coeffs[k]
        return full

    @property
    def template(self) -> np.ndarray:
        """First vector of G_j; its nonzero entries mark the owned nodes."""
        if len(self) == 0:
            return np.zeros(self.n, dtype=np.uint8)
        return self.vector(0)


@dataclass(frozen=True)
class EncodingVectorSet:
    gateways: Tuple[GatewayVectors, ...]

    def __getitem__(self, j: int) -> GatewayVectors:
        return self.gateways[j]

    def __len__(self) -> int:
        return len(self.gateways)

    @property
    def total(self) -> int:
        return sum(len(g) for g in self.gateways)


@dataclass(frozen=True, eq=False)
class NativePacket:
    node: int
    generation: int
    payload: np.ndarray


_HEADER = struct.Struct("<IHH")
_LENGTH = struct.Struct("<H")


@dataclass(frozen=True, eq=False)
class EncodedPacket:
    """A gateway's linear combination of the native packets it owns in one generation."""

    gateway: int
    generation: int
    coeffs: np.ndarray
    payload: np.ndarray

    def to_bytes(self) -> bytes:
        """generation u32, gateway u16, n u16, n coefficient bytes, L u16, L payload bytes (little-endian)."""
        coeffs = np.asarray(self.coeffs, dtype=np.uint8)
        payload = np.asarray(self.payload, dtype=np.uint8)
        return (
            _HEADER.pack(self.generation, self.gateway, len(coeffs))
            + coeffs.tobytes()
            + _LENGTH.pack(len(payload))
            + payload.tobytes()
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "EncodedPacket":
        try:
            generation, gateway, n = _HEADER.unpack_from(data, 0)
            offset = _HEADER.size
            coeffs = np.frombuffer(data, dtype=np.uint8, count=n, offset=offset).copy()
            offset += n
            (length,) = _LENGTH.unpack_from(data, offset)
            offset += _LENGTH.size
            payload = np.frombuffer(data, dtype=np.uint8, count=length, offset=offset).copy()
        except (struct.error, ValueError) as e:
            raise MalformedPacket(f"Truncated encoded packet: {e}") from e
        if offset + length != len(data):
            raise MalformedPacket(f"{len(data) - offset - length} trailing bytes after payload")
        return cls(gateway=gateway, generation=generation, coeffs=coeffs, payload=payload)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, EncodedPacket)
            and (self.gateway, self.generation) == (other.gateway, other.generation)
            and np.array_equal(self.coeffs, other.coeffs)
            and np.array_equal(self.payload, other.payload)
        )


class DecodeStatus(str, Enum):
    FULL = "full"
    PARTIAL = "partial"
    EMPTY = "empty"


@dataclass
class DecodeResult:
    recovered: Dict[int, np.ndarray] = dc_field(default_factory=dict)
    unrecovered: Set[int] = dc_field(default_factory=set)
    status: DecodeStatus = DecodeStatus.EMPTY
    rank: int = 0


def infer_connectivity(log: Iterable[Tuple[int, int]], n: int, m: int) -> ConnectivityMatrix:
    """
    Build C from (gateway, node) forwarding observations.

    Raises:
        IndexOutOfRange: an observation names a node or gateway outside n x m
    """
    bits = np.zeros((n, m), dtype=np.uint8)
    for j, i in log:
        if not 0 <= j < m:
            raise IndexOutOfRange(f"Gateway index {j} outside [0, {m})")
        if not 0 <= i < n:
            raise IndexOutOfRange(f"Node index {i} outside [0, {n})")
        bits[i, j] = 1
    return ConnectivityMatrix(bits)


def assign_owners(connectivity: ConnectivityMatrix) -> OwnershipAssignment:
    """First-come ownership: each covered node goes to the lowest-index gateway that hears it."""
    bits = connectivity.bits
    if connectivity.m == 0:
        owner = np.full(connectivity.n, -1, dtype=np.int64)
    else:
        owner = np.where(bits.any(axis=1), bits.argmax(axis=1), -1).astype(np.int64)
    owned = tuple(np.flatnonzero(owner == j) for j in range(connectivity.m))
    return OwnershipAssignment(owner=owner, owned_nodes=owned)


def generate_encoding_vectors(
    connectivity: ConnectivityMatrix,
    field: FieldSpec,
    rng: np.random.Generator,
) -> Tuple[OwnershipAssignment, EncodingVectorSet]:
    """
    Zero every link but the first-come one per node, then give each gateway as many
    vectors as it owns nodes, with independent nonzero coefficients on those nodes.

    Coefficients are drawn gateway by gateway in index order, one W x W block each.
    """
    ownership = assign_owners(connectivity)
    gateways = []
    for j, owned in enumerate(ownership.owned_nodes):
        w = len(owned)
        coeffs = field.rand_nonzero(rng, size=(w, w))
        gateways.append(GatewayVectors(gateway=j, n=connectivity.n, owned=owned, coeffs=coeffs))
    vectors = EncodingVectorSet(gateways=tuple(gateways))
    logging.debug(f"Generated {vectors.total} encoding vectors across {connectivity.m} gateways")
    return ownership, vectors


def refresh_vectors(
    log: Iterable[Tuple[int, int]],
    n: int,
    m: int,
    field: FieldSpec,
    rng: np.random.Generator,
) -> Tuple[ConnectivityMatrix, OwnershipAssignment, EncodingVectorSet]:
    """Re-learn connectivity from a fresh forwarding log and regenerate every gateway's vectors."""
    connectivity = infer_connectivity(log, n, m)
    ownership, vectors = generate_encoding_vectors(connectivity, field, rng)
    return connectivity, ownership, vectors


def _single_generation(packets: Sequence, what: str) -> Optional[int]:
    generations = {p.generation for p in packets}
    if len(generations) > 1:
        raise GenerationMismatch(f"{what} span generations {sorted(generations)}")
    return next(iter(generations), None)


def encode_at_gateway(
    j: int,
    vectors: GatewayVectors,
    received: Sequence[NativePacket],
    field: FieldSpec,
) -> List[EncodedPacket]:
    """
    Encode one generation of receptions at gateway j.

    The k-th received packet from an owned node consumes vector k. Each reported
    coefficient vector is masked to the received owned nodes, so it describes the
    combination actually computed. Packets from nodes owned elsewhere are dropped.

    Raises:
        GenerationMismatch: received packets belong to different generations
        DuplicatePacket: a node appears more than once
        PayloadLengthMismatch: payloads differ in length
        VectorsExhausted: more owned packets than vectors in G_j
    """
    if vectors.gateway != j:
        raise ValueError(f"Vectors belong to gateway {vectors.gateway}, not {j}")
    generation = _single_generation(received, "Received packets")
    senders = [p.node for p in received]
    if len(set(senders)) < len(senders):
        repeated = sorted({s for s in senders if senders.count(s) > 1})
        raise DuplicatePacket(f"Gateway {j} received more than one packet from nodes {repeated}")
    lengths = {len(p.payload) for p in received}
    if len(lengths) > 1:
        raise PayloadLengthMismatch(f"Gateway {j} received payload lengths {sorted(lengths)}")
    if not received or len(vectors) == 0:
        return []

    template = vectors.template
    owned = [p for p in received if template[p.node] != 0]
    r = len(owned)
    if r == 0:
        return []
    if r > len(vectors):
        raise VectorsExhausted(f"Gateway {j} received {r} owned packets but holds {len(vectors)} vectors")

    nodes = np.array([p.node for p in owned], dtype=np.int64)
    payloads = np.stack([np.asarray(p.payload, dtype=np.uint8) for p in owned])
    coeffs = vectors.coeffs[:r][:, vectors.position[nodes]]
    combined = field.matmul(coeffs, payloads)

    encoded = []
    for k in range(r):
        full = np.zeros(vectors.n, dtype=np.uint8)
        full[nodes] = coeffs[k]
        encoded.append(EncodedPacket(gateway=j, generation=generation, coeffs=full, payload=combined[k]))
    return encoded


def _column_blocks(
    system: np.ndarray,
    columns: np.ndarray,
    groups: np.ndarray,
) -> List[Tuple[np.ndarray, np.ndarray]]:
    """
    Split rows into independent blocks whose column supports do not overlap.

    Rows are first pooled by `groups` (the sending gateway), so the union-find
    runs over gateways rather than rows. Pooling can only merge blocks, and the
    solution of a block-diagonal system equals the solutions of its blocks.
    """
    live = np.flatnonzero(system.any(axis=1))
    if live.size == 0:
        return []
    order = live[np.argsort(groups[live], kind="stable")]
    labels, starts = np.unique(groups[order], return_index=True)
    supports = np.logical_or.reduceat(system[order] != 0, starts, axis=0)

    parent = list(range(len(labels)))

    def find(g: int) -> int:
        while parent[g] != g:
            parent[g] = parent[parent[g]]
            g = parent[g]
        return g

    column_group = np.full(system.shape[1], -1, dtype=np.int64)
    for g, support in enumerate(supports):
        cols = np.flatnonzero(support)
        for other in np.unique(column_group[cols]):
            if other >= 0:
                root = find(int(other))
                if root != g:
                    parent[root] = g
        column_group[cols] = g

    root_of = np.array([find(g) for g in range(len(labels))], dtype=np.int64)
    row_roots = root_of[np.searchsorted(labels, groups[live])]
    col_roots = root_of[column_group[columns]]

    blocks = []
    for root in np.unique(col_roots):
        rows = live[row_roots == root]
        blocks.append((rows, columns[col_roots == root]))
    return sorted(blocks, key=lambda block: block[1][0])


def decode_at_server(packets: Sequence[EncodedPacket], field: FieldSpec) -> DecodeResult:
    """
    Recover native packets from one generation of encoded packets.

    All-zero coefficient columns are dropped and the remaining system is solved
    block by block, so a singular block only costs its own nodes.

    Raises:
        GenerationMismatch: packets belong to different generations
        PayloadLengthMismatch: payloads differ in length
        DimensionMismatch: coefficient vectors differ in length
    """
    _single_generation(packets, "Encoded packets")
    if not packets:
        return DecodeResult()

    lengths = {len(p.payload) for p in packets}
    if len(lengths) > 1:
        raise PayloadLengthMismatch(f"Payload lengths {sorted(lengths)} in one generation")
    widths = {len(p.coeffs) for p in packets}
    if len(widths) > 1:
        raise DimensionMismatch(f"Coefficient vector lengths {sorted(widths)} in one generation")

    system = np.stack([np.asarray(p.coeffs, dtype=np.uint8) for p in packets])
    payloads = np.stack([np.asarray(p.payload, dtype=np.uint8) for p in packets])
    columns = np.flatnonzero(system.any(axis=0))
    if columns.size == 0:
        return DecodeResult()

    result = DecodeResult()
    groups = np.array([p.gateway for p in packets], dtype=np.int64)
    for rows, cols in _column_blocks(system, columns, groups):
        a = FieldMatrix(system[np.ix_(rows, cols)])
        b = FieldMatrix(payloads[rows])
        solution = mat_solve(field, a, b)
        if isinstance(solution, RankReport):
            logging.debug(
                f"Singular block over nodes {cols.tolist()}: rank {solution.rank}, "
                f"unresolved {[int(cols[c]) for c in solution.unresolved_cols]}"
            )
            result.rank += solution.rank
            for c, row in solution.solved.items():
                result.recovered[int(cols[c])] = row
            result.unrecovered.update(int(cols[c]) for c in solution.unresolved_cols)
        else:
            result.rank += len(cols)
            for t, node in enumerate(cols):
                result.recovered[int(node)] = solution.entries[t]

    result.status = DecodeStatus.PARTIAL if result.unrecovered else DecodeStatus.FULL
    return result


def pure_forward(received: Sequence[Sequence[NativePacket]]) -> int:
    """Packets sent by standard gateways, which forward every reception raw."""
    return sum(len(r) for r in received)


def analytic_bound(b_pf: int, m: int) -> Tuple[Fraction, Fraction]:
    """
    Best-case NCF bandwidth and saving for a pure-forwarding load of b_pf packets.

    Returns:
        (B_PF / m, (1 - 1/m) * B_PF)
    """
    if m < 1:
        raise ValueError(f"Gateway count must be at least 1, got {m}")
    b_nc = Fraction(b_pf, m)
    return b_nc, Fraction(b_pf) - b_nc
