"""
GF(2^k) arithmetic for the coding pipeline.

Field elements are plain ints in [0, q). Scalar multiplication goes through
log/antilog tables built once per FieldSpec; a full q x q product table backs
the vectorized helpers that operate on coefficient matrices and payload blocks
stored as numpy uint8 arrays.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ncf.errors import (
    DimensionMismatch,
    FieldValueError,
    InconsistentSystem,
    InvalidField,
    ZeroInverse,
)

FieldElement = int

# Moduli including the x^k term.
DEFAULT_MODULI: Dict[int, int] = {
    2: 0b111,        # x^2 + x + 1
    3: 0b1011,       # x^3 + x + 1
    4: 0b10011,      # x^4 + x + 1
    5: 0b100101,     # x^5 + x^2 + 1
    6: 0b1000011,    # x^6 + x + 1
    7: 0x83,         # x^7 + x + 1
    8: 0x11D,        # x^8 + x^4 + x^3 + x^2 + 1
}

MIN_EXP = 2
MAX_EXP = 8


def shift_and_reduce_mul(a: int, b: int, k: int, modulus: int) -> int:
    """Multiply two elements of GF(2^k) bit by bit, reducing by `modulus` (leading term included)."""
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if (a >> k) & 1:
            a ^= modulus
    return result


def _poly_mod(a: int, b: int) -> int:
    """Remainder of carry-less division of a by b over GF(2)[x]."""
    deg_b = b.bit_length() - 1
    while a.bit_length() - 1 >= deg_b:
        a ^= b << (a.bit_length() - 1 - deg_b)
    return a


def is_irreducible(modulus: int, k: int) -> bool:
    """
    Exhaustive factor check for a degree-k polynomial over GF(2).

    Tries every polynomial of degree 1..k//2 as a divisor, which is cheap for k <= 8.
    """
    if modulus.bit_length() - 1 != k or not modulus & 1:
        return False
    for degree in range(1, k // 2 + 1):
        for divisor in range(1 << degree, 1 << (degree + 1)):
            if _poly_mod(modulus, divisor) == 0:
                return False
    return True


class FieldSpec:
    """
    The field GF(2^k) defined by an irreducible reduction polynomial.

    Args:
        k: field exponent, 2 <= k <= 8
        reduction_poly: polynomial bitmask; the x^k term may be given or left out.
            Defaults to a conventional irreducible polynomial for k (x^7 + x + 1 for k = 7).

    All tables are read-only after construction, so one instance can be shared
    by every trial running in a process.
    """

    def __init__(self, k: int = 7, reduction_poly: Optional[int] = None):
        if not MIN_EXP <= k <= MAX_EXP:
            raise InvalidField(f"Field exponent must lie in [{MIN_EXP}, {MAX_EXP}], got {k}")

        if reduction_poly is None:
            modulus = DEFAULT_MODULI[k]
        else:
            if reduction_poly < 0 or reduction_poly >> (k + 1):
                raise InvalidField(f"Polynomial 0x{reduction_poly:x} has degree above {k}")
            modulus = reduction_poly | (1 << k)

        if not is_irreducible(modulus, k):
            raise InvalidField(f"Polynomial 0x{modulus:x} is not irreducible over GF(2)")

        self.k = k
        self.q = 1 << k
        self.modulus = modulus
        self.reduction_poly = modulus & (self.q - 1)
        self._build_tables()

    def _build_tables(self) -> None:
        order = self.q - 1
        powers: List[int] = []
        for candidate in range(2, self.q):
            powers = [1]
            x = 1
            for _ in range(order - 1):
                x = shift_and_reduce_mul(x, candidate, self.k, self.modulus)
                if x == 1:
                    break
                powers.append(x)
            if len(powers) == order:
                self.generator = candidate
                break
        else:
            raise InvalidField(f"No primitive element found for modulus 0x{self.modulus:x}")

        self._exp = powers
        self._log = [0] * self.q
        for i, value in enumerate(powers):
            self._log[value] = i

        exp_ext = np.array(powers * 2, dtype=np.uint8)
        logs = np.array(self._log, dtype=np.int64)
        mul_table = exp_ext[logs[:, None] + logs[None, :]]
        mul_table[0, :] = 0
        mul_table[:, 0] = 0

        inv_table = np.zeros(self.q, dtype=np.uint8)
        for a in range(1, self.q):
            inv_table[a] = powers[(order - self._log[a]) % order]

        mul_table.setflags(write=False)
        inv_table.setflags(write=False)
        self.mul_table = mul_table
        self.inv_table = inv_table

    def __repr__(self) -> str:
        return f"FieldSpec(k={self.k}, modulus=0x{self.modulus:x})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FieldSpec) and (self.k, self.modulus) == (other.k, other.modulus)

    def __hash__(self) -> int:
        return hash((self.k, self.modulus))

    def __reduce__(self):
        return (field_for, (self.k, self.reduction_poly))

    # Scalars

    def check(self, a: int) -> int:
        value = int(a)
        if not 0 <= value < self.q:
            raise FieldValueError(f"{value} is not an element of GF(2^{self.k})")
        return value

    def add(self, a: FieldElement, b: FieldElement) -> FieldElement:
        return self.check(a) ^ self.check(b)

    sub = add

    def mul(self, a: FieldElement, b: FieldElement) -> FieldElement:
        a, b = self.check(a), self.check(b)
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]

    def inv(self, a: FieldElement) -> FieldElement:
        a = self.check(a)
        if a == 0:
            raise ZeroInverse(f"Zero has no inverse in GF(2^{self.k})")
        return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]

    def div(self, a: FieldElement, b: FieldElement) -> FieldElement:
        return self.mul(a, self.inv(b))

    def pow(self, a: FieldElement, e: int) -> FieldElement:
        a = self.check(a)
        if e == 0:
            return 1
        if a == 0:
            if e < 0:
                raise ZeroInverse("Negative power of zero")
            return 0
        return self._exp[(self._log[a] * e) % (self.q - 1)]

    # Randomness

    def rand_nonzero(self, rng: np.random.Generator, size=None) -> Union[FieldElement, np.ndarray]:
        """Uniform draw(s) over the nonzero elements [1, q)."""
        if size is None:
            return int(rng.integers(1, self.q))
        return rng.integers(1, self.q, size=size).astype(np.uint8)

    def random_symbols(self, rng: np.random.Generator, size) -> np.ndarray:
        """Uniform draws over the whole field [0, q)."""
        return rng.integers(0, self.q, size=size).astype(np.uint8)

    # Vectors and matrices (numpy uint8)

    def scale(self, c: FieldElement, vector: np.ndarray) -> np.ndarray:
        return self.mul_table[self.check(c)][np.asarray(vector, dtype=np.uint8)]

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Product of an r x s and an s x t array over the field."""
        a = np.asarray(a, dtype=np.uint8)
        b = np.asarray(b, dtype=np.uint8)
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise DimensionMismatch(f"Cannot multiply {a.shape} by {b.shape}")
        products = self.mul_table[a[:, :, None], b[None, :, :]]
        return np.bitwise_xor.reduce(products, axis=1).astype(np.uint8)


@lru_cache(maxsize=None)
def field_for(k: int = 7, reduction_poly: Optional[int] = None) -> FieldSpec:
    """Shared FieldSpec instance for (k, reduction_poly)."""
    return FieldSpec(k, reduction_poly)


@dataclass(frozen=True, eq=False)
class FieldMatrix:
    """Dense matrix of field elements, stored row-major as a 2-D uint8 array."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.uint8)
        if entries.ndim != 2:
            raise DimensionMismatch(f"Matrix entries must be 2-D, got shape {entries.shape}")
        object.__setattr__(self, "entries", entries)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> "FieldMatrix":
        if not rows:
            return cls(np.zeros((0, cols or 0), dtype=np.uint8))
        return cls(np.array(rows, dtype=np.uint8))

    @classmethod
    def identity(cls, n: int) -> "FieldMatrix":
        return cls(np.eye(n, dtype=np.uint8))

    @classmethod
    def random(cls, field: FieldSpec, rng: np.random.Generator, rows: int, cols: int) -> "FieldMatrix":
        return cls(field.random_symbols(rng, (rows, cols)))

    def to_rows(self) -> List[List[int]]:
        return self.entries.tolist()

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FieldMatrix) and np.array_equal(self.entries, other.entries)

    def __repr__(self) -> str:
        return f"FieldMatrix({self.rows}x{self.cols})"


def mat_mul(field: FieldSpec, a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    return FieldMatrix(field.matmul(a.entries, b.entries))


@dataclass(frozen=True)
class RankReport:
    """
    Outcome of elimination on a rank-deficient system.

    pivot_cols / free_cols come straight from the reduced row echelon form.
    unresolved_cols are the columns whose value the system does not pin down:
    every free column plus each pivot column whose reduced row still involves a
    free column. solved maps every other pivot column to its solution row.
    """

    rank: int
    pivot_cols: Tuple[int, ...]
    free_cols: Tuple[int, ...]
    unresolved_cols: Tuple[int, ...]
    solved: Dict[int, np.ndarray]


def mat_solve(field: FieldSpec, a: FieldMatrix, b: FieldMatrix) -> Union[FieldMatrix, RankReport]:
    """
    Solve A.X = B by Gauss-Jordan elimination over the field.

    The pivot for each column is the first nonzero entry at or below the current
    row. Returns X when A has full column rank, otherwise a RankReport.

    Raises:
        DimensionMismatch: A and B have different row counts
        InconsistentSystem: a zero row of the reduced A meets a nonzero row of B
    """
    if a.rows != b.rows:
        raise DimensionMismatch(f"A has {a.rows} rows but B has {b.rows}")

    rows, cols = a.rows, a.cols
    aug = np.concatenate([a.entries, b.entries], axis=1).astype(np.uint8)
    mul = field.mul_table
    pivots: List[int] = []

    r = 0
    for c in range(cols):
        if r == rows:
            break
        candidates = np.flatnonzero(aug[r:, c])
        if candidates.size == 0:
            continue
        p = r + int(candidates[0])
        if p != r:
            aug[[r, p]] = aug[[p, r]]
        aug[r] = mul[field.inv_table[aug[r, c]]][aug[r]]
        factors = aug[:, c].copy()
        factors[r] = 0
        targets = np.flatnonzero(factors)
        if targets.size:
            aug[targets] ^= mul[factors[targets][:, None], aug[r][None, :]]
        pivots.append(c)
        r += 1

    if aug[r:, cols:].any():
        raise InconsistentSystem("Right-hand side is outside the column space of A")

    pivot_set = set(pivots)
    free = tuple(c for c in range(cols) if c not in pivot_set)
    if not free:
        solution = np.zeros((cols, b.cols), dtype=np.uint8)
        solution[pivots] = aug[: len(pivots), cols:]
        return FieldMatrix(solution)

    free_idx = list(free)
    solved: Dict[int, np.ndarray] = {}
    unresolved = set(free)
    for row, c in enumerate(pivots):
        if aug[row, free_idx].any():
            unresolved.add(c)
        else:
            solved[c] = aug[row, cols:].copy()

    return RankReport(
        rank=len(pivots),
        pivot_cols=tuple(pivots),
        free_cols=free,
        unresolved_cols=tuple(sorted(unresolved)),
        solved=solved,
    )
