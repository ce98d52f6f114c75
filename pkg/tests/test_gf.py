"""Tests for GF(2^k) arithmetic and linear algebra."""
import pickle

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncf.errors import DimensionMismatch, FieldValueError, InconsistentSystem, InvalidField, ZeroInverse
from ncf.gf import (
    DEFAULT_MODULI,
    FieldMatrix,
    FieldSpec,
    RankReport,
    field_for,
    is_irreducible,
    mat_mul,
    mat_solve,
    shift_and_reduce_mul,
)

nonzero = st.integers(min_value=1, max_value=127)


def vandermonde(gf, size):
    return FieldMatrix(np.array(
        [[gf.pow(t + 1, k) for t in range(size)] for k in range(size)], dtype=np.uint8
    ).reshape(size, size))


def test_add_identity_and_characteristic(gf):
    for x in range(gf.q):
        assert gf.add(0, x) == x
        assert gf.add(x, x) == 0
        assert gf.sub(x, 0) == x
    assert gf.add(0x53, 0x31) == 0x62


def test_mul_identity_and_annihilator(gf):
    for x in range(gf.q):
        assert gf.mul(1, x) == x
        assert gf.mul(0, x) == 0


def test_mul_wraps_through_modulus(gf):
    # x * x^6 = x^7 = x + 1
    assert gf.mul(0x02, 0x40) == 0x03
    assert field_for(8).mul(0x80, 0x02) == 0x1D


def test_inverse_of_x(gf):
    assert gf.inv(0x02) == 0x41
    assert gf.inv(1) == 1


def test_every_inverse(gf):
    for a in range(1, gf.q):
        assert gf.mul(a, gf.inv(a)) == 1


def test_zero_has_no_inverse(gf):
    with pytest.raises(ZeroInverse):
        gf.inv(0)
    with pytest.raises(ZeroDivisionError):
        gf.div(5, 0)


def test_out_of_range_elements_rejected(gf):
    with pytest.raises(FieldValueError):
        gf.mul(128, 1)
    with pytest.raises(FieldValueError):
        gf.add(-1, 1)


def test_mul_matches_shift_and_reduce_exhaustively(gf):
    for a in range(gf.q):
        for b in range(gf.q):
            expected = shift_and_reduce_mul(a, b, gf.k, gf.modulus)
            assert gf.mul(a, b) == expected
            assert gf.mul_table[a, b] == expected


@pytest.mark.parametrize("k", sorted(DEFAULT_MODULI))
def test_every_default_field_builds(k):
    gf = field_for(k)
    assert gf.q == 1 << k
    powers = {gf.pow(gf.generator, e) for e in range(gf.q - 1)}
    assert powers == set(range(1, gf.q))
    assert all(gf.mul_table[a, gf.inv_table[a]] == 1 for a in range(1, gf.q))


def test_field_axioms_on_random_triples(gf, rng):
    a, b, c = rng.integers(0, gf.q, size=(3, 20_000)).astype(np.uint8)
    mul = gf.mul_table
    assert np.array_equal(mul[a, b], mul[b, a])
    assert np.array_equal(mul[mul[a, b], c], mul[a, mul[b, c]])
    assert np.array_equal(mul[a, b ^ c], mul[a, b] ^ mul[a, c])
    assert np.array_equal((a ^ b) ^ c, a ^ (b ^ c))


@given(nonzero, nonzero)
def test_division_undoes_multiplication(a, b):
    gf = field_for(7)
    assert gf.mul(gf.div(a, b), b) == a


@given(nonzero, st.integers(min_value=-300, max_value=300))
def test_pow_agrees_with_repeated_mul(a, e):
    gf = field_for(7)
    expected = 1
    base = a if e >= 0 else gf.inv(a)
    for _ in range(abs(e)):
        expected = gf.mul(expected, base)
    assert gf.pow(a, e) == expected


def test_pow_edge_cases(gf):
    assert gf.pow(0, 0) == 1
    assert gf.pow(0, 5) == 0
    assert gf.pow(0x02, 7) == 0x03
    with pytest.raises(ZeroInverse):
        gf.pow(0, -1)


@pytest.mark.parametrize("k, poly", [
    (1, None),
    (9, None),
    (7, 0x81),    # x^7 + 1 has the root 1
    (8, 0x100),   # x^8 alone
    (7, 0x200),   # degree above k
])
def test_invalid_fields(k, poly):
    with pytest.raises(InvalidField):
        FieldSpec(k, poly)


def test_reduction_poly_with_or_without_leading_term():
    assert FieldSpec(7, 0x03) == FieldSpec(7, 0x83) == field_for(7)
    assert FieldSpec(7, 0x03).reduction_poly == 0x03


def test_irreducibility():
    assert is_irreducible(0x83, 7)
    assert is_irreducible(0x11B, 8)
    assert not is_irreducible(0x81, 7)
    assert not is_irreducible(0x15, 4)   # x^4 + x^2 + 1 = (x^2 + x + 1)^2


def test_field_survives_pickling(gf):
    assert pickle.loads(pickle.dumps(gf)) == gf


def test_rand_nonzero_never_draws_zero(gf, rng):
    draws = gf.rand_nonzero(rng, size=100_000)
    assert draws.dtype == np.uint8
    assert draws.min() >= 1 and draws.max() <= 127
    counts = np.bincount(draws, minlength=gf.q)[1:]
    # 100000 / 127 = 787.4 per value, standard deviation about 28
    assert counts.min() > 600 and counts.max() < 980


def test_rand_nonzero_is_deterministic(gf):
    first = gf.rand_nonzero(np.random.default_rng(5), size=50)
    second = gf.rand_nonzero(np.random.default_rng(5), size=50)
    assert np.array_equal(first, second)
    assert 1 <= gf.rand_nonzero(np.random.default_rng(5)) <= 127


def test_scale(gf):
    vector = np.arange(10, dtype=np.uint8)
    assert np.array_equal(gf.scale(1, vector), vector)
    assert not gf.scale(0, vector).any()
    assert gf.scale(3, vector).tolist() == [gf.mul(3, int(v)) for v in vector]


def test_matmul_matches_scalar_loop(gf, rng):
    a = gf.random_symbols(rng, (4, 6))
    b = gf.random_symbols(rng, (6, 3))
    expected = np.zeros((4, 3), dtype=np.uint8)
    for i in range(4):
        for j in range(3):
            acc = 0
            for t in range(6):
                acc ^= gf.mul(int(a[i, t]), int(b[t, j]))
            expected[i, j] = acc
    assert np.array_equal(gf.matmul(a, b), expected)
    with pytest.raises(DimensionMismatch):
        gf.matmul(a, a)


def test_solve_identity_system(gf):
    b = FieldMatrix.from_rows([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
    assert mat_solve(gf, FieldMatrix.identity(3), b) == b


def test_solve_invertible_system(gf, rng):
    a = vandermonde(gf, 6)
    x = FieldMatrix.random(gf, rng, 6, 8)
    assert mat_solve(gf, a, mat_mul(gf, a, x)) == x


def test_solve_overdetermined_consistent_system(gf):
    a = FieldMatrix.from_rows([[1, 0], [0, 1], [1, 1]])
    b = FieldMatrix.from_rows([[5], [7], [5 ^ 7]])
    assert mat_solve(gf, a, b) == FieldMatrix.from_rows([[5], [7]])


def test_solve_equal_rows_leaves_one_free_column(gf):
    a = FieldMatrix.from_rows([[3, 4], [3, 4]])
    report = mat_solve(gf, a, FieldMatrix.from_rows([[9], [9]]))
    assert isinstance(report, RankReport)
    assert report.rank == 1
    assert report.pivot_cols == (0,)
    assert report.free_cols == (1,)
    assert report.unresolved_cols == (0, 1)
    assert report.solved == {}


def test_solve_reports_pivots_independent_of_free_columns(gf):
    a = FieldMatrix.from_rows([[1, 0, 0], [0, 1, 1]])
    report = mat_solve(gf, a, FieldMatrix.from_rows([[11, 12], [13, 14]]))
    assert isinstance(report, RankReport)
    assert report.pivot_cols == (0, 1)
    assert report.free_cols == (2,)
    assert report.unresolved_cols == (1, 2)
    assert list(report.solved) == [0]
    assert report.solved[0].tolist() == [11, 12]


def test_solve_inconsistent_system(gf):
    with pytest.raises(InconsistentSystem):
        mat_solve(gf, FieldMatrix.from_rows([[1], [1]]), FieldMatrix.from_rows([[1], [2]]))


def test_solve_dimension_mismatch(gf):
    with pytest.raises(DimensionMismatch):
        mat_solve(gf, FieldMatrix.identity(2), FieldMatrix.from_rows([[1]]))


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2**32 - 1))
def test_solve_recovers_random_full_rank_systems(size, seed):
    gf = field_for(7)
    rng = np.random.default_rng(seed)
    a = FieldMatrix.random(gf, rng, size + 2, size)
    x = FieldMatrix.random(gf, rng, size, 4)
    solution = mat_solve(gf, a, mat_mul(gf, a, x))
    if isinstance(solution, FieldMatrix):
        assert solution == x
    else:
        assert solution.rank < size
