import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from svpvqa.lattice import (
    LatticeBasis,
    LatticeError,
    LatticeInvariantError,
    brute_force_shortest,
    coordinates_of,
    determinant,
    gram_schmidt,
    is_lll_reduced,
    lattice_equal,
    lll_reduce,
    random_unimodular,
    replace_preserving_lattice,
    shortest_vector_oracle,
    sort_basis,
)

from refs import cube_is_exhaustive, cube_min

B3 = [[1, 1, 1], [-1, 0, 2], [3, 5, 6]]


def random_lattice(rng, dim, bound=10):
    while True:
        m = rng.integers(-bound, bound + 1, size=(dim, dim)).tolist()
        if determinant(m) != 0:
            return LatticeBasis.from_rows(m)


# frozen from cube_min(B3, 6)
B3_LAMBDA1_SQ = 1


def test_frozen_b3_value():
    assert cube_min(B3, 6) == B3_LAMBDA1_SQ


def test_basis_rejects_singular_and_ragged():
    with pytest.raises(LatticeError):
        LatticeBasis.from_rows([[1, 2], [2, 4]])
    with pytest.raises(LatticeError):
        LatticeBasis.from_rows([[1, 2, 3], [0, 1, 0]])


def test_determinant_exact_big_entries():
    m = [[150, -149, 7], [3, 140, -150], [-150, 2, 149]]
    ref = round(np.linalg.det(np.array(m, dtype=float)))
    assert determinant(m) == ref
    assert isinstance(determinant(m), int)


def test_lll_identity_unchanged():
    i4 = LatticeBasis.identity(4)
    assert lll_reduce(i4, Fraction(3, 4)).rows == i4.rows


def test_lll_first_row_reaches_lambda1_on_b3():
    b = LatticeBasis.from_rows(B3)
    red = lll_reduce(b)
    assert lattice_equal(red, b)
    assert red.norms_sq[0] == shortest_vector_oracle(b).norm_sq == B3_LAMBDA1_SQ


@pytest.mark.parametrize("seed", range(10))
def test_lll_properties_on_scrambled(seed):
    rng = np.random.default_rng(seed)
    b = random_lattice(rng, 5)
    u = random_unimodular(5, 20, rng)
    scrambled = u.apply(b)
    for delta in (Fraction(3, 4), Fraction(99, 100)):
        red = lll_reduce(scrambled, delta)
        assert lattice_equal(red, b)
        assert is_lll_reduced(red, delta)
        mu, bsq = gram_schmidt(red.rows)
        for i in range(5):
            for j in range(i):
                assert abs(mu[i][j]) <= Fraction(1, 2)
            if i:
                assert bsq[i] >= (delta - mu[i][i - 1] ** 2) * bsq[i - 1]
        assert shortest_vector_oracle(b).norm_sq <= red.min_norm_sq()


def test_lll_rejects_bad_delta():
    with pytest.raises(ValueError):
        lll_reduce(LatticeBasis.identity(2), Fraction(1, 4))
    with pytest.raises(ValueError):
        lll_reduce(LatticeBasis.identity(2), 1)


def test_random_unimodular_examples():
    assert random_unimodular(3, 0, np.random.default_rng(0)).matrix == LatticeBasis.identity(3).rows
    u = random_unimodular(4, 20, np.random.default_rng(7))
    assert abs(determinant(u.matrix)) == 1
    for seed in range(20):
        u = random_unimodular(6, 20, np.random.default_rng(seed), entry_bound=150)
        assert abs(determinant(u.matrix)) == 1
        assert max(abs(x) for row in u.matrix for x in row) <= 150


def test_random_unimodular_deterministic():
    a = random_unimodular(5, 30, np.random.default_rng(3))
    b = random_unimodular(5, 30, np.random.default_rng(3))
    assert a == b


def test_coordinates_examples():
    assert coordinates_of(LatticeBasis.identity(3), (2, -1, 0)) == (2, -1, 0)
    assert coordinates_of(LatticeBasis.from_rows([[2, 0], [0, 2]]), (1, 0)) is None
    assert coordinates_of(LatticeBasis.from_rows([[1, 1], [0, 1]]), (1, 2)) == (1, 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.integers(-5, 5), min_size=4, max_size=4))
def test_coordinates_roundtrip(seed, coeffs):
    b = random_lattice(np.random.default_rng(seed), 4)
    assert coordinates_of(b, b.combine(coeffs)) == tuple(coeffs)


def test_replace_examples():
    i2 = LatticeBasis.identity(2)
    assert replace_preserving_lattice(i2, 1, (1, 1)).rows == ((1, 0), (1, 1))
    with pytest.raises(LatticeInvariantError):
        replace_preserving_lattice(i2, 0, (2, 0))
    b = LatticeBasis.from_rows(B3)
    v = b.combine((1, -1, 0))
    nb = replace_preserving_lattice(b, 1, v)
    assert abs(nb.det) == abs(b.det)
    assert all(coordinates_of(nb, r) is not None for r in b.rows)
    assert lattice_equal(nb, b)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 3), st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_replace_preserves_lattice(seed, k, coeffs):
    b = random_lattice(np.random.default_rng(seed), 4)
    coeffs[k] = 1 if coeffs[k] >= 0 else -1
    nb = replace_preserving_lattice(b, k, b.combine(coeffs))
    assert lattice_equal(nb, b) and lattice_equal(b, nb)


def test_lattice_equal_examples():
    i2 = LatticeBasis.identity(2)
    assert lattice_equal(LatticeBasis.identity(3), LatticeBasis.identity(3))
    assert lattice_equal(i2, LatticeBasis.from_rows([[1, 0], [1, 1]]))
    assert not lattice_equal(i2, LatticeBasis.from_rows([[2, 0], [0, 1]]))
    assert not lattice_equal(LatticeBasis.from_rows([[2, 0], [0, 1]]), i2)


@pytest.mark.parametrize("seed", range(8))
def test_lattice_equal_under_unimodular(seed):
    rng = np.random.default_rng(100 + seed)
    b = random_lattice(rng, 4)
    ub = random_unimodular(4, 25, rng).apply(b)
    assert lattice_equal(b, ub) and lattice_equal(ub, b)
    # doubling a row gives an index-2 sublattice
    sub = LatticeBasis.from_rows([[2 * x for x in b.rows[0]]] + [list(r) for r in b.rows[1:]])
    assert not lattice_equal(b, sub) and not lattice_equal(sub, b)


def test_oracle_examples():
    for n in (1, 3, 6):
        sv = shortest_vector_oracle(LatticeBasis.identity(n))
        assert sv.norm_sq == 1
    b3 = LatticeBasis.from_rows(B3)
    assert shortest_vector_oracle(b3).norm_sq == cube_min(B3, 6)
    assert shortest_vector_oracle(LatticeBasis.from_rows([[2, 0], [1, 2]])).norm_sq == 4


def test_oracle_vector_consistent():
    b = LatticeBasis.from_rows(B3)
    sv = shortest_vector_oracle(b)
    assert b.combine(sv.coords) == sv.embedding
    assert sum(x * x for x in sv.embedding) == sv.norm_sq
    first = next(x for x in sv.embedding if x)
    assert first > 0


def test_oracle_matches_cube_brute_force():
    """50 seeded random lattices, dims 2..4, against the [-6,6]^dim cube.

    The cube is searched in the LLL basis of each lattice, where it is
    certified exhaustive below its own minimum.
    """
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    for k in range(50):
        dim = 2 + k % 3
        raw = random_lattice(rng, dim)
        red = lll_reduce(raw)
        ref = brute_force_shortest(red, 6)
        assert cube_is_exhaustive(red.rows, ref, 6)
        assert shortest_vector_oracle(raw).norm_sq == ref
    assert time.perf_counter() - t0 < 60


def test_raw_basis_cube_can_miss_the_minimum():
    # coefficients of the shortest vector in this basis leave the [-6,6] cube
    b = LatticeBasis.from_rows([[3, -9, -10, -2], [0, 5, -9, 2], [3, 1, -10, 5], [-8, 7, 4, -10]])
    sv = shortest_vector_oracle(b)
    assert sv.norm_sq == 9 and max(abs(c) for c in sv.coords) > 6
    assert brute_force_shortest(b, 6) > sv.norm_sq
    assert brute_force_shortest(lll_reduce(b), 6) == 9


@pytest.mark.parametrize("seed", range(5))
def test_brute_force_matches_pure_python_reference(seed):
    b = random_lattice(np.random.default_rng(seed), 3)
    assert brute_force_shortest(b, 4) == cube_min(b.rows, 4)


def test_oracle_dimension_guard():
    with pytest.raises(LatticeError):
        shortest_vector_oracle(LatticeBasis.identity(9))


def test_sort_basis_examples():
    b = LatticeBasis.from_rows([[3, 0, 0], [0, 1, 0], [0, 0, 2]])
    sb, perm = sort_basis(b)
    assert perm == (1, 2, 0)
    assert sb.norms_sq == (1, 4, 9)
    sb2, perm2 = sort_basis(sb)
    assert perm2 == (0, 1, 2) and sb2 == sb
    tie, _ = sort_basis(LatticeBasis.from_rows([[1, 0], [0, 1]]))
    assert tie.rows[0] == (0, 1)
