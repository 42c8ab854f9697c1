import itertools

import numpy as np
import pytest

from svpvqa.encoding import (
    EncodingError,
    PartitionKind,
    build_hamiltonian,
    build_partition,
    decode,
    index_to_bits,
    ipsa_bits,
    parse_psa_k,
    positive_field,
    qubit_requirement,
    signed_field,
)
from svpvqa.lattice import LatticeBasis

B3 = LatticeBasis.from_rows([[1, 1, 1], [-1, 0, 2], [3, 5, 6]])


def int_signed(bits):
    w = len(bits)
    return 1 - 2 ** (w - 1) + sum(b << j for j, b in enumerate(bits))


def int_positive(bits):
    return 2 ** len(bits) - sum(b << j for j, b in enumerate(bits))


@pytest.mark.parametrize("width", range(1, 6))
def test_signed_image_exhaustive(width):
    f = signed_field(0, 0, width)
    seen = []
    for bits in itertools.product((0, 1), repeat=width):
        assert f.value(bits) == int_signed(bits)
        seen.append(f.value(bits))
    half = 2 ** (width - 1)
    assert sorted(seen) == list(range(-half + 1, half + 1))


@pytest.mark.parametrize("m", range(1, 5))
def test_positive_image_exhaustive(m):
    f = positive_field(0, 0, m)
    seen = []
    for bits in itertools.product((0, 1), repeat=m):
        assert f.value(bits) == int_positive(bits)
        seen.append(f.value(bits))
    assert sorted(seen) == list(range(1, 2**m + 1))


def test_lookup_matches_value():
    for f in (signed_field(0, 0, 3), positive_field(0, 0, 3)):
        for p, v in enumerate(f.lookup()):
            assert v == f.value(index_to_bits(p, 3))


def test_decode_examples():
    two = signed_field(0, 0, 2)
    assert [two.value(b) for b in [(0, 0), (1, 0), (0, 1), (1, 1)]] == [-1, 0, 1, 2]
    pos = positive_field(0, 0, 2)
    assert pos.value((0, 0)) == 4 and pos.value((1, 1)) == 1
    three = signed_field(0, 0, 3)
    assert three.value((0, 0, 0)) == -3 and three.value((1, 1, 1)) == 4


def test_partition_qubit_examples():
    assert build_partition(PartitionKind.TAILED_Y, 6, 6, 2).num_qubits == 10
    assert build_partition(PartitionKind.PSA_X, 4, 4, 3).num_qubits == 11
    for n in (2, 4, 6):
        y1 = build_partition(PartitionKind.TAILED_Y, 1, n, 2)
        assert y1.num_qubits == 0
        assert decode(y1, ()) == (1,) + (0,) * (n - 1)
    assert build_partition("full_cube", 1, 4, 2).num_qubits == 8


def test_partition_argument_errors():
    with pytest.raises(EncodingError):
        build_partition(PartitionKind.TAILED_Y, 0, 3, 1)
    with pytest.raises(EncodingError):
        build_partition(PartitionKind.TAILED_Y, 4, 3, 1)
    with pytest.raises(EncodingError):
        build_partition(PartitionKind.PSA_X, 1, 3, 0)
    with pytest.raises(EncodingError):
        decode(build_partition(PartitionKind.TAILED_Y, 3, 3, 1), (0,))


@pytest.mark.parametrize("n,bits", [(2, 1), (3, 1), (4, 2), (5, 2), (6, 2)])
def test_tailed_decode_structure(n, bits):
    for i in range(1, n + 1):
        spec = build_partition(PartitionKind.TAILED_Y, i, n, bits)
        table = spec.coefficient_table
        assert table.shape == (2**spec.num_qubits, n)
        assert np.all(table[:, i - 1] == 1)
        assert np.all(table[:, i:] == 0)
        for z in range(0, 2**spec.num_qubits, max(1, 2**spec.num_qubits // 16)):
            assert tuple(table[z]) == decode(spec, index_to_bits(z, spec.num_qubits))


@pytest.mark.parametrize("n,k", [(n, k) for n in (2, 3, 4) for k in (1, 2, 3)])
def test_psa_partitions_disjoint_and_nonzero(n, k):
    sets = []
    for i in range(1, n + 1):
        spec = build_partition(PartitionKind.PSA_X, i, n, k)
        rows = {tuple(r) for r in spec.coefficient_table.tolist()}
        assert len(rows) == 2**spec.num_qubits  # encoding is injective
        assert (0,) * n not in rows
        for r in rows:
            assert r[i - 1] >= 1 and not any(r[i:])
        sets.append(rows)
    for a, b in itertools.combinations(sets, 2):
        assert not (a & b)


def test_hamiltonian_identity_table():
    spec = build_partition(PartitionKind.TAILED_Y, 2, 2, 2)
    model = build_hamiltonian(LatticeBasis.identity(2), spec)
    # y1 = -1, 0, 1, 2 for z = 00, 10, 01, 11 (qubit 0 first)
    assert model.energy_table.tolist() == [2.0, 1.0, 2.0, 5.0]
    assert np.allclose(model.ising_table(), model.energy_table, atol=1e-12)


def test_hamiltonian_full_cube_zero_vector():
    spec = build_partition(PartitionKind.FULL_CUBE, 2, 2, 2)
    model = build_hamiltonian(LatticeBasis.identity(2), spec)
    z = int(np.argmin(model.energy_table))
    assert model.energy_table[z] == 0
    assert not spec.coefficient_table[z].any()


def test_hamiltonian_b3_tailed_matches_16_point_search():
    spec = build_partition(PartitionKind.TAILED_Y, 3, 3, 2)
    model = build_hamiltonian(B3, spec)
    ref = min(
        sum(x * x for x in B3.combine((y1, y2, 1)))
        for y1 in (-1, 0, 1, 2)
        for y2 in (-1, 0, 1, 2)
    )
    assert model.energy_table.min() == ref


@pytest.mark.parametrize("seed", range(25))
def test_ising_table_cross_check(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    rows = rng.integers(-150, 151, size=(n, n))
    while round(np.linalg.det(rows)) == 0:
        rows = rng.integers(-150, 151, size=(n, n))
    basis = LatticeBasis.from_rows(rows.tolist())
    kind = [PartitionKind.TAILED_Y, PartitionKind.PSA_X, PartitionKind.FULL_CUBE][seed % 3]
    spec = build_partition(kind, n, n, 1 + seed % 2)
    model = build_hamiltonian(basis, spec)
    tab = model.energy_table
    assert np.all(np.abs(tab - model.ising_table()) <= 1e-9 * np.maximum(1.0, tab))
    rows_py = basis.rows
    for z, coeffs in enumerate(spec.coefficient_table.tolist()):
        v = [sum(c * r[j] for c, r in zip(coeffs, rows_py)) for j in range(n)]
        assert tab[z] == sum(x * x for x in v)
    for z in (0, 2**spec.num_qubits - 1):
        assert model.energy(z) == pytest.approx(tab[z], rel=1e-12)


def test_hamiltonian_qubit_guard():
    spec = build_partition(PartitionKind.PSA_X, 6, 6, 4)
    assert spec.num_qubits == 23
    with pytest.raises(EncodingError):
        build_hamiltonian(LatticeBasis.identity(6), spec)


def test_qubit_requirements():
    assert [qubit_requirement("ipsa", n) for n in (4, 5, 6)] == [6, 8, 10]
    assert [qubit_requirement("iqoap", n) for n in (4, 5, 6)] == [8, 10, 12]
    assert [qubit_requirement("3-psa", n) for n in (4, 5, 6)] == [11, 14, 17]
    assert qubit_requirement("4-psa", 5) == 19
    assert qubit_requirement("psa", 4, k=5) == 19
    assert qubit_requirement("psa-lll", 6) == 42
    assert qubit_requirement("ipsa", 8) == 21
    with pytest.raises(ValueError):
        qubit_requirement("grover", 4)


def test_partition_sizes_match_requirements():
    for n in (4, 5, 6):
        spec = build_partition(PartitionKind.TAILED_Y, n, n, ipsa_bits(n))
        assert spec.num_qubits == qubit_requirement("ipsa", n)
        for k in (3, 4, 5):
            assert build_partition(PartitionKind.PSA_X, n, n, k).num_qubits == qubit_requirement(f"{k}-psa", n)


def test_parse_psa_k():
    assert parse_psa_k("3-psa") == 3 and parse_psa_k("12-PSA") == 12
    assert parse_psa_k("ipsa") is None and parse_psa_k("x-psa") is None
