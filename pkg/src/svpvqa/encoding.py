"""Search-space partitions, qubit encodings and diagonal Hamiltonians.

Spin convention: computational bit 0 is spin +1, bit 1 is spin -1. Qubits are
laid out coefficient-major, bit-minor, and qubit ``j`` is bit ``j`` of a basis
state index (little endian).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .lattice import LatticeBasis, LatticeError

MAX_QUBITS = 22


class PartitionKind(str, enum.Enum):
    PSA_X = "psa_x"
    TAILED_Y = "tailed_y"
    FULL_CUBE = "full_cube"


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class CoefficientField:
    """One encoded coefficient: ``value = const + sum_j weights[j] * s_j``."""

    position: int  # 0-based coefficient index
    offset: int  # first qubit
    const: Fraction
    weights: tuple[Fraction, ...]

    @property
    def width(self) -> int:
        return len(self.weights)

    def value(self, bits: Sequence[int]) -> int:
        v = self.const + sum((w * (1 - 2 * int(b)) for w, b in zip(self.weights, bits)), Fraction(0))
        assert v.denominator == 1
        return int(v)

    def lookup(self) -> np.ndarray:
        """Integer value for every bit pattern of this field (pattern index = bits LE)."""
        return np.array(
            [self.value([(p >> j) & 1 for j in range(self.width)]) for p in range(1 << self.width)],
            dtype=np.int64,
        )


def signed_field(position: int, offset: int, width: int) -> CoefficientField:
    """``1/2 - sum_{j<width} 2^(j-1) s_j``, image ``(-2^(width-1), 2^(width-1)]``."""
    return CoefficientField(
        position, offset, Fraction(1, 2), tuple(-Fraction(2**j, 2) for j in range(width))
    )


def positive_field(position: int, offset: int, width: int) -> CoefficientField:
    """``sum_{j<width} 2^(j-1) (s_j + 1) + 1``, image ``[1, 2^width]``."""
    weights = tuple(Fraction(2**j, 2) for j in range(width))
    return CoefficientField(position, offset, sum(weights, Fraction(0)) + 1, weights)


@dataclass(frozen=True)
class PartitionSpec:
    """A coefficient region plus its qubit layout.

    ``index`` is 1-based as in the algorithm descriptions. For PSA_X the free
    coefficients use ``bits_per_free_coeff`` qubits and coefficient ``index``
    (constrained to be >= 1) uses ``bits_for_positive_coeff``.
    """

    kind: PartitionKind
    index: int
    dim: int
    bits_per_free_coeff: int
    bits_for_positive_coeff: int = 0

    @cached_property
    def fields(self) -> tuple[CoefficientField, ...]:
        w = self.bits_per_free_coeff
        if self.kind is PartitionKind.FULL_CUBE:
            return tuple(signed_field(r, r * w, w) for r in range(self.dim))
        free = [signed_field(r, r * w, w) for r in range(self.index - 1)]
        if self.kind is PartitionKind.PSA_X:
            free.append(positive_field(self.index - 1, (self.index - 1) * w, self.bits_for_positive_coeff))
        return tuple(free)

    @property
    def num_qubits(self) -> int:
        return sum(f.width for f in self.fields)

    @property
    def fixed(self) -> dict[int, int]:
        """Coefficients that carry no qubits (0-based position -> value)."""
        out = {}
        if self.kind is not PartitionKind.FULL_CUBE:
            out = {r: 0 for r in range(self.index, self.dim)}
            if self.kind is PartitionKind.TAILED_Y:
                out[self.index - 1] = 1
        return out

    def decode(self, z: Sequence[int]) -> tuple[int, ...]:
        return decode(self, z)

    @cached_property
    def coefficient_table(self) -> np.ndarray:
        """Decoded coefficient vectors for all ``2**num_qubits`` basis states."""
        q = self.num_qubits
        idx = np.arange(1 << q, dtype=np.int64)
        out = np.zeros((1 << q, self.dim), dtype=np.int64)
        for pos, val in self.fixed.items():
            out[:, pos] = val
        for f in self.fields:
            if f.width:
                out[:, f.position] = f.lookup()[(idx >> f.offset) & ((1 << f.width) - 1)]
            else:
                out[:, f.position] = int(f.const)
        return out


def build_partition(kind: PartitionKind | str, i: int, n: int, bits: int) -> PartitionSpec:
    """Partition ``i`` (1-based) of an ``n``-dimensional coefficient space.

    ``bits`` is the width of each free coefficient. For PSA_X (k-PSA) the
    constrained coefficient gets ``bits - 1`` qubits; FULL_CUBE ignores ``i``.
    """
    kind = PartitionKind(kind)
    if n < 1:
        raise EncodingError("dimension must be positive")
    if bits < 1:
        raise EncodingError("bits per coefficient must be positive")
    if kind is PartitionKind.FULL_CUBE:
        return PartitionSpec(kind, n, n, bits)
    if not 1 <= i <= n:
        raise EncodingError(f"partition index {i} outside [1, {n}]")
    if kind is PartitionKind.PSA_X:
        return PartitionSpec(kind, i, n, bits, bits - 1)
    return PartitionSpec(kind, i, n, bits)


def decode(spec: PartitionSpec, z: Sequence[int]) -> tuple[int, ...]:
    """Coefficient vector for bitstring ``z`` (``z[j]`` is the bit of qubit j)."""
    if len(z) != spec.num_qubits:
        raise EncodingError(f"expected {spec.num_qubits} bits, got {len(z)}")
    out = [0] * spec.dim
    for pos, val in spec.fixed.items():
        out[pos] = val
    for f in spec.fields:
        out[f.position] = f.value(z[f.offset : f.offset + f.width])
    return tuple(out)


def index_to_bits(index: int, q: int) -> tuple[int, ...]:
    return tuple((index >> j) & 1 for j in range(q))


@dataclass(frozen=True, eq=False)
class IsingModel:
    """``E(s) = constant + sum h_j s_j + sum_{a<b} J_ab s_a s_b`` plus its dense table."""

    num_qubits: int
    constant: float
    linear: np.ndarray
    quadratic: np.ndarray
    energy_table: np.ndarray

    def energy(self, z: int) -> float:
        s = 1 - 2 * ((z >> np.arange(self.num_qubits)) & 1)
        return float(self.constant + self.linear @ s + s @ self.quadratic @ s)

    def ising_table(self) -> np.ndarray:
        """Evaluate the spin polynomial on every basis state (independent of ``energy_table``)."""
        q = self.num_qubits
        idx = np.arange(1 << q, dtype=np.int64)
        spins = (1 - 2 * ((idx[:, None] >> np.arange(q)) & 1)).astype(np.float64)
        out = np.full(1 << q, self.constant, dtype=np.float64)
        out += spins @ self.linear
        for a, b in zip(*np.nonzero(self.quadratic)):
            out += self.quadratic[a, b] * spins[:, a] * spins[:, b]
        return out

    def couplings(self) -> list[tuple[int, int, float]]:
        a, b = np.nonzero(self.quadratic)
        return [(int(x), int(y), float(self.quadratic[x, y])) for x, y in zip(a, b)]

    def fields(self) -> list[tuple[int, float]]:
        return [(int(a), float(self.linear[a])) for a in np.nonzero(self.linear)[0]]


def build_hamiltonian(basis: LatticeBasis, spec: PartitionSpec, max_qubits: int = MAX_QUBITS) -> IsingModel:
    """Squared-norm Hamiltonian of ``spec`` over ``basis``.

    The spin coefficients come from exact rational expansion of the affine
    coefficient maps; the energy table is computed separately from decoded
    integer vectors, so the two representations check each other.
    """
    if spec.dim != basis.dim:
        raise LatticeError("partition and basis dimensions differ")
    q = spec.num_qubits
    if q > max_qubits:
        raise EncodingError(f"{q} qubits exceeds the simulation guard of {max_qubits}")
    rows = basis.rows
    n = basis.dim

    # v = c0 + sum_q u_q s_q with exact rational vectors
    c0 = [Fraction(0)] * n
    for pos, val in spec.fixed.items():
        if val:
            c0 = [a + val * b for a, b in zip(c0, rows[pos])]
    us: list[list[Fraction]] = []
    for f in spec.fields:
        c0 = [a + f.const * b for a, b in zip(c0, rows[f.position])]
        for w in f.weights:
            us.append([w * b for b in rows[f.position]])

    def dot(u, v):
        return sum((a * b for a, b in zip(u, v)), Fraction(0))

    constant = dot(c0, c0) + sum((dot(u, u) for u in us), Fraction(0))
    linear = np.array([float(2 * dot(c0, u)) for u in us], dtype=np.float64)
    quad = np.zeros((q, q), dtype=np.float64)
    for a in range(q):
        for b in range(a + 1, q):
            quad[a, b] = float(2 * dot(us[a], us[b]))

    vecs = spec.coefficient_table @ basis.as_array()
    table = np.einsum("ij,ij->i", vecs, vecs).astype(np.float64)
    return IsingModel(q, float(constant), linear, quad, table)


def floor_log2(n: int) -> int:
    return int(math.floor(math.log2(n)))


def ipsa_bits(n: int) -> int:
    """Qubits per free coefficient in the tailed partitions: floor(log2 n)."""
    return max(1, floor_log2(n))


def parse_psa_k(algorithm: str) -> int | None:
    """``"3-psa"`` -> 3; None when the tag is not a k-PSA tag."""
    head, sep, tail = algorithm.lower().partition("-")
    if sep and tail == "psa" and head.isdigit():
        return int(head)
    return None


def qubit_requirement(algorithm: str, n: int, k: int | None = None) -> int:
    """Largest-partition qubit count for ``algorithm`` at dimension ``n``.

    Tags: ``ipsa``/``ipsa-qaoa``, ``iqoap``, ``k-psa`` (``psa`` with ``k=``),
    and ``psa-lll`` for the n(n+1) LLL-bound reference curve.
    """
    if n < 2:
        raise ValueError("dimension must be at least 2")
    tag = algorithm.lower()
    if tag in ("ipsa", "ipsa-qaoa", "ipsa-hea"):
        return (n - 1) * floor_log2(n)
    if tag == "iqoap":
        return 2 * n
    if tag == "psa-lll":
        return n * (n + 1)
    kk = parse_psa_k(tag) if k is None else (k if tag == "psa" else None)
    if kk is not None:
        return (n - 1) * kk + (kk - 1)
    raise ValueError(f"unknown algorithm tag {algorithm!r}")
