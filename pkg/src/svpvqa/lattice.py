"""Exact integer lattice arithmetic.

Everything here works on Python ints and :class:`fractions.Fraction`; no
floating point is used, so norms, determinants and Gram-Schmidt data are
exact for any entry size.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Row = tuple[int, ...]

DEFAULT_DELTA = Fraction(3, 4)
ORACLE_MAX_DIM = 8


class LatticeError(ValueError):
    """Invalid lattice input (singular basis, shape mismatch, ...)."""


class LatticeInvariantError(RuntimeError):
    """A lattice-preservation check failed. Always indicates a bug."""


def _dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def determinant(rows: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free determinant of a square integer matrix."""
    n = len(rows)
    if n == 0:
        return 1
    m = [list(map(int, r)) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]) // prev
        prev = pivot
    return sign * m[n - 1][n - 1]


@dataclass(frozen=True)
class LatticeBasis:
    """Square nonsingular integer basis; row ``r`` is basis vector ``b_r``."""

    rows: tuple[Row, ...]
    norms_sq: tuple[int, ...] = field(init=False, repr=False, compare=False)
    det: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise LatticeError(f"basis must be a non-empty square matrix, got {n} rows")
        d = determinant(rows)
        if d == 0:
            raise LatticeError("basis is singular")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "norms_sq", tuple(_dot(r, r) for r in rows))
        object.__setattr__(self, "det", d)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "LatticeBasis":
        return cls(tuple(tuple(int(x) for x in r) for r in rows))

    @classmethod
    def identity(cls, n: int) -> "LatticeBasis":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @property
    def dim(self) -> int:
        return len(self.rows)

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64)

    def combine(self, coords: Sequence[int]) -> Row:
        """Return ``sum_j coords[j] * b_j``."""
        if len(coords) != self.dim:
            raise LatticeError("coefficient vector has wrong length")
        out = [0] * self.dim
        for c, row in zip(coords, self.rows):
            c = int(c)
            if c:
                for k, x in enumerate(row):
                    out[k] += c * x
        return tuple(out)

    def vector(self, coords: Sequence[int]) -> "LatticeVector":
        coords = tuple(int(c) for c in coords)
        emb = self.combine(coords)
        return LatticeVector(coords, emb, _dot(emb, emb))

    def min_norm_sq(self) -> int:
        return min(self.norms_sq)

    def shortest_row(self) -> Row:
        return self.rows[self.norms_sq.index(self.min_norm_sq())]


@dataclass(frozen=True)
class LatticeVector:
    coords: Row
    embedding: Row
    norm_sq: int

    def negated(self) -> "LatticeVector":
        return LatticeVector(
            tuple(-c for c in self.coords), tuple(-x for x in self.embedding), self.norm_sq
        )


@dataclass(frozen=True)
class UnimodularTransform:
    matrix: tuple[Row, ...]
    op_count: int

    def apply(self, basis: LatticeBasis) -> LatticeBasis:
        """Return the basis with rows ``U @ B``."""
        return LatticeBasis.from_rows(basis.combine(u) for u in self.matrix)


# ---------------------------------------------------------------- Gram-Schmidt

def gram_schmidt(rows: Sequence[Sequence[int]]) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Exact Gram-Schmidt data ``(mu, bstar_sq)`` computed from scratch."""
    n = len(rows)
    bstar: list[list[Fraction]] = []
    mu = [[Fraction(0)] * n for _ in range(n)]
    bsq: list[Fraction] = []
    for i in range(n):
        v = [Fraction(x) for x in rows[i]]
        for j in range(i):
            m = sum((Fraction(a) * b for a, b in zip(rows[i], bstar[j])), Fraction(0)) / bsq[j]
            mu[i][j] = m
            v = [a - m * b for a, b in zip(v, bstar[j])]
        mu[i][i] = Fraction(1)
        bstar.append(v)
        bsq.append(sum((a * a for a in v), Fraction(0)))
    return mu, bsq


def is_lll_reduced(basis: LatticeBasis, delta: Fraction = DEFAULT_DELTA) -> bool:
    mu, bsq = gram_schmidt(basis.rows)
    n = basis.dim
    for i in range(n):
        for j in range(i):
            if abs(mu[i][j]) > Fraction(1, 2):
                return False
    for k in range(1, n):
        if bsq[k] < (delta - mu[k][k - 1] ** 2) * bsq[k - 1]:
            return False
    return True


def lll_reduce(basis: LatticeBasis, delta: Fraction | str | float = DEFAULT_DELTA) -> LatticeBasis:
    """LLL-reduce ``basis`` with exact rational Gram-Schmidt updates.

    ``delta`` must lie in (1/4, 1); floats are converted exactly, so prefer a
    Fraction or a string like ``"3/4"``.
    """
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta < 1:
        raise LatticeError(f"delta must lie in (1/4, 1), got {delta}")
    b = [list(r) for r in basis.rows]
    n = len(b)
    if n == 1:
        return basis
    mu, bsq = gram_schmidt(b)
    half = Fraction(1, 2)

    def size_reduce(k: int, j: int) -> None:
        if abs(mu[k][j]) <= half:
            return
        q = round(mu[k][j])
        bj = b[j]
        b[k] = [x - q * y for x, y in zip(b[k], bj)]
        for l in range(j):
            mu[k][l] -= q * mu[j][l]
        mu[k][j] -= q

    k = 1
    while k < n:
        size_reduce(k, k - 1)
        if bsq[k] >= (delta - mu[k][k - 1] ** 2) * bsq[k - 1]:
            for j in range(k - 2, -1, -1):
                size_reduce(k, j)
            k += 1
            continue
        # swap b[k-1], b[k] and update Gram-Schmidt data in place
        m = mu[k][k - 1]
        big = bsq[k] + m * m * bsq[k - 1]
        mu[k][k - 1] = m * bsq[k - 1] / big
        bsq[k] = bsq[k - 1] * bsq[k] / big
        bsq[k - 1] = big
        b[k - 1], b[k] = b[k], b[k - 1]
        for j in range(k - 1):
            mu[k - 1][j], mu[k][j] = mu[k][j], mu[k - 1][j]
        new_m = mu[k][k - 1]
        for i in range(k + 1, n):
            t = mu[i][k]
            mu[i][k] = mu[i][k - 1] - m * t
            mu[i][k - 1] = t + new_m * mu[i][k]
        k = max(k - 1, 1)
    return LatticeBasis.from_rows(b)


# ---------------------------------------------------------------- unimodular

def random_unimodular(
    n: int,
    ops: int,
    rng: np.random.Generator,
    entry_bound: int = 150,
    max_retries: int = 1000,
) -> UnimodularTransform:
    """Compose ``ops`` random elementary row operations starting from I_n.

    Each step is a row swap, a row negation or ``row_b += c * row_a`` with
    ``c`` in {-2, -1, 1, 2}, chosen uniformly. Steps that would push an entry
    above ``entry_bound`` in magnitude are rejected and redrawn.
    """
    if ops < 0:
        raise ValueError("ops must be non-negative")
    u = [[int(i == j) for j in range(n)] for i in range(n)]
    multipliers = (-2, -1, 1, 2)
    for _ in range(ops):
        for _attempt in range(max_retries):
            kind = int(rng.integers(3)) if n > 1 else 1
            if kind == 0:
                a, b = (int(x) for x in rng.choice(n, size=2, replace=False))
                u[a], u[b] = u[b], u[a]
                break
            if kind == 1:
                a = int(rng.integers(n))
                u[a] = [-x for x in u[a]]
                break
            a, b = (int(x) for x in rng.choice(n, size=2, replace=False))
            c = multipliers[int(rng.integers(4))]
            cand = [y + c * x for x, y in zip(u[a], u[b])]
            if max(abs(x) for x in cand) <= entry_bound:
                u[b] = cand
                break
        else:
            raise LatticeError(
                f"could not apply a unimodular step within entry bound {entry_bound} "
                f"after {max_retries} retries"
            )
    return UnimodularTransform(tuple(tuple(r) for r in u), ops)


# ---------------------------------------------------------------- coordinates

def coordinates_of(basis: LatticeBasis, v: Sequence[int]) -> Row | None:
    """Integer ``c`` with ``v = sum c_j b_j``, or None when ``v`` is off-lattice."""
    n = basis.dim
    if len(v) != n:
        raise LatticeError("vector length does not match basis dimension")
    # solve B^T c = v by exact Gauss-Jordan elimination
    a = [[Fraction(basis.rows[j][i]) for j in range(n)] + [Fraction(int(v[i]))] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    sol = [a[i][n] for i in range(n)]
    if any(x.denominator != 1 for x in sol):
        return None
    return tuple(int(x) for x in sol)


def lattice_equal(a: LatticeBasis, b: LatticeBasis) -> bool:
    """True iff ``a`` and ``b`` generate the same lattice."""
    if a.dim != b.dim:
        raise LatticeError("dimension mismatch")
    if abs(a.det) != abs(b.det):
        return False
    return all(coordinates_of(a, row) is not None for row in b.rows)


def replace_preserving_lattice(basis: LatticeBasis, k: int, v: LatticeVector | Sequence[int]) -> LatticeBasis:
    """Replace row ``k`` (0-based) by ``v``; requires ``|c_k| = 1``.

    The coefficient condition guarantees the new rows are still a basis of the
    same lattice. Violations raise :class:`LatticeInvariantError`.
    """
    emb = v.embedding if isinstance(v, LatticeVector) else tuple(int(x) for x in v)
    coords = coordinates_of(basis, emb)
    if coords is None:
        raise LatticeInvariantError(f"vector {emb} is not in the lattice")
    if abs(coords[k]) != 1:
        raise LatticeInvariantError(
            f"cannot replace row {k}: coefficient {coords[k]} is not a unit"
        )
    rows = list(basis.rows)
    rows[k] = emb
    return LatticeBasis(tuple(rows))


def sort_basis(basis: LatticeBasis) -> tuple[LatticeBasis, tuple[int, ...]]:
    """Order rows by squared norm, ties broken lexicographically.

    Returns the sorted basis and the 0-based source index of each output row.
    """
    perm = tuple(sorted(range(basis.dim), key=lambda r: (basis.norms_sq[r], basis.rows[r])))
    return LatticeBasis(tuple(basis.rows[r] for r in perm)), perm


# ---------------------------------------------------------------- SVP oracle

def _sign_normalize(vec: LatticeVector) -> LatticeVector:
    for x in vec.embedding:
        if x:
            return vec if x > 0 else vec.negated()
    return vec


def shortest_vector_oracle(basis: LatticeBasis, max_dim: int = ORACLE_MAX_DIM) -> LatticeVector:
    """Exact shortest nonzero vector by Schnorr-Euchner style enumeration.

    The basis is LLL-reduced first, the radius starts at the shortest reduced
    row, and every improvement shrinks it. Coordinates are returned relative
    to the input basis; the sign is normalized so the first nonzero entry of
    the embedding is positive.
    """
    n = basis.dim
    if n > max_dim:
        raise LatticeError(f"enumeration limited to dim <= {max_dim}, got {n}")
    red = lll_reduce(basis)
    mu, bsq = gram_schmidt(red.rows)
    best_row = red.shortest_row()
    radius = Fraction(red.min_norm_sq())
    best_x: list[int] | None = None
    x = [0] * n

    def recurse(i: int, partial: Fraction) -> None:
        nonlocal radius, best_x
        c = -sum((mu[j][i] * x[j] for j in range(i + 1, n)), Fraction(0))
        bi = bsq[i]
        start = c.numerator // c.denominator
        for step, first in ((-1, start), (1, start + 1)):
            xi = first
            while True:
                d = xi - c
                total = partial + bi * d * d
                if total > radius:
                    break
                x[i] = xi
                if i == 0:
                    if total < radius and any(x):
                        radius = total
                        best_x = list(x)
                else:
                    recurse(i - 1, total)
                xi += step
        x[i] = 0

    recurse(n - 1, Fraction(0))
    emb = red.combine(best_x) if best_x is not None else best_row
    coords = coordinates_of(basis, emb)
    assert coords is not None
    return _sign_normalize(LatticeVector(coords, tuple(emb), _dot(emb, emb)))


def brute_force_shortest(basis: LatticeBasis, bound: int = 6) -> int:
    """Minimum squared norm over all nonzero coefficients in ``[-bound, bound]^n``.

    Vectorized over the whole cube; used only as an independent check.
    """
    n = basis.dim
    axis = np.arange(-bound, bound + 1, dtype=np.int64)
    grids = np.stack(np.meshgrid(*([axis] * n), indexing="ij")).reshape(n, -1).T
    grids = grids[np.any(grids != 0, axis=1)]
    vecs = grids @ basis.as_array()
    return int((vecs * vecs).sum(axis=1).min())
