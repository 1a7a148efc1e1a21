"""Bit-packed GF(2) linear algebra on Python ints.

A bit vector of length ``n`` is an ``int`` whose bit ``i`` holds entry ``i``;
bits at positions ``>= n`` must be zero.  Every vector used in this package
fits in 64 bits, so a reduction costs one XOR per basis row.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence


def bitvec(indices: Iterable[int]) -> int:
    """Pack a collection of indices into a bit vector."""
    v = 0
    for i in indices:
        v |= 1 << i
    return v


def bits_of(v: int) -> list[int]:
    """Indices of the set bits of ``v``, ascending."""
    out = []
    while v:
        low = v & -v
        out.append(low.bit_length() - 1)
        v ^= low
    return out


def parity(v: int) -> int:
    return v.bit_count() & 1


def _check_len(v: int, n: int) -> None:
    if v < 0 or v >> n:
        raise ValueError(f"bit vector {v:#x} does not fit in length {n}")


@dataclass(frozen=True)
class Gf2Matrix:
    """Dense GF(2) matrix; row ``i`` is a bit vector over ``n_cols`` columns."""

    rows: tuple[int, ...]
    n_cols: int

    def __post_init__(self) -> None:
        for r in self.rows:
            _check_len(r, self.n_cols)

    @classmethod
    def from_rows(cls, rows: Iterable[int], n_cols: int) -> "Gf2Matrix":
        return cls(tuple(rows), n_cols)

    @classmethod
    def identity(cls, n: int) -> "Gf2Matrix":
        return cls(tuple(1 << i for i in range(n)), n)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def columns(self) -> list[int]:
        """Column ``j`` as a bit vector over the rows."""
        cols = [0] * self.n_cols
        for i, r in enumerate(self.rows):
            for j in bits_of(r):
                cols[j] |= 1 << i
        return cols

    def transpose(self) -> "Gf2Matrix":
        return Gf2Matrix(tuple(self.columns()), self.n_rows)

    def apply(self, x: int) -> int:
        """Matrix-vector product ``m @ x`` as a bit vector over the rows."""
        _check_len(x, self.n_cols)
        out = 0
        for i, r in enumerate(self.rows):
            if (r & x).bit_count() & 1:
                out |= 1 << i
        return out


@dataclass(frozen=True)
class ImageBasis:
    """Reduced row-echelon basis of a subspace of GF(2)^n.

    Row ``reduced_rows[i]`` has its lowest set bit at ``pivots[i]``, and no
    other row has that bit set, so a single ordered pass reduces any vector.
    """

    reduced_rows: tuple[int, ...]
    pivots: tuple[int, ...]
    n: int

    @classmethod
    def empty(cls, n: int) -> "ImageBasis":
        return cls((), (), n)

    @classmethod
    def from_vectors(cls, vectors: Iterable[int], n: int) -> "ImageBasis":
        rows: dict[int, int] = {}
        for v in vectors:
            _check_len(v, n)
            for p in sorted(rows):
                if (v >> p) & 1:
                    v ^= rows[p]
            if not v:
                continue
            p = (v & -v).bit_length() - 1
            for q in rows:
                if (rows[q] >> p) & 1:
                    rows[q] ^= v
            rows[p] = v
        pivots = tuple(sorted(rows))
        return cls(tuple(rows[p] for p in pivots), pivots, n)

    @property
    def rank(self) -> int:
        return len(self.reduced_rows)

    def extend(self, v: int) -> "ImageBasis":
        return ImageBasis.from_vectors(self.reduced_rows + (v,), self.n)

    def contains(self, v: int) -> bool:
        return reduce(self, v) == 0


def reduce(basis: ImageBasis, v: int) -> int:
    """Residue of ``v`` modulo the span of ``basis``; zero iff ``v`` is in the span."""
    _check_len(v, basis.n)
    for p, r in zip(basis.pivots, basis.reduced_rows):
        if (v >> p) & 1:
            v ^= r
    return v


def image_basis(m: Gf2Matrix) -> ImageBasis:
    """Basis of the column space of ``m`` inside GF(2)^{n_rows}."""
    return ImageBasis.from_vectors(m.columns(), m.n_rows)


def row_basis(m: Gf2Matrix) -> ImageBasis:
    return ImageBasis.from_vectors(m.rows, m.n_cols)


def rank(m: Gf2Matrix) -> int:
    return row_basis(m).rank


def solve(m: Gf2Matrix, rhs: int) -> Optional[int]:
    """Find ``x`` with ``m @ x == rhs``, or ``None`` if the system is inconsistent.

    Pivots are taken lowest column first and free variables are set to zero,
    so the returned solution depends only on the matrix and right-hand side.
    """
    _check_len(rhs, m.n_rows)
    aug = m.n_cols  # augmented bit position
    pivot_rows: dict[int, int] = {}
    for i, r in enumerate(m.rows):
        v = r | (((rhs >> i) & 1) << aug)
        for p in sorted(pivot_rows):
            if (v >> p) & 1:
                v ^= pivot_rows[p]
        coeff = v & ((1 << aug) - 1)
        if not coeff:
            if v:
                return None
            continue
        p = (coeff & -coeff).bit_length() - 1
        for q in pivot_rows:
            if (pivot_rows[q] >> p) & 1:
                pivot_rows[q] ^= v
        pivot_rows[p] = v
    x = 0
    for p, v in pivot_rows.items():
        if (v >> aug) & 1:
            x |= 1 << p
    return x


def is_independent(vectors: Sequence[int], n: int) -> bool:
    return ImageBasis.from_vectors(vectors, n).rank == len(vectors)
