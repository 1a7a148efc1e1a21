"""Exact diagonal-times-X operators with eighth-root-of-unity phases.

An operator is ``w**g * D * X(mask)`` with ``w = exp(i pi/4)`` and
``D = diag(w**phase[x])``.  Every gate needed here (T, S, Z, X, controlled-Z
and its multi-controlled variants, signs) has this form, and the form is
closed under products, so identities can be checked with integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from ..gf2 import bitvec


@dataclass(frozen=True, eq=False)
class PhasePolyOperator:
    n: int
    x_mask: int
    phase_table: np.ndarray  # int64, values in 0..7
    global_phase: int = 0

    def __post_init__(self) -> None:
        if self.phase_table.shape != (1 << self.n,):
            raise ValueError("phase table must have 2**n entries")
        if self.x_mask >> self.n:
            raise ValueError("x_mask exceeds qubit count")

    # -- constructors ---------------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "PhasePolyOperator":
        return cls(n, 0, np.zeros(1 << n, dtype=np.int64))

    @classmethod
    def diagonal(cls, n: int, table: np.ndarray) -> "PhasePolyOperator":
        return cls(n, 0, np.mod(table, 8).astype(np.int64))

    @classmethod
    def x(cls, n: int, tiles: Iterable[int]) -> "PhasePolyOperator":
        return cls(n, bitvec(tiles), np.zeros(1 << n, dtype=np.int64))

    @classmethod
    def _single_phase(cls, n: int, tiles: Iterable[int], k: int) -> "PhasePolyOperator":
        idx = np.arange(1 << n, dtype=np.int64)
        mask = bitvec(tiles)
        return cls.diagonal(n, k * np.bitwise_count(idx & mask).astype(np.int64))

    @classmethod
    def t(cls, n, tiles):
        return cls._single_phase(n, tiles, 1)

    @classmethod
    def tdg(cls, n, tiles):
        return cls._single_phase(n, tiles, 7)

    @classmethod
    def s(cls, n, tiles):
        return cls._single_phase(n, tiles, 2)

    @classmethod
    def sdg(cls, n, tiles):
        return cls._single_phase(n, tiles, 6)

    @classmethod
    def z(cls, n, tiles):
        return cls._single_phase(n, tiles, 4)

    @classmethod
    def controlled(cls, n: int, controls: Iterable[int], op: "PhasePolyOperator") -> "PhasePolyOperator":
        """``op`` applied only where every control qubit is 1; ``op`` must be diagonal."""
        if op.x_mask:
            raise ValueError("only diagonal operators can be controlled here")
        cmask = bitvec(controls)
        idx = np.arange(1 << n, dtype=np.int64)
        on = (idx & cmask) == cmask
        table = np.where(on, op.phase_table + op.global_phase, 0)
        return cls.diagonal(n, table)

    @classmethod
    def scalar(cls, n: int, k: int) -> "PhasePolyOperator":
        return cls(n, 0, np.zeros(1 << n, dtype=np.int64), k % 8)

    # -- algebra ----------------------------------------------------------------
    def normal(self) -> "PhasePolyOperator":
        return PhasePolyOperator(self.n, self.x_mask, np.mod(self.phase_table + self.global_phase, 8), 0)

    def __neg__(self) -> "PhasePolyOperator":
        return PhasePolyOperator(self.n, self.x_mask, self.phase_table, (self.global_phase + 4) % 8)

    def __matmul__(self, other: "PhasePolyOperator") -> "PhasePolyOperator":
        return compose(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhasePolyOperator):
            return NotImplemented
        a, b = self.normal(), other.normal()
        return a.n == b.n and a.x_mask == b.x_mask and np.array_equal(a.phase_table, b.phase_table)

    __hash__ = None

    def phase_relative_to(self, other: "PhasePolyOperator") -> Optional[int]:
        """``k`` with ``self == w**k * other``, or ``None`` if they differ beyond a global phase."""
        if self.n != other.n or self.x_mask != other.x_mask:
            return None
        diff = np.mod(self.normal().phase_table - other.normal().phase_table, 8)
        if np.all(diff == diff[0]):
            return int(diff[0])
        return None

    def to_matrix(self) -> np.ndarray:
        dim = 1 << self.n
        w = np.exp(1j * np.pi / 4)
        m = np.zeros((dim, dim), dtype=complex)
        idx = np.arange(dim)
        nf = self.normal()
        m[idx, idx ^ self.x_mask] = w ** nf.phase_table
        return m

    def apply(self, amps: np.ndarray) -> np.ndarray:
        """``U @ psi`` for a state vector of length ``2**n``."""
        idx = np.arange(1 << self.n)
        nf = self.normal()
        return np.exp(1j * np.pi / 4 * nf.phase_table) * amps[idx ^ self.x_mask]


def compose(a: PhasePolyOperator, b: PhasePolyOperator) -> PhasePolyOperator:
    """Operator product ``a @ b`` (``b`` acts first)."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n} qubits")
    idx = np.arange(1 << a.n)
    # D_a X_a D_b X_b = D_a (X_a D_b X_a) X_a X_b
    table = a.phase_table + b.phase_table[idx ^ a.x_mask]
    return PhasePolyOperator(a.n, a.x_mask ^ b.x_mask, np.mod(table, 8), (a.global_phase + b.global_phase) % 8)


def product(*ops: PhasePolyOperator) -> PhasePolyOperator:
    out = ops[0]
    for op in ops[1:]:
        out = compose(out, op)
    return out
