"""Random measurement-sequence distributions for the tesseract code."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..codes import CodeSpec, MeasurementSequence, get_code
from ..gf2 import bitvec
from .rng import Stream

SOURCES = ("stabilizers", "subsets")


@dataclass(frozen=True)
class SamplerConstraints:
    """Shape of a random sequence.

    The first ``prefix_excluding_output`` supports avoid the output tile, the
    last ``suffix_including_output`` contain it and any steps in between are
    unconstrained.  ``source`` selects whether supports are drawn from the
    weight-``weight`` stabilizers or from all ``weight``-subsets of tiles.
    """

    length: int = 17
    weight: int = 4
    prefix_excluding_output: int = 14
    suffix_including_output: int = 3
    source: str = "stabilizers"

    def __post_init__(self) -> None:
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}")
        if self.prefix_excluding_output + self.suffix_including_output > self.length:
            raise ValueError("prefix and suffix exceed the sequence length")
        if self.length > 62:
            raise ValueError("sequences longer than 62 steps are not supported")

    @property
    def constrained(self) -> bool:
        return self.prefix_excluding_output + self.suffix_including_output > 0


PROFILES = {
    "std17": SamplerConstraints(),
    "free17": SamplerConstraints(prefix_excluding_output=0, suffix_including_output=0),
    "subset-std17": SamplerConstraints(source="subsets"),
    "subset-free17": SamplerConstraints(prefix_excluding_output=0, suffix_including_output=0, source="subsets"),
}


def get_profile(name: str) -> SamplerConstraints:
    if name not in PROFILES:
        raise KeyError(f"unknown profile {name!r}; expected one of {sorted(PROFILES)}")
    return PROFILES[name]


@dataclass(frozen=True)
class Pools:
    """Candidate supports (with generator coefficients, -1 if out of span) per position class."""

    supports: np.ndarray  # concatenated pools, int64
    coeffs: np.ndarray  # int64, -1 for supports outside the stabilizer span
    offsets: np.ndarray  # pool start index, for pools (avoid output, with output, any)
    sizes: np.ndarray
    position_pool: np.ndarray  # pool id of every sequence position


@lru_cache(maxsize=None)
def _candidates(code_name: str, weight: int, source: str) -> tuple[tuple[int, ...], ...]:
    code = get_code(code_name)
    out = code.output_mask
    all_sets = [bitvec(c) for c in itertools.combinations(range(code.n_tiles), weight)]
    if source == "stabilizers":
        all_sets = [s for s in all_sets if code.decompose(s) is not None]
    avoid = tuple(s for s in all_sets if not s & out)
    touch = tuple(s for s in all_sets if s & out)
    return avoid, touch, tuple(sorted(avoid + touch))


def build_pools(constraints: SamplerConstraints, code: CodeSpec | None = None) -> Pools:
    return _build_pools(constraints, (code or get_code("t15")).name)


@lru_cache(maxsize=None)
def _build_pools(constraints: SamplerConstraints, code_name: str) -> Pools:
    code = get_code(code_name)
    pools = _candidates(code.name, constraints.weight, constraints.source)
    sups = np.array([s for p in pools for s in p], dtype=np.int64)
    coeffs = np.array([-1 if (c := code.decompose(int(s))) is None else c for s in sups], dtype=np.int64)
    sizes = np.array([len(p) for p in pools], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    c = constraints
    pos = [0] * c.prefix_excluding_output
    pos += [2] * (c.length - c.prefix_excluding_output - c.suffix_including_output)
    pos += [1] * c.suffix_including_output
    return Pools(sups, coeffs, offsets, sizes, np.array(pos, dtype=np.int64))


def sample_supports(constraints: SamplerConstraints, seed: int, index: int, pools: Pools | None = None) -> list[int]:
    pools = pools or build_pools(constraints)
    stream = Stream(seed, index)
    out = []
    for pid in pools.position_pool:
        j = stream.below(int(pools.sizes[pid]))
        out.append(int(pools.supports[pools.offsets[pid] + j]))
    return out


def sample_sequence(
    constraints: SamplerConstraints, seed: int, index: int = 0, code: CodeSpec | None = None
) -> MeasurementSequence:
    """Sample ``index`` of the stream keyed by ``seed``; duplicates are allowed."""
    code = code or get_code("t15")
    return MeasurementSequence.from_supports(code, sample_supports(constraints, seed, index, build_pools(constraints, code)))
