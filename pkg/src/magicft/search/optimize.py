"""Local optimization towards necessary and sufficient sequences."""

from __future__ import annotations

from dataclasses import dataclass

from ..codes import MeasurementSequence, Step, PauliProduct
from ..ftcheck import is_sufficient
from .rng import Stream
from .sampler import _candidates


@dataclass
class OptimizeResult:
    sequence: MeasurementSequence
    converged: bool
    additions: int
    removals: int
    message: str = ""


def local_optimize(
    seq: MeasurementSequence,
    seed: int,
    index: int = 0,
    weight: int = 4,
    retry_budget: int = 500,
    max_errors: int = 2,
) -> OptimizeResult:
    """Add random stabilizers until sufficient, then drop the first unnecessary step until none is.

    Additions insert a random weight-``weight`` stabilizer at a random
    position; every removal keeps the sequence sufficient, so the loop ends.
    """
    pool = _candidates(seq.code.name, weight, "stabilizers")[2]
    if not pool:
        raise ValueError(f"no weight-{weight} stabilizers for {seq.code.name}")
    stream = Stream(seed, index)
    additions = removals = 0
    while not is_sufficient(seq, max_errors):
        if additions >= retry_budget:
            return OptimizeResult(seq, False, additions, removals, "retry budget exhausted")
        s = pool[stream.below(len(pool))]
        pos = stream.below(len(seq) + 1)
        seq = seq.inserted(pos, Step(PauliProduct.z([q for q in range(seq.code.n_tiles) if (s >> q) & 1])))
        additions += 1
    removed = True
    while removed:
        removed = False
        for i in range(len(seq)):
            shorter = seq.without(i)
            if is_sufficient(shorter, max_errors):
                seq = shorter
                removals += 1
                removed = True
                break
    return OptimizeResult(seq, True, additions, removals)
