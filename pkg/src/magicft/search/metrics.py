"""Layout-oriented metrics of a tesseract measurement sequence."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from ..codes import MeasurementSequence
from ..gf2 import bitvec

STAGE1_CAPACITY = 9
STAGE1_MAX_STEPS = 4
SUFFIX_LENGTH = 3


@dataclass(frozen=True)
class StageMetrics:
    stage1_prefix: int
    stage1_tiles: tuple[int, ...]
    stage2_clusters: int
    cluster_sizes: tuple[int, ...]
    suffix_ok: bool


def stage1_prefix(
    seq: MeasurementSequence, capacity: int = STAGE1_CAPACITY, allowed: Optional[Iterable[int]] = None
) -> tuple[int, int]:
    """Longest prefix avoiding the outputs whose tile union fits the stage-1 area.

    The area is any ``capacity`` tiles, or exactly ``allowed`` when given.
    Returns the prefix length and its tile union.
    """
    out = seq.code.output_mask
    fence = bitvec(allowed) if allowed is not None else None
    union = 0
    length = 0
    for s in seq.supports:
        u = union | s
        if s & out or u.bit_count() > capacity or (fence is not None and u & ~fence):
            break
        union = u
        length += 1
    return length, union


def greedy_clusters(supports: Iterable[int]) -> list[list[int]]:
    """Split steps left to right into runs of pairwise-disjoint supports."""
    clusters: list[list[int]] = []
    union = 0
    for s in supports:
        if clusters and not union & s:
            clusters[-1].append(s)
            union |= s
        else:
            clusters.append([s])
            union = s
    return clusters


def suffix_ok(seq: MeasurementSequence, suffix: int = SUFFIX_LENGTH) -> bool:
    out = seq.code.output_mask
    n = len(seq)
    if n < suffix:
        return False
    return all(bool(s & out) == (i >= n - suffix) for i, s in enumerate(seq.supports))


def stage_metrics(
    seq: MeasurementSequence, allowed: Optional[Iterable[int]] = None, suffix: int = SUFFIX_LENGTH
) -> StageMetrics:
    """Stage-1 prefix, greedy stage-2 clustering and output-suffix check.

    Stage 2 runs from the end of stage 1 (at most four steps) up to the
    output-bearing suffix.
    """
    prefix, union = stage1_prefix(seq, allowed=allowed)
    start = min(prefix, STAGE1_MAX_STEPS)
    stop = max(start, len(seq) - suffix)
    clusters = greedy_clusters(seq.supports[start:stop])
    return StageMetrics(
        stage1_prefix=prefix,
        stage1_tiles=tuple(q for q in range(seq.code.n_tiles) if (union >> q) & 1),
        stage2_clusters=len(clusters),
        cluster_sizes=tuple(len(c) for c in clusters),
        suffix_ok=suffix_ok(seq, suffix),
    )
