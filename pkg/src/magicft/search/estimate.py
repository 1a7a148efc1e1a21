"""Monte Carlo estimation of the probability that a random sequence is sufficient."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from ..codes import format_sequence, get_code
from .metrics import stage_metrics
from .sampler import SamplerConstraints, build_pools, sample_sequence

DEFAULT_BATCH = 1 << 21


@dataclass
class ProbabilityEstimate:
    hits: int
    samples: int
    point: Optional[float]
    stderr: Optional[float]
    seed: int = 0
    profile: str = ""
    hit_indices: list[int] = field(default_factory=list)

    @classmethod
    def from_counts(cls, hits: int, samples: int, **kw) -> "ProbabilityEstimate":
        if samples == 0:
            return cls(0, 0, None, None, **kw)
        p = hits / samples
        return cls(hits, samples, p, math.sqrt(p * (1 - p) / samples), **kw)

    def z_score(self, value: float, value_stderr: float = 0.0) -> Optional[float]:
        """Distance to a reference value in combined standard errors."""
        if self.point is None:
            return None
        err = math.hypot(self.stderr, value_stderr)
        if err == 0:
            return 0.0 if self.point == value else math.inf
        return (self.point - value) / err


def _set_threads(threads: Optional[int]) -> None:
    if threads is None:
        return
    import numba

    numba.set_num_threads(max(1, min(threads, numba.config.NUMBA_NUM_THREADS)))


def estimate_sufficiency_probability(
    constraints: SamplerConstraints,
    n_samples: int,
    seed: int,
    threads: Optional[int] = None,
    start: int = 0,
    batch: int = DEFAULT_BATCH,
    profile: str = "",
) -> ProbabilityEstimate:
    """Count sufficient sequences among sample indices ``[start, start + n_samples)``.

    The verdict of each index depends only on ``(seed, index)``, so the
    result is the same for any thread count or batch size.
    """
    if n_samples < 0:
        raise ValueError("n_samples must be non-negative")
    if n_samples == 0:
        return ProbabilityEstimate.from_counts(0, 0, seed=seed, profile=profile)
    from .kernel import kernel_seed_key, sample_and_check

    _set_threads(threads)
    code = get_code("t15")
    pools = build_pools(constraints, code)
    key = kernel_seed_key(seed)
    hits: list[int] = []
    done = 0
    while done < n_samples:
        count = min(batch, n_samples - done)
        out = sample_and_check(
            key, start + done, count, pools.supports, pools.coeffs, pools.offsets, pools.sizes,
            pools.position_pool, code.n_tiles, np.int64(code.input_mask), code.k,
        )
        hits.extend(int(i) + start + done for i in np.flatnonzero(out))
        done += count
    return ProbabilityEstimate.from_counts(len(hits), n_samples, seed=seed, profile=profile, hit_indices=hits)


def hit_records(constraints: SamplerConstraints, estimate: ProbabilityEstimate) -> list[dict]:
    """One log record per sufficient sequence found by ``estimate``."""
    records = []
    for idx in estimate.hit_indices:
        seq = sample_sequence(constraints, estimate.seed, idx)
        m = stage_metrics(seq)
        records.append(
            {
                "profile": estimate.profile,
                "seed": estimate.seed,
                "index": idx,
                "supports": [[q for q in range(seq.code.n_tiles) if (s >> q) & 1] for s in seq.supports],
                "sequence": format_sequence(seq),
                "stage1_prefix": m.stage1_prefix,
                "stage2_clusters": m.stage2_clusters,
                "suffix_ok": m.suffix_ok,
            }
        )
    return records


def append_log(path: Path, records: Iterable[dict]) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r) + "\n")


def read_log(path: Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def stage1_fraction(records: Iterable[dict], min_prefix: int = 4) -> ProbabilityEstimate:
    records = list(records)
    good = sum(1 for r in records if r["stage1_prefix"] >= min_prefix)
    return ProbabilityEstimate.from_counts(good, len(records))


SUMMARY_FIELDS = ["profile", "seed", "samples", "hits", "point", "stderr", "stage1_ge4", "stage1_fraction"]


def summary_row(estimate: ProbabilityEstimate, records: list[dict]) -> dict:
    frac = stage1_fraction(records)
    return {
        "profile": estimate.profile,
        "seed": estimate.seed,
        "samples": estimate.samples,
        "hits": estimate.hits,
        "point": estimate.point,
        "stderr": estimate.stderr,
        "stage1_ge4": frac.hits,
        "stage1_fraction": frac.point,
    }


def write_summary_csv(path: Path, rows: Iterable[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS)
        w.writeheader()
        for r in rows:
            w.writerow(r)
