"""Cross-validation of the measurement-level checker against the simulator."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from ..codes import MeasurementSequence
from ..ftcheck import ErrorPattern, FrameSystem, Verdict, classify
from .statevec import FIDELITY_TOL, CircuitSimulator


@dataclass(frozen=True)
class SamplePolicy:
    """Which patterns to try and how many Z frames to simulate for each."""

    size: int = 1
    exhaustive: bool = True
    n_random: int = 0
    seed: int = 0
    frames_per_pattern: int = 2
    include_output: bool = False


@dataclass
class Disagreement:
    pattern: str
    verdict: str
    detected_fraction: float
    min_fidelity: Optional[float]


@dataclass
class CrossvalReport:
    sequence_length: int
    policy: SamplePolicy
    n_patterns: int = 0
    verdict_counts: dict = field(default_factory=dict)
    disagreements: list[Disagreement] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def as_record(self) -> dict:
        return {
            "steps": self.sequence_length,
            "size": self.policy.size,
            "exhaustive": self.policy.exhaustive,
            "seed": self.policy.seed,
            "patterns": self.n_patterns,
            "verdicts": dict(self.verdict_counts),
            "disagreements": [vars(d) for d in self.disagreements],
        }


def _patterns(system: FrameSystem, policy: SamplePolicy) -> Iterator[ErrorPattern]:
    locs = list(system.locations())
    if policy.exhaustive:
        for combo in itertools.combinations(locs, policy.size):
            yield ErrorPattern.of(*combo)
        return
    rng = np.random.default_rng(policy.seed)
    for _ in range(policy.n_random):
        picks = rng.choice(len(locs), size=policy.size, replace=False)
        yield ErrorPattern.of(*(locs[i] for i in picks))


def crossvalidate(
    seq: MeasurementSequence,
    pattern_budget: Optional[int] = None,
    sample_policy: SamplePolicy = SamplePolicy(),
) -> CrossvalReport:
    """Compare checker verdicts with simulated outcomes for up to ``pattern_budget`` patterns.

    A Violation must show an undetected branch with fidelity below
    ``1 - FIDELITY_TOL``; Detected and TrivialEquivalent patterns must not.
    """
    system = FrameSystem(seq, include_output=sample_policy.include_output)
    sim = CircuitSimulator(seq)
    report = CrossvalReport(len(seq), sample_policy)
    seeds = np.random.SeedSequence(sample_policy.seed)
    for idx, pattern in enumerate(_patterns(system, sample_policy)):
        if pattern_budget is not None and idx >= pattern_budget:
            break
        verdict = classify(system, pattern).verdict
        child = int(seeds.spawn(1)[0].generate_state(1)[0])
        res = sim.run(pattern, sample_policy.frames_per_pattern, child)
        bad = res.undetected_output_fidelity is not None and res.undetected_output_fidelity < 1 - FIDELITY_TOL
        report.n_patterns += 1
        report.verdict_counts[verdict.value] = report.verdict_counts.get(verdict.value, 0) + 1
        if bad != (verdict == Verdict.VIOLATION):
            report.disagreements.append(
                Disagreement(str(pattern), verdict.value, res.detected_fraction, res.undetected_output_fidelity)
            )
    return report
