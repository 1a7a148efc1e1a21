"""Fault-tolerance verifier for Z-type stabilizer measurement sequences.

A fault is either a flipped measurement outcome or an X error on an input
tile in one of the ``N + 1`` gaps between measurements.  An X error can be
commuted forward (absorbed by the terminal X measurement) or backward
(becoming an S-dagger error on the input |T>); either way it turns into a set
of flipped outcomes.  A pattern is

* detected when its flipped outcomes are inconsistent with every Z frame,
* trivial-equivalent when some choice of commutation directions flips nothing,
* a violation otherwise.

Direction choice never changes consistency: the two choices for one X error
differ by the full column of its tile, which is the image of a frame change.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Sequence, Union

from . import gf2
from .codes import MeasurementSequence, UnresolvableSupportError
from .gf2 import Gf2Matrix, ImageBasis, bits_of


@dataclass(frozen=True, order=True)
class MeasFlip:
    step: int

    def __str__(self) -> str:
        return f"M{self.step}"


@dataclass(frozen=True, order=True)
class XError:
    """X error on ``tile`` in gap ``slot``: before step ``slot`` (0-based), or after the last."""

    tile: int
    slot: int

    def __str__(self) -> str:
        return f"X{self.tile}@{self.slot}"


FaultLocation = Union[MeasFlip, XError]


def _loc_key(loc: FaultLocation) -> tuple:
    if isinstance(loc, MeasFlip):
        return (loc.step, 0, 0)
    return (loc.slot, 1, loc.tile)


@dataclass(frozen=True)
class ErrorPattern:
    locations: tuple[FaultLocation, ...]

    @classmethod
    def of(cls, *locations: FaultLocation) -> "ErrorPattern":
        return cls(tuple(sorted(locations, key=_loc_key)))

    def __len__(self) -> int:
        return len(self.locations)

    @property
    def x_errors(self) -> list[XError]:
        return [loc for loc in self.locations if isinstance(loc, XError)]

    def __str__(self) -> str:
        return "{" + ", ".join(map(str, self.locations)) + "}"


class Verdict(str, Enum):
    DETECTED = "detected"
    TRIVIAL = "trivial-equivalent"
    VIOLATION = "violation"


@dataclass(frozen=True)
class PatternVerdict:
    pattern: ErrorPattern
    verdict: Verdict
    flips: int
    # for trivial-equivalent verdicts: forward (True) / backward per X error, in pattern order
    directions: Optional[tuple[bool, ...]] = None
    residual_tiles: tuple[int, ...] = ()


class FrameSystem:
    """Linear map from Z-frame bits to measurement outcomes for one sequence.

    Row ``i`` of ``matrix`` holds the generator coefficients of measurement
    ``i``; ``image`` spans the outcome vectors any frame can produce.
    """

    def __init__(self, seq: MeasurementSequence, include_output: bool = False):
        code = seq.code
        rows = []
        for i, s in enumerate(seq.supports):
            c = code.decompose(s)
            if c is None:
                raise UnresolvableSupportError(
                    f"step {i} support {bits_of(s)} is outside the {code.name} stabilizer span"
                )
            rows.append(c)
        self.seq = seq
        self.n_steps = len(rows)
        self.k = code.k
        self.matrix = Gf2Matrix(tuple(rows), code.k)
        self.image: ImageBasis = gf2.image_basis(self.matrix)
        self.rank = self.image.rank
        self.fault_tiles = [q for q in range(code.n_tiles) if include_output or q not in code.output_tiles]
        self.col_masks = {
            q: gf2.bitvec(i for i, s in enumerate(seq.supports) if (s >> q) & 1)
            for q in range(code.n_tiles)
        }

    @property
    def full_rank(self) -> bool:
        return self.rank == self.k

    def forward_mask(self, tile: int, slot: int) -> int:
        return self.col_masks[tile] & ~((1 << slot) - 1)

    def backward_mask(self, tile: int, slot: int) -> int:
        return self.col_masks[tile] & ((1 << slot) - 1)

    def residue(self, flips: int) -> int:
        return gf2.reduce(self.image, flips)

    def locations(self) -> Iterator[FaultLocation]:
        for i in range(self.n_steps):
            yield MeasFlip(i)
        for t in range(self.n_steps + 1):
            for q in self.fault_tiles:
                yield XError(q, t)

    def location_classes(self) -> list[FaultLocation]:
        """One representative per distinct flip behaviour (earliest slot wins)."""
        reps: list[FaultLocation] = [MeasFlip(i) for i in range(self.n_steps)]
        for q in self.fault_tiles:
            seen = set()
            for t in range(self.n_steps + 1):
                f = self.forward_mask(q, t)
                if f not in seen:
                    seen.add(f)
                    reps.append(XError(q, t))
        return reps

    def _options(self, loc: FaultLocation) -> tuple[int, ...]:
        if isinstance(loc, MeasFlip):
            return (1 << loc.step,)
        return (self.forward_mask(loc.tile, loc.slot), self.backward_mask(loc.tile, loc.slot))


def _check_pattern(system: FrameSystem, pattern: ErrorPattern) -> None:
    for loc in pattern.locations:
        if isinstance(loc, MeasFlip):
            if not 0 <= loc.step < system.n_steps:
                raise ValueError(f"{loc} out of range for {system.n_steps} steps")
        elif not 0 <= loc.slot <= system.n_steps or loc.tile not in system.col_masks:
            raise ValueError(f"{loc} out of range")


def flip_vector(
    system: FrameSystem, pattern: ErrorPattern, directions: Optional[Sequence[bool]] = None
) -> int:
    """Outcome flips caused by ``pattern``; ``directions[j]`` is True to commute X error ``j`` forward."""
    _check_pattern(system, pattern)
    xs = pattern.x_errors
    if directions is None:
        directions = [True] * len(xs)
    if len(directions) != len(xs):
        raise ValueError("one direction per X error is required")
    flips = 0
    j = 0
    for loc in pattern.locations:
        if isinstance(loc, MeasFlip):
            flips ^= 1 << loc.step
        else:
            fwd = directions[j]
            j += 1
            flips ^= (
                system.forward_mask(loc.tile, loc.slot)
                if fwd
                else system.backward_mask(loc.tile, loc.slot)
            )
    return flips


def classify(system: FrameSystem, pattern: ErrorPattern) -> PatternVerdict:
    flips = flip_vector(system, pattern)
    if system.residue(flips):
        return PatternVerdict(pattern, Verdict.DETECTED, flips)
    xs = pattern.x_errors
    for dirs in itertools.product((True, False), repeat=len(xs)):
        if flip_vector(system, pattern, dirs) == 0:
            residual = _residual_tiles(xs, dirs)
            return PatternVerdict(pattern, Verdict.TRIVIAL, flips, tuple(dirs), residual)
    return PatternVerdict(pattern, Verdict.VIOLATION, flips)


def _residual_tiles(xs: Sequence[XError], dirs: Sequence[bool]) -> tuple[int, ...]:
    # backward-commuted X errors become S-dagger errors on the input; pairs on one tile cancel
    odd = 0
    for x, fwd in zip(xs, dirs):
        if not fwd:
            odd ^= 1 << x.tile
    return tuple(bits_of(odd))


@dataclass
class SufficiencyReport:
    sufficient: bool
    reason: str
    n_steps: int
    frame_rank: int
    k: int
    violations: list[ErrorPattern] = field(default_factory=list)

    def as_record(self) -> dict:
        return {
            "sufficient": self.sufficient,
            "reason": self.reason,
            "n_steps": self.n_steps,
            "frame_rank": self.frame_rank,
            "k": self.k,
            "n_violations": len(self.violations),
            "violations": [str(p) for p in self.violations],
        }


def _pair_trivial(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    return any(x == y for x in a for y in b)


def check_sufficiency(
    seq: MeasurementSequence,
    max_errors: int = 2,
    include_output: bool = False,
    first_only: bool = False,
) -> SufficiencyReport:
    """Enumerate every fault pattern of size 1..``max_errors`` and look for violations.

    Residues are linear, so a pair of faults is consistent exactly when the two
    single-fault residues coincide; only those pairs need a direction search.
    """
    if max_errors not in (1, 2):
        raise ValueError("max_errors must be 1 or 2")
    system = FrameSystem(seq, include_output)
    if not system.full_rank:
        return SufficiencyReport(False, "frame not fully measured", len(seq), system.rank, system.k)

    locs = system.location_classes()
    opts = [system._options(loc) for loc in locs]
    residues = [system.residue(o[0]) for o in opts]
    violations: list[ErrorPattern] = []

    def done() -> bool:
        return first_only and bool(violations)

    for loc, o, r in zip(locs, opts, residues):
        if r == 0 and 0 not in o:
            violations.append(ErrorPattern.of(loc))
            if done():
                break

    if max_errors == 2 and not done():
        groups: dict[int, list[int]] = defaultdict(list)
        for idx, r in enumerate(residues):
            groups[r].append(idx)
        for members in groups.values():
            for a, b in itertools.combinations(members, 2):
                if not _pair_trivial(opts[a], opts[b]):
                    violations.append(ErrorPattern.of(locs[a], locs[b]))
                    if done():
                        break
            if done():
                break

    violations.sort(key=lambda p: [_loc_key(loc) for loc in p.locations])
    reason = "violation" if violations else "ok"
    return SufficiencyReport(not violations, reason, len(seq), system.rank, system.k, violations)


def is_sufficient(seq: MeasurementSequence, max_errors: int = 2, include_output: bool = False) -> bool:
    try:
        return check_sufficiency(seq, max_errors, include_output, first_only=True).sufficient
    except UnresolvableSupportError:
        return False


def check_necessity(
    seq: MeasurementSequence, max_errors: int = 2, include_output: bool = False
) -> list[bool]:
    """Entry ``i`` is True when removing step ``i`` breaks sufficiency."""
    return [not is_sufficient(seq.without(i), max_errors, include_output) for i in range(len(seq))]


def enumerate_patterns(system: FrameSystem, max_errors: int = 2) -> Iterator[ErrorPattern]:
    """Every pattern over all locations (not just classes), singles first."""
    locs = list(system.locations())
    for loc in locs:
        yield ErrorPattern.of(loc)
    if max_errors >= 2:
        for a, b in itertools.combinations(locs, 2):
            yield ErrorPattern.of(a, b)


# -- |CCZ> ------------------------------------------------------------------------


@dataclass
class CczReport:
    n_steps: int
    frame_rank: int
    k: int
    single_flips_detected: bool
    participation: dict[int, int]
    participation_ok: bool
    single_patterns_ok: bool
    orders_checked: int = 1
    failing_order: Optional[tuple[int, ...]] = None
    violations: list[ErrorPattern] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            self.n_steps >= self.k + 1
            and self.frame_rank == self.k
            and self.single_flips_detected
            and self.participation_ok
            and self.single_patterns_ok
            and self.failing_order is None
        )

    def as_record(self) -> dict:
        return {
            "passed": self.passed,
            "n_steps": self.n_steps,
            "frame_rank": self.frame_rank,
            "single_flips_detected": self.single_flips_detected,
            "participation": {str(q): n for q, n in sorted(self.participation.items())},
            "participation_ok": self.participation_ok,
            "single_patterns_ok": self.single_patterns_ok,
            "orders_checked": self.orders_checked,
            "failing_order": list(self.failing_order) if self.failing_order else None,
            "violations": [str(p) for p in self.violations],
        }


def _ccz_order_ok(seq: MeasurementSequence) -> tuple[bool, list[ErrorPattern]]:
    system = FrameSystem(seq)
    if not system.full_rank:
        return False, []
    flips_ok = all(system.residue(1 << i) for i in range(system.n_steps))
    rep = check_sufficiency(seq, max_errors=1)
    return flips_ok and rep.sufficient, rep.violations


def check_ccz(seq: MeasurementSequence, all_orders: bool = False, max_participation: int = 3) -> CczReport:
    system = FrameSystem(seq)
    inputs = seq.code.input_tiles
    participation = {q: system.col_masks[q].bit_count() for q in inputs}
    flips_ok = system.full_rank and all(system.residue(1 << i) for i in range(system.n_steps))
    singles = check_sufficiency(seq, max_errors=1) if system.full_rank else None
    report = CczReport(
        n_steps=system.n_steps,
        frame_rank=system.rank,
        k=system.k,
        single_flips_detected=flips_ok,
        participation=participation,
        participation_ok=all(n <= max_participation for n in participation.values()),
        single_patterns_ok=bool(singles and singles.sufficient),
        violations=list(singles.violations) if singles else [],
    )
    if all_orders:
        report.orders_checked = 0
        for order in itertools.permutations(range(len(seq))):
            report.orders_checked += 1
            ok, viol = _ccz_order_ok(seq.permuted(order))
            if not ok:
                report.failing_order = tuple(order)
                report.violations = viol
                break
    return report
