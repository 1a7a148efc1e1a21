"""Code contexts for |T> and |CCZ> distillation and the measurement sequences run on them.

Tiles are labelled by integers.  In the tesseract (``t15``) tile ``q`` is the
vertex whose 4-bit label is the binary form of ``q`` (``0000 = 0``, ...,
``1111 = 15``); tile 0 holds the output.  In the cube (``ccz``) tiles 0-7 are
the vertices of the [[8,3,2]] code and tiles 8, 9, 10 hold the outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

from . import gf2
from .gf2 import Gf2Matrix, bits_of, bitvec


class UnresolvableSupportError(ValueError):
    """A measurement support lies outside the stabilizer span of its code."""


class SequenceFormatError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def label_tiles(label: str) -> list[int]:
    """Tiles matched by a vertex label such as ``'1*0*'`` (leftmost char is the high bit)."""
    n = len(label)
    out = []
    for q in range(1 << n):
        for pos, ch in enumerate(label):
            bit = (q >> (n - 1 - pos)) & 1
            if ch != "*" and int(ch) != bit:
                break
        else:
            out.append(q)
    return out


@dataclass(frozen=True)
class PauliProduct:
    """Signed product of same-type Pauli operators over a set of tiles."""

    kind: str  # "Z" or "X"
    support: int
    sign: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("Z", "X"):
            raise ValueError(f"unknown Pauli kind {self.kind!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def z(cls, tiles: Iterable[int], sign: int = 1) -> "PauliProduct":
        return cls("Z", bitvec(tiles), sign)

    @classmethod
    def x(cls, tiles: Iterable[int], sign: int = 1) -> "PauliProduct":
        return cls("X", bitvec(tiles), sign)

    @property
    def tiles(self) -> list[int]:
        return bits_of(self.support)

    @property
    def weight(self) -> int:
        return self.support.bit_count()

    def commutes_with(self, other: "PauliProduct") -> bool:
        if self.kind == other.kind:
            return True
        return (self.support & other.support).bit_count() % 2 == 0

    def __mul__(self, other: "PauliProduct") -> "PauliProduct":
        if self.kind != other.kind:
            raise ValueError("can only multiply same-type products")
        return PauliProduct(self.kind, self.support ^ other.support, self.sign * other.sign)

    def __str__(self) -> str:
        body = " ".join(f"{self.kind}_{q}" for q in self.tiles) or "I"
        return ("-" if self.sign < 0 else "") + body


@dataclass(frozen=True)
class CodeSpec:
    name: str
    n_tiles: int
    output_tiles: tuple[int, ...]
    frame_generators: tuple[PauliProduct, ...]
    x_detectors: tuple[PauliProduct, ...]
    # output tile -> input tiles whose X-outcome parity fixes its Z correction
    output_partners: tuple[tuple[int, int], ...]
    input_state: str = "T"
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @property
    def k(self) -> int:
        return len(self.frame_generators)

    @property
    def output_mask(self) -> int:
        return bitvec(self.output_tiles)

    @property
    def input_tiles(self) -> list[int]:
        return [q for q in range(self.n_tiles) if q not in self.output_tiles]

    @property
    def input_mask(self) -> int:
        return ((1 << self.n_tiles) - 1) ^ self.output_mask

    @property
    def generator_sign_bits(self) -> int:
        return bitvec(j for j, g in enumerate(self.frame_generators) if g.sign < 0)

    def generator_matrix(self) -> Gf2Matrix:
        """Tiles x generators incidence matrix; column ``j`` is the support of generator ``j``."""
        key = "gen_matrix"
        if key not in self._cache:
            rows = [0] * self.n_tiles
            for j, g in enumerate(self.frame_generators):
                for q in g.tiles:
                    rows[q] |= 1 << j
            self._cache[key] = Gf2Matrix(tuple(rows), self.k)
        return self._cache[key]

    def decompose(self, support: int) -> Optional[int]:
        memo = self._cache.setdefault("decompose", {})
        if support not in memo:
            memo[support] = gf2.solve(self.generator_matrix(), support)
        return memo[support]

    def detector_masks(self) -> list[int]:
        """X detectors that are readable from the terminal input measurements alone."""
        return [d.support for d in self.x_detectors if not d.support & self.output_mask]


def build_t15() -> CodeSpec:
    """Tesseract context: [[15,1,3]] Reed-Muller code on tiles 1-15 in a Bell pair with tile 0."""
    z_labels = ["****", "1***", "*1**", "**1*", "***1", "11**", "1*1*", "1**1", "*11*", "*1*1", "**11"]
    x_labels = ["1***", "*1**", "**1*", "***1"]
    return CodeSpec(
        name="t15",
        n_tiles=16,
        output_tiles=(0,),
        frame_generators=tuple(PauliProduct.z(label_tiles(s)) for s in z_labels),
        x_detectors=tuple(PauliProduct.x(label_tiles(s)) for s in x_labels),
        output_partners=((0, bitvec(range(1, 16))),),
    )


def build_ccz() -> CodeSpec:
    """Cube context: [[8,3,2]] code on tiles 0-7 with Bell pairs to output tiles 8, 9, 10."""
    gens = [PauliProduct.z(label_tiles(s)) for s in ["***", "0**", "*0*", "**0"]]
    gens += [
        PauliProduct.z(label_tiles("*00") + [8], -1),
        PauliProduct.z(label_tiles("0*0") + [9], -1),
        PauliProduct.z(label_tiles("00*") + [10], -1),
    ]
    dets = [
        PauliProduct.x(label_tiles("***")),
        PauliProduct.x(label_tiles("0**") + [8]),
        PauliProduct.x(label_tiles("*0*") + [9]),
        PauliProduct.x(label_tiles("**0") + [10]),
    ]
    partners = tuple((o, bitvec(label_tiles(s))) for o, s in [(8, "0**"), (9, "*0*"), (10, "**0")])
    return CodeSpec(
        name="ccz",
        n_tiles=11,
        output_tiles=(8, 9, 10),
        frame_generators=tuple(gens),
        x_detectors=tuple(dets),
        output_partners=partners,
    )


_CODES = {"t15": build_t15, "ccz": build_ccz}
_CODE_CACHE: dict[str, CodeSpec] = {}


def get_code(name: str) -> CodeSpec:
    if name not in _CODES:
        raise KeyError(f"unknown code {name!r}; expected one of {sorted(_CODES)}")
    if name not in _CODE_CACHE:
        _CODE_CACHE[name] = _CODES[name]()
    return _CODE_CACHE[name]


def decompose_support(code: CodeSpec, s: int) -> Optional[int]:
    """Coefficients (bit ``j`` = generator ``j``) whose supports XOR to ``s``, or ``None``."""
    if s >> code.n_tiles:
        raise ValueError(f"support {s:#x} exceeds {code.n_tiles} tiles")
    return code.decompose(s)


def expected_sign(code: CodeSpec, s: int) -> Optional[int]:
    """Sign of the stabilizer with support ``s`` in the zero frame."""
    c = code.decompose(s)
    if c is None:
        return None
    return -1 if (c & code.generator_sign_bits).bit_count() % 2 else 1


@dataclass(frozen=True)
class Step:
    measurement: PauliProduct
    stage: Optional[str] = None
    destabilizer: Optional[PauliProduct] = None


@dataclass(frozen=True)
class MeasurementSequence:
    code: CodeSpec
    steps: tuple[Step, ...]

    @classmethod
    def from_supports(cls, code: CodeSpec, supports: Iterable[int]) -> "MeasurementSequence":
        return cls(code, tuple(Step(PauliProduct("Z", s)) for s in supports))

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def supports(self) -> list[int]:
        return [st.measurement.support for st in self.steps]

    def without(self, i: int) -> "MeasurementSequence":
        return replace(self, steps=self.steps[:i] + self.steps[i + 1 :])

    def inserted(self, i: int, step: Step) -> "MeasurementSequence":
        return replace(self, steps=self.steps[:i] + (step,) + self.steps[i:])

    def appended(self, *steps: Step) -> "MeasurementSequence":
        return replace(self, steps=self.steps + tuple(steps))

    def permuted(self, order: Sequence[int]) -> "MeasurementSequence":
        return replace(self, steps=tuple(self.steps[i] for i in order))

    def prefix(self, n: int) -> "MeasurementSequence":
        return replace(self, steps=self.steps[:n])


# -- destabilizers -----------------------------------------------------------


@dataclass
class DestabilizerCheck:
    step: int
    anticommutes_own: bool
    commutes_others: bool

    @property
    def ok(self) -> bool:
        return self.anticommutes_own and self.commutes_others


@dataclass
class DestabilizerReport:
    n_destabilizers: int
    independent: bool
    full_rank: bool
    checks: list[DestabilizerCheck]
    touched_tiles: int

    @property
    def ok(self) -> bool:
        return self.independent and self.full_rank and all(c.ok for c in self.checks)


def verify_destabilizers(seq: MeasurementSequence) -> DestabilizerReport:
    carrying = [i for i, st in enumerate(seq.steps) if st.destabilizer is not None]
    supports = [seq.steps[i].measurement.support for i in carrying]
    independent = gf2.is_independent(supports, seq.code.n_tiles)
    coeffs = [seq.code.decompose(s) for s in supports]
    full_rank = (
        None not in coeffs and gf2.ImageBasis.from_vectors(coeffs, seq.code.k).rank == seq.code.k
    )
    checks = []
    touched = 0
    for i in carrying:
        d = seq.steps[i].destabilizer
        touched |= d.support
        own = not d.commutes_with(seq.steps[i].measurement)
        others = all(d.commutes_with(seq.steps[j].measurement) for j in carrying if j != i)
        checks.append(DestabilizerCheck(i, own, others))
    return DestabilizerReport(len(carrying), independent, full_rank, checks, touched)


def with_derived_destabilizers(seq: MeasurementSequence) -> MeasurementSequence:
    """Attach X destabilizers to the first independent steps of a sequence that has none.

    Steps are taken greedily in order until the frame is spanned; each chosen
    step gets an X product that anticommutes with it and commutes with the
    other chosen steps.  Sequences that already carry destabilizers are
    returned unchanged.
    """
    if any(st.destabilizer is not None for st in seq.steps):
        return seq
    code = seq.code
    chosen: list[int] = []
    basis = gf2.ImageBasis.empty(code.k)
    for i, s in enumerate(seq.supports):
        c = code.decompose(s)
        if c is None:
            raise UnresolvableSupportError(f"step {i} is outside the {code.name} stabilizer span")
        if not basis.contains(c):
            basis = basis.extend(c)
            chosen.append(i)
    m = Gf2Matrix(tuple(seq.supports[i] for i in chosen), code.n_tiles)
    steps = list(seq.steps)
    for j, i in enumerate(chosen):
        x = gf2.solve(m, 1 << j)
        steps[i] = replace(steps[i], destabilizer=PauliProduct.x(bits_of(x)))
    return replace(seq, steps=tuple(steps))


# -- Hamming redundancy --------------------------------------------------------

HAMMING_15_11 = (
    (1, 1, 1, 0, 0, 0, 1, 1, 1, 0, 1),
    (1, 0, 0, 1, 1, 0, 1, 1, 0, 1, 1),
    (0, 1, 0, 1, 0, 1, 1, 0, 1, 1, 1),
    (0, 0, 1, 0, 1, 1, 0, 1, 1, 1, 1),
)


def _label_bit_order(generators: Sequence[PauliProduct]) -> list[int]:
    # column pattern -> tesseract label: a 1 marks a summed index ('*'), a 0 an unsummed one ('1')
    index = {g.support: j for j, g in enumerate(generators)}
    order = []
    for col in zip(*HAMMING_15_11):
        label = "".join("*" if b else "1" for b in col)
        s = bitvec(label_tiles(label))
        if s not in index:
            raise ValueError("generators are not the tesseract set; pass bit_order explicitly")
        order.append(index[s])
    return order


def hamming_redundancy(
    generators: Sequence[PauliProduct], bit_order: Optional[Sequence[int]] = None
) -> list[PauliProduct]:
    """Four check products encoding 11 generator outcomes in the [15,11,3] Hamming code.

    ``bit_order[c]`` names the generator assigned to column ``c`` of the
    encoding matrix.  By default columns are matched to tesseract labels.
    """
    if len(generators) != 11:
        raise ValueError(f"need exactly 11 generators, got {len(generators)}")
    order = list(bit_order) if bit_order is not None else _label_bit_order(generators)
    if sorted(order) != list(range(11)):
        raise ValueError("bit_order must be a permutation of range(11)")
    out = []
    for row in HAMMING_15_11:
        prod = PauliProduct("Z", 0)
        for c, b in enumerate(row):
            if b:
                prod = prod * generators[order[c]]
        out.append(prod)
    return out


def hamming_sequence(code: Optional[CodeSpec] = None, bit_order=None) -> MeasurementSequence:
    """The 11 tesseract generators in canonical order followed by their 4 Hamming checks."""
    code = code or get_code("t15")
    gens = list(code.frame_generators)
    return MeasurementSequence.from_supports(
        code, [g.support for g in gens + hamming_redundancy(gens, bit_order)]
    )


def repeated_generators(code: Optional[CodeSpec] = None, times: int = 3) -> MeasurementSequence:
    code = code or get_code("t15")
    return MeasurementSequence.from_supports(code, [g.support for g in code.frame_generators] * times)


# -- sequence files ----------------------------------------------------------------


def _parse_product(text: str, kind: str, lineno: int, col: int, n_tiles: int) -> PauliProduct:
    tokens = text.split()
    sign = 1
    if tokens and tokens[0].startswith("-"):
        sign = -1
        tokens[0] = tokens[0][1:]
        if not tokens[0]:
            tokens.pop(0)
    if not tokens or tokens[0] != kind:
        raise SequenceFormatError(f"expected {kind!r} product", lineno, col)
    tiles = []
    for tok in tokens[1:]:
        try:
            q = int(tok)
        except ValueError:
            raise SequenceFormatError(f"bad tile {tok!r}", lineno, col) from None
        if not 0 <= q < n_tiles:
            raise SequenceFormatError(f"tile {q} out of range 0..{n_tiles - 1}", lineno, col)
        if q in tiles:
            raise SequenceFormatError(f"repeated tile {q}", lineno, col)
        tiles.append(q)
    if not tiles:
        raise SequenceFormatError("empty support", lineno, col)
    return PauliProduct(kind, bitvec(tiles), sign)


def parse_sequence(text: str, code: Optional[CodeSpec] = None) -> MeasurementSequence:
    """Parse the line-oriented sequence format.

    ``code t15`` or ``code ccz`` selects the code; each other non-comment line
    is ``[-]Z <tile>... [; stage=<label>] [; destab X <tile>...]``.
    """
    steps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("code"):
            parts = line.split()
            if len(parts) != 2:
                raise SequenceFormatError("header must be 'code <name>'", lineno)
            try:
                header_code = get_code(parts[1])
            except KeyError as exc:
                raise SequenceFormatError(str(exc.args[0]), lineno, raw.index(parts[1]) + 1) from None
            if code is not None and code.name != header_code.name:
                raise SequenceFormatError(f"header code {parts[1]} conflicts with {code.name}", lineno)
            if steps:
                raise SequenceFormatError("code header must precede the steps", lineno)
            code = header_code
            continue
        if code is None:
            raise SequenceFormatError("missing 'code' header", lineno)
        fields = raw.split(";")
        col = 1
        meas = _parse_product(fields[0], "Z", lineno, col, code.n_tiles)
        stage = destab = None
        col += len(fields[0]) + 1
        for fld in fields[1:]:
            body = fld.strip()
            if body.startswith("stage="):
                stage = body[len("stage=") :].strip() or None
            elif body.startswith("destab"):
                destab = _parse_product(body[len("destab") :], "X", lineno, col, code.n_tiles)
            else:
                raise SequenceFormatError(f"unknown field {body!r}", lineno, col)
            col += len(fld) + 1
        steps.append(Step(meas, stage, destab))
    if code is None:
        raise SequenceFormatError("missing 'code' header", 1)
    return MeasurementSequence(code, tuple(steps))


def format_step(step: Step) -> str:
    m = step.measurement
    text = ("-" if m.sign < 0 else "") + "Z " + " ".join(map(str, m.tiles))
    parts = [text]
    if step.stage:
        parts.append(f"stage={step.stage}")
    if step.destabilizer is not None:
        parts.append("destab X " + " ".join(map(str, step.destabilizer.tiles)))
    return " ; ".join(parts)


def format_sequence(seq: MeasurementSequence) -> str:
    lines = [f"code {seq.code.name}"] + [format_step(st) for st in seq.steps]
    return "\n".join(lines) + "\n"


def load_sequence(path) -> MeasurementSequence:
    return parse_sequence(Path(path).read_text(encoding="utf-8"))


def fixture_path(name: str) -> Path:
    """Path of a sequence file shipped with the package (e.g. ``t15_table2.seq``)."""
    return Path(str(resources.files("magicft") / "data" / name))


def load_fixture(name: str) -> MeasurementSequence:
    return load_sequence(fixture_path(name))
