"""Dense state-vector simulation of the distillation circuits.

Bit ``q`` of a basis index is the computational value of tile ``q``.  A run
prepares the output tiles in |+> and the input tiles in T|+>, measures the Z
products of a sequence in order (optionally injecting faults), reconstructs
the Z frame, applies the Clifford frame correction, and finally measures
every input tile in the X basis.  All 2^(inputs) terminal outcomes are kept
as explicit branches, so detection probabilities and post-selected output
fidelities are exact for each sampled Z frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import gf2
from ..codes import CodeSpec, MeasurementSequence, with_derived_destabilizers
from ..ftcheck import ErrorPattern, FrameSystem, MeasFlip, XError
from .phasepoly import PhasePolyOperator

FIDELITY_TOL = 1e-6
BRANCH_CUTOFF = 1e-12

_W = np.exp(1j * np.pi / 4)


class NullProjectionError(ValueError):
    pass


@dataclass
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.n > 16:
            raise ValueError("at most 16 qubits are supported")
        if self.amplitudes.shape != (1 << self.n,):
            raise ValueError("amplitude vector must have 2**n entries")

    @classmethod
    def product(cls, single: dict[int, np.ndarray], n: int) -> "StateVector":
        """Tensor product of one-qubit states ``single[q]`` (default |0>)."""
        psi = np.ones(1, dtype=complex)
        for q in reversed(range(n)):  # most significant tile first
            v = single.get(q, np.array([1, 0], dtype=complex))
            psi = np.kron(psi, v)
        return cls(n, psi)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amplitudes.copy())

    def normalized(self) -> "StateVector":
        nrm = self.norm
        if nrm == 0:
            raise NullProjectionError("cannot normalize a null state")
        return StateVector(self.n, self.amplitudes / nrm)

    def apply(self, op: PhasePolyOperator) -> "StateVector":
        if op.n != self.n:
            raise ValueError("operator and state sizes differ")
        return StateVector(self.n, op.apply(self.amplitudes))

    def apply_x(self, mask: int) -> None:
        self.amplitudes = self.amplitudes[_indices(self.n) ^ mask]

    def apply_phase(self, mask: int, k: int) -> None:
        """Multiply by ``w**(k * |x & mask|)``: k=2 is S on every tile of ``mask``."""
        counts = np.bitwise_count(_indices(self.n) & mask)
        self.amplitudes = self.amplitudes * _W ** np.mod(k * counts, 8)

    def parities(self, mask: int) -> np.ndarray:
        return (np.bitwise_count(_indices(self.n) & mask) & 1).astype(bool)

    def outcome_probability(self, mask: int, outcome: int) -> float:
        """Probability (times the current norm squared) of Z-product outcome ``outcome``."""
        sel = self.parities(mask) == bool(outcome)
        return float(np.sum(np.abs(self.amplitudes[sel]) ** 2))

    def project(self, mask: int, outcome: int) -> None:
        """Unnormalized projection onto Z-product eigenvalue ``(-1)**outcome``."""
        self.amplitudes = np.where(self.parities(mask) == bool(outcome), self.amplitudes, 0)

    def expectation_x(self, mask: int) -> float:
        """<psi| X(mask) |psi> for a normalized state."""
        shifted = self.amplitudes[_indices(self.n) ^ mask]
        return float(np.real(np.vdot(self.amplitudes, shifted)))


_IDX_CACHE: dict[int, np.ndarray] = {}


def _indices(n: int) -> np.ndarray:
    if n not in _IDX_CACHE:
        _IDX_CACHE[n] = np.arange(1 << n, dtype=np.int64)
    return _IDX_CACHE[n]


_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
_T_PLUS = np.array([1, _W], dtype=complex) / np.sqrt(2)


def input_state(code: CodeSpec) -> StateVector:
    """|+> on output tiles, T|+> on input tiles."""
    single = {q: (_PLUS if q in code.output_tiles else _T_PLUS) for q in range(code.n_tiles)}
    return StateVector.product(single, code.n_tiles)


def build_code_state(code: CodeSpec, frame: int, normalize: bool = True) -> StateVector:
    """Project the input state onto the Z-generator eigenspaces selected by ``frame``.

    Bit ``j`` of ``frame`` set means generator ``j`` takes the opposite of its
    signed eigenvalue.  With ``normalize=False`` the raw projection is returned.
    """
    if frame >> code.k:
        raise ValueError(f"frame has more than {code.k} bits")
    psi = input_state(code)
    for j, g in enumerate(code.frame_generators):
        outcome = ((frame >> j) & 1) ^ (1 if g.sign < 0 else 0)
        psi.project(g.support, outcome)
    if psi.norm < 1e-14:
        raise NullProjectionError(f"frame {frame:#x} has a null projection")
    return psi.normalized() if normalize else psi


# -- ideal outputs ----------------------------------------------------------


def _output_ideal(code: CodeSpec) -> np.ndarray:
    """Ideal output-tile state in the zero X-outcome branch, indexed by output position bits."""
    m = len(code.output_tiles)
    idx = np.arange(1 << m)
    if code.name == "t15":
        # T-dagger |+>, equal to X|T> up to a global phase
        return np.array([1, np.conj(_W)], dtype=complex) / np.sqrt(2)
    if code.name == "ccz":
        amp = np.where(idx == (1 << m) - 1, -1.0, 1.0).astype(complex)
        return amp / np.sqrt(1 << m)
    raise KeyError(code.name)


def _pauli_z_correction(code: CodeSpec, s: np.ndarray) -> np.ndarray:
    """Per-branch mask (over output positions) of Z flips implied by X outcomes ``s``."""
    pos = {q: i for i, q in enumerate(code.output_tiles)}
    out = np.zeros_like(s)
    for o, partners in code.output_partners:
        out |= (np.bitwise_count(s & partners) & 1) << pos[o]
    return out


# -- circuit simulation ------------------------------------------------------


@dataclass
class FrameOutcome:
    frame_detected: bool
    detection_probability: float
    min_fidelity: Optional[float]
    outcomes: int = 0


@dataclass
class SimulationResult:
    detected_fraction: float
    undetected_output_fidelity: Optional[float]
    samples: list[FrameOutcome] = field(default_factory=list)
    seed: Optional[int] = None

    @property
    def violation(self) -> bool:
        f = self.undetected_output_fidelity
        return f is not None and f < 1 - FIDELITY_TOL


class CircuitSimulator:
    """Reusable per-sequence data for repeated runs with different faults."""

    def __init__(self, seq: MeasurementSequence):
        seq = with_derived_destabilizers(seq)
        self.seq = seq
        self.code = seq.code
        self.system = FrameSystem(seq, include_output=True)
        code = self.code
        self.n = code.n_tiles
        self.expected = [gf2.parity(row & code.generator_sign_bits) for row in self.system.matrix.rows]
        self.destab = [
            (i, st.destabilizer.support) for i, st in enumerate(seq.steps) if st.destabilizer is not None
        ]
        self.inputs = code.input_tiles
        self.outputs = list(code.output_tiles)
        self.ideal = _output_ideal(code)
        self.detectors = code.detector_masks()
        self._init = input_state(code)

    def _terminal(self, psi: StateVector) -> tuple[float, Optional[float]]:
        """X-measure all inputs; return (detection probability, min undetected fidelity)."""
        n = self.n
        t = psi.amplitudes.reshape((2,) * n)
        # axis a of the tensor is tile n-1-a
        h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        for q in self.inputs:
            t = np.moveaxis(np.tensordot(h, t, axes=([1], [n - 1 - q])), 0, n - 1 - q)
        # reorder to (inputs high..low, outputs high..low) -> M[s, o]
        in_axes = [n - 1 - q for q in reversed(self.inputs)]
        out_axes = [n - 1 - q for q in reversed(self.outputs)]
        m = np.transpose(t, in_axes + out_axes).reshape(1 << len(self.inputs), 1 << len(self.outputs))
        # compact branch index -> tile bit vector over the full register
        s_compact = np.arange(m.shape[0], dtype=np.int64)
        s_full = np.zeros_like(s_compact)
        for pos, q in enumerate(self.inputs):
            s_full |= ((s_compact >> pos) & 1) << q
        probs = np.sum(np.abs(m) ** 2, axis=1)
        total = probs.sum()
        detected = np.zeros(m.shape[0], dtype=bool)
        for d in self.detectors:
            detected |= (np.bitwise_count(s_full & d) & 1).astype(bool)
        p_det = float(probs[detected].sum() / total)
        keep = (~detected) & (probs > BRANCH_CUTOFF * total)
        if not keep.any():
            return p_det, None
        zc = _pauli_z_correction(self.code, s_full[keep])
        o_idx = np.arange(m.shape[1])
        signs = np.where(np.bitwise_count(zc[:, None] & o_idx[None, :]) & 1, -1.0, 1.0)
        ideal = self.ideal[None, :] * signs
        overlap = np.abs(np.sum(np.conj(ideal) * m[keep], axis=1)) ** 2
        fid = overlap / probs[keep]
        return p_det, float(fid.min())

    def run_frame(self, pattern: Optional[ErrorPattern], rng: np.random.Generator) -> FrameOutcome:
        n_steps = len(self.seq)
        flips = 0
        x_at: dict[int, int] = {}
        if pattern is not None:
            for loc in pattern.locations:
                if isinstance(loc, MeasFlip):
                    flips ^= 1 << loc.step
                elif isinstance(loc, XError):
                    x_at[loc.slot] = x_at.get(loc.slot, 0) ^ (1 << loc.tile)
        psi = self._init.copy()
        recorded = 0
        for i, s in enumerate(self.seq.supports):
            if x_at.get(i):
                psi.apply_x(x_at[i])
            total = psi.norm ** 2
            p0 = psi.outcome_probability(s, 0) / total
            outcome = 0 if rng.random() < p0 else 1
            if p0 > 1 - 1e-12:
                outcome = 0
            elif p0 < 1e-12:
                outcome = 1
            psi.project(s, outcome)
            psi = psi.normalized()
            recorded |= (outcome ^ ((flips >> i) & 1)) << i
        if x_at.get(n_steps):
            psi.apply_x(x_at[n_steps])
        u = gf2.solve(self.system.matrix, recorded)
        if u is None:
            return FrameOutcome(True, 1.0, None, recorded)
        corr = 0
        for i, d in self.destab:
            if gf2.parity(self.system.matrix.rows[i] & u) != self.expected[i]:
                corr ^= d
        in_corr = corr & self.code.input_mask
        out_corr = corr & self.code.output_mask
        # the Clifford frame correction on input tiles reduces to S-dagger ahead of
        # the X measurement (its X part only phases the outcome); outputs get X
        psi.apply_phase(in_corr, 6)
        psi.apply_x(out_corr)
        p_det, fid = self._terminal(psi)
        return FrameOutcome(False, p_det, fid, recorded)

    def run(self, pattern: Optional[ErrorPattern], frame_samples: int, rng_seed: int) -> SimulationResult:
        if rng_seed is None:
            raise ValueError("an explicit rng_seed is required")
        if frame_samples < 1:
            raise ValueError("frame_samples must be positive")
        rng = np.random.default_rng(rng_seed)
        samples = [self.run_frame(pattern, rng) for _ in range(frame_samples)]
        fids = [s.min_fidelity for s in samples if s.min_fidelity is not None]
        return SimulationResult(
            detected_fraction=float(np.mean([s.detection_probability for s in samples])),
            undetected_output_fidelity=min(fids) if fids else None,
            samples=samples,
            seed=rng_seed,
        )


def simulate_circuit(
    seq: MeasurementSequence,
    pattern: Optional[ErrorPattern] = None,
    frame_samples: int = 32,
    rng_seed: Optional[int] = None,
) -> SimulationResult:
    """Run ``frame_samples`` independent Z frames of ``seq`` with ``pattern`` injected."""
    return CircuitSimulator(seq).run(pattern, frame_samples, rng_seed)
