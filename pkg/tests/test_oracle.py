import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magicft import codes
from magicft.codes import label_tiles
from magicft.ftcheck import ErrorPattern, MeasFlip, XError
from magicft.oracle import crossval, relations
from magicft.oracle.phasepoly import PhasePolyOperator as Op
from magicft.oracle.phasepoly import compose, product
from magicft.oracle.statevec import CircuitSimulator, StateVector, build_code_state, simulate_circuit

W = np.exp(1j * np.pi / 4)


# -- phase polynomial algebra -----------------------------------------------------


def test_phasepoly_examples():
    n = 1
    lhs = compose(Op.x(n, [0]), Op.s(n, [0]))
    rhs = compose(Op.s(n, [0]), compose(Op.z(n, [0]), Op.x(n, [0])))
    assert lhs.phase_relative_to(rhs) is not None
    u = Op.t(3, [0, 2])
    assert compose(u, Op.identity(3)) == u
    assert compose(Op.t(2, [1]), Op.t(2, [1])) == Op.s(2, [1])
    assert -(-u) == u and (-u) != u
    assert (-u).phase_relative_to(u) == 4


def _random_op(draw_bits, n):
    kind, tiles, controls = draw_bits
    tiles = [q % n for q in tiles] or [0]
    ops = {
        0: lambda: Op.x(n, set(tiles)),
        1: lambda: Op.t(n, set(tiles)),
        2: lambda: Op.s(n, set(tiles)),
        3: lambda: Op.sdg(n, set(tiles)),
        4: lambda: Op.z(n, set(tiles)),
        5: lambda: Op.controlled(n, {c % n for c in controls}, Op.z(n, set(tiles))),
        6: lambda: -Op.tdg(n, set(tiles)),
    }
    return ops[kind]()


op_spec = st.tuples(st.integers(0, 6), st.lists(st.integers(0, 7), max_size=3), st.lists(st.integers(0, 7), max_size=2))


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4), st.lists(op_spec, min_size=1, max_size=5))
def test_compose_matches_dense_matrices(n, specs):
    ops = [_random_op(s, n) for s in specs]
    dense = np.eye(1 << n, dtype=complex)
    for op in ops:
        dense = dense @ op.to_matrix()
    assert np.allclose(product(*ops).to_matrix(), dense)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), op_spec, st.integers(0, 1 << 20))
def test_apply_matches_matrix(n, op_desc, seed):
    op = _random_op(op_desc, n)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    assert np.allclose(op.apply(v), op.to_matrix() @ v)


def test_phasepoly_validation():
    with pytest.raises(ValueError):
        compose(Op.identity(2), Op.identity(3))
    with pytest.raises(ValueError):
        Op.controlled(2, [0], Op.x(2, [1]))
    with pytest.raises(ValueError):
        Op.x(2, [3])


# -- non-Abelian stabilizer identities ----------------------------------------------


@pytest.mark.parametrize("name,count", [("t15", 3), ("ccz", 5)])
def test_relations_hold_exactly(name, count):
    rep = relations.verify_relations(name)
    assert rep.ok and len(rep.checks) == count
    assert all(c.phase == 0 for c in rep.checks)


def test_broken_relation_detected():
    n = 16
    x1 = Op.x(n, label_tiles("1***"))
    lhs = x1 @ Op.t(n, label_tiles("****"))
    wrong = product(Op.t(n, label_tiles("****")), Op.s(n, label_tiles("1***")), x1)
    assert lhs.phase_relative_to(wrong) is None


def test_unknown_relation_set():
    with pytest.raises(KeyError):
        relations.verify_relations("steane")


# -- state vectors ---------------------------------------------------------------------


def test_statevector_basics():
    psi = StateVector.product({0: np.array([0, 1], dtype=complex)}, 3)
    assert psi.amplitudes[1] == 1
    psi.apply_x(0b110)
    assert psi.amplitudes[0b111] == 1
    plus = StateVector.product({q: np.array([1, 1]) / np.sqrt(2) for q in range(2)}, 2)
    assert plus.outcome_probability(0b11, 0) == pytest.approx(0.5)
    assert plus.expectation_x(0b01) == pytest.approx(1.0)
    plus.project(0b11, 1)
    assert plus.norm == pytest.approx(np.sqrt(0.5))
    with pytest.raises(ValueError):
        StateVector(17, np.zeros(1 << 17))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 1 << 30), st.integers(1, 7), st.integers(0, 7))
def test_phase_and_projection_match_dense(seed, mask, k):
    n = 3
    rng = np.random.default_rng(seed)
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi = StateVector(n, v.copy())
    psi.apply_phase(mask, k)
    idx = np.arange(8)
    want = v * W ** (k * np.array([bin(i & mask).count("1") for i in idx]))
    assert np.allclose(psi.amplitudes, want)
    psi = StateVector(n, v.copy())
    psi.project(mask, 1)
    odd = np.array([bin(i & mask).count("1") % 2 for i in idx]) == 1
    assert np.allclose(psi.amplitudes, np.where(odd, v, 0))


def test_code_state_is_invariant_under_transversal_t(t15):
    psi = build_code_state(t15, 0)
    t_all = Op.t(16, range(16))
    assert np.max(np.abs(t_all.apply(psi.amplitudes) - psi.amplitudes)) < 1e-9


def test_frames_are_equally_likely(t15, ccz):
    rng = np.random.default_rng(0)
    norms = [build_code_state(t15, int(f), normalize=False).norm for f in rng.integers(0, 1 << 11, 12)]
    assert np.allclose(norms, 2 ** (-11 / 2))
    norms = [build_code_state(ccz, f, normalize=False).norm for f in range(1 << 7)]
    assert np.allclose(norms, 2 ** (-7 / 2))


def test_code_state_stabilized_by_frame_generators(ccz):
    psi = build_code_state(ccz, 0b0100101)
    for j, g in enumerate(ccz.frame_generators):
        want = g.sign * (-1) ** ((0b0100101 >> j) & 1)
        parity = psi.parities(g.support)
        assert np.allclose(np.where(parity, -1, 1) * psi.amplitudes, want * psi.amplitudes)


def test_frame_out_of_range(ccz):
    with pytest.raises(ValueError):
        build_code_state(ccz, 1 << 7)


# -- circuit simulation ---------------------------------------------------------------


def test_noiseless_t15(table2):
    res = simulate_circuit(table2, None, 32, rng_seed=1)
    assert res.detected_fraction < 1e-9
    assert abs(res.undetected_output_fidelity - 1) < 1e-9


def test_noiseless_ccz(table3):
    res = simulate_circuit(table3, None, 32, rng_seed=2)
    assert res.detected_fraction < 1e-9
    assert abs(res.undetected_output_fidelity - 1) < 1e-9


def test_noiseless_without_destabilizers(t15):
    res = simulate_circuit(codes.repeated_generators(t15, 2), None, 8, rng_seed=3)
    assert abs(res.undetected_output_fidelity - 1) < 1e-9


def test_single_flip_detected(table2):
    res = simulate_circuit(table2, ErrorPattern.of(MeasFlip(0)), 32, rng_seed=4)
    assert res.detected_fraction > 1 - 1e-9 and res.undetected_output_fidelity is None


def test_generators_once_flip_is_genuine_error(t15):
    res = simulate_circuit(codes.repeated_generators(t15, 1), ErrorPattern.of(MeasFlip(0)), 4, rng_seed=5)
    assert res.violation


def test_late_x_error_is_harmless(table2):
    res = simulate_circuit(table2, ErrorPattern.of(XError(5, len(table2))), 8, rng_seed=6)
    assert not res.violation


def test_simulation_is_seeded(table2):
    pat = ErrorPattern.of(XError(3, 2))
    a = simulate_circuit(table2, pat, 4, rng_seed=9)
    b = simulate_circuit(table2, pat, 4, rng_seed=9)
    assert [s.outcomes for s in a.samples] == [s.outcomes for s in b.samples]
    with pytest.raises(ValueError):
        simulate_circuit(table2, pat, 4, rng_seed=None)
    with pytest.raises(ValueError):
        CircuitSimulator(table2).run(pat, 0, 1)


# -- cross-validation --------------------------------------------------------------------


def test_crossval_table3_singles(table3):
    rep = crossval.crossvalidate(table3, sample_policy=crossval.SamplePolicy(size=1))
    assert rep.n_patterns == 8 + 9 * 8
    assert rep.ok, rep.disagreements


def test_crossval_table2_sampled_pairs(table2):
    policy = crossval.SamplePolicy(size=2, exhaustive=False, n_random=60, seed=11)
    rep = crossval.crossvalidate(table2, sample_policy=policy)
    assert rep.n_patterns == 60 and rep.ok


def test_crossval_budget_and_record(table2):
    rep = crossval.crossvalidate(table2, pattern_budget=10)
    rec = rep.as_record()
    assert rep.n_patterns == 10 and rec["patterns"] == 10 and rec["disagreements"] == []


def test_crossval_flags_genuine_hamming_violation():
    seq = codes.hamming_sequence()
    rep = crossval.crossvalidate(seq, sample_policy=crossval.SamplePolicy(size=1))
    # the checker is conservative: it may flag harmless patterns, never miss harmful ones
    assert all(d.verdict == "violation" for d in rep.disagreements)
    assert rep.verdict_counts["violation"] > len(rep.disagreements)
