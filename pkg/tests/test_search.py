import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magicft import codes, ftcheck
from magicft.search import estimate as est
from magicft.search import kernel, metrics, rng, sampler
from magicft.search import get_profile, local_optimize, sample_sequence, stage_metrics
from magicft.search.sampler import SamplerConstraints, build_pools


# -- random streams ------------------------------------------------------------------


def test_mix64_reference_values():
    # splitmix64 output for state increments of the golden gamma starting at 0
    assert rng.mix64(rng.GAMMA) == 0xE220A8397B1DCDAF
    assert rng.mix64(2 * rng.GAMMA) == 0x6E789E6AA1B965F4


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**63), st.integers(0, 2**40), st.integers(0, 30), st.integers(1, 2**31))
def test_python_and_compiled_streams_agree(seed, index, j, m):
    key = rng.sample_key(seed, index)
    assert int(kernel._sample_key(kernel.kernel_seed_key(seed), np.int64(index))) == key
    assert int(kernel._below(np.uint64(key), j, m)) == rng.bounded(rng.draw(key, j), m)


def test_stream_bounds():
    s = rng.Stream(5, 3)
    vals = [s.below(7) for _ in range(2000)]
    assert set(vals) == set(range(7))
    assert rng.Stream(5, 3).below(7) == vals[0]


# -- sampler -----------------------------------------------------------------------------


def test_profiles():
    assert set(sampler.PROFILES) == {"std17", "free17", "subset-std17", "subset-free17"}
    with pytest.raises(KeyError):
        get_profile("nope")
    with pytest.raises(ValueError):
        SamplerConstraints(source="bogus")
    with pytest.raises(ValueError):
        SamplerConstraints(length=10, prefix_excluding_output=9, suffix_including_output=3)


def test_candidate_pools(t15):
    avoid, touch, every = sampler._candidates("t15", 4, "stabilizers")
    assert len(avoid) == 105 and len(touch) == 35 and len(every) == 140
    assert all(t15.decompose(s) is not None and s.bit_count() == 4 for s in every)
    sa, st_, se = sampler._candidates("t15", 4, "subsets")
    assert len(se) == 1820 and len(st_) == 455


@pytest.mark.parametrize("profile", ["std17", "subset-std17"])
def test_constrained_shape(profile, t15):
    c = get_profile(profile)
    for i in range(200):
        seq = sample_sequence(c, 42, i)
        assert len(seq) == 17
        assert all(s.bit_count() == 4 for s in seq.supports)
        assert all(not s & 1 for s in seq.supports[:14])
        assert all(s & 1 for s in seq.supports[14:])


def test_subset_profile_yields_out_of_span_supports():
    c = get_profile("subset-free17")
    seq = sample_sequence(c, 0, 0)
    assert any(seq.code.decompose(s) is None for s in seq.supports)
    assert not ftcheck.is_sufficient(seq)


def test_sampling_is_deterministic():
    c = get_profile("free17")
    a = [sample_sequence(c, 7, i).supports for i in range(20)]
    b = [sample_sequence(c, 7, i).supports for i in reversed(range(20))][::-1]
    assert a == b
    assert sample_sequence(c, 8, 0).supports != a[0]


def test_compiled_fill_matches_python_sampler():
    for name in ("std17", "free17", "subset-std17"):
        c = get_profile(name)
        pools = build_pools(c)
        sup = np.empty(17, dtype=np.int64)
        co = np.empty(17, dtype=np.int64)
        for i in range(50):
            kernel._fill(kernel.kernel_seed_key(99), i, pools.supports, pools.coeffs, pools.offsets,
                         pools.sizes, pools.position_pool, sup, co)
            assert sup.tolist() == sampler.sample_supports(c, 99, i, pools)


# -- compiled sufficiency kernel ----------------------------------------------------------


def _kernel_verdict(seq):
    code = seq.code
    coeffs = [code.decompose(s) for s in seq.supports]
    if None in coeffs:
        return False
    return kernel.check_arrays(seq.supports, coeffs, code.n_tiles, code.input_mask, code.k)


def _near_sufficient(seed, count):
    """Mutations of known sufficient sequences: the interesting side of the boundary."""
    base = [codes.load_fixture("t15_table2.seq"), codes.repeated_generators(), codes.hamming_sequence()]
    pool = sampler._candidates("t15", 4, "stabilizers")[2]
    rnd = random.Random(seed)
    for _ in range(count):
        seq = rnd.choice(base)
        sup = list(seq.supports)
        op = rnd.randrange(3)
        if op == 0:
            sup[rnd.randrange(len(sup))] = rnd.choice(pool)
        elif op == 1:
            del sup[rnd.randrange(len(sup))]
        else:
            i, j = rnd.randrange(len(sup)), rnd.randrange(len(sup))
            sup[i], sup[j] = sup[j], sup[i]
        yield codes.MeasurementSequence.from_supports(seq.code, sup)


def test_kernel_matches_reference_near_boundary():
    n_suff = 0
    for seq in _near_sufficient(1, 400):
        want = ftcheck.is_sufficient(seq)
        n_suff += want
        assert _kernel_verdict(seq) == want
    assert 20 < n_suff < 380


def test_kernel_matches_reference_random():
    c = get_profile("free17")
    for i in range(400):
        seq = sample_sequence(c, 3, i)
        assert _kernel_verdict(seq) == ftcheck.is_sufficient(seq)


def test_kernel_known_sequences(table2):
    assert _kernel_verdict(table2)
    assert _kernel_verdict(codes.repeated_generators())
    assert not _kernel_verdict(codes.hamming_sequence())
    assert not _kernel_verdict(table2.prefix(10))
    with pytest.raises(ValueError):
        kernel.sufficient_kernel(np.zeros(70, np.int64), np.zeros(70, np.int64), 70, 16, 0, 11)


# -- estimation ------------------------------------------------------------------------------


def test_estimate_empty_and_invalid():
    e = est.estimate_sufficiency_probability(get_profile("std17"), 0, seed=1)
    assert e.point is None and e.samples == 0 and e.z_score(1.0) is None
    with pytest.raises(ValueError):
        est.estimate_sufficiency_probability(get_profile("std17"), -1, seed=1)


def test_estimate_hits_are_sufficient():
    c = get_profile("free17")
    e = est.estimate_sufficiency_probability(c, 400_000, seed=2024)
    assert e.hits == len(e.hit_indices)
    for idx in e.hit_indices:
        assert ftcheck.is_sufficient(sample_sequence(c, 2024, idx))


def test_estimate_independent_of_batching():
    c = get_profile("free17")
    whole = est.estimate_sufficiency_probability(c, 300_000, seed=5)
    parts = [est.estimate_sufficiency_probability(c, 100_000, seed=5, start=s, batch=37_000) for s in (0, 100_000, 200_000)]
    assert whole.hit_indices == sum((p.hit_indices for p in parts), [])
    one = est.estimate_sufficiency_probability(c, 300_000, seed=5, threads=1)
    assert one.hit_indices == whole.hit_indices


def test_constrained_smoke_rate():
    e = est.estimate_sufficiency_probability(get_profile("std17"), 1_000_000, seed=1)
    assert e.hits in (0, 1, 2)


def test_probability_estimate_math():
    e = est.ProbabilityEstimate.from_counts(4, 10_000)
    assert e.point == 4e-4
    assert e.stderr == pytest.approx((4e-4 * (1 - 4e-4) / 1e4) ** 0.5)
    assert e.z_score(4e-4) == 0
    assert e.z_score(0.0) > 0


def test_logs_and_summary(tmp_path):
    c = get_profile("free17")
    e = est.estimate_sufficiency_probability(c, 600_000, seed=2024, profile="free17")
    records = est.hit_records(c, e)
    log = tmp_path / "hits.jsonl"
    est.append_log(log, records)
    back = est.read_log(log)
    assert back == records
    for r in back:
        seq = codes.parse_sequence(r["sequence"])
        assert seq.supports == sample_sequence(c, 2024, r["index"]).supports
    csv_path = tmp_path / "summary.csv"
    est.write_summary_csv(csv_path, [est.summary_row(e, records)])
    header, row = csv_path.read_text().splitlines()
    assert header.split(",") == est.SUMMARY_FIELDS
    assert row.startswith("free17,2024,600000,")


def test_stage1_fraction():
    recs = [{"stage1_prefix": p} for p in (0, 4, 5, 1)]
    f = est.stage1_fraction(recs)
    assert (f.hits, f.samples) == (2, 4)


# -- layout metrics -------------------------------------------------------------------------


def test_table2_stage_metrics(table2):
    m = stage_metrics(table2)
    assert m.stage1_prefix >= 4
    assert m.stage1_tiles == (1, 3, 4, 5, 6, 7, 8, 12, 15)
    assert m.suffix_ok
    labels = [st.stage for st in table2.steps[4:14]]
    by_label = [len(list(g)) for _, g in itertools.groupby(labels)]
    assert m.stage2_clusters == 4 and list(m.cluster_sizes) == by_label


def test_two_disjoint_supports_prefix(t15):
    seq = codes.MeasurementSequence.from_supports(t15, [0b11110, 0b1111 << 8, 0b1 | 0b1110000])
    length, union = metrics.stage1_prefix(seq)
    assert length >= 2 and union.bit_count() == 8


def test_stage1_allowed_area(table2):
    length, _ = metrics.stage1_prefix(table2, allowed=[1, 3, 4, 5, 6, 7, 8, 12, 15])
    assert length >= 4
    assert metrics.stage1_prefix(table2, allowed=[3, 7, 8, 12])[0] == 1


def test_greedy_clusters():
    assert metrics.greedy_clusters([0b11, 0b1100, 0b0110, 0b1000]) == [[0b11, 0b1100], [0b0110, 0b1000]]
    assert metrics.greedy_clusters([]) == []


def test_suffix_ok(t15):
    seq = codes.MeasurementSequence.from_supports(t15, [0b110, 0b11])
    assert not metrics.suffix_ok(seq)
    assert metrics.suffix_ok(seq, 1)


# -- local optimization -----------------------------------------------------------------------


def test_optimize_keeps_table2(table2):
    res = local_optimize(table2, seed=0)
    assert res.converged and res.sequence.supports == table2.supports
    assert res.additions == 0 and res.removals == 0


def test_optimize_removes_duplicate(table2):
    res = local_optimize(table2.appended(table2.steps[3]), seed=0)
    assert res.converged and res.removals == 1 and len(res.sequence) == 17
    assert all(ftcheck.check_necessity(res.sequence))


def test_optimize_from_empty(t15):
    empty = codes.MeasurementSequence(t15, ())
    res = local_optimize(empty, seed=3)
    assert res.converged
    assert ftcheck.is_sufficient(res.sequence)
    assert all(ftcheck.check_necessity(res.sequence))


def test_optimize_budget(t15):
    res = local_optimize(codes.MeasurementSequence(t15, ()), seed=3, retry_budget=5)
    assert not res.converged and res.additions == 5


def test_optimize_is_seeded(t15):
    start = sample_sequence(get_profile("std17"), 4, 0)
    assert local_optimize(start, 4).sequence == local_optimize(start, 4).sequence
