import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magicft import model
from magicft.model import ModelDomainError


def test_logical_error_rate_examples():
    assert model.logical_error_rate(0.007, 5) == 0.3
    assert model.logical_error_rate(0.007, 4) == 0.09
    assert model.logical_error_rate(7e-4, 5) == pytest.approx(3e-4, rel=1e-12)
    with pytest.raises(ModelDomainError):
        model.logical_error_rate(0.0, 3)
    with pytest.raises(ModelDomainError):
        model.logical_error_rate(1e-3, 0)


def test_model_constants_validated():
    with pytest.raises(ValueError):
        model.SurfaceCodeErrorModel(p_T=1.5)
    assert model.DistillationModel().amp_coefficient() == pytest.approx(450.0)


def test_one_recursion_step_by_hand():
    pts = model.magic_error_curve(7e-4, 5, 1)
    hand = 35 * (7e-4 + 67.5 * 3e-4) ** 3
    assert float(pts[1].p_M) == pytest.approx(hand, rel=1e-12)
    assert float(pts[1].p_M) == pytest.approx(3.22e-4, rel=1e-3)
    assert [pt.d for pt in model.magic_error_curve(7e-4, 5, 3)] == [5, 15, 45, 135]


def test_levels_zero():
    pts = model.magic_error_curve(1e-3, 5, 0, p_M_at_d0=2e-3)
    assert len(pts) == 1 and pts[0].d == 5 and float(pts[0].p_M) == pytest.approx(2e-3)


def test_curve_validation():
    with pytest.raises(ModelDomainError):
        model.magic_error_curve(1e-3, 4, 2)
    with pytest.raises(ModelDomainError):
        model.magic_error_curve(1e-3, 5, -1)


@pytest.mark.parametrize("p", [1e-8, 1e-5, 7e-4])
@pytest.mark.parametrize("d0", [3, 5, 7])
def test_omega_recursion_identity(p, d0):
    with mpmath.workdps(model.CURVE_DPS):
        curve = model.omega_curve(p, d0, 4)
        for (d, om), (d3, om3) in zip(curve, curve[1:]):
            assert d3 == 3 * d
            want = model.omega_step(p, om)
            assert abs(om3 - want) <= 1e-12 * abs(want)


def test_omega_lower_bound_anchor():
    # at d = d' the bound reduces to Omega(d')
    assert float(model.omega_lower_bound(7e-4, 7, 7, 100.0)) == pytest.approx(100.0)


def test_threshold_limits():
    assert model.ideal_threshold() == pytest.approx(1 / math.sqrt(35), rel=1e-12)
    assert abs(model.ideal_threshold() - 0.16903) < 1e-4
    assert model.distillation_threshold(7e-4, 5).feasible
    for d0 in (3, 5, 9, 21):
        assert not model.distillation_threshold(0.007, d0).feasible


def test_threshold_roots_solve_the_cubic():
    lo, hi = model.threshold_roots(1e-6)
    for x in (lo, hi):
        assert x == pytest.approx(35 * (x + 67.5e-6) ** 3, rel=1e-9)
    assert 0 < lo < hi < 1 / math.sqrt(35)
    assert model.threshold_roots(1.0) == (None, None)


def _grid():
    return np.geomspace(1e-6, 5e-3, 120)


def test_threshold_and_min_distance_agree_on_grid():
    mismatches = []
    for p in _grid():
        try:
            dmin = model.min_base_distance(p, p)
        except ModelDomainError:
            dmin = math.inf
        for d0 in (3, 5, 7, 9):
            if model.distillation_threshold(p, d0).feasible != (dmin <= d0):
                mismatches.append((p, d0))
    assert not mismatches


def test_min_distance_examples():
    assert model.min_distance_bound(7e-4, 7e-4) == pytest.approx(4.77, abs=0.01)
    assert model.min_base_distance(7e-4, 7e-4) == 5
    assert model.min_base_distance(1e-5, 1e-5) == 3
    for bad in ((0.17, 1e-4), (0.0, 1e-4), (1e-3, 0.01)):
        with pytest.raises(ModelDomainError):
            model.min_distance_bound(*bad)
    # approaching the ideal threshold the required distance diverges
    near = [model.min_distance_bound(p0, 1e-4) for p0 in (0.1, 0.168, 0.16899)]
    assert near[0] < near[1] < near[2] and near[2] > 3 * near[0]


def test_min_base_distance_is_odd():
    for p in _grid():
        try:
            assert model.min_base_distance(p, p) % 2 == 1
        except ModelDomainError:
            pass


def test_monotonicity_flips_at_threshold():
    for p in _grid():
        for d0 in (3, 5, 7, 9):
            pts = model.magic_error_curve(p, d0, 3)
            pm = [pt.p_M for pt in pts]
            if model.distillation_threshold(p, d0).feasible:
                assert all(b < a for a, b in zip(pm, pm[1:]))
            else:
                assert pm[1] > pm[0]


def test_amplification_golden_values():
    assert model.tangency_error_rate() == pytest.approx(7.23e-8, rel=0.02)
    p = model.tangency_error_rate()
    assert model.amplification_fixed_point(0.999 * p) is not None
    assert model.amplification_fixed_point(1.001 * p) is None
    coeff = model.amplification_fixed_point(1e-12) / 1e-12
    assert coeff == pytest.approx(1.384e8, rel=0.01)
    assert model.d_out_ratio(7e-4, 7, 100) == pytest.approx(0.5, abs=0.005)


def test_amplification_regimes():
    assert model.amplification_analysis(1e-9).regime == "bounded"
    assert model.amplification_analysis(1e-4).regime == "growing"
    assert model.amplification_analysis(0.01).regime == "ineffective"
    a = model.amplification_analysis(7e-4, 7, 100.0)
    assert a.d_out_ratio == pytest.approx(0.5, abs=0.005)
    with pytest.raises(ModelDomainError):
        model.d_out_ratio(0.01, 7, 100)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-12, 7e-8))
def test_fixed_point_solves_recursion(p):
    w = model.amplification_fixed_point(p)
    assert w is not None and w == pytest.approx(450 * p * (w + 67.5) ** 3, rel=1e-9)


def test_multi_level_time():
    assert model.multi_level_time(5, 0, math.inf) == 15
    assert model.multi_level_time(5, 1, 1) == 5
    assert model.multi_level_time(4, 2, math.inf) == 3 * 4 + 2 * 2
    assert model.multi_level_time(5, 0, 60) == pytest.approx(15)
    with pytest.raises(ModelDomainError):
        model.multi_level_time(5, 0, 0)
    with pytest.raises(ModelDomainError):
        model.multi_level_time(5, 0, 1.5)


def test_expected_time_curve_small_p_tends_to_nominal():
    pts = model.expected_time_curve(1e-9, 3, 6)
    assert pts[0].expected_cycles == 0
    for pt in pts[1:]:
        assert pt.expected_cycles == pytest.approx(pt.levels_nominal_cycles, rel=1e-6)
        assert pt.expected_cycles <= 15 * pt.d


@pytest.mark.parametrize("p", [1e-3, 1e-4])
def test_curves_qualitative(p):
    d0 = model.min_base_distance(p, p)
    pts = model.magic_error_curve(p, d0, 4)
    assert all(b.p_M < a.p_M for a, b in zip(pts, pts[1:]))
    om = [pt.omega for pt in pts[1:]]
    assert all(b > 10 * a for a, b in zip(om, om[1:]))
    for t in model.expected_time_curve(p, d0, 4)[1:]:
        assert 5 * t.d <= t.expected_cycles <= 15 * t.d * 1.6


def test_cost_table():
    tab = model.cost_table(1.0)
    by = {e.gate: e for e in tab.entries}
    assert (by["|T> preparation"].space, by["|T> preparation"].time_expected) == (3, 15)
    assert by["|T> preparation"].spacetime == 45
    assert by["|CCZ> preparation"].spacetime == 63
    assert (by["S"].space, by["S"].time_expected) == (2, 2)
    d = 7.0
    s = model.spacetime_summaries(d)
    assert s["T infinite levels"] == 45 * d**3 and s["CCZ"] == 63 * d**3
    want = [15, 45, 63, 680, 2176, 40, 180, 396]
    assert [round(v) for v in model.spacetime_summaries(1.0).values()] == want
    assert model.cost_table(2.0, L=2, n=3).entries[5].space == 6 * 4
    with pytest.raises(ModelDomainError):
        model.cost_table(0.5)


def test_csv_is_deterministic():
    a = model.error_curve_csv(model.magic_error_curve(7e-4, 5, 4))
    b = model.error_curve_csv(model.magic_error_curve(7e-4, 5, 4))
    assert a == b and a.splitlines()[0] == "d,p_L,p_M,omega"
    t = model.time_curve_csv(model.expected_time_curve(7e-4, 5, 2))
    assert t.splitlines()[0] == "d,nominal_cycles,expected_cycles" and len(t.splitlines()) == 4
    c = model.cost_table_csv(model.cost_table(3.0))
    assert c == model.cost_table_csv(model.cost_table(3.0))
