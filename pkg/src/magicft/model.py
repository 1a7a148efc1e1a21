"""Analytic error and cost model for recursive |T> and |CCZ> distillation.

Error probabilities along a recursion shrink far below the double-precision
range (e.g. ``p_L`` at d = 567), so curves are evaluated with ``mpmath``
numbers; scalar helpers return plain floats.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import mpmath
from scipy.optimize import brentq

Number = Union[float, mpmath.mpf]
CURVE_DPS = 50


class ModelDomainError(ValueError):
    """Parameters outside the range where a model formula is meaningful."""


@dataclass(frozen=True)
class SurfaceCodeErrorModel:
    p_T: float = 0.007
    p_at_T_even: float = 0.09
    p_at_T_odd: float = 0.3

    def __post_init__(self) -> None:
        for v in (self.p_T, self.p_at_T_even, self.p_at_T_odd):
            if not 0 < v < 1:
                raise ValueError("model constants must lie in (0, 1)")


@dataclass(frozen=True)
class DistillationModel:
    configurations: float = 35.0
    locations_per_input: float = 67.5
    input_sensitivity: float = 15.0
    distance_divisor: int = 3

    def amp_coefficient(self, sc: SurfaceCodeErrorModel = SurfaceCodeErrorModel()) -> float:
        """Coefficient ``a`` in Omega(3d) = a * p * (Omega(d) + 67.5)**3 for odd d (450 by default)."""
        return self.configurations * sc.p_at_T_odd**2 / sc.p_T


SURFACE = SurfaceCodeErrorModel()
DISTILL = DistillationModel()


def _check_p(p: float) -> None:
    if not 0 < p < 1:
        raise ModelDomainError(f"physical error rate {p} must lie in (0, 1)")


def logical_error_rate(p: float, d: int, model: SurfaceCodeErrorModel = SURFACE) -> float:
    """Surface-code logical error rate per tile per d cycles."""
    _check_p(p)
    if d < 1:
        raise ModelDomainError(f"code distance {d} must be at least 1")
    pre = model.p_at_T_odd if d % 2 else model.p_at_T_even
    return pre * (p / model.p_T) ** ((d + 1) // 2)


def _mp_logical(p, d: int, model: SurfaceCodeErrorModel = SURFACE):
    pre = model.p_at_T_odd if d % 2 else model.p_at_T_even
    return mpmath.mpf(pre) * (mpmath.mpf(p) / model.p_T) ** ((d + 1) // 2)


# -- magic-state error recursion ----------------------------------------------------


@dataclass(frozen=True)
class CurvePoint:
    d: int
    p_L: mpmath.mpf
    p_M: mpmath.mpf

    @property
    def omega(self) -> mpmath.mpf:
        return self.p_M / self.p_L


def _check_base(d0: int, levels: int) -> None:
    if d0 < 3 or d0 % 2 == 0:
        raise ModelDomainError(f"base distance {d0} must be odd and at least 3")
    if levels < 0:
        raise ModelDomainError("levels must be non-negative")


def magic_error_curve(
    p: float,
    d0: int,
    levels: int,
    p_M_at_d0: Optional[float] = None,
    dist: DistillationModel = DISTILL,
    model: SurfaceCodeErrorModel = SURFACE,
) -> list[CurvePoint]:
    """``p_M`` at d0, 3 d0, 9 d0, ...; the base value defaults to ``p`` (physical injection)."""
    _check_p(p)
    _check_base(d0, levels)
    with mpmath.workdps(CURVE_DPS):
        pm = mpmath.mpf(p if p_M_at_d0 is None else p_M_at_d0)
        d = d0
        pts = [CurvePoint(d, _mp_logical(p, d, model), pm)]
        for _ in range(levels):
            pl = _mp_logical(p, d, model)
            pm = dist.configurations * (pm + dist.locations_per_input * pl) ** 3
            d *= dist.distance_divisor
            pts.append(CurvePoint(d, _mp_logical(p, d, model), pm))
    return pts


def omega_curve(p: float, d0: int, levels: int, p_M_at_d0: Optional[float] = None) -> list[tuple[int, mpmath.mpf]]:
    """Amplification p_M / p_L along the recursion."""
    with mpmath.workdps(CURVE_DPS):
        return [(pt.d, pt.omega) for pt in magic_error_curve(p, d0, levels, p_M_at_d0)]


def omega_step(p: float, omega, dist: DistillationModel = DISTILL, model: SurfaceCodeErrorModel = SURFACE):
    """One level of the closed amplification recursion (valid for odd d)."""
    with mpmath.workdps(CURVE_DPS):
        a = mpmath.mpf(dist.configurations) * mpmath.mpf(model.p_at_T_odd) ** 2 / mpmath.mpf(model.p_T)
        return a * mpmath.mpf(p) * (mpmath.mpf(omega) + dist.locations_per_input) ** 3


def omega_lower_bound(p: float, d: int, d_prime: int, omega_prime: Number, coefficient: float = 450.0):
    """Growing-regime lower bound on Omega(d) anchored at Omega(d') for d >= d'."""
    with mpmath.workdps(CURVE_DPS):
        r = mpmath.sqrt(coefficient * mpmath.mpf(p))
        return (r * mpmath.mpf(omega_prime)) ** (mpmath.mpf(d) / d_prime) / r


# -- thresholds ------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdResult:
    """Roots of p = 35 (p + 67.5 p_L)**3 and whether input error ``p_in`` is distilled.

    ``p_0`` is the threshold above which the output is worse than the input
    (the upper positive root; it tends to 1/sqrt(35) as p_L -> 0) and
    ``lower`` is the root below which logical errors dominate.  ``feasible``
    means ``p_in`` lies between the two roots.
    """

    p_0: Optional[float]
    lower: Optional[float]
    d_0: Optional[int]
    p_in: Optional[float]
    feasible: bool


def threshold_roots(p_logical: float, dist: DistillationModel = DISTILL) -> tuple[Optional[float], Optional[float]]:
    """(lower, upper) positive roots of x = 35 (x + 67.5 p_logical)**3, or (None, None)."""
    a, c = dist.configurations, dist.locations_per_input * p_logical
    g = lambda x: a * (x + c) ** 3 - x  # noqa: E731
    if c == 0:
        r = 1 / math.sqrt(a)
        return r, r
    x_min = 1 / math.sqrt(3 * a) - c
    if x_min <= 0 or g(x_min) > 0:
        return None, None
    if g(x_min) == 0:
        return x_min, x_min
    lower = brentq(g, 0.0, x_min, xtol=1e-300, rtol=1e-14)
    hi = 1.0
    while g(hi) < 0:
        hi *= 2
    upper = brentq(g, x_min, hi, xtol=1e-300, rtol=1e-14)
    return lower, upper


def ideal_threshold(dist: DistillationModel = DISTILL) -> float:
    return threshold_roots(0.0, dist)[1]


def distillation_threshold(p: float, d0: int, p_in: Optional[float] = None) -> ThresholdResult:
    """Threshold at base distance ``d0``; ``p_in`` (default ``p``) is the injected error rate."""
    _check_p(p)
    lower, upper = threshold_roots(logical_error_rate(p, d0))
    x = p if p_in is None else p_in
    feasible = upper is not None and lower <= x <= upper
    return ThresholdResult(upper, lower, d0, x, feasible)


def min_distance_bound(p0: float, p: float) -> float:
    """Right-hand side of the base-distance constraint (natural logs)."""
    _check_p(p)
    if not 0 < p0 < 0.169:
        raise ModelDomainError(f"input error {p0} must lie in (0, 0.169)")
    if 143 * p >= 1:
        raise ModelDomainError(f"physical error rate {p} is at or above the surface-code threshold")
    arg = 0.0151 * p0 ** (1 / 3) - 0.0494 * p0
    if arg <= 0:
        raise ModelDomainError(f"distillation is impossible at input error {p0}")
    return 2 * math.log(arg) / math.log(143 * p) - 1


def min_base_distance(p0: float, p: float) -> int:
    """Smallest odd base distance strictly above the bound."""
    bound = min_distance_bound(p0, p)
    d = max(1, math.floor(bound) + 1)
    return d if d % 2 else d + 1


# -- amplification regimes ---------------------------------------------------------


@dataclass(frozen=True)
class AmplificationAnalysis:
    p: float
    regime: str  # "bounded", "growing" or "ineffective"
    fixed_point: Optional[float]
    tangency_p: float
    d_prime: Optional[int] = None
    omega_at_d_prime: Optional[float] = None
    d_out_ratio: Optional[float] = None


def tangency_error_rate(coefficient: float = 450.0, locations: float = 67.5) -> float:
    """Largest p for which Omega = a p (Omega + c)**3 has a positive solution."""
    # tangency: a p (W)**3 = W - c and 3 a p W**2 = 1 give W = 1.5 c
    w = 1.5 * locations
    return 1 / (3 * coefficient * w * w)


def amplification_fixed_point(p: float, coefficient: float = 450.0, locations: float = 67.5) -> Optional[float]:
    """Smallest positive solution of Omega = a p (Omega + c)**3, if any."""
    h = lambda w: coefficient * p * (w + locations) ** 3 - w  # noqa: E731
    w_min = 1 / math.sqrt(3 * coefficient * p) - locations
    if w_min <= 0 or h(w_min) > 0:
        return None
    return brentq(h, 0.0, w_min, xtol=1e-300, rtol=1e-14)


def d_out_ratio(p: float, d_prime: int, omega_at_d_prime: float, coefficient: float = 450.0) -> float:
    """d_out / d_in balancing magic-state and surface-code errors asymptotically."""
    if not 0 < 143 * p < 1:
        raise ModelDomainError(f"physical error rate {p} is outside (0, 1/143)")
    return 1 + math.log(coefficient * p * omega_at_d_prime**2) / (d_prime * math.log(143 * p))


def amplification_analysis(
    p: float, d_prime: Optional[int] = None, omega_at_d_prime: Optional[float] = None
) -> AmplificationAnalysis:
    p_star = tangency_error_rate()
    if not 0 < p < SURFACE.p_T:
        return AmplificationAnalysis(p, "ineffective", None, p_star, d_prime, omega_at_d_prime)
    fp = amplification_fixed_point(p)
    regime = "bounded" if fp is not None else "growing"
    ratio = None
    if d_prime is not None and omega_at_d_prime is not None:
        ratio = d_out_ratio(p, d_prime, omega_at_d_prime)
    return AmplificationAnalysis(p, regime, fp, p_star, d_prime, omega_at_d_prime, ratio)


# -- time costs -----------------------------------------------------------------------


def multi_level_time(t_distill: float, t_pack: float, m: Union[int, float]) -> float:
    """Time of ``m`` recursive levels (``math.inf`` for the closed form)."""
    if m == math.inf:
        return 3 * t_distill + 2 * t_pack
    if m < 1 or int(m) != m:
        raise ModelDomainError("m must be a positive integer or infinity")
    return sum((2 / 3) ** r for r in range(int(m))) * (t_distill + t_pack) - t_pack


@dataclass(frozen=True)
class TimePoint:
    d: int
    nominal_cycles: float  # 15 d, the infinite-recursion nominal cost
    levels_nominal_cycles: float  # failure-free cost of the levels actually used
    expected_cycles: float
    level_factor: float  # 1 / success probability of the top level


def expected_time_curve(
    p: float, d0: int, levels: int, t_distill_per_d: float = 5.0, p_M_at_d0: Optional[float] = None
) -> list[TimePoint]:
    """Expected |T> preparation time per level, each level divided by its success probability.

    The base level (physical injection at d0) costs nothing beyond the base.
    """
    pts = magic_error_curve(p, d0, levels, p_M_at_d0)
    out = [TimePoint(d0, 15.0 * d0, 0.0, 0.0, 1.0)]
    expected = 0.0
    nominal = 0.0
    with mpmath.workdps(CURVE_DPS):
        for below, here in zip(pts, pts[1:]):
            fail = DISTILL.input_sensitivity * (below.p_M + DISTILL.locations_per_input * below.p_L)
            success = float(1 - fail)
            if success <= 0:
                raise ModelDomainError(f"distillation at d={here.d} never succeeds (success factor {success:.3g})")
            d = here.d
            expected = (t_distill_per_d * d + 2 * expected) / success
            nominal = t_distill_per_d * d + 2 * nominal
            out.append(TimePoint(d, 15.0 * d, nominal, expected, 1 / success))
    return out


# -- gate-set costs ------------------------------------------------------------------


@dataclass(frozen=True)
class CostEntry:
    gate: str
    space_expr: str
    space: float
    time_expected: float
    time_deviation: float
    time_max: float
    resource: str

    @property
    def spacetime(self) -> float:
        return self.space * self.time_expected


# (gate, space expression, space(d, L, n) in units of d**2, expected, deviation, max time in units of d, resource)
_TABLE = [
    ("S", "2d^2", lambda L, n: 2, 2, 0, 2, ""),
    ("H", "2d^2", lambda L, n: 2, 3, 0, 3, ""),
    ("SH", "2d^2", lambda L, n: 2, 3, 0, 3, ""),
    ("HS", "2d^2", lambda L, n: 2, 3, 0, 3, ""),
    ("SHS", "2d^2", lambda L, n: 2, 4, 0, 4, ""),
    ("CZ^n (one-sided)", "(L+n+1)d^2", lambda L, n: L + n + 1, 2, 0, 2, ""),
    ("CZ^n (two-sided)", "(L+n+1)d^2", lambda L, n: L + n + 1, 3, 0, 3, ""),
    ("T", "2d^2", lambda L, n: 2, 2, 1, 3, "|T>"),
    ("CCZ (narrow)", "(L+3)d^2", lambda L, n: L + 3, 3.125, 1.95, 5, "|CCZ>"),
    ("CCZ (wide)", "(2L+3)d^2", lambda L, n: 2 * L + 3, 2.75, 0.661, 3, "|CCZ>"),
    ("|T> preparation", "3d^2", lambda L, n: 3, 15, 0, 15, ""),
    ("|CCZ> preparation", "6d^2", lambda L, n: 6, 10.5, 0, 10.5, ""),
]


@dataclass(frozen=True)
class CostTable:
    d: float
    entries: list[CostEntry]
    summaries: dict[str, float]


def spacetime_summaries(d: float = 1.0) -> dict[str, float]:
    """Spacetime costs (qubitcycles) of the compared distillation designs at distance ``d``."""
    d3 = d**3
    t_one = 5.0  # one |T> distillation level, in units of d
    return {
        "T one level": 3 * t_one * d3,
        "T infinite levels": 3 * multi_level_time(t_one, 0, math.inf) * d3,
        "CCZ": 6 * (3 + 15 * 0.5) * d3,
        "15-to-1 Reed-Muller baseline one level": 34 * 20 * d3,
        "15-to-1 Reed-Muller baseline infinite levels": 34 * multi_level_time(20, 2, math.inf) * d3,
        "15-to-1 rotation baseline one level": 15 * (8 / 3) * d3,
        "15-to-1 rotation baseline infinite levels": 15 * multi_level_time(8 / 3, 2, math.inf) * d3,
        "CCZ baseline": 72 * 5.5 * d3,
    }


def cost_table(d: float, L: int = 1, n: int = 2) -> CostTable:
    """Every gate-set row at distance ``d`` (``L`` ancilla tiles, ``n`` CZ targets)."""
    if d < 1:
        raise ModelDomainError("code distance must be at least 1")
    entries = [
        CostEntry(g, expr, space(L, n) * d * d, te * d, dev * d, tm * d, res)
        for g, expr, space, te, dev, tm, res in _TABLE
    ]
    return CostTable(d, entries, spacetime_summaries(d))


# -- CSV emission ---------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 17, min_fixed=0, max_fixed=0)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def error_curve_csv(points: Sequence[CurvePoint]) -> str:
    with mpmath.workdps(CURVE_DPS):
        return _csv(["d", "p_L", "p_M", "omega"], [(pt.d, pt.p_L, pt.p_M, pt.omega) for pt in points])


def time_curve_csv(points: Sequence[TimePoint]) -> str:
    return _csv(["d", "nominal_cycles", "expected_cycles"], [(t.d, t.nominal_cycles, t.expected_cycles) for t in points])


def cost_table_csv(table: CostTable) -> str:
    rows = [(e.gate, e.space, e.time_expected, e.time_max, e.spacetime) for e in table.entries]
    rows += [(name, "", "", "", value) for name, value in table.summaries.items()]
    return _csv(["gate", "space", "time_expected", "time_max", "spacetime"], rows)
