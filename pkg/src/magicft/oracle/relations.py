"""Commutation identities behind the non-Abelian stabilizers of both codes.

Each identity has the form ``x g == g h x`` for an X-type stabilizer ``x``,
a non-Abelian stabilizer ``g`` and a correction ``h``; both sides are built as
phase-polynomial operators and compared exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..codes import label_tiles
from .phasepoly import PhasePolyOperator as Op
from .phasepoly import product


@dataclass
class RelationCheck:
    name: str
    holds: bool
    phase: Optional[int]  # eighth-root exponent of lhs relative to rhs


@dataclass
class RelationReport:
    relation_set: str
    checks: list[RelationCheck]

    @property
    def ok(self) -> bool:
        return all(c.holds for c in self.checks)


def t15_relations() -> list[tuple[str, Op, Op]]:
    n = 16
    t = lambda s: label_tiles(s)  # noqa: E731
    X1 = Op.x(n, t("1***"))
    return [
        ("X1*** S1*** = S1*** Z1*** X1***", X1 @ Op.s(n, t("1***")), product(Op.s(n, t("1***")), Op.z(n, t("1***")), X1)),
        ("X1*** S*1** = S*1** Z11** X1***", X1 @ Op.s(n, t("*1**")), product(Op.s(n, t("*1**")), Op.z(n, t("11**")), X1)),
        ("X1*** T**** = T**** Sdg1*** X1***", X1 @ Op.t(n, t("****")), product(Op.t(n, t("****")), Op.sdg(n, t("1***")), X1)),
    ]


def ccz_relations() -> list[tuple[str, Op, Op]]:
    n = 11
    c = lambda s: label_tiles(s)  # noqa: E731
    cz9_10 = Op.controlled(n, [9], Op.z(n, [10]))
    ccz = Op.controlled(n, [8, 9], Op.z(n, [10]))
    a = -(Op.s(n, c("0**")) @ cz9_10)  # -S_{0**} C_9 Z_10
    b = Op.t(n, c("***")) @ ccz  # T_{***} C_8 C_9 Z_10
    x_b9 = Op.x(n, c("*0*") + [9])
    x_a8 = Op.x(n, c("0**") + [8])
    x_all = Op.x(n, c("***"))
    return [
        ("X*0*X9 A = A (-Z10 Z00*) X*0*X9", x_b9 @ a, product(a, -(Op.z(n, [10]) @ Op.z(n, c("00*"))), x_b9)),
        ("X0**X8 A = A Z0** X0**X8", x_a8 @ a, product(a, Op.z(n, c("0**")), x_a8)),
        ("X*** A = A Z0** X***", x_all @ a, product(a, Op.z(n, c("0**")), x_all)),
        ("X0**X8 B = B (-Sdg0** C9 Z10) X0**X8", x_a8 @ b, product(b, -(Op.sdg(n, c("0**")) @ cz9_10), x_a8)),
        ("X*** B = B Sdg*** X***", x_all @ b, product(b, Op.sdg(n, c("***")), x_all)),
    ]


_SETS = {"t15": t15_relations, "ccz": ccz_relations}


def verify_relations(relation_set: str) -> RelationReport:
    if relation_set not in _SETS:
        raise KeyError(f"unknown relation set {relation_set!r}")
    checks = []
    for name, lhs, rhs in _SETS[relation_set]():
        phase = lhs.phase_relative_to(rhs)
        checks.append(RelationCheck(name, phase is not None, phase))
    return RelationReport(relation_set, checks)
