"""Closed-form equilibria and their feasibility diagnostics.

Every non-trivial equilibrium has its prey coordinate on a quadratic
``A x^2 + B x + C = 0``; the predator coordinates then follow from the
predator nullclines

    x2 = ((c1 e1 - delta1) x1 - a1 delta1) / (b1 delta1)
    x3 = ((c2 e2 - delta2) x1 - a2 delta2) / (b2 delta2)
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .model import Params, field_unchecked
from .reports import ConditionReport


class EquilibriumKind(str, enum.Enum):
    TRIVIAL = "trivial"
    BOUNDARY1 = "boundary1"
    BOUNDARY2 = "boundary2"
    INTERIOR = "interior"


@dataclass(frozen=True)
class QuadraticCoeffs:
    A: float
    B: float
    C: float
    source: str  # "l" (E1), "m" (E2) or "n" (interior)

    def __call__(self, x):
        return (self.A * x + self.B) * x + self.C

    def positive_roots(self) -> list[float]:
        return [x for x in solve_quadratic(self.A, self.B, self.C) if x > 0.0]


@dataclass
class Equilibrium:
    kind: EquilibriumKind
    coords: np.ndarray
    feasible: bool
    diagnostics: list[ConditionReport] = field(default_factory=list)
    quadratic: QuadraticCoeffs | None = None

    @property
    def name(self) -> str:
        return {"trivial": "E0", "boundary1": "E1", "boundary2": "E2", "interior": "E*"}[self.kind.value]

    def residual(self, p: Params) -> float:
        """Max-norm of the vector field at the equilibrium."""
        return float(np.max(np.abs(field_unchecked(p, *self.coords))))


def solve_quadratic(A: float, B: float, C: float) -> list[float]:
    """Real roots of ``A x^2 + B x + C``, ascending; cancellation-free branch choice.

    ``A == 0`` falls back to the linear equation.
    """
    s = max(abs(A), abs(B), abs(C))
    if s == 0.0 or not math.isfinite(s):
        return []
    # normalise so B*B cannot under- or overflow
    A, B, C = A / s, B / s, C / s
    if A == 0.0:
        if B == 0.0:
            return []
        return [-C / B]
    disc = B * B - 4.0 * A * C
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    q = -0.5 * (B + math.copysign(sq, B))
    if q == 0.0:
        return [0.0, 0.0]
    return sorted([q / A, C / q])


def _predator_level(x1, c, e, delta, a, b):
    return ((c * e - delta) * x1 - a * delta) / (b * delta)


def _threshold(c, e, delta, a):
    """``a delta / (c e - delta)``: prey level above which the predator is positive."""
    excess = c * e - delta
    return a * delta / excess if excess > 0.0 else math.inf


def boundary_quadratic(p: Params, which: int) -> QuadraticCoeffs:
    if which == 1:
        l1, l2 = p.delta1 - p.c1 * p.e1, p.a1 * p.delta1
        return QuadraticCoeffs(l1, l2 + l1 * p.k + p.r * p.k * p.b1 * p.e1, l2 * p.k, "l")
    m1, m2 = p.delta2 - p.c2 * p.e2, p.a2 * p.delta2
    return QuadraticCoeffs(m1, m2 + m1 * p.k + p.r * p.k * p.b2 * p.e2, m2 * p.k, "m")


def interior_quadratic(p: Params) -> QuadraticCoeffs:
    n1 = p.b1 * p.e1 * (p.delta2 - p.c2 * p.e2) + p.b2 * p.e2 * (p.delta1 - p.c1 * p.e1)
    n2 = p.b2 * p.e2 * p.delta1 * p.a1 + p.b1 * p.e1 * p.delta2 * p.a2
    B = n2 + n1 * p.k + p.r * p.k * p.b1 * p.b2 * p.e1 * p.e2
    return QuadraticCoeffs(n1, B, n2 * p.k, "n")


def trivial_equilibrium() -> Equilibrium:
    return Equilibrium(EquilibriumKind.TRIVIAL, np.zeros(3), True,
                       [ConditionReport("always feasible", 0.0, 0.0, True, "=", "E0")])


def _boundary(p: Params, which: int) -> Equilibrium | None:
    if which == 1:
        c, e, delta, a, b = p.c1, p.e1, p.delta1, p.a1, p.b1
        kind, label = EquilibriumKind.BOUNDARY1, "1"
    else:
        c, e, delta, a, b = p.c2, p.e2, p.delta2, p.a2, p.b2
        kind, label = EquilibriumKind.BOUNDARY2, "2"
    quad = boundary_quadratic(p, which)
    if quad.A >= 0.0:
        # c e <= delta: the predator cannot sustain itself; no positive root
        return None
    (x1,) = quad.positive_roots()
    xp = _predator_level(x1, c, e, delta, a, b)
    threshold = _threshold(c, e, delta, a)
    diagnostics = [
        ConditionReport.compare(f"c{label}e{label} > delta{label}", c * e, delta, group="feasibility"),
        ConditionReport.compare(f"x1 > a{label}delta{label}/(c{label}e{label}-delta{label})", x1, threshold,
                                group="feasibility", note="equivalent to positive predator coordinate"),
        ConditionReport.compare(f"x1 > b{label}delta{label}/(c{label}e{label}-delta{label}) [as printed]", x1,
                                b * delta / (c * e - delta), group="feasibility",
                                note="printed bound; audit only, not used for feasibility"),
    ]
    coords = np.array([x1, xp, 0.0]) if which == 1 else np.array([x1, 0.0, xp])
    return Equilibrium(kind, coords, bool(xp > 0.0), diagnostics, quad)


def boundary1(p: Params) -> Equilibrium | None:
    """Predator-2-free equilibrium ``(x1, x2, 0)``, or None when predator 1 cannot persist."""
    return _boundary(p, 1)


def boundary2(p: Params) -> Equilibrium | None:
    """Predator-1-free equilibrium ``(x1, 0, x3)``, or None when predator 2 cannot persist."""
    return _boundary(p, 2)


def interior(p: Params) -> list[Equilibrium]:
    """All positive roots of the interior quadratic, each feasibility-flagged.

    With ``n1 < 0`` there is exactly one positive root; with ``n1 > 0`` there can
    be zero or two.
    """
    quad = interior_quadratic(p)
    t1 = _threshold(p.c1, p.e1, p.delta1, p.a1)
    t2 = _threshold(p.c2, p.e2, p.delta2, p.a2)
    out = []
    for x1 in quad.positive_roots():
        x2 = _predator_level(x1, p.c1, p.e1, p.delta1, p.a1, p.b1)
        x3 = _predator_level(x1, p.c2, p.e2, p.delta2, p.a2, p.b2)
        diagnostics = [
            ConditionReport.compare("n1 < 0 (Case I)", quad.A, 0.0, "<", group="feasibility"),
            ConditionReport.compare("x1* > max(a1delta1/(c1e1-delta1), a2delta2/(c2e2-delta2))",
                                    x1, max(t1, t2), group="feasibility"),
        ]
        feasible = bool(x2 > 0.0 and x3 > 0.0)
        out.append(Equilibrium(EquilibriumKind.INTERIOR, np.array([x1, x2, x3]), feasible, diagnostics, quad))
    return out


def feasible_interior(p: Params) -> Equilibrium | None:
    """The feasible interior equilibrium (largest prey level if there are several)."""
    cands = [e for e in interior(p) if e.feasible]
    return max(cands, key=lambda e: e.coords[0]) if cands else None


def all_equilibria(p: Params) -> list[Equilibrium]:
    out = [trivial_equilibrium()]
    for eq in (boundary1(p), boundary2(p)):
        if eq is not None:
            out.append(eq)
    out.extend(interior(p))
    return out


def growth_rate_for_prey_level(p: Params, x1: float) -> float:
    """The ``r`` at which the interior quadratic has root ``x1`` (other parameters fixed).

    The quadratic is linear in ``r``, so this inverts it exactly.  Used by the
    audit to ask which growth rate a reported equilibrium would require.
    """
    quad = interior_quadratic(p.with_r(1.0))
    rest = quad.A * x1**2 + (quad.B - p.k * p.b1 * p.b2 * p.e1 * p.e2) * x1 + quad.C
    return -rest / (p.k * p.b1 * p.b2 * p.e1 * p.e2 * x1)
