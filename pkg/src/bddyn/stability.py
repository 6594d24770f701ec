"""Characteristic polynomial, Routh-Hurwitz classification and sufficient conditions.

The linearisation at an equilibrium has characteristic polynomial
``lambda^3 + k1 lambda^2 + k2 lambda + k3`` with

    k1 = -tr J,  k2 = sum of principal 2x2 minors,  k3 = -det J,  C2 = k1 k2 - k3.

All roots have negative real part iff ``k1 > 0``, ``k3 > 0`` and ``C2 > 0``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .equilibria import Equilibrium, EquilibriumKind, feasible_interior
from .errors import UsageError
from .model import Params, jacobian
from .reports import ConditionReport

ZERO_REAL_PART_RTOL = 1e-9


class Classification(str, enum.Enum):
    STABLE_NODE = "StableNode"
    STABLE_FOCUS = "StableFocus"
    SADDLE = "Saddle"
    UNSTABLE_NODE = "UnstableNode"
    UNSTABLE_FOCUS = "UnstableFocus"
    MARGINAL = "Marginal"


@dataclass(frozen=True)
class CharPoly:
    k1: float
    k2: float
    k3: float

    @property
    def C2(self) -> float:
        return self.k1 * self.k2 - self.k3

    @property
    def scale(self) -> float:
        return 1.0 + abs(self.k1) + abs(self.k2) + abs(self.k3)

    def __call__(self, lam):
        return ((lam + self.k1) * lam + self.k2) * lam + self.k3

    def derivative(self, lam):
        return (3.0 * lam + 2.0 * self.k1) * lam + self.k2

    @property
    def routh_hurwitz_stable(self) -> bool:
        return self.k1 > 0.0 and self.k3 > 0.0 and self.k1 * self.k2 > self.k3


def char_poly(J) -> CharPoly:
    J = np.asarray(J, dtype=float)
    k1 = -(J[0, 0] + J[1, 1] + J[2, 2])
    k2 = (J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
          + J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1]
          + J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0])
    det = (J[0, 0] * (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
           - J[0, 1] * (J[1, 0] * J[2, 2] - J[1, 2] * J[2, 0])
           + J[0, 2] * (J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0]))
    return CharPoly(float(k1), float(k2), float(-det))


def cubic_roots(cp: CharPoly) -> np.ndarray:
    """Roots of the monic cubic, polished by one Newton step each.

    Three real roots come from the trigonometric form, otherwise the real
    root comes from Cardano's formula and the complex pair from deflation.
    Ordered by real part, then imaginary part.
    """
    k1, k2, k3 = cp.k1, cp.k2, cp.k3
    shift = k1 / 3.0
    # depressed cubic t^3 + p t + q with lambda = t - shift
    p = k2 - k1 * k1 / 3.0
    q = 2.0 * k1**3 / 27.0 - k1 * k2 / 3.0 + k3
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if p == 0.0 and q == 0.0:
        roots = [complex(-shift)] * 3
    elif disc <= 0.0 and p < 0.0:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * q / (p * m)))
        theta = math.acos(arg) / 3.0
        roots = [complex(m * math.cos(theta - 2.0 * math.pi * j / 3.0) - shift) for j in range(3)]
    else:
        sq = math.sqrt(max(disc, 0.0))
        u = -q / 2.0 + math.copysign(sq, -q / 2.0) if q != 0.0 else sq
        u = math.copysign(abs(u) ** (1.0 / 3.0), u)
        t = u - p / (3.0 * u) if u != 0.0 else 0.0
        x = t - shift
        x = _newton(cp, complex(x)).real
        # deflate: lambda^3 + k1 lambda^2 + k2 lambda + k3 = (lambda - x)(lambda^2 + b lambda + c)
        b = k1 + x
        c = k2 + x * b
        d = cmath.sqrt(b * b / 4.0 - c)
        roots = [complex(x), -b / 2.0 + d, -b / 2.0 - d]
    roots = [_newton(cp, z) for z in roots]
    # enforce exact conjugate symmetry for the complex pair
    cplx = [z for z in roots if z.imag != 0.0]
    if len(cplx) == 2:
        re = 0.5 * (cplx[0].real + cplx[1].real)
        im = 0.5 * (abs(cplx[0].imag) + abs(cplx[1].imag))
        real = [z for z in roots if z.imag == 0.0]
        roots = real + [complex(re, im), complex(re, -im)]
    return np.array(sorted(roots, key=lambda z: (z.real, z.imag)), dtype=complex)


def _newton(cp: CharPoly, z: complex) -> complex:
    d = cp.derivative(z)
    if d == 0:
        return z
    z_new = z - cp(z) / d
    return z_new if abs(cp(z_new)) <= abs(cp(z)) else z


def eigenvalues3(J) -> np.ndarray:
    """Eigenvalues of a 3x3 matrix via its characteristic cubic."""
    return cubic_roots(char_poly(J))


def classify_eigenvalues(eigs, tol: float | None = None) -> Classification:
    eigs = np.asarray(eigs, dtype=complex)
    if tol is None:
        tol = ZERO_REAL_PART_RTOL * (1.0 + float(np.max(np.abs(eigs))))
    re = eigs.real
    if np.any(np.abs(re) <= tol):
        return Classification.MARGINAL
    oscillatory = bool(np.any(np.abs(eigs.imag) > tol))
    if np.all(re < 0.0):
        return Classification.STABLE_FOCUS if oscillatory else Classification.STABLE_NODE
    if np.all(re > 0.0):
        return Classification.UNSTABLE_FOCUS if oscillatory else Classification.UNSTABLE_NODE
    return Classification.SADDLE


@dataclass
class StabilityReport:
    equilibrium: Equilibrium | None
    jacobian: np.ndarray
    charpoly: CharPoly
    eigenvalues: np.ndarray
    routh_hurwitz_stable: bool
    classification: Classification

    def as_dict(self) -> dict:
        eq = self.equilibrium
        return {
            "equilibrium": eq.name if eq is not None else None,
            "coords": eq.coords.tolist() if eq is not None else None,
            "k1": self.charpoly.k1,
            "k2": self.charpoly.k2,
            "k3": self.charpoly.k3,
            "C2": self.charpoly.C2,
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "routh_hurwitz_stable": self.routh_hurwitz_stable,
            "classification": self.classification.value,
        }


def classify_matrix(J, equilibrium: Equilibrium | None = None) -> StabilityReport:
    J = np.asarray(J, dtype=float)
    cp = char_poly(J)
    eigs = cubic_roots(cp)
    return StabilityReport(equilibrium, J, cp, eigs, cp.routh_hurwitz_stable, classify_eigenvalues(eigs))


def classify(p: Params, E: Equilibrium) -> StabilityReport:
    if not E.feasible:
        raise UsageError(f"{E.name} is not feasible; stability is undefined")
    return classify_matrix(jacobian(p, E.coords), E)


# --- sufficient conditions -------------------------------------------------


def persistence_check(p: Params, E1: Equilibrium | None, E2: Equilibrium | None) -> list[ConditionReport]:
    """The three persistence hypotheses; (ii)/(iii) need the boundary equilibria."""
    out = [ConditionReport.compare("persistence (i): r > delta1 + delta2", p.r, p.delta1 + p.delta2,
                                   group="persistence")]
    if E1 is not None and E1.feasible:
        excess = p.c2 * p.e2 - p.delta2
        rhs = p.a2 * p.delta2 / excess if excess > 0 else math.inf
        out.append(ConditionReport.compare("persistence (ii): x1 of E1 > a2delta2/(c2e2-delta2)",
                                           E1.coords[0], rhs, group="persistence"))
    else:
        out.append(ConditionReport.not_evaluable("persistence (ii): x1 of E1 > a2delta2/(c2e2-delta2)",
                                                 group="persistence", note="E1 absent or infeasible"))
    if E2 is not None and E2.feasible:
        excess = p.c1 * p.e1 - p.delta1
        rhs = p.a1 * p.delta1 / excess if excess > 0 else math.inf
        out.append(ConditionReport.compare("persistence (iii): x1 of E2 > a1delta1/(c1e1-delta1)",
                                           E2.coords[0], rhs, group="persistence"))
    else:
        out.append(ConditionReport.not_evaluable("persistence (iii): x1 of E2 > a1delta1/(c1e1-delta1)",
                                                 group="persistence", note="E2 absent or infeasible"))
    return out


@dataclass
class BoundednessReport:
    rho: float
    sigma: float
    m: float
    w: float
    M: float
    conditions: list[ConditionReport] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"rho": self.rho, "sigma": self.sigma, "m": self.m, "w": self.w, "M": self.M,
                "conditions": [c.as_dict() for c in self.conditions]}


def default_predator_level(p: Params) -> float:
    """Default for the predator level ``m`` in the prey bound.

    The smaller predator coordinate of the interior equilibrium when it exists,
    otherwise ``k/2``; capped below ``k`` so the sigma interval is non-empty.
    """
    E = feasible_interior(p)
    m = float(min(E.coords[1], E.coords[2])) if E is not None else 0.5 * p.k
    return min(m, 0.5 * p.k)


def boundedness_bounds(p: Params, sigma: float | None = None, m: float | None = None) -> BoundednessReport:
    """Prey ultimate bound ``w`` and the weighted-total bound ``M = ((r+1)k + w)/rho``.

    ``sigma`` must lie strictly inside ``(r m/(e1+e2), r k/(e1+e2))``; it defaults
    to the midpoint.  The hypotheses behind the bound are reported, not assumed.
    """
    if m is None:
        m = default_predator_level(p)
    if not (0.0 < m < p.k):
        raise UsageError(f"predator level m must lie in (0, k={p.k}), got {m!r}")
    ee = p.e1 + p.e2
    lo, hi = p.r * m / ee, p.r * p.k / ee
    if sigma is None:
        sigma = 0.5 * (lo + hi)
    if not (lo < sigma < hi):
        raise UsageError(f"sigma must lie in ({lo!r}, {hi!r}), got {sigma!r}")
    w = (p.k * p.r * m - ee * p.k * sigma) / (ee * sigma - p.r * p.k)
    rho = min(1.0, p.delta1, p.delta2)
    M = ((p.r + 1.0) * p.k + w) / rho
    conds = [
        ConditionReport.compare("predator decay: min(delta1-c1e1, delta2-c2e2) > 0",
                                min(p.delta1 - p.c1 * p.e1, p.delta2 - p.c2 * p.e2), 0.0,
                                group="boundedness", note="hypothesis of the prey bound"),
        ConditionReport.compare("sigma > r m/(e1+e2)", sigma, lo, group="boundedness"),
        ConditionReport.compare("sigma < r k/(e1+e2)", sigma, hi, "<", group="boundedness"),
        ConditionReport.compare("w > 0", w, 0.0, group="boundedness"),
    ]
    return BoundednessReport(rho, float(sigma), float(m), float(w), float(M), conds)


def local_condition_boundary(p: Params, E: Equilibrium, which: int) -> ConditionReport:
    """``e_i x1 + x_pred > (k(1 - b_i e_i) - a_i)/b_i`` at a boundary equilibrium.

    Equality (to 1e-12 relative) marks the Hopf boundary of the planar block.
    """
    expected = EquilibriumKind.BOUNDARY1 if which == 1 else EquilibriumKind.BOUNDARY2
    if which not in (1, 2) or E.kind is not expected:
        raise UsageError(f"condition {which} needs a {expected.value} equilibrium, got {E.kind.value}")
    if which == 1:
        lhs = p.e1 * E.coords[0] + E.coords[1]
        rhs = (p.k * (1.0 - p.b1 * p.e1) - p.a1) / p.b1
    else:
        lhs = p.e2 * E.coords[0] + E.coords[2]
        rhs = (p.k * (1.0 - p.b2 * p.e2) - p.a2) / p.b2
    if abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), abs(rhs)):
        return ConditionReport(f"E{which} local stability", float(lhs), float(rhs), False, ">",
                               "local stability", "equality: Hopf boundary of the planar block")
    return ConditionReport.compare(f"E{which} local stability", lhs, rhs, group="local stability",
                                   note="planar (x1, x%d) block only" % (which + 1))


def local_condition_interior(p: Params, Estar: Equilibrium) -> ConditionReport:
    if Estar.kind is not EquilibriumKind.INTERIOR or not Estar.feasible:
        raise UsageError("needs a feasible interior equilibrium")
    x = Estar.coords
    return ConditionReport.compare("E* local: k < min(a1 + b1 x2*, a2 + b2 x3*)",
                                   p.k, min(p.a1 + p.b1 * x[1], p.a2 + p.b2 * x[2]), "<",
                                   group="local stability", note="sufficient condition, not necessary")


@dataclass
class GlobalConditionReport:
    condition: ConditionReport
    s1: float
    s2: float
    s3: float

    def as_dict(self) -> dict:
        return {**self.condition.as_dict(), "s1": self.s1, "s2": self.s2, "s3": self.s3}


def global_condition(p: Params, Estar: Equilibrium, w: float) -> GlobalConditionReport:
    """``a1 a2 b1 b2 r k > (x1* + k)(w + k)(a1 b1 c2 + a2 b2 c1)`` plus the Lyapunov weights."""
    if not Estar.feasible:
        raise UsageError("needs a feasible interior equilibrium")
    x1, x2, x3 = Estar.coords
    lhs = p.a1 * p.a2 * p.b1 * p.b2 * p.r * p.k
    rhs = (x1 + p.k) * (w + p.k) * (p.a1 * p.b1 * p.c2 + p.a2 * p.b2 * p.c1)
    cond = ConditionReport.compare("E* global stability", lhs, rhs, group="global stability",
                                   note="sufficient condition")
    return GlobalConditionReport(cond, 1.0, (p.a1 + x1) / (p.b1 * p.e1 * x2), (p.a2 + x1) / (p.b2 * p.e2 * x3))
