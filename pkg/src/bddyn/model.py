"""Vector field of the one-prey / two-predator Beddington-DeAngelis system.

State ``x = (x1, x2, x3)``: prey, first predator, second predator.

    dx1/dt = r x1 k/(x1 + k) - c1 x1 x2/D1 - c2 x1 x3/D2
    dx2/dt = -delta1 x2 + e1 c1 x1 x2/D1
    dx3/dt = -delta2 x3 + e2 c2 x1 x3/D2

with ``D1 = a1 + x1 + b1 x2`` and ``D2 = a2 + x1 + b2 x3``.  The prey growth
``r x1 (1 - x1/(x1 + k))`` is evaluated in the equivalent saturating form
``r k x1/(x1 + k)``.

All derivatives are hand-coded; finite-difference agreement is covered by the
test suite.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UsageError

PARAM_NAMES = ("r", "k", "a1", "a2", "b1", "b2", "c1", "c2", "delta1", "delta2", "e1", "e2")


@dataclass(frozen=True)
class Params:
    """The twelve positive constants of the model."""

    r: float
    k: float
    a1: float
    a2: float
    b1: float
    b2: float
    c1: float
    c2: float
    delta1: float
    delta2: float
    e1: float
    e2: float

    def __post_init__(self):
        for name in PARAM_NAMES:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise DomainError(f"parameter {name} must be a real number, got {value!r}")
            value = float(value)
            if not math.isfinite(value) or value <= 0.0:
                raise DomainError(f"parameter {name} must be finite and > 0, got {value!r}")
            object.__setattr__(self, name, value)
        for name in ("e1", "e2"):
            if getattr(self, name) >= 1.0:
                raise DomainError(f"conversion factor {name} must lie in (0, 1), got {getattr(self, name)!r}")

    def with_r(self, r: float) -> Params:
        return dataclasses.replace(self, r=r)

    def replace(self, **changes) -> Params:
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def as_array(self) -> np.ndarray:
        """Parameters packed in ``PARAM_NAMES`` order (used by the compiled integrator)."""
        return np.array([getattr(self, name) for name in PARAM_NAMES], dtype=float)


TABLE2 = dict(k=200.0, a1=100.0, a2=100.0, b1=0.5, b2=0.5, c1=1.8, c2=1.8,
              delta1=0.82, delta2=0.62, e1=0.8143, e2=0.6250)


def table2(r: float) -> Params:
    """Base parameter set used for the published experiments, at growth rate ``r``."""
    return Params(r=r, **TABLE2)


def as_state(s, *, strict: bool = False) -> np.ndarray:
    """Validate and convert a state to a float array of length 3.

    Zero components are legal (the coordinate faces are invariant); negative
    ones are rejected.  ``strict`` additionally requires every component > 0.
    """
    x = np.asarray(s, dtype=float)
    if x.shape != (3,):
        raise DomainError(f"state must have exactly 3 components, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"state must be finite, got {x.tolist()}")
    if np.any(x < 0.0):
        raise DomainError(f"state components must be >= 0, got {x.tolist()}")
    if strict and np.any(x == 0.0):
        raise DomainError(f"state components must be > 0, got {x.tolist()}")
    return x


def response(p: Params, s, predator_index: int) -> float:
    """Beddington-DeAngelis consumption ``c_i x1 x_pred / (a_i + x1 + b_i x_pred)``."""
    if predator_index not in (1, 2):
        raise UsageError(f"predator_index must be 1 or 2, got {predator_index!r}")
    x1, x2, x3 = as_state(s)
    if predator_index == 1:
        return p.c1 * x1 * x2 / (p.a1 + x1 + p.b1 * x2)
    return p.c2 * x1 * x3 / (p.a2 + x1 + p.b2 * x3)


def rhs(p: Params, s) -> np.ndarray:
    return field_unchecked(p, *as_state(s))


def field_unchecked(p: Params, x1, x2, x3) -> np.ndarray:
    """Vector field without domain validation (for residuals at infeasible roots)."""
    g1 = p.c1 * x1 * x2 / (p.a1 + x1 + p.b1 * x2)
    g2 = p.c2 * x1 * x3 / (p.a2 + x1 + p.b2 * x3)
    return np.array([
        p.r * x1 * p.k / (x1 + p.k) - g1 - g2,
        -p.delta1 * x2 + p.e1 * g1,
        -p.delta2 * x3 + p.e2 * g2,
    ])


def jacobian(p: Params, s) -> np.ndarray:
    """Closed-form Jacobian; entries (2,3) and (3,2) are structurally zero."""
    x1, x2, x3 = as_state(s)
    d1 = p.a1 + x1 + p.b1 * x2
    d2 = p.a2 + x1 + p.b2 * x3
    u1 = p.c1 * x2 * (p.a1 + p.b1 * x2) / d1**2   # d(response 1)/dx1
    u2 = p.c2 * x3 * (p.a2 + p.b2 * x3) / d2**2
    v1 = p.c1 * x1 * (p.a1 + x1) / d1**2          # d(response 1)/dx2
    v2 = p.c2 * x1 * (p.a2 + x1) / d2**2
    J = np.zeros((3, 3))
    J[0, 0] = p.r * p.k**2 / (x1 + p.k) ** 2 - u1 - u2
    J[0, 1] = -v1
    J[0, 2] = -v2
    J[1, 0] = p.e1 * u1
    J[1, 1] = -p.delta1 + p.e1 * v1
    J[2, 0] = p.e2 * u2
    J[2, 2] = -p.delta2 + p.e2 * v2
    return J


def hessian(p: Params, s) -> np.ndarray:
    """Second derivatives ``H[i, j, k] = d^2 f_i / dx_j dx_k`` (symmetric in j, k)."""
    x1, x2, x3 = as_state(s)
    a1, a2, b1, b2, c1, c2, e1, e2 = p.a1, p.a2, p.b1, p.b2, p.c1, p.c2, p.e1, p.e2
    d1 = a1 + x1 + b1 * x2
    d2 = a2 + x1 + b2 * x3

    # second derivatives of the two responses
    g1_11 = -2.0 * c1 * x2 * (a1 + b1 * x2) / d1**3
    g1_22 = -2.0 * b1 * c1 * x1 * (a1 + x1) / d1**3
    g1_12 = (c1 * a1 * d1 + 2.0 * b1 * c1 * x1 * x2) / d1**3
    g2_11 = -2.0 * c2 * x3 * (a2 + b2 * x3) / d2**3
    g2_33 = -2.0 * b2 * c2 * x1 * (a2 + x1) / d2**3
    g2_13 = (c2 * a2 * d2 + 2.0 * b2 * c2 * x1 * x3) / d2**3

    H = np.zeros((3, 3, 3))
    H[0, 0, 0] = -2.0 * p.r * p.k**2 / (x1 + p.k) ** 3 - g1_11 - g2_11
    H[0, 1, 1] = -g1_22
    H[0, 2, 2] = -g2_33
    H[0, 0, 1] = H[0, 1, 0] = -g1_12
    H[0, 0, 2] = H[0, 2, 0] = -g2_13

    H[1, 0, 0] = e1 * g1_11
    H[1, 1, 1] = e1 * g1_22
    H[1, 0, 1] = H[1, 1, 0] = e1 * g1_12

    H[2, 0, 0] = e2 * g2_11
    H[2, 2, 2] = e2 * g2_33
    H[2, 0, 2] = H[2, 2, 0] = e2 * g2_13
    return H


def weighted_total(p: Params, states) -> np.ndarray:
    """``x1 + x2/e1 + x3/e2`` along an array of states (last axis = components)."""
    y = np.asarray(states, dtype=float)
    return y[..., 0] + y[..., 1] / p.e1 + y[..., 2] / p.e2
