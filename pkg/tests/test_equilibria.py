import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from bddyn.equilibria import (EquilibriumKind, all_equilibria, boundary1, boundary2, boundary_quadratic,
                              feasible_interior, growth_rate_for_prey_level, interior, interior_quadratic,
                              solve_quadratic)
from bddyn.model import Params, table2

from conftest import random_params


def scan_bisect(f, lo=1e-6, hi=1e7, n=4000):
    grid = np.geomspace(lo, hi, n)
    v = np.array([f(x) for x in grid])
    return [brentq(f, grid[i], grid[i + 1], xtol=1e-300, rtol=1e-15)
            for i in range(n - 1) if v[i] * v[i + 1] < 0]


@pytest.mark.parametrize("r", [1.29, 1.37, 1.47])
def test_equilibria_residuals_and_roots(r):
    p = table2(r)
    eqs = all_equilibria(p)
    assert [E.name for E in eqs] == ["E0", "E1", "E2", "E*"]
    for E in eqs:
        if E.feasible:
            assert E.residual(p) < 1e-8
        if E.quadratic is not None:
            oracle = scan_bisect(E.quadratic)
            assert min(abs(E.coords[0] - o) / o for o in oracle) < 1e-9


def test_base_equilibria_values():
    p = table2(1.37)
    E1, E2, Es = boundary1(p), boundary2(p), feasible_interior(p)
    np.testing.assert_allclose(E1.coords, [216.8607548552910, 141.5503996, 0.0], rtol=1e-8)
    np.testing.assert_allclose(E2.coords, [209.5203736460074, 0.0, 141.3154474], rtol=1e-8)
    np.testing.assert_allclose(Es.coords, [163.3264848, 57.23522995, 66.06411229], rtol=1e-8)


def test_case_one_gives_unique_positive_root():
    p = table2(1.37)
    q = interior_quadratic(p)
    assert q.A < 0 and q.C > 0
    assert len(q.positive_roots()) == 1
    assert len(interior(p)) == 1


def test_boundary_absent_when_predator_cannot_grow():
    p = table2(1.37).replace(c1=0.5)  # c1 e1 < delta1
    assert boundary1(p) is None
    assert boundary2(p) is not None


coef = st.one_of(st.just(0.0), st.floats(1e-100, 1e3), st.floats(-1e3, -1e-100))


@settings(max_examples=300, deadline=None)
@given(coef, coef, coef)
def test_solve_quadratic_roots_are_roots(A, B, C):
    roots = solve_quadratic(A, B, C)
    scale = abs(A) + abs(B) + abs(C) + 1e-300
    for x in roots:
        mag = abs(A) * x * x + abs(B) * abs(x) + abs(C)
        assert abs((A * x + B) * x + C) <= 1e-12 * max(mag, scale)
    disc = B * B - 4 * A * C
    if A != 0 and disc > 1e-9 * (B * B + abs(4 * A * C)):
        assert len(roots) == 2


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_feasibility_matches_threshold_inequality(seed):
    p = random_params(np.random.default_rng(seed))
    for which, E in ((1, boundary1(p)), (2, boundary2(p))):
        if E is None:
            continue
        x1 = E.coords[0]
        c, e, d, a = (p.c1, p.e1, p.delta1, p.a1) if which == 1 else (p.c2, p.e2, p.delta2, p.a2)
        assert E.feasible == (x1 > a * d / (c * e - d))
        if E.feasible:
            assert E.residual(p) < 1e-8 * max(1.0, p.r * p.k)
    for E in interior(p):
        t1 = p.a1 * p.delta1 / (p.c1 * p.e1 - p.delta1) if p.c1 * p.e1 > p.delta1 else np.inf
        t2 = p.a2 * p.delta2 / (p.c2 * p.e2 - p.delta2) if p.c2 * p.e2 > p.delta2 else np.inf
        assert E.feasible == bool(E.coords[0] > max(t1, t2))


def test_growth_rate_inversion_round_trip():
    p = table2(1.37)
    for r in (0.9, 1.29, 1.7):
        x1 = feasible_interior(p.with_r(r)).coords[0]
        assert growth_rate_for_prey_level(p, x1) == pytest.approx(r, rel=1e-12)


def test_diagnostics_carry_printed_bound_for_audit():
    E1 = boundary1(table2(1.37))
    names = [c.name for c in E1.diagnostics]
    assert any("[as printed]" in n for n in names)
    assert all(c.group == "feasibility" for c in E1.diagnostics)
    assert E1.kind is EquilibriumKind.BOUNDARY1
