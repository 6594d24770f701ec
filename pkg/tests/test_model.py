import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bddyn.errors import DomainError, UsageError
from bddyn.model import (PARAM_NAMES, Params, as_state, field_unchecked, hessian, jacobian, response, rhs,
                         table2, weighted_total)


def fd_jac(p, x, rel=1e-5):
    J = np.empty((3, 3))
    for j in range(3):
        h = rel * max(1.0, abs(x[j]))
        e = np.zeros(3)
        e[j] = h
        J[:, j] = (field_unchecked(p, *(x + e)) - field_unchecked(p, *(x - e))) / (2 * h)
    return J


def fd_hess(p, x, rel=1e-4):
    H = np.empty((3, 3, 3))
    for k in range(3):
        h = rel * max(1.0, abs(x[k]))
        e = np.zeros(3)
        e[k] = h
        H[:, :, k] = (jacobian(p, x + e) - jacobian(p, x - e)) / (2 * h)
    return H


def relerr(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def test_params_reject_nonpositive_and_bad_conversion():
    good = table2(1.37).as_dict()
    for name in PARAM_NAMES:
        with pytest.raises(DomainError, match=name):
            Params(**{**good, name: 0.0})
        with pytest.raises(DomainError, match=name):
            Params(**{**good, name: math.nan})
    with pytest.raises(DomainError, match="e1"):
        Params(**{**good, "e1": 1.0})


def test_state_validation():
    with pytest.raises(DomainError):
        as_state([1.0, -1e-3, 2.0])
    with pytest.raises(DomainError):
        as_state([1.0, 2.0])
    with pytest.raises(DomainError):
        as_state([1.0, math.inf, 2.0])
    with pytest.raises(DomainError):
        as_state([0.0, 1.0, 1.0], strict=True)
    assert as_state([0, 0, 0]).tolist() == [0.0, 0.0, 0.0]


def test_origin_and_faces(base):
    assert np.all(rhs(base, [0, 0, 0]) == 0)
    # each coordinate face is invariant
    assert rhs(base, [0.0, 3.0, 4.0])[0] == 0.0
    assert rhs(base, [5.0, 0.0, 4.0])[1] == 0.0
    assert rhs(base, [5.0, 3.0, 0.0])[2] == 0.0
    # no prey: predators starve at their death rates
    f = rhs(base, [0.0, 3.0, 4.0])
    assert f[1] == pytest.approx(-base.delta1 * 3.0)
    assert f[2] == pytest.approx(-base.delta2 * 4.0)


def test_response_and_rhs_agree(base):
    x = np.array([120.0, 30.0, 40.0])
    g1, g2 = response(base, x, 1), response(base, x, 2)
    f = rhs(base, x)
    assert f[0] == pytest.approx(base.r * base.k * x[0] / (x[0] + base.k) - g1 - g2, rel=1e-15)
    assert f[1] == pytest.approx(-base.delta1 * x[1] + base.e1 * g1, rel=1e-14)
    with pytest.raises(UsageError):
        response(base, x, 3)


def test_prey_growth_forms_coincide(base):
    x1 = np.linspace(0.1, 1000, 50)
    a = base.r * x1 * (1 - x1 / (x1 + base.k))
    b = base.r * base.k * x1 / (x1 + base.k)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_jacobian_and_hessian_match_finite_differences(base):
    rng = np.random.default_rng(0)
    for x in rng.uniform(0.5, 500, size=(100, 3)):
        assert relerr(jacobian(base, x), fd_jac(base, x)) < 1e-6
        assert relerr(hessian(base, x), fd_hess(base, x)) < 1e-5


def test_structural_zeros_and_symmetry(base):
    x = np.array([80.0, 20.0, 30.0])
    J = jacobian(base, x)
    assert J[1, 2] == 0.0 and J[2, 1] == 0.0
    H = hessian(base, x)
    np.testing.assert_array_equal(H, np.transpose(H, (0, 2, 1)))
    # predator equations never couple the other predator
    assert np.all(H[1, 2, :] == 0) and np.all(H[2, 1, :] == 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 1e4), st.floats(0.01, 1e4), st.floats(0.01, 1e4))
def test_weighted_total_derivative_identity(x1, x2, x3):
    # d/dt of x1 + x2/e1 + x3/e2 equals prey growth minus predator losses
    p = table2(1.37)
    x = np.array([x1, x2, x3])
    f = rhs(p, x)
    d_chi = f[0] + f[1] / p.e1 + f[2] / p.e2
    expected = p.r * p.k * x1 / (x1 + p.k) - p.delta1 * x2 / p.e1 - p.delta2 * x3 / p.e2
    assert d_chi == pytest.approx(expected, rel=1e-9, abs=1e-9 * (1 + abs(expected) + x1 + x2 + x3))
    assert weighted_total(p, x) == pytest.approx(x1 + x2 / p.e1 + x3 / p.e2)
