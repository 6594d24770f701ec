import math

import numpy as np
import pytest

from bddyn import dynamics
from bddyn.dynamics import AttractorClass, IntegratorConfig, Trajectory
from bddyn.equilibria import feasible_interior
from bddyn.errors import StiffnessError, UsageError
from bddyn.model import jacobian, table2
from bddyn.stability import char_poly


SHORT = IntegratorConfig(t_end=300.0, n_samples=3001)


def _estar(r):
    return feasible_interior(table2(r)).coords


def test_config_validation():
    with pytest.raises(UsageError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(UsageError):
        IntegratorConfig(t_end=math.inf)
    with pytest.raises(UsageError):
        IntegratorConfig(n_samples=100)
    with pytest.raises(UsageError):
        IntegratorConfig(transient_fraction=1.0)
    assert IntegratorConfig().replace(t_end=10.0).t_end == 10.0


def test_equilibrium_is_fixed():
    x = _estar(1.37)
    tr = dynamics.integrate(table2(1.37), x, SHORT)
    assert np.max(np.abs(tr.y - x)) / np.linalg.norm(x) < 1e-6
    assert len(tr) == SHORT.n_samples and tr.status == "ok"


def test_prey_free_face_is_invariant():
    tr = dynamics.integrate(table2(1.37), [0.0, 40.0, 30.0], SHORT)
    assert np.all(tr.y[:, 0] == 0.0)
    # decay is monotone up to the absolute tolerance
    assert np.all(np.diff(tr.y[:, 1:], axis=0) <= SHORT.abs_tol)
    assert tr.final[1] < 1e-3 * 40.0


def test_sampling_is_even_and_starts_at_t0():
    tr = dynamics.integrate(table2(1.37), [100.0, 50.0, 50.0], SHORT, t0=5.0)
    assert tr.t[0] == 5.0 and tr.t[-1] == pytest.approx(305.0)
    np.testing.assert_allclose(np.diff(tr.t), 0.1, rtol=1e-9)
    np.testing.assert_array_equal(tr.y[0], [100.0, 50.0, 50.0])


def test_against_scipy_reference():
    from scipy.integrate import solve_ivp

    from bddyn.model import field_unchecked

    p = table2(1.37)
    x0 = [120.0, 40.0, 70.0]
    cfg = IntegratorConfig(t_end=50.0, n_samples=2001, rel_tol=1e-10, abs_tol=1e-12)
    tr = dynamics.integrate(p, x0, cfg)
    ref = solve_ivp(lambda t, y: field_unchecked(p, *y), (0, 50), x0, method="DOP853",
                    rtol=1e-13, atol=1e-13, t_eval=tr.t)
    assert np.max(np.abs(tr.y - ref.y.T) / np.abs(ref.y.T)) < 1e-7


def test_halving_tolerances_moves_final_state_little():
    p = table2(1.7)
    x0 = dynamics.perturbed(_estar(1.7), 0.05)
    a = dynamics.integrate(p, x0, SHORT)
    b = dynamics.integrate(p, x0, SHORT.replace(rel_tol=SHORT.rel_tol / 2, abs_tol=SHORT.abs_tol / 2))
    assert np.max(np.abs(a.final - b.final) / np.abs(b.final)) < 10 * SHORT.rel_tol


def test_step_budget_raises_with_partial_trajectory():
    with pytest.raises(StiffnessError) as info:
        dynamics.integrate(table2(1.37), [100.0, 50.0, 50.0], SHORT.replace(max_steps=20))
    tr = info.value.trajectory
    assert 0 < len(tr) < SHORT.n_samples
    assert tr.status == "step budget exhausted"


def _synthetic(y):
    t = np.linspace(0.0, 1000.0, len(y))
    return Trajectory(t, y, 0, 0, 0)


def test_detector_on_sinusoid():
    t = np.linspace(0.0, 1000.0, 20001)
    y = np.column_stack([100 + 30 * np.sin(2 * np.pi * t / 17.0), 50 + 10 * np.cos(2 * np.pi * t / 17.0),
                         np.full_like(t, 40.0)])
    cyc = dynamics.detect_attractor(_synthetic(y), IntegratorConfig(), scale=[100, 50, 40])
    assert cyc.classification is AttractorClass.PERIODIC
    assert cyc.period == pytest.approx(17.0, rel=0.01)
    assert cyc.amplitude[0] == pytest.approx(60.0, rel=1e-3)


def test_detector_on_constant_and_extinction():
    y = np.tile([100.0, 50.0, 40.0], (5001, 1))
    cyc = dynamics.detect_attractor(_synthetic(y), IntegratorConfig())
    assert cyc.classification is AttractorClass.STEADY
    np.testing.assert_array_equal(cyc.amplitude, 0.0)
    y2 = y.copy()
    y2[:, 2] = 1e-9
    ext = dynamics.detect_attractor(_synthetic(y2), IntegratorConfig())
    assert ext.label == "Extinction(x3)"


def test_detector_flags_blow_up():
    y = np.tile([100.0, 50.0, 40.0], (5001, 1))
    y[:, 0] = np.linspace(100.0, 1e6, 5001)
    cyc = dynamics.detect_attractor(_synthetic(y), IntegratorConfig(), bound=1e3)
    assert cyc.classification is AttractorClass.DIVERGED


def test_cycle_at_base_rate():
    tr = dynamics.integrate(table2(1.37), dynamics.perturbed(_estar(1.37), 0.01))
    cyc = dynamics.detect_attractor(tr, scale=_estar(1.37))
    assert cyc.classification is AttractorClass.PERIODIC
    assert 5.0 < cyc.period < 50.0


def test_unstable_equilibrium_does_not_settle():
    # Routh-Hurwitz fails at 1.47, so the run must not be labelled Steady
    x = _estar(1.47)
    assert not char_poly(jacobian(table2(1.47), x)).routh_hurwitz_stable
    cyc = dynamics.detect_attractor(dynamics.integrate(table2(1.47), dynamics.perturbed(x, 0.01)), scale=x)
    assert cyc.classification is not AttractorClass.STEADY


@pytest.mark.parametrize("r", [1.55, 1.7, 2.0])
def test_stable_equilibrium_attracts_nearby_start(r):
    x = _estar(r)
    assert char_poly(jacobian(table2(r), x)).routh_hurwitz_stable
    tr = dynamics.integrate(table2(r), dynamics.perturbed(x, 0.005))
    assert dynamics.detect_attractor(tr, scale=x).classification is AttractorClass.STEADY
    assert np.linalg.norm(tr.final - x) < 0.005 * np.linalg.norm(x)


def test_prey_alone_grows_without_bound():
    tr = dynamics.integrate(table2(1.37), [10.0, 0.0, 0.0])
    assert tr.final[0] > 1e3
    cyc = dynamics.detect_attractor(tr, bound=2.0 * tr.y[0, 0])
    assert cyc.classification is AttractorClass.DIVERGED


def test_positivity_random_starts():
    rng = np.random.default_rng(3)
    p = table2(1.47)
    for x0 in rng.uniform(1.0, 400.0, size=(10, 3)):
        tr = dynamics.integrate(p, x0, SHORT)
        assert tr.y.min() >= -SHORT.abs_tol
        assert dynamics.chi_supremum(p, tr) < math.inf


def test_two_point_sweep():
    sw = dynamics.sweep_r(table2(1.37), 1.3, 1.9, 2, SHORT)
    assert len(sw.points) == 2
    np.testing.assert_allclose(sw.r, [1.3, 1.9])
    assert sw.success_fraction == 1.0
    assert sw.labels[1] == "Steady"
    with pytest.raises(UsageError):
        dynamics.sweep_r(table2(1.37), 1.9, 1.3, 5)


def test_sweep_parallel_matches_serial():
    a = dynamics.sweep_r(table2(1.37), 1.3, 1.9, 3, SHORT, workers=1)
    b = dynamics.sweep_r(table2(1.37), 1.3, 1.9, 3, SHORT, workers=2)
    assert a.labels == b.labels
    for pa, pb in zip(a.points, b.points):
        np.testing.assert_array_equal(pa.cycle.maxs, pb.cycle.maxs)


def test_convergence_records():
    p = table2(1.7)
    x = _estar(1.7)
    recs = dynamics.convergence_test(p, [x, [0.0, 20.0, 20.0], dynamics.perturbed(x, 0.01)], x, 1e-3)
    assert recs[0].converged and recs[0].entry_time == 0.0
    assert not recs[1].converged and recs[1].entry_time is None
    assert recs[2].converged and recs[2].entry_time > 0.0


def test_convergence_at_published_stable_rate_is_not_observed():
    # E* is oscillatory-unstable at 1.29 on the computed branch; no fixed start settles
    from bddyn.audit import CONVERGENCE_INITS

    x = _estar(1.29)
    recs = dynamics.convergence_test(table2(1.29), CONVERGENCE_INITS, x, 1e-2)
    assert not any(r.converged for r in recs)
