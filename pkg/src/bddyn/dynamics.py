"""Trajectories, attractor classification, growth-rate sweeps and convergence runs.

Integration uses the Dormand-Prince 5(4) pair with PI step-size control and
the standard fourth-order continuous extension for output on a fixed time
grid.  The stepping loop is compiled with numba; everything around it is
plain numpy.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .equilibria import feasible_interior
from .errors import DivergenceError, StiffnessError, UsageError
from .model import Params, as_state, jacobian, weighted_total
from .stability import boundedness_bounds, char_poly

SPECIES = ("x1", "x2", "x3")


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    t_end: float = 3000.0
    max_step: float = 10.0
    transient_fraction: float = 0.5
    extinction_threshold: float = 1e-6
    n_samples: int = 12001
    max_steps: int = 10_000_000

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise UsageError(f"{name} must lie in (0, 1), got {v!r}")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise UsageError(f"t_end must be finite and > 0, got {self.t_end!r}")
        if not self.max_step > 0:
            raise UsageError(f"max_step must be > 0, got {self.max_step!r}")
        if not (0.0 <= self.transient_fraction < 1.0):
            raise UsageError(f"transient_fraction must lie in [0, 1), got {self.transient_fraction!r}")
        if not self.extinction_threshold > 0:
            raise UsageError(f"extinction_threshold must be > 0, got {self.extinction_threshold!r}")
        if int(self.n_samples) < 2001:
            raise UsageError(f"n_samples must be >= 2001, got {self.n_samples!r}")

    def replace(self, **changes) -> IntegratorConfig:
        return dataclasses.replace(self, **changes)


# --- compiled Dormand-Prince 5(4) -----------------------------------------

_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_A71, _A73, _A74, _A75, _A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
_D1 = -12715105075 / 11282082432
_D3 = 87487479700 / 32700410799
_D4 = -10690763975 / 1880347072
_D5 = 701980252875 / 199316789632
_D6 = -1453857185 / 822651844
_D7 = 69997945 / 29380423

STATUS_OK, STATUS_UNDERFLOW, STATUS_NONFINITE, STATUS_MAXSTEPS = 0, 1, 2, 3


@numba.njit(cache=True)
def _field(par, y, out):
    r, k, a1, a2, b1, b2, c1, c2, d1, d2, e1, e2 = (par[0], par[1], par[2], par[3], par[4], par[5],
                                                   par[6], par[7], par[8], par[9], par[10], par[11])
    x1, x2, x3 = y[0], y[1], y[2]
    g1 = c1 * x1 * x2 / (a1 + x1 + b1 * x2)
    g2 = c2 * x1 * x3 / (a2 + x1 + b2 * x3)
    out[0] = r * k * x1 / (x1 + k) - g1 - g2
    out[1] = -d1 * x2 + e1 * g1
    out[2] = -d2 * x3 + e2 * g2


@numba.njit(cache=True)
def _err_norm(err, y0, y1, rtol, atol):
    m = 0.0
    for i in range(err.shape[0]):
        sc = atol + rtol * max(abs(y0[i]), abs(y1[i]))
        v = abs(err[i]) / sc
        if v > m:
            m = v
    return m


@numba.njit(cache=True)
def _dopri5(par, y0, t_samples, rtol, atol, h_max, max_steps):
    n = 3
    ns = t_samples.shape[0]
    out = np.full((ns, n), np.nan)
    t = t_samples[0]
    t_end = t_samples[ns - 1]
    y = y0.copy()
    out[0, :] = y
    j = 1

    k1 = np.empty(n); k2 = np.empty(n); k3 = np.empty(n); k4 = np.empty(n)
    k5 = np.empty(n); k6 = np.empty(n); k7 = np.empty(n)
    yt = np.empty(n); y1 = np.empty(n); err = np.empty(n)
    r2 = np.empty(n); r3 = np.empty(n); r4 = np.empty(n); r5 = np.empty(n)

    _field(par, y, k1)
    # initial step (Hairer-Norsett-Wanner heuristic)
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y[i])
        d0 = max(d0, abs(y[i]) / sc)
        d1 = max(d1, abs(k1[i]) / sc)
    h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h = min(h, h_max, t_end - t)
    for i in range(n):
        yt[i] = y[i] + h * k1[i]
    _field(par, yt, k2)
    d2 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y[i])
        d2 = max(d2, abs(k2[i] - k1[i]) / sc / h)
    dm = max(d1, d2)
    h1 = max(1e-6, h * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
    h = min(100.0 * h, h1, h_max, t_end - t)

    beta = 0.04
    expo1 = 0.2 - beta * 0.75
    facold = 1e-4
    n_acc = 0
    n_rej = 0
    n_steps = 0
    reject = False
    status = 0
    while t < t_end:
        if n_steps >= max_steps:
            status = 3
            break
        if h < 1e-14 * max(1.0, abs(t)):
            status = 1
            break
        if t + 1.01 * h >= t_end:
            h = t_end - t
        n_steps += 1
        for i in range(n):
            yt[i] = y[i] + h * _A21 * k1[i]
        _field(par, yt, k2)
        for i in range(n):
            yt[i] = y[i] + h * (_A31 * k1[i] + _A32 * k2[i])
        _field(par, yt, k3)
        for i in range(n):
            yt[i] = y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        _field(par, yt, k4)
        for i in range(n):
            yt[i] = y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
        _field(par, yt, k5)
        for i in range(n):
            yt[i] = y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
        _field(par, yt, k6)
        for i in range(n):
            y1[i] = y[i] + h * (_A71 * k1[i] + _A73 * k3[i] + _A74 * k4[i] + _A75 * k5[i] + _A76 * k6[i])
        _field(par, y1, k7)
        finite = True
        for i in range(n):
            err[i] = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
            if not (np.isfinite(y1[i]) and np.isfinite(err[i])):
                finite = False
        if not finite:
            # shrink; give up only when the step underflows
            h *= 0.1
            reject = True
            n_rej += 1
            if h < 1e-14 * max(1.0, abs(t)):
                status = 2
                break
            continue
        e = _err_norm(err, y, y1, rtol, atol)
        fac11 = e ** expo1
        fac = fac11 / facold ** beta
        fac = max(0.1, min(5.0, fac / 0.9))
        hnew = h / fac
        if e <= 1.0:
            facold = max(e, 1e-4)
            n_acc += 1
            t_new = t + h
            if j < ns and t_samples[j] <= t_new:
                for i in range(n):
                    ydiff = y1[i] - y[i]
                    bspl = h * k1[i] - ydiff
                    r2[i] = ydiff
                    r3[i] = bspl
                    r4[i] = ydiff - h * k7[i] - bspl
                    r5[i] = h * (_D1 * k1[i] + _D3 * k3[i] + _D4 * k4[i] + _D5 * k5[i]
                                 + _D6 * k6[i] + _D7 * k7[i])
                while j < ns and t_samples[j] <= t_new:
                    th = (t_samples[j] - t) / h
                    th1 = 1.0 - th
                    for i in range(n):
                        out[j, i] = y[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])))
                    j += 1
            for i in range(n):
                k1[i] = k7[i]
                y[i] = y1[i]
            t = t_new
            if abs(hnew) > h_max:
                hnew = h_max
            if reject:
                hnew = min(hnew, h)
            reject = False
            h = hnew
        else:
            hnew = h / min(5.0, fac11 / 0.9)
            reject = True
            n_rej += 1
            h = hnew
    if status == 0 and j < ns:
        # floating round-off at the final sample
        for i in range(n):
            out[ns - 1, i] = y[i]
        j = ns
    return out, j, n_steps, n_acc, n_rej, status, t


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    n_steps: int
    n_accepted: int
    n_rejected: int
    status: str = "ok"

    def __len__(self) -> int:
        return len(self.t)

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]


def integrate(p: Params, init, cfg: IntegratorConfig = IntegratorConfig(), t0: float = 0.0) -> Trajectory:
    """Integrate from ``init`` on ``[t0, t0 + cfg.t_end]``, sampled at ``cfg.n_samples`` even points."""
    y0 = as_state(init)
    ts = np.linspace(t0, t0 + cfg.t_end, int(cfg.n_samples))
    out, filled, nst, nacc, nrej, status, t_reached = _dopri5(
        p.as_array(), y0, ts, cfg.rel_tol, cfg.abs_tol, cfg.max_step, cfg.max_steps)
    if status == STATUS_OK:
        return Trajectory(ts, out, nst, nacc, nrej)
    partial = Trajectory(ts[:filled], out[:filled], nst, nacc, nrej,
                         {1: "step-size underflow", 2: "non-finite state", 3: "step budget exhausted"}[status])
    if status == STATUS_NONFINITE:
        raise DivergenceError(f"non-finite state near t = {t_reached:.6g}", partial)
    raise StiffnessError(f"{partial.status} at t = {t_reached:.6g}", partial)


# --- attractor classification ---------------------------------------------


class AttractorClass(str, enum.Enum):
    STEADY = "Steady"
    PERIODIC = "Periodic"
    EXTINCTION = "Extinction"
    DIVERGED = "Diverged"
    UNDETERMINED = "Undetermined"


@dataclass
class CycleEstimate:
    mins: np.ndarray
    maxs: np.ndarray
    period: float | None
    classification: AttractorClass
    extinct: tuple = ()
    envelope_rate: float | None = None
    n_maxima: int = 0
    note: str = ""

    @property
    def amplitude(self) -> np.ndarray:
        return self.maxs - self.mins

    @property
    def label(self) -> str:
        if self.classification is AttractorClass.EXTINCTION:
            return "Extinction(" + ",".join(SPECIES[i] for i in self.extinct) + ")"
        return self.classification.value

    def as_dict(self) -> dict:
        return {
            "class": self.label,
            "min": self.mins.tolist(),
            "max": self.maxs.tolist(),
            "amplitude": self.amplitude.tolist(),
            "period": self.period,
            "envelope_rate": self.envelope_rate,
            "n_maxima": self.n_maxima,
            "note": self.note,
        }


AMPLITUDE_RTOL = 1e-3
PERIOD_SPREAD = 0.10
MIN_MAXIMA = 5
# a fitted envelope shrinking by at least this fraction across the window counts as decay
DECAY_FRACTION = 0.05
DECAY_FIT_TOL = 0.02


def _refined_extrema(t, x, sign):
    """Times and values of interior local extrema (``sign=+1`` maxima) with parabolic refinement."""
    s = sign * x
    idx = np.where((s[1:-1] > s[:-2]) & (s[1:-1] >= s[2:]))[0] + 1
    if idx.size == 0:
        return np.empty(0), np.empty(0)
    ym, y0, yp = s[idx - 1], s[idx], s[idx + 1]
    den = ym - 2 * y0 + yp
    with np.errstate(divide="ignore", invalid="ignore"):
        off = np.where(den != 0, 0.5 * (ym - yp) / den, 0.0)
    dt = t[1] - t[0]
    tv = t[idx] + off * dt
    val = y0 - 0.25 * (ym - yp) * off
    return tv, sign * val


def _envelope(t, x):
    """Per-cycle peak-to-trough heights at the maxima times, or None when too few cycles."""
    tmax, vmax = _refined_extrema(t, x, +1)
    tmin, vmin = _refined_extrema(t, x, -1)
    if tmin.size < 2:
        return None
    # only maxima with a trough on each side; np.interp would clamp at the edges
    inner = (tmax > tmin[0]) & (tmax < tmin[-1])
    tmax, vmax = tmax[inner], vmax[inner]
    if tmax.size < 3:
        return None
    troughs = np.interp(tmax, tmin, vmin)
    heights = vmax - troughs
    ok = heights > 0
    if ok.sum() < 3:
        return None
    return tmax[ok], heights[ok]


def detect_attractor(traj: Trajectory, cfg: IntegratorConfig = IntegratorConfig(), scale=None,
                     bound: float | None = None) -> CycleEstimate:
    """Classify the post-transient part of a trajectory.

    ``scale`` gives per-variable magnitudes for the amplitude threshold (the
    interior equilibrium when one exists; otherwise the window mean is used).
    ``bound`` is the ultimate bound ``M``; exceeding ``10 M`` counts as
    divergence.

    An oscillation whose per-cycle height shrinks geometrically across the
    window is classified Steady: it is a slow spiral into the equilibrium,
    not a cycle, even if its current height is still above the threshold.
    """
    t, y = traj.t, traj.y
    if len(t) < 3:
        raise UsageError("trajectory too short to classify")
    t_cut = t[0] + cfg.transient_fraction * (t[-1] - t[0])
    w = t >= t_cut
    tw, yw = t[w], y[w]
    mins = np.min(yw, axis=0) if len(tw) else np.full(3, np.nan)
    maxs = np.max(yw, axis=0) if len(tw) else np.full(3, np.nan)

    if not np.all(np.isfinite(y)):
        return CycleEstimate(mins, maxs, None, AttractorClass.DIVERGED, note="non-finite state")
    if bound is not None and math.isfinite(bound) and bound > 0 and np.max(np.abs(y)) > 10.0 * bound:
        return CycleEstimate(mins, maxs, None, AttractorClass.DIVERGED,
                             note=f"state exceeds 10*M = {10.0 * bound:.6g}")
    if len(tw) < 3:
        return CycleEstimate(mins, maxs, None, AttractorClass.UNDETERMINED, note="window too short")
    extinct = tuple(i for i in range(3) if maxs[i] < cfg.extinction_threshold)
    if extinct:
        return CycleEstimate(mins, maxs, None, AttractorClass.EXTINCTION, extinct=extinct)

    ref = np.abs(np.asarray(scale, dtype=float)) if scale is not None else np.abs(np.mean(yw, axis=0))
    thresh = np.maximum(AMPLITUDE_RTOL * ref, cfg.extinction_threshold)
    amp = maxs - mins
    if np.all(amp < thresh):
        return CycleEstimate(mins, maxs, None, AttractorClass.STEADY)

    # the variable oscillating most strongly relative to its threshold carries the cycle analysis
    iv = int(np.argmax(amp / thresh))
    tmax, _ = _refined_extrema(tw, yw[:, iv], +1)
    period = None
    if tmax.size >= 2:
        period = float(np.mean(np.diff(tmax)))
    rate = None
    env = _envelope(tw, yw[:, iv])
    if env is not None:
        te, he = env
        coef = np.polyfit(te - te[0], np.log(he), 1)
        rate = float(coef[0])
        resid = np.log(he) - np.polyval(coef, te - te[0])
        shrink = math.exp(rate * (te[-1] - te[0]))
        if shrink < 1.0 - DECAY_FRACTION and np.max(np.abs(resid)) < DECAY_FIT_TOL:
            return CycleEstimate(mins, maxs, period, AttractorClass.STEADY, envelope_rate=rate,
                                 n_maxima=int(tmax.size),
                                 note=f"decaying oscillation, envelope factor {shrink:.3g} over window")
    if tmax.size < MIN_MAXIMA:
        return CycleEstimate(mins, maxs, period, AttractorClass.UNDETERMINED, envelope_rate=rate,
                             n_maxima=int(tmax.size), note="fewer than 5 maxima in window")
    iv_int = np.diff(tmax)
    spread = (iv_int.max() - iv_int.min()) / iv_int.mean()
    if spread < PERIOD_SPREAD:
        return CycleEstimate(mins, maxs, period, AttractorClass.PERIODIC, envelope_rate=rate,
                             n_maxima=int(tmax.size))
    return CycleEstimate(mins, maxs, period, AttractorClass.UNDETERMINED, envelope_rate=rate,
                         n_maxima=int(tmax.size), note=f"maxima intervals spread {spread:.3g}")


# --- sweeps ----------------------------------------------------------------

SWEEP_PERTURBATION = 0.01
_UNIT = np.ones(3) / math.sqrt(3.0)


def perturbed(x_star, fraction: float, direction=_UNIT) -> np.ndarray:
    x = np.asarray(x_star, dtype=float)
    return x + fraction * np.linalg.norm(x) * np.asarray(direction, dtype=float)


@dataclass
class SweepPoint:
    r: float
    equilibrium: np.ndarray | None
    c2_sign: int
    cycle: CycleEstimate | None
    error: str = ""

    @property
    def label(self) -> str:
        return "error" if self.cycle is None else self.cycle.label


@dataclass
class SweepResult:
    points: list[SweepPoint] = field(default_factory=list)

    @property
    def r(self) -> np.ndarray:
        return np.array([pt.r for pt in self.points])

    @property
    def labels(self) -> list[str]:
        return [pt.label for pt in self.points]

    def transitions(self) -> list[tuple[int, str, str]]:
        """Indices ``i`` where the label changes between points ``i`` and ``i + 1``."""
        lab = self.labels
        return [(i, lab[i], lab[i + 1]) for i in range(len(lab) - 1) if lab[i] != lab[i + 1]]

    @property
    def success_fraction(self) -> float:
        return sum(pt.cycle is not None for pt in self.points) / max(1, len(self.points))


def _sweep_point(args) -> SweepPoint:
    p, r, cfg = args
    q = p.with_r(r)
    E = feasible_interior(q)
    if E is None:
        return SweepPoint(r, None, 0, None, "no feasible interior equilibrium")
    c2 = char_poly(jacobian(q, E.coords)).C2
    try:
        traj = integrate(q, perturbed(E.coords, SWEEP_PERTURBATION), cfg)
    except (DivergenceError, StiffnessError) as exc:
        return SweepPoint(r, E.coords, int(np.sign(c2)), None, str(exc))
    cyc = detect_attractor(traj, cfg, scale=E.coords, bound=boundedness_bounds(q).M)
    return SweepPoint(r, E.coords, int(np.sign(c2)), cyc)


def _map(fn, tasks, workers):
    if workers is None or workers <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks))


def sweep_r(p: Params, r_lo: float, r_hi: float, n_points: int,
            cfg: IntegratorConfig = IntegratorConfig(), workers: int | None = None) -> SweepResult:
    """Classify the long-run behaviour from near ``E*`` on an even ``r`` grid.

    Grid points are independent; ``workers > 1`` evaluates them in worker
    processes.  Results come back in grid order either way.
    """
    if not r_lo < r_hi:
        raise UsageError(f"need r_lo < r_hi, got {r_lo!r}, {r_hi!r}")
    if int(n_points) < 2:
        raise UsageError(f"n_points must be >= 2, got {n_points!r}")
    grid = np.linspace(r_lo, r_hi, int(n_points))
    return SweepResult(_map(_sweep_point, [(p, float(r), cfg) for r in grid], workers))


# --- convergence runs -------------------------------------------------------


@dataclass
class ConvergenceRecord:
    init: np.ndarray
    converged: bool
    entry_time: float | None
    final_distance: float
    error: str = ""

    def as_dict(self) -> dict:
        return {"init": self.init.tolist(), "converged": self.converged, "entry_time": self.entry_time,
                "final_distance": self.final_distance, "error": self.error}


def _relative_distance(y, target):
    scale = max(float(np.linalg.norm(target)), 1e-300)
    return np.linalg.norm(y - target, axis=-1) / scale


def _convergence_one(args) -> ConvergenceRecord:
    p, init, target, tol, cfg = args
    try:
        traj = integrate(p, init, cfg)
    except (DivergenceError, StiffnessError) as exc:
        return ConvergenceRecord(init, False, None, math.inf, str(exc))
    d = _relative_distance(traj.y, target)
    inside = d <= tol
    entry = None
    if inside[-1]:
        # first time after which the trajectory stays in the ball
        outside = np.where(~inside)[0]
        k = 0 if outside.size == 0 else outside[-1] + 1
        entry = float(traj.t[k])
    return ConvergenceRecord(init, bool(inside[-1]), entry, float(d[-1]))


def convergence_test(p: Params, inits, target, tol: float, cfg: IntegratorConfig = IntegratorConfig(),
                     workers: int | None = None) -> list[ConvergenceRecord]:
    """Whether each run ends within relative distance ``tol`` of ``target``.

    ``entry_time`` is the time from which the sampled trajectory stays in the
    ball (``0`` when it starts there).
    """
    tgt = np.asarray(target, dtype=float)
    tasks = []
    for s in inits:
        x = as_state(s)
        tasks.append((p, x, tgt, float(tol), cfg))
    return _map(_convergence_one, tasks, workers)


def chi_supremum(p: Params, traj: Trajectory, transient_fraction: float = 0.0) -> float:
    """Largest weighted total ``x1 + x2/e1 + x3/e2`` over the trajectory tail."""
    t_cut = traj.t[0] + transient_fraction * (traj.t[-1] - traj.t[0])
    return float(np.max(weighted_total(p, traj.y[traj.t >= t_cut])))
