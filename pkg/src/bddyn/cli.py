"""Command-line front end.

    bddyn <command> --config <path> [--out <dir>] [--preset table2] [--r <value>]

Commands: equilibria, stability, hopf, simulate, sweep, validate.  Each
writes ``<command>.json`` (plus a CSV for simulate and sweep) into ``--out``
and prints a short summary.  Exit codes: 0 success, 1 computation or
validation failure, 2 configuration error.

The configuration is one flat JSON object: the twelve parameter names at top
level plus optional sections ``integrator``, ``hopf``, ``simulate``,
``sweep`` and ``validate``.  ``--preset table2`` fills every parameter except
``r``; explicit keys override the preset and ``--r`` overrides both.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import audit, dynamics, hopf
from .equilibria import all_equilibria, boundary1, boundary2, feasible_interior
from .errors import BDDynError, DomainError, EquilibriumError, NoBifurcationInBracket, NotAHopfPoint
from .model import PARAM_NAMES, TABLE2, Params, jacobian
from .stability import (boundedness_bounds, classify, global_condition, local_condition_boundary,
                        local_condition_interior, persistence_check)

COMMANDS = ("equilibria", "stability", "hopf", "simulate", "sweep", "validate")
PRESETS = {"table2": TABLE2}

SECTION_KEYS = {
    "integrator": {"rel_tol", "abs_tol", "t_end", "max_step", "transient_fraction", "extinction_threshold",
                   "n_samples"},
    "hopf": {"bracket", "simulate_direction"},
    "simulate": {"init", "perturbation"},
    "sweep": {"r_lo", "r_hi", "n_points", "workers"},
    "validate": {"direction", "sweep", "corrupt_jacobian"},
}


class ConfigError(Exception):
    pass


# --- serialization -----------------------------------------------------------


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """Deterministic JSON: floats at 17 significant digits, insertion-ordered keys."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v, indent + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if hasattr(obj, "value") and isinstance(obj.value, str):
        return json.dumps(obj.value)
    return json.dumps(str(obj))


def write_json(path: Path, obj) -> None:
    path.write_text(dumps(obj) + "\n", encoding="utf-8", newline="\n")


def write_trajectory_csv(path: Path, traj: dynamics.Trajectory) -> None:
    lines = ["t,x1,x2,x3"]
    for t, y in zip(traj.t, traj.y):
        lines.append(",".join(format(float(v), ".18g") for v in (t, *y)))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


SWEEP_COLUMNS = ("r", "x1_star", "x2_star", "x3_star", "c2_sign", "class", "x1_min", "x1_max", "x2_min",
                 "x2_max", "x3_min", "x3_max", "period")


def write_sweep_csv(path: Path, sw: dynamics.SweepResult) -> None:
    g = lambda v: "nan" if v is None else format(float(v), ".17g")  # noqa: E731
    lines = [",".join(SWEEP_COLUMNS)]
    for pt in sw.points:
        E = pt.equilibrium if pt.equilibrium is not None else [None] * 3
        if pt.cycle is None:
            ext = [None] * 6
            period = None
        else:
            ext = [v for i in range(3) for v in (pt.cycle.mins[i], pt.cycle.maxs[i])]
            period = pt.cycle.period
        row = [g(pt.r), *(g(v) for v in E), str(pt.c2_sign), pt.label, *(g(v) for v in ext), g(period)]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


# --- configuration ------------------------------------------------------------


def _number(value, key):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key '{key}': expected a number, got {value!r}")
    if not math.isfinite(float(value)):
        raise ConfigError(f"key '{key}': must be finite, got {value!r}")
    return float(value)


def load_config(path: str | None, preset: str | None, r_override: float | None) -> dict:
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}")
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    elif preset is None:
        raise ConfigError("either --config or --preset is required")

    values = dict(PRESETS[preset]) if preset else {}
    sections = {}
    for key, val in raw.items():
        if key in PARAM_NAMES:
            values[key] = _number(val, key)
        elif key == "preset":
            if val not in PRESETS:
                raise ConfigError(f"key 'preset': unknown preset {val!r}")
            values = {**PRESETS[val], **values}
        elif key in SECTION_KEYS:
            if not isinstance(val, dict):
                raise ConfigError(f"key '{key}': expected an object")
            for sub in val:
                if sub not in SECTION_KEYS[key]:
                    raise ConfigError(f"key '{key}.{sub}': unknown setting")
            sections[key] = val
        else:
            raise ConfigError(f"key '{key}': unknown key")
    if r_override is not None:
        values["r"] = _number(r_override, "r")
    for name in PARAM_NAMES:
        if name not in values:
            raise ConfigError(f"key '{name}': missing parameter")
    try:
        params = Params(**{n: values[n] for n in PARAM_NAMES})
    except DomainError as exc:
        raise ConfigError(str(exc))

    integ = sections.get("integrator", {})
    kw = {}
    for k, v in integ.items():
        kw[k] = int(_number(v, f"integrator.{k}")) if k == "n_samples" else _number(v, f"integrator.{k}")
    try:
        cfg = dynamics.IntegratorConfig(**kw)
    except BDDynError as exc:
        raise ConfigError(f"key 'integrator': {exc}")

    h = sections.get("hopf", {})
    bracket = h.get("bracket", [0.8, 2.0])
    if not (isinstance(bracket, list) and len(bracket) == 2):
        raise ConfigError("key 'hopf.bracket': expected [r_lo, r_hi]")
    bracket = [_number(b, "hopf.bracket") for b in bracket]
    if not bracket[0] < bracket[1]:
        raise ConfigError("key 'hopf.bracket': need r_lo < r_hi")

    s = sections.get("simulate", {})
    init = s.get("init")
    if init is not None:
        if not (isinstance(init, list) and len(init) == 3):
            raise ConfigError("key 'simulate.init': expected three numbers")
        init = [_number(v, "simulate.init") for v in init]
        if any(v < 0 for v in init):
            raise ConfigError("key 'simulate.init': components must be >= 0")
    perturbation = _number(s.get("perturbation", 0.01), "simulate.perturbation")

    sw = sections.get("sweep", {})
    sweep = {"r_lo": _number(sw.get("r_lo", 0.8), "sweep.r_lo"),
             "r_hi": _number(sw.get("r_hi", 2.0), "sweep.r_hi"),
             "n_points": sw.get("n_points", 120),
             "workers": sw.get("workers", 1)}
    for k in ("n_points", "workers"):
        if isinstance(sweep[k], bool) or not isinstance(sweep[k], int) or sweep[k] < 1:
            raise ConfigError(f"key 'sweep.{k}': expected a positive integer")
    if sweep["n_points"] < 2:
        raise ConfigError("key 'sweep.n_points': need at least 2 points")
    if not sweep["r_lo"] < sweep["r_hi"]:
        raise ConfigError("key 'sweep.r_lo': need r_lo < r_hi")

    v = sections.get("validate", {})
    corrupt = v.get("corrupt_jacobian")
    if corrupt is not None:
        ok = (isinstance(corrupt, list) and len(corrupt) == 3 and all(isinstance(i, int) for i in corrupt[:2])
              and all(0 <= i < 3 for i in corrupt[:2]))
        if not ok:
            raise ConfigError("key 'validate.corrupt_jacobian': expected [row, col, relative offset]")
        corrupt = (corrupt[0], corrupt[1], _number(corrupt[2], "validate.corrupt_jacobian"))
    for k in ("direction", "sweep"):
        if k in v and not isinstance(v[k], bool):
            raise ConfigError(f"key 'validate.{k}': expected true or false")
    sim_dir = h.get("simulate_direction", True)
    if not isinstance(sim_dir, bool):
        raise ConfigError("key 'hopf.simulate_direction': expected true or false")

    return {"params": params, "integrator": cfg, "bracket": tuple(bracket), "init": init,
            "perturbation": perturbation, "sweep": sweep, "simulate_direction": sim_dir,
            "validate_direction": v.get("direction", True), "validate_sweep": v.get("sweep", True),
            "corrupt_jacobian": corrupt}


# --- commands ---------------------------------------------------------------


def _equilibrium_row(p, E):
    return {"name": E.name, "kind": E.kind.value, "coords": E.coords.tolist(), "feasible": E.feasible,
            "residual": E.residual(p), "diagnostics": [c.as_dict() for c in E.diagnostics]}


def cmd_equilibria(conf):
    p = conf["params"]
    eqs = all_equilibria(p)
    doc = {"command": "equilibria", "params": p.as_dict(), "equilibria": [_equilibrium_row(p, E) for E in eqs]}
    lines = [f"{len(eqs)} equilibria at r = {p.r:.17g}"]
    for E in eqs:
        lines.append(f"  {E.name:3s} {'feasible  ' if E.feasible else 'infeasible'} "
                     + " ".join(f"{v:.10g}" for v in E.coords) + f"  |f| = {E.residual(p):.2e}")
    return 0, doc, lines, {}


def cmd_stability(conf):
    p = conf["params"]
    eqs = all_equilibria(p)
    rows = []
    lines = [f"stability at r = {p.r:.17g}"]
    for E in eqs:
        row = _equilibrium_row(p, E)
        if E.feasible:
            rep = classify(p, E)
            row["stability"] = rep.as_dict()
            lines.append(f"  {E.name:3s} {rep.classification.value}")
        rows.append(row)
    E1, E2, Es = boundary1(p), boundary2(p), feasible_interior(p)
    bb = boundedness_bounds(p)
    conditions = [c.as_dict() for c in persistence_check(p, E1, E2)]
    conditions += [c.as_dict() for c in bb.conditions]
    for which, E in ((1, E1), (2, E2)):
        if E is not None and E.feasible:
            conditions.append(local_condition_boundary(p, E, which).as_dict())
    if Es is not None:
        conditions.append(local_condition_interior(p, Es).as_dict())
        conditions.append(global_condition(p, Es, bb.w).as_dict())
    for c in conditions:
        lines.append(f"  [{c['group']}] {c['name']}: {c['lhs']} {c['relation']} {c['rhs']} -> {c['satisfied']}")
    doc = {"command": "stability", "params": p.as_dict(), "equilibria": rows, "boundedness": bb.as_dict(),
           "conditions": conditions}
    return 0, doc, lines, {}


def _hopf_bundle(conf, simulate: bool):
    p = conf["params"]
    res = hopf.find_rc(p, conf["bracket"])
    cm = hopf.center_manifold(p, res.r_c)
    l1 = hopf.first_lyapunov_coefficient(p, res.r_c)
    closed = hopf.rc_closed_form_diagnostic(p.with_r(res.r_c), res.equilibrium)
    direction = hopf.validate_direction(p, res.r_c, cm.direction) if simulate else None
    return res, cm, l1, closed, direction


def cmd_hopf(conf):
    p = conf["params"]
    res, cm, l1, closed, direction = _hopf_bundle(conf, conf["simulate_direction"])
    doc = {"command": "hopf", "params": {k: v for k, v in p.as_dict().items() if k != "r"},
           "search": res.as_dict(), "closed_form": closed.as_dict(), "center_manifold": cm.as_dict(),
           "first_lyapunov_coefficient": l1,
           "direction_check": direction.as_dict() if direction else None,
           "published": {"r_c": hopf.PUBLISHED_RC, "Pi": hopf.PUBLISHED_PI,
                         "r_c_relative_difference": res.published_relative_error,
                         "Pi_sign_agrees": bool(np.sign(cm.Pi) == np.sign(hopf.PUBLISHED_PI))}}
    lines = [f"r_c = {res.r_c:.17g} (published {hopf.PUBLISHED_RC}, relative difference "
             f"{res.published_relative_error:+.4g})",
             f"dC2/dr = {res.transversality:.6g}, k2 = {res.k2_at_rc:.6g}, Re lambda = {res.eigen_crosscheck:.3g}",
             f"Pi = {cm.Pi:.6g} -> {cm.direction.value} (published {hopf.PUBLISHED_PI})",
             f"Pi consistent = {cm.Pi_consistent:.6g}, Pi with cubic terms = {cm.Pi_standard:.6g}, "
             f"l1 = {l1:.6g}",
             f"errata: {', '.join(e.quantity for e in cm.errata) or 'none'}"]
    if direction:
        lines.append(f"simulation: {direction.inferred}; consistent with Pi: {direction.consistent}")
    return 0, doc, lines, {}


def cmd_simulate(conf, out: Path):
    p, cfg = conf["params"], conf["integrator"]
    E = feasible_interior(p)
    if conf["init"] is not None:
        init = np.array(conf["init"])
    elif E is not None:
        init = dynamics.perturbed(E.coords, conf["perturbation"])
    else:
        raise EquilibriumError(p.r, "no interior equilibrium to start near; give simulate.init")
    code, flag = 0, None
    try:
        traj = dynamics.integrate(p, init, cfg)
    except (dynamics.DivergenceError, dynamics.StiffnessError) as exc:
        traj, code, flag = exc.trajectory, 1, str(exc)
    write_trajectory_csv(out / "trajectory.csv", traj)
    bound = boundedness_bounds(p).M
    cyc = dynamics.detect_attractor(traj, cfg, scale=E.coords if E is not None else None, bound=bound) \
        if len(traj) >= 3 else None
    doc = {"command": "simulate", "params": p.as_dict(), "init": init.tolist(),
           "integrator": dict(cfg.__dict__), "n_steps": traj.n_steps, "n_rejected": traj.n_rejected,
           "n_samples": len(traj), "failure": flag, "cycle": cyc.as_dict() if cyc else None}
    lines = [f"simulated to t = {traj.t[-1]:.6g} ({traj.n_steps} steps)",
             f"class: {cyc.label if cyc else 'n/a'}" + (f", period {cyc.period:.6g}" if cyc and cyc.period else "")]
    if flag:
        lines.append(f"integration failed: {flag}")
    return code, doc, lines, {"trajectory.csv": True}


def cmd_sweep(conf, out: Path):
    p, cfg, s = conf["params"], conf["integrator"], conf["sweep"]
    sw = dynamics.sweep_r(p, s["r_lo"], s["r_hi"], s["n_points"], cfg, workers=s["workers"])
    write_sweep_csv(out / "sweep.csv", sw)
    frac = sw.success_fraction
    doc = {"command": "sweep", "params": {k: v for k, v in p.as_dict().items() if k != "r"}, "grid": s,
           "success_fraction": frac,
           "transitions": [{"index": i, "r_left": float(sw.r[i]), "r_right": float(sw.r[i + 1]),
                            "from": a, "to": b} for i, a, b in sw.transitions()],
           "errors": [{"r": pt.r, "error": pt.error} for pt in sw.points if pt.cycle is None]}
    lines = [f"{len(sw.points)} grid points, {frac:.0%} classified"]
    for t in doc["transitions"]:
        lines.append(f"  {t['from']} -> {t['to']} between r = {t['r_left']:.6g} and {t['r_right']:.6g}")
    return (0 if frac >= 0.9 else 1), doc, lines, {"sweep.csv": True}


def _corrupted(jac, entry):
    i, j, rel = entry

    def wrapped(p, s):
        J = jac(p, s)
        J[i, j] += rel * max(abs(J[i, j]), 1.0)
        return J

    return wrapped


def cmd_validate(conf):
    p, cfg = conf["params"], conf["integrator"]
    jac = _corrupted(jacobian, conf["corrupt_jacobian"]) if conf["corrupt_jacobian"] else jacobian
    gates = []
    gates += audit.equilibrium_gates(p)
    gates += audit.derivative_gates(p.with_r(audit.PERSISTENCE_R), jac=jac)
    gates += audit.charpoly_gates()
    res, cm, l1, closed, direction = _hopf_bundle(conf, conf["validate_direction"])
    gates += audit.hopf_gates(res)
    gates += audit.center_manifold_gates(cm)
    gates.append(audit._lt("closed_form_h_quadratic_residual", abs(closed.residual_at_actual), 1e-8))
    if direction is not None:
        gates += audit.direction_gates(direction, cm)
    pos, _ = audit.positivity_gates(p, cfg=cfg)
    gates += pos
    if conf["validate_sweep"]:
        s = conf["sweep"]
        sw = dynamics.sweep_r(p, s["r_lo"], s["r_hi"], s["n_points"], cfg, workers=s["workers"])
        gates += audit.sweep_gates(sw, res.r_c)
    comparison = audit.published_comparison(p, res, cm, l1, direction, cfg)
    passed = all(g.passed for g in gates)
    doc = {"command": "validate", "params": {k: v for k, v in p.as_dict().items() if k != "r"},
           "passed": passed, "gates": [g.as_dict() for g in gates],
           "informational": {"Pi_consistent": cm.Pi_consistent, "Pi_standard": cm.Pi_standard,
                             "first_lyapunov_coefficient": l1,
                             "direction_vs_Pi_standard": (direction.inferred ==
                                                          hopf.Direction.from_sign(cm.Pi_standard).value)
                             if direction else None,
                             "errata": [e.as_dict() for e in cm.errata]},
           "published_comparison": comparison}
    lines = ["gates:"]
    for g in gates:
        lines.append(f"  {'PASS' if g.passed else 'FAIL'} {g.name}: {g.value:.6g} {g.relation} {g.tolerance:.6g}")
    lines.append("published comparison:")
    for row in comparison:
        mark = {True: "agrees", False: "DIFFERS", None: "info"}[row.get("agrees")]
        lines.append(f"  [{mark}] {row['quantity']}: computed {row['computed']} vs published {row['published']}")
    lines.append("all gates passed" if passed else
                 f"{sum(not g.passed for g in gates)} gate(s) failed: "
                 + ", ".join(g.name for g in gates if not g.passed))
    return (0 if passed else 1), doc, lines, {}


# --- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bddyn", description="Equilibria, stability and Hopf analysis of a "
                                                           "one-prey / two-predator model.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="flat JSON configuration file")
    ap.add_argument("--out", default="bddyn-out", help="output directory (default: %(default)s)")
    ap.add_argument("--preset", choices=sorted(PRESETS), help="built-in parameter set (all but r)")
    ap.add_argument("--r", type=float, help="prey growth rate; overrides the config")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        conf = load_config(args.config, args.preset, args.r)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.command in ("simulate", "sweep"):
            code, doc, lines, _ = globals()[f"cmd_{args.command}"](conf, out)
        else:
            code, doc, lines, _ = globals()[f"cmd_{args.command}"](conf)
    except (NoBifurcationInBracket, NotAHopfPoint, EquilibriumError, BDDynError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    write_json(out / f"{args.command}.json", doc)
    print("\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
