import csv
import json

import numpy as np
import pytest

from bddyn import cli
from bddyn.model import TABLE2

FAST = {"integrator": {"t_end": 300.0, "n_samples": 3001}}
QUICK_VALIDATE = {**FAST, "validate": {"direction": False, "sweep": False}}


def run(tmp_path, command, conf=None, *extra, name="cfg.json"):
    args = [command, "--out", str(tmp_path / "out")]
    if conf is not None:
        path = tmp_path / name
        path.write_text(json.dumps(conf))
        args += ["--config", str(path)]
    return cli.main(args + list(extra))


def load(tmp_path, command):
    return json.loads((tmp_path / "out" / f"{command}.json").read_text())


def test_full_config_without_preset(tmp_path):
    conf = {**TABLE2, "r": 1.37}
    assert run(tmp_path, "equilibria", conf) == 0
    names = [e["name"] for e in load(tmp_path, "equilibria")["equilibria"]]
    assert names == ["E0", "E1", "E2", "E*"]


def test_missing_parameter_names_the_key(tmp_path, capsys):
    conf = dict(TABLE2)
    assert run(tmp_path, "equilibria", conf) == 2
    assert "'r'" in capsys.readouterr().err


@pytest.mark.parametrize("conf, key", [
    ({"preset": "table2", "r": 1.37, "gamma": 1.0}, "'gamma'"),
    ({"preset": "table2", "r": 1.37, "sweep": {"steps": 3}}, "'sweep.steps'"),
    ({"preset": "table2", "r": -1.0}, "r"),
    ({"preset": "table2", "r": "fast"}, "'r'"),
    ({"preset": "table2", "r": 1.37, "hopf": {"bracket": [2.0, 1.0]}}, "'hopf.bracket'"),
    ({"preset": "table2", "r": 1.37, "integrator": {"rel_tol": 2.0}}, "'integrator'"),
])
def test_bad_config_exits_2(tmp_path, capsys, conf, key):
    assert run(tmp_path, "equilibria", conf) == 2
    assert key in capsys.readouterr().err


def test_no_config_and_no_preset(tmp_path):
    assert cli.main(["equilibria", "--out", str(tmp_path)]) == 2


def test_r_flag_overrides_config(tmp_path):
    assert run(tmp_path, "equilibria", {"preset": "table2", "r": 1.0}, "--r", "1.37") == 0
    assert load(tmp_path, "equilibria")["params"]["r"] == 1.37


def test_stability_reports(tmp_path):
    assert cli.main(["stability", "--preset", "table2", "--r", "1.37", "--out", str(tmp_path / "out")]) == 0
    doc = load(tmp_path, "stability")
    e0 = doc["equilibria"][0]
    assert e0["name"] == "E0" and e0["stability"]["classification"] == "Saddle"
    pers = [c for c in doc["conditions"] if c["group"] == "persistence"]
    assert pers[0]["lhs"] == pytest.approx(1.37) and pers[0]["rhs"] == pytest.approx(1.44)
    assert not pers[0]["satisfied"]


def test_hopf_outside_bracket_exits_1(tmp_path, capsys):
    conf = {"preset": "table2", "r": 1.37, "hopf": {"bracket": [1.5, 2.0], "simulate_direction": False}}
    assert run(tmp_path, "hopf", conf) == 1
    assert "error" in capsys.readouterr().err


def test_hopf_document(tmp_path):
    conf = {"preset": "table2", "r": 1.37, "hopf": {"simulate_direction": False}}
    assert run(tmp_path, "hopf", conf) == 0
    doc = load(tmp_path, "hopf")
    assert doc["search"]["r_c"] == pytest.approx(1.4872065643676, abs=1e-10)
    assert doc["published"]["Pi_sign_agrees"] is True
    assert doc["direction_check"] is None


def test_simulate_csv_round_trip(tmp_path):
    conf = {"preset": "table2", "r": 1.37, **FAST}
    assert run(tmp_path, "simulate", conf) == 0
    with open(tmp_path / "out" / "trajectory.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "x1", "x2", "x3"]
    data = np.array(rows[1:], dtype=float)
    assert data.shape == (3001, 4)
    from bddyn import dynamics
    from bddyn.model import table2

    doc = load(tmp_path, "simulate")
    tr = dynamics.integrate(table2(1.37), doc["init"], dynamics.IntegratorConfig(**FAST["integrator"]))
    # '.18g' text reproduces the binary values exactly
    np.testing.assert_array_equal(data[:, 1:], tr.y)
    np.testing.assert_array_equal(data[:, 0], tr.t)


def test_simulate_explicit_init_failure_exits_1(tmp_path):
    conf = {"preset": "table2", "r": 1.37, **FAST, "simulate": {"init": [10.0, 0.0, 0.0]}}
    code = run(tmp_path, "simulate", conf)
    doc = load(tmp_path, "simulate")
    assert code == 0 and doc["cycle"]["class"] == "Diverged"


def test_two_point_sweep(tmp_path):
    conf = {"preset": "table2", "r": 1.37, "sweep": {"r_lo": 1.8, "r_hi": 2.0, "n_points": 2}}
    assert run(tmp_path, "sweep", conf) == 0
    with open(tmp_path / "out" / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert list(rows[0]) == list(cli.SWEEP_COLUMNS)
    for row in rows:
        assert row["class"] == "Steady"
        for s in ("x1", "x2", "x3"):
            lo, hi = float(row[f"{s}_min"]), float(row[f"{s}_max"])
            assert hi - lo <= 1e-3 * float(row[f"{s}_star"])


def test_validate_is_byte_identical(tmp_path):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    conf = {"preset": "table2", "r": 1.37, **QUICK_VALIDATE}
    assert run(tmp_path / "a", "validate", conf) == 0
    assert run(tmp_path / "b", "validate", conf) == 0
    a = (tmp_path / "a" / "out" / "validate.json").read_bytes()
    b = (tmp_path / "b" / "out" / "validate.json").read_bytes()
    assert a == b


def test_corrupted_jacobian_is_caught(tmp_path):
    conf = {"preset": "table2", "r": 1.37, **QUICK_VALIDATE,
            "validate": {"direction": False, "sweep": False, "corrupt_jacobian": [0, 1, 1e-3]}}
    assert run(tmp_path, "validate", conf) == 1
    gates = {g["name"]: g for g in load(tmp_path, "validate")["gates"]}
    assert not gates["jacobian_vs_finite_differences"]["passed"]
    assert sum(not g["passed"] for g in gates.values()) == 1


def test_dumps_is_deterministic_and_strict():
    doc = {"b": [1.0, float("nan")], "a": np.float64(0.1), "c": float("inf")}
    text = cli.dumps(doc)
    assert text == cli.dumps(dict(doc))
    back = json.loads(text)
    assert back["b"][1] == "nan" and back["c"] == "inf" and back["a"] == 0.1
