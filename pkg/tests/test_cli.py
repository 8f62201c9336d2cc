import json
import math

import numpy as np
import pytest

from pcminimax.cli import (EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_VERIFY, ConfigError, cmd_solve,
                           cmd_sweep, cmd_verify, dumps, load_config, main, parse_config)

GOLDEN = (3 + math.sqrt(5)) / 2


def scalar_fixture(**extra):
    raw = {"weight": {"kind": "coefficients", "real": [[1.0, 1.0]]}, "K": 1, "J": 2, "N": 1, "P": 2.0}
    raw.update(extra)
    return raw


def write_config(tmp_path, raw, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return path


def read_sweep(path):
    lines = path.read_text().splitlines()
    cols = lines[0].split(",")
    return [dict(zip(cols, map(float, line.split(",")))) for line in lines[1:]]


# ---- config validation -----------------------------------------------------------
def test_indicator_fixture_matches_coefficient_fixture(tmp_path):
    # a = 1 on [0, 2) with T = 1 gives a_0 = a_1 = 1 at zero frequency
    raw = {"weight": {"kind": "indicator", "start": 0.0, "end": 2.0}, "K": 1, "J": 2, "N": 1, "P": 2.0}
    rep = cmd_solve(parse_config(raw, tmp_path), tmp_path / "out")
    assert rep["value"] == pytest.approx(GOLDEN * 2.0, rel=1e-10)


@pytest.mark.parametrize("patch, field", [
    ({"K": 0}, "K"),
    ({"P": -1.0}, "P"),
    ({"P": "big"}, "P"),
    ({"J": 1}, "J"),
    ({"period_T": 0}, "period_T"),
    ({"quad_nodes": 1}, "quad_nodes"),
    ({"weight": {"kind": "nonsense"}}, "weight.kind"),
    ({"weight": {"kind": "exponential-decay", "rate": -1.0}}, "weight"),
    ({"montecarlo": {"replicates": 0}}, "replicates"),
    ({"N_list": [3, 1], "J": 4}, "N_list"),
    ({"decay_hint": {"kind": "cubic"}}, "decay_hint"),
])
def test_field_level_messages(tmp_path, patch, field):
    with pytest.raises(ConfigError, match=field):
        parse_config(scalar_fixture(**patch), tmp_path)


def test_missing_csv_exits_2_without_outputs(tmp_path):
    out = tmp_path / "out"
    raw = scalar_fixture(weight={"kind": "sampled-grid", "csv": "nowhere.csv"}, output_dir="out")
    cfg = write_config(tmp_path, raw)
    assert main(["solve", "--config", str(cfg)]) == EXIT_CONFIG
    assert not out.exists()


def test_csv_weight(tmp_path):
    (tmp_path / "w.csv").write_text("t,value\n0,1\n0.5,1\n1,1\n1.5,1\n2,1\n")
    raw = {"weight": {"kind": "sampled-grid", "csv": "w.csv"}, "K": 1, "J": 3, "N": 2, "P": 1.0}
    cfg = load_config(write_config(tmp_path, raw))
    rep = cmd_solve(cfg, tmp_path / "out")
    # a = 1 on [0, 2]: two unit blocks, block 2 is zero
    assert rep["nu2"] == pytest.approx(GOLDEN, rel=1e-10)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(bad)


# ---- solve --------------------------------------------------------------------------
def test_solve_scalar_fixture(tmp_path):
    cfg = parse_config(scalar_fixture(outputs={"operator_csv": True, "spectral_csv": True,
                                               "trace_csv": True}), tmp_path)
    cmd_solve(cfg, tmp_path / "out")
    rep = json.loads((tmp_path / "out" / "solve.json").read_text())
    assert rep["value"] == pytest.approx(GOLDEN * 2.0, rel=1e-10)
    assert rep["nu2"] <= rep["upper_bound"] / rep["P"]
    assert rep["least_favorable"]["power"] == pytest.approx(2.0, rel=1e-12)
    assert rep["least_favorable"]["trace_power"] == pytest.approx(2.0, rel=1e-12)
    assert rep["eigen_gap"] == pytest.approx(math.sqrt(5), rel=1e-10)
    assert rep["warnings"] == []
    for name in ("operator.csv", "spectral.csv", "trace.csv"):
        assert (tmp_path / "out" / name).is_file()


def test_zero_weight_warns(tmp_path, caplog):
    raw = scalar_fixture(weight={"kind": "coefficients", "real": [[0.0, 0.0]]})
    with caplog.at_level("WARNING", logger="pcminimax"):
        rep = cmd_solve(parse_config(raw, tmp_path), tmp_path / "out")
    assert rep["value"] == 0.0
    assert any("zero" in w for w in rep["warnings"])
    assert "zero" in caplog.text


def test_floats_round_trip():
    x = 0.1 + 0.2
    assert json.loads(dumps({"x": x}))["x"] == x
    assert json.loads(dumps({"x": float("nan")}))["x"] is None


# ---- verify ---------------------------------------------------------------------------
def test_verify_passes(tmp_path):
    cfg = parse_config(scalar_fixture(), tmp_path)
    rep, code = cmd_verify(cfg, tmp_path / "out")
    assert code == EXIT_OK
    assert rep.replicates == 100_000
    saved = json.loads((tmp_path / "out" / "verify.json").read_text())
    for key in ("target", "mse", "stderr", "z_score", "replicates", "seed", "N", "K", "P"):
        assert key in saved
    assert saved["target"] == pytest.approx(GOLDEN * 2.0, rel=1e-10)


def test_verify_wrong_target_exits_1(tmp_path):
    cfg = parse_config(scalar_fixture(montecarlo={"replicates": 20_000}), tmp_path)
    _, code = cmd_verify(cfg, tmp_path / "out", target_override=1.2 * GOLDEN * 2.0)
    assert code == EXIT_VERIFY


def test_verify_replicates_zero_is_config_error(tmp_path):
    cfg = write_config(tmp_path, scalar_fixture(montecarlo={"replicates": 0}))
    assert main(["verify", "--config", str(cfg)]) == EXIT_CONFIG


def test_verify_byte_identical_across_threads(tmp_path):
    rng = np.random.default_rng(1)
    a = rng.standard_normal((2, 4))
    raw = {"weight": {"kind": "coefficients", "real": a.tolist(), "imag": (0.3 * a[::-1]).tolist()},
           "K": 2, "J": 4, "N": 3, "P": 1.5, "montecarlo": {"replicates": 20_000, "seed": 9}}
    cfg = parse_config(raw, tmp_path)
    cmd_verify(cfg, tmp_path / "one", threads=1)
    cmd_verify(cfg, tmp_path / "four", threads=4)
    assert (tmp_path / "one" / "verify.json").read_bytes() == (tmp_path / "four" / "verify.json").read_bytes()


def test_seed_environment_override(tmp_path, monkeypatch):
    monkeypatch.setenv("PCMINIMAX_SEED", "123")
    cfg = parse_config(scalar_fixture(montecarlo={"replicates": 5000, "seed": 4}), tmp_path)
    assert cfg.mc_seed == 123
    monkeypatch.setenv("PCMINIMAX_SEED", "x")
    with pytest.raises(ConfigError, match="PCMINIMAX_SEED"):
        parse_config(scalar_fixture(), tmp_path)


# ---- sweep ------------------------------------------------------------------------------
def test_sweep_geometric_differences_shrink(tmp_path):
    raw = {"weight": {"kind": "exponential-decay", "rate": math.log(2.0)}, "K": 2, "J": 17,
           "N_list": [2, 4, 8, 16], "P": 1.0, "decay_hint": {"kind": "geometric", "rate": 0.5}}
    cmd_sweep(parse_config(raw, tmp_path), tmp_path / "out")
    rows = read_sweep(tmp_path / "out" / "sweep.csv")
    deltas = [r["delta_prev"] for r in rows[1:]]
    assert deltas[0] > deltas[1] > deltas[2]
    assert deltas[2] < 1e-3 * deltas[0]
    for prev, row in zip(rows, rows[1:]):
        assert row["delta_prev"] <= prev["defect_bound"]
    assert "runtime" not in rows[0]


def test_sweep_saturates_past_support(tmp_path):
    rng = np.random.default_rng(2)
    a = np.zeros((1, 8))
    a[0, :3] = rng.standard_normal(3)
    raw = {"weight": {"kind": "coefficients", "real": a.tolist()}, "K": 1, "J": 8,
           "N_list": [2, 4, 7], "P": 1.0}
    rows = cmd_sweep(parse_config(raw, tmp_path), tmp_path / "out")
    assert rows[1]["nu2"] == pytest.approx(rows[0]["nu2"], rel=1e-10)
    assert rows[2]["nu2"] == pytest.approx(rows[0]["nu2"], rel=1e-10)


def test_single_n_sweep_matches_solve(tmp_path):
    cfg = parse_config(scalar_fixture(N_list=[1]), tmp_path)
    rows = cmd_sweep(cfg, tmp_path / "s", timing=True)
    rep = cmd_solve(cfg, tmp_path / "v")
    assert len(rows) == 1
    assert rows[0]["value"] == rep["value"]
    assert "runtime" in (tmp_path / "s" / "sweep.csv").read_text().splitlines()[0]


# ---- main -------------------------------------------------------------------------------
def test_main_solve_and_sweep(tmp_path, capsys):
    cfg = write_config(tmp_path, scalar_fixture())
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["value"] == pytest.approx(2 * GOLDEN, rel=1e-10)
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK
    assert (tmp_path / "o" / "sweep.csv").is_file()


def test_main_verify_and_threads(tmp_path):
    cfg = write_config(tmp_path, scalar_fixture(montecarlo={"replicates": 8000}))
    assert main(["verify", "--config", str(cfg), "--out", str(tmp_path / "o"), "--threads", "2"]) == EXIT_OK
    assert main(["verify", "--config", str(cfg), "--threads", "0"]) == EXIT_CONFIG


def test_main_numerical_failure(tmp_path, monkeypatch):
    from pcminimax import cli, eigensolve
    rng = np.random.default_rng(3)
    a = rng.standard_normal((3, 6))
    cfg = write_config(tmp_path, {"weight": {"kind": "coefficients", "real": a.tolist()}, "K": 3, "J": 6,
                                  "N": 5, "P": 1.0, "eigensolver": {"max_iter": 1, "tol": 1e-14}})
    # the dense oracle rescues a stalled iteration, so shrink its cap below the operator size
    monkeypatch.setattr(cli, "top_eigenpair", lambda op, **kw: eigensolve.top_eigenpair(op, cap=4, **kw))
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_NUMERIC
