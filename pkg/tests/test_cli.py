import json
import math
import subprocess
import sys

import numpy as np
import pytest

from adiabatic_lab import cli, config, sweep
from adiabatic_lab.errors import ConfigurationError


def read_table(path):
    lines = [ln for ln in open(path).read().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return header, data


def write_config(tmp_path, doc):
    p = tmp_path / "experiment.json"
    p.write_text(json.dumps(doc))
    return str(p)


# -- config -----------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(config.PRESETS))
def test_preset_round_trips(name):
    cfg = config.preset(name)
    again = config.ExperimentConfig.from_dict(json.loads(cfg.to_json()))
    assert again == cfg


def test_config_file_round_trip(tmp_path):
    cfg = config.preset("fig4a")
    path = tmp_path / "c.json"
    path.write_text(cfg.to_json())
    assert config.load(path) == cfg


@pytest.mark.parametrize(
    "doc",
    [
        {"modle": {}},
        {"model": {"theta": 1.0, "spin": 2}},
        {"integrator": {"rtol": 1e-8, "order": 5}},
        {"sweep": {"epsilons": [0.1, -0.1]}},
        {"scan": {"spacing": "cubic"}},
        {"output": {"dir": "x", "format": "hdf5"}},
        {"model": {"f": {"kind": "Power", "sigma": 1.5}}},
    ],
)
def test_invalid_config_is_rejected(doc):
    with pytest.raises(ConfigurationError):
        config.ExperimentConfig.from_dict(doc)


def test_unknown_preset():
    with pytest.raises(ConfigurationError):
        config.preset("fig9")


# -- models -----------------------------------------------------------------


def test_models_lists_variants_and_presets(capsys):
    assert cli.main(["models"]) == 0
    out = capsys.readouterr().out
    for word in ("SpinRotating", "CounterExample", "fig3a", "fig3b", "fig4a", "fig4b", "fig5"):
        assert word in out


def test_models_json_round_trips_through_config_parser(capsys):
    assert cli.main(["models", "--json"]) == 0
    reg = json.loads(capsys.readouterr().out)
    for name, entry in reg["presets"].items():
        assert config.ExperimentConfig.from_dict(entry["config"]) == config.preset(name)


def test_unknown_flag_exits_with_usage():
    proc = subprocess.run(
        [sys.executable, "-m", "adiabatic_lab", "models", "--frobnicate"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2
    assert "usage" in proc.stderr


def test_missing_source_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        cli.main(["run"])
    assert info.value.code == 2


# -- run --------------------------------------------------------------------


def test_run_regular_preset(tmp_path):
    out = tmp_path / "run"
    assert cli.main(["run", "--preset", "fig3a", "--epsilon", "0.05", "--out", str(out)]) == 0
    header, data = read_table(out / "trajectory.csv")
    assert header == ["t", "R", "f_ad", "c0sq", "c1sq", "dyn_phase", "geo_phase", "norm_err"]
    t, f_ad = data[:, 0], data[:, 2]
    assert np.all(np.diff(t) > 0)
    assert f_ad[0] == pytest.approx(1.0, abs=1e-14)
    worst = np.max(1 - f_ad)
    assert 0.1 * 0.05**2 < worst < 10 * 0.05**2
    meta = json.loads((out / "trajectory.meta.json").read_text())
    assert meta["epsilon"] == 0.05 and meta["command"] == "run"


def test_run_with_zero_tilt_stays_adiabatic(tmp_path):
    doc = config.preset("fig3a").to_dict()
    doc["model"]["theta"] = 0.0
    doc["integrator"]["n_samples"] = 257
    path = write_config(tmp_path, doc)
    assert cli.main(["run", "--config", path, "--out", str(tmp_path / "o")]) == 0
    _, data = read_table(tmp_path / "o" / "trajectory.csv")
    np.testing.assert_allclose(data[:, 2], 1.0, atol=1e-12)


def test_run_output_is_deterministic(tmp_path):
    args = ["run", "--preset", "fig3b", "--epsilon", "0.1"]
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "trajectory.csv").read_bytes()
    assert a == (tmp_path / "b" / "trajectory.csv").read_bytes()


def test_run_integration_failure(tmp_path):
    doc = config.preset("fig3a").to_dict()
    doc["integrator"]["max_steps"] = 200
    path = write_config(tmp_path, doc)
    out = tmp_path / "fail"
    assert cli.main(["run", "--config", path, "--out", str(out)]) == 3
    err = json.loads((out / "error.json").read_text())
    assert "budget" in err["error"]
    _, data = read_table(out / "trajectory.csv")
    assert 0 < len(data) == err["samples_written"] < 4096


def test_bad_config_exit_code(tmp_path):
    path = write_config(tmp_path, {"model": {"theta": "steep"}})
    assert cli.main(["run", "--config", path]) == 2
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    assert cli.main(["scan", "--config", str(bad)]) == 2
    assert cli.main(["sweep", "--preset", "nope"]) == 2


# -- sweep ------------------------------------------------------------------


def test_sweep_removable_singularity(tmp_path):
    out = tmp_path / "s"
    assert cli.main(["sweep", "--preset", "fig4a", "--out", str(out), "--jobs", "2"]) == 0
    fit = json.loads((out / "fit.json").read_text())
    assert {"slope", "intercept", "r2", "predicted_exponent", "verdict"} <= set(fit)
    assert fit["slope"] == pytest.approx(1.0, abs=0.2)
    assert fit["predicted_exponent"] == 1.0
    recs = sweep.read_csv((out / "sweep.csv").read_text())
    assert len(recs) == 10


def test_sweep_irremovable_singularity(tmp_path):
    out = tmp_path / "s"
    assert cli.main(["sweep", "--preset", "fig4b", "--out", str(out)]) == 0
    fit = json.loads((out / "fit.json").read_text())
    assert fit["verdict"] == "breakdown"
    assert fit["predicted_exponent"] is None


def test_sweep_nonlinear_schedule(tmp_path):
    out = tmp_path / "s"
    assert cli.main(["sweep", "--preset", "fig5", "--out", str(out)]) == 0
    fit = json.loads((out / "fit.json").read_text())
    assert fit["slope"] == pytest.approx(1.0, abs=0.15)
    assert fit["predicted_exponent"] == 1.0


def test_sweep_files_are_deterministic(tmp_path):
    for d in ("a", "b"):
        assert cli.main(["sweep", "--preset", "counterexample", "--out", str(tmp_path / d)]) == 0
    for name in ("sweep.csv", "fit.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


# -- scan -------------------------------------------------------------------


def _scan(tmp_path, doc):
    path = write_config(tmp_path, doc)
    code = cli.main(["scan", "--config", path, "--out", str(tmp_path / "c")])
    text = (tmp_path / "c" / "connection.csv").read_text()
    footer = text.strip().splitlines()[-1]
    assert footer.startswith("# sigma_hat=")
    _, data = read_table(tmp_path / "c" / "connection.csv")
    return code, data, float(footer.split("=")[1])


def test_scan_linear_is_constant(tmp_path):
    code, data, sigma = _scan(tmp_path, {"model": {"f": {"kind": "Linear"}}})
    assert code == 0
    assert np.ptp(data[:, 1]) < 1e-15 and np.ptp(data[:, 2]) < 1e-15
    assert abs(sigma) < 1e-9


def test_scan_log_recovers_inverse_law(tmp_path):
    code, _, sigma = _scan(tmp_path, {"model": {"f": {"kind": "Log"}}, "scan": {"start": 1e-3, "stop": 1.0}})
    assert code == 0
    assert sigma == pytest.approx(1.0, abs=0.02)


def test_scan_counterexample_matches_numeric(tmp_path):
    from adiabatic_lab import berry

    cfg = config.preset("counterexample")
    code, data, _ = _scan(tmp_path, cfg.to_dict())
    assert code == 0
    for R, a00, re10, im10, _ in data[::5]:
        n = berry.connection_numeric(cfg.model, R)
        assert abs(n.alpha00 - a00) <= 1e-5 * max(abs(a00), 1e-3)
        assert abs(n.alpha10 - complex(re10, im10)) <= 1e-5 * abs(complex(re10, im10))


def test_scan_with_every_row_singular(tmp_path):
    doc = {"model": {"f": {"kind": "Log"}}, "scan": {"start": 0.0, "stop": 1e-13, "num": 3, "spacing": "linear"}}
    code, data, sigma = _scan(tmp_path, doc)
    assert code == 4
    assert np.all(np.isnan(data[:, 1]))
    assert math.isnan(sigma)
