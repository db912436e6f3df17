"""
Command line: output documents and exit codes.
"""
import json

import pytest

from sparseconv import cli
from sparseconv.errors import CalibrationError, ValidationGateError
from sparseconv.models.layer import NamedLayer
from sparseconv.services.bench import geometric_grid, model_overlay, read_records_csv, write_records_csv
from sparseconv.services.gsl.trajectory import write_trajectory


def _run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


@pytest.mark.unit
class TestProject:
    def test_conv5_on_bdw(self, capsys):
        code, out = _run(capsys, "project", "--profile", "BDW", "--layer", "alexnet-conv5")
        assert code == cli.EXIT_OK
        doc = json.loads(out)
        assert doc["layer"] == "conv5"
        assert doc["cost"] == {"flops": 299040768, "activation_bytes": 518656, "weight_bytes": 3538944}
        assert doc["class"] == "PRUNABLE_FOR_SPEED"
        assert doc["window"]["x_lower_useful"] == pytest.approx(0.01183, abs=1e-4)
        # default density is 1/alpha, where sparse and dense tie
        assert doc["projections"][0]["speedup"] == pytest.approx(1.0)

    def test_density_grid_and_alpha_override(self, capsys):
        code, out = _run(capsys, "project", "--profile", "Atom", "--layer", "N=256,C=384,R=3,S=3,H=13,W=13,pad=1",
                         "--x", "0.5,0.09", "--alpha", "3")
        doc = json.loads(out)
        assert doc["profile"]["alpha"] == 3.0
        assert [p["x"] for p in doc["projections"]] == [0.5, 0.09]

    def test_lowered_accounting_grows_activations(self, capsys):
        _, direct = _run(capsys, "project", "--profile", "BDW", "--layer", "alexnet-conv5")
        _, lowered = _run(capsys, "project", "--profile", "BDW", "--layer", "alexnet-conv5", "--lowered")
        assert json.loads(lowered)["cost"]["activation_bytes"] > json.loads(direct)["cost"]["activation_bytes"]

    def test_fc_is_bandwidth_bound(self, capsys):
        _, out = _run(capsys, "project", "--profile", "BDW", "--layer", "alexnet-fc6")
        assert json.loads(out)["class"] == "BANDWIDTH_BOUND_ALWAYS"


@pytest.mark.unit
class TestExitCodes:
    def test_presets(self, capsys):
        code, out = _run(capsys, "presets")
        assert code == cli.EXIT_OK
        assert "alexnet" in json.loads(out)["network"]

    def test_unknown_preset(self, capsys):
        code, _ = _run(capsys, "project", "--profile", "pdp11", "--layer", "alexnet-conv5")
        assert code == cli.EXIT_ERROR

    def test_bad_grid(self, capsys, tmp_path):
        code, _ = _run(capsys, "sweep", "--layer", "alexnet-conv5", "--grid", "1:0:3", "--out", str(tmp_path / "s.csv"))
        assert code == cli.EXIT_ERROR

    def test_invalid_sweep_options(self, capsys, tmp_path):
        code, _ = _run(capsys, "sweep", "--layer", "alexnet-conv5", "--reps", "1", "--out", str(tmp_path / "s.csv"))
        assert code == cli.EXIT_ERROR

    def test_validation_gate(self, capsys, monkeypatch, tmp_path):
        def failing(spec, profile=None):
            raise ValidationGateError("sparse_direct", spec.layers[0].name, 0.5)

        monkeypatch.setattr(cli, "run_sweep", failing)
        code, _ = _run(capsys, "sweep", "--layer", "alexnet-conv5", "--out", str(tmp_path / "s.csv"))
        assert code == cli.EXIT_VALIDATION_GATE
        assert not (tmp_path / "s.csv").exists()

    def test_calibration(self, capsys, monkeypatch):
        def unstable(**kwargs):
            raise CalibrationError("FLOP/s", [1e9, 2e9, 1e9], kwargs["tolerance"])

        monkeypatch.setattr(cli, "calibrate", unstable)
        code, _ = _run(capsys, "calibrate", "--runs", "3")
        assert code == cli.EXIT_CALIBRATION

    def test_missing_subcommand(self):
        with pytest.raises(SystemExit):
            cli.main([])


@pytest.mark.integration
def test_small_sweep_writes_both_files(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code, _ = _run(capsys, "sweep", "--layer", "N=4,C=3,R=3,S=3,H=6,W=6,pad=1", "--grid", "1,0.5",
                   "--batch", "1", "--threads", "1", "--reps", "3", "--warmup", "0",
                   "--variants", "dense_direct", "sparse_direct", "--profile", "BDW", "--out", str(out))
    assert code == cli.EXIT_OK
    records = read_records_csv(out)
    assert [(r.variant, r.x) for r in records] == [("dense_direct", 1.0), ("sparse_direct", 1.0), ("sparse_direct", 0.5)]
    assert len(read_records_csv(tmp_path / "sweep.model.csv")) == 2


@pytest.mark.unit
def test_fit_alpha_from_records(capsys, presets, tmp_path):
    bdw = presets.platform("BDW")
    layer = presets.layer("alexnet-conv5")
    write_records_csv(tmp_path / "r.csv", model_overlay(layer, 1, bdw.with_alpha(2.5), geometric_grid(1.0, 0.02, 10)))
    code, out = _run(capsys, "fit-alpha", "--records", str(tmp_path / "r.csv"), "--profile", "BDW",
                     "--variant", "model", "--out", str(tmp_path / "fitted.json"))
    assert code == cli.EXIT_OK
    doc = json.loads(out)
    assert doc["alpha"] == pytest.approx(2.5, abs=1e-3)
    assert doc["measured_alpha_at_dense"]["conv5"] == pytest.approx(2.5)
    assert json.loads((tmp_path / "fitted.json").read_text())["alpha"] == pytest.approx(2.5, abs=1e-3)


@pytest.mark.unit
def test_fit_alpha_without_a_dense_point_warns(capsys, presets, tmp_path):
    bdw = presets.platform("BDW")
    layer = presets.layer("alexnet-conv5")
    write_records_csv(tmp_path / "r.csv", model_overlay(layer, 1, bdw, geometric_grid(0.5, 0.02, 8)))
    code = cli.main(["fit-alpha", "--records", str(tmp_path / "r.csv"), "--profile", "BDW", "--variant", "model"])
    captured = capsys.readouterr()
    assert code == cli.EXIT_OK
    assert "measured_alpha_at_dense" not in json.loads(captured.out)
    assert "WARNING" in captured.err and "no dense-point alpha" in captured.err


@pytest.mark.unit
def test_fit_alpha_without_points(capsys, tmp_path):
    write_records_csv(tmp_path / "r.csv", [])
    code, _ = _run(capsys, "fit-alpha", "--records", str(tmp_path / "r.csv"), "--profile", "BDW")
    assert code == cli.EXIT_ERROR


@pytest.mark.unit
def test_gsl_replay(capsys, tmp_path):
    active = ["conv2", "conv3", "conv4", "conv5"]
    rows = [(100 * k, name, max(0.005, 1.0 - 0.2 * k)) for k in range(1, 7) for name in active]
    write_trajectory(tmp_path / "t.csv", rows)
    code, out = _run(capsys, "gsl-replay", "--trajectory", str(tmp_path / "t.csv"), "--network", "alexnet",
                     "--profile", "BDW", "--exclude", "conv1", "--out", str(tmp_path / "report.json"))
    assert code == cli.EXIT_OK
    doc = json.loads(out)
    status = {entry["id"]: entry["status"] for entry in doc["layers"]}
    assert status["conv1"] == "EXCLUDED" and status["fc6"] == "EXCLUDED"
    assert all(status[name] == "STOPPED_SATURATED" for name in active)
    assert json.loads((tmp_path / "report.json").read_text()) == doc


@pytest.mark.unit
def test_gsl_replay_bad_trajectory(capsys, tmp_path):
    (tmp_path / "t.csv").write_text("step,layer,density\n", encoding="utf-8")
    code, _ = _run(capsys, "gsl-replay", "--trajectory", str(tmp_path / "t.csv"), "--network", "alexnet",
                   "--profile", "BDW")
    assert code == cli.EXIT_ERROR


@pytest.mark.unit
def test_gsl_replay_unknown_exclusion(capsys, tmp_path):
    write_trajectory(tmp_path / "t.csv", [(100, "conv5", 0.5)])
    code, _ = _run(capsys, "gsl-replay", "--trajectory", str(tmp_path / "t.csv"), "--network", "alexnet",
                   "--profile", "BDW", "--exclude", "conv9")
    assert code == cli.EXIT_ERROR
