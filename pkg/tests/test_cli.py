import json

import pytest

from emdenfowler.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_stable_profile(tmp_path, capsys):
    code, out, _ = run(capsys, "solve", "--family", "power:2", "--f", "power:1,5", "--sign", "minus", "--a", "1",
                       "--out", str(tmp_path))
    assert code == 0
    rep = json.loads(out)
    assert rep["termination"]["kind"] == "ReachedEnd"
    assert rep["classification"]["observed_class"] == "positive_monotone_decreasing_stable"
    assert rep["pohozaev"]["max_residual"] < 1e-6
    assert rep["laplacian_sign_calibration"] == 1.0 and rep["version"] == "0.1.0"
    assert (tmp_path / "trajectory.csv").read_text().startswith("r,w,wprime\n")


def test_solve_blowup_and_svg(tmp_path, capsys):
    code, out, _ = run(capsys, "solve", "--family", "power:1", "--f", "power:-1,3", "--sign", "minus",
                       "--a", "0.5", "--svg", "--out", str(tmp_path))
    assert code == 0
    assert json.loads(out)["termination"]["kind"] == "BlowUp"
    assert (tmp_path / "trajectory.svg").read_text().lstrip().startswith("<?xml")


def test_solve_is_byte_identical(tmp_path, capsys):
    args = ["solve", "--family", "sinh:1.5,0.5", "--f", "pml:1,3", "--sign", "plus", "--a", "2", "--rmax", "5"]
    run(capsys, *args, "--out", str(tmp_path))
    first = (tmp_path / "report.json").read_bytes(), (tmp_path / "trajectory.csv").read_bytes()
    run(capsys, *args, "--out", str(tmp_path))
    assert first == ((tmp_path / "report.json").read_bytes(), (tmp_path / "trajectory.csv").read_bytes())


def test_missing_a_is_usage_error(capsys):
    code, out, err = run(capsys, "solve", "--family", "power:2", "--f", "power:1,5")
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "usage"


@pytest.mark.parametrize("argv", [["verify", "nope"], ["solve", "--family", "cube:1", "--f", "power:1,3", "--a", "1"],
                                  ["shoot", "--ell", "1"], [], ["frobnicate"]])
def test_usage_errors(argv, capsys):
    code, _, err = run(capsys, *argv)
    assert code == 2 and json.loads(err)["error"] == "usage"


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[solve]\nfamily = power:2\nf = power:1,5\na = 0.5\nrmax = 20\n")
    code, out, _ = run(capsys, "solve", "--config", str(cfg), "--a", "1", "--out", str(tmp_path / "o"))
    rep = json.loads(out)
    assert code == 0 and rep["config"]["a"] == 1.0 and rep["config"]["rmax"] == 20.0


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[solve]\ncolour = red\n")
    code, _, _ = run(capsys, "solve", "--config", str(cfg))
    assert code == 2


def test_verify_tables(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "tables", "--out", str(tmp_path))
    rep = json.loads(out)
    assert code == 0 and rep["passed"] and len(rep["suites"][0]["assertions"]) > 100


def test_verify_hypotheses(capsys):
    code, out, _ = run(capsys, "verify", "hypotheses")
    assert code == 0 and json.loads(out)["passed"]


def test_shoot_below_threshold_constant_only(tmp_path, capsys):
    code, out, _ = run(capsys, "shoot", "--ell", "1", "--m", "4", "--n1", "0", "--n2", "0", "--p", "2",
                       "--lambda", "1", "--out", str(tmp_path))
    rep = json.loads(out)
    assert code == 0 and rep["constant_only"] and rep["positive_solutions"] == []


def test_shoot_gate_reported(tmp_path, capsys):
    code, out, _ = run(capsys, "shoot", "--ell", "1", "--m", "4", "--n1", "0", "--n2", "0", "--p", "3.5",
                       "--lambda", "40", "--k", "1", "--out", str(tmp_path))
    assert code == 1 and json.loads(out)["status"] == "gate_failed"


def test_glue_even(tmp_path, capsys):
    code, out, _ = run(capsys, "glue", "--ell", "1", "--m", "4", "--n1", "0", "--n2", "0", "--p", "2",
                       "--lambda", "40", "--k", "2", "--out", str(tmp_path))
    rep = json.loads(out)
    assert code == 0 and rep["glued"]["case_tag"] == "P2.2"
    assert rep["glued"]["far_ends"] == {"plus": "+inf", "minus": "+inf"}
    assert max(rep["t_equation_residual"].values()) < 1e-6
    assert (tmp_path / "glue.svg").exists()
