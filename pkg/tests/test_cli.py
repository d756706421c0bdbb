import csv
import json
import subprocess
import sys

import jsonschema
import pytest
import yaml

from gsqg_patches.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, load_schema, main
from gsqg_patches.special import sigma


def _cfg(tmp_path, **kw):
    p = tmp_path / "run.yaml"
    p.write_text(yaml.safe_dump(kw))
    return str(p)


def _result(out):
    data = json.loads((out / "result.json").read_text())
    jsonschema.validate(data, load_schema())
    return data


def test_spectrum_mode(tmp_path, capsys):
    out = tmp_path / "s"
    assert main(["--mode", "spectrum", "--gamma", "1.5", "--n", "50", "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader((out / "spectrum.csv").open(newline="")))
    assert len(rows) == 50
    assert float(rows[0]["sigma_j"]) == 0.0
    for r in rows[1::7]:
        j = int(r["j"])
        assert float(r["sigma_j"]) == pytest.approx(sigma(j, 1.5), rel=1e-15)
        assert float(r["sigma_j_times_j"]) == pytest.approx(j * sigma(j, 1.5), rel=1e-15)
    assert "sigma_j" in capsys.readouterr().out
    assert _result(out)["spectrum_csv"] == "spectrum.csv"
    assert "stages_seconds" in json.loads((out / "timings.json").read_text())


def test_print_config(capsys):
    assert main(["--print-config"]) == EXIT_OK
    assert yaml.safe_load(capsys.readouterr().out)["gamma"] == 1.5


@pytest.mark.parametrize("argv", [["--gamma", "2.5"], ["--n", "1"]])
def test_config_errors_exit_2(tmp_path, argv, capsys):
    assert main(argv + ["--out", str(tmp_path)]) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_unknown_key_exit_2(tmp_path, capsys):
    assert main(["--config", _cfg(tmp_path, gama=1.5)]) == EXIT_CONFIG
    assert "line 1" in capsys.readouterr().err


def test_numerical_failure_exit_3(tmp_path):
    out = tmp_path / "f"
    cfg = _cfg(tmp_path, mode="solve", n=8, eps_targets=[5.0],
               patches=[{"kappa": 3.14159, "center_seed": [0.0, 0.0]}])
    assert main(["--config", cfg, "--out", str(out)]) == EXIT_NUMERICAL
    data = _result(out)
    assert "eps_max" in data["message"] and "gsqg_patches.solver" in data["message"]


def test_kr_critical_mode(tmp_path):
    out = tmp_path / "k"
    cfg = _cfg(tmp_path, mode="kr-critical", patches=[{"kappa": 1.0}, {"kappa": 1.0}],
               kr={"grid": 3, "max_seeds": 20})
    assert main(["--config", cfg, "--out", str(out)]) == EXIT_OK
    cps = _result(out)["critical_points"]
    assert any(abs(abs(c["points"][0][0]) - 0.6135208781) < 1e-8 for c in cps)


@pytest.fixture(scope="module")
def single_solve(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("solve")
    cfg = tmp / "run.yaml"
    cfg.write_text(yaml.safe_dump({"mode": "solve", "n": 16, "eps_targets": [0.01, 0.02, 0.04],
                                   "patches": [{"kappa": 3.141592653589793, "center_seed": [0.0, 0.0]}]}))
    code = main(["--config", str(cfg), "--out", str(tmp / "out")])
    return code, tmp / "out", cfg


def test_solve_single_patch(single_solve):
    code, out, _ = single_solve
    assert code == EXIT_OK
    data = _result(out)
    assert data["completed"] and len(data["curve"]) == 3
    for st in data["curve"]:
        assert st["residual_norm"] < 1e-10
        rows = list(csv.DictReader((out / st["boundary_csv"]).open(newline="")))
        assert len(rows) == 64
        assert all(float(r["curvature"]) > 0 for r in rows)


def test_solve_output_is_byte_reproducible(single_solve, tmp_path):
    _, out, cfg = single_solve
    assert main(["--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "result.json").read_bytes() == (out / "result.json").read_bytes()
    assert (tmp_path / "boundary_eps_01.csv").read_bytes() == (out / "boundary_eps_01.csv").read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gsqg_patches", "--mode", "spectrum", "--n", "5",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "spectrum.csv").exists()
