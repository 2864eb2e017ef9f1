import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from pbbddc.config import ProblemConfig, parse_config_file, parse_overrides
from pbbddc.driver import CSV_COLUMNS, append_csv_row, contrast_of, run, sweep

SMALL = dict(nx=4, ny=4, nz=4, Nx=2, Ny=2, Nz=2)


def write_config(path, extra=()):
    lines = ["mesh.nx = 4", "mesh.ny = 4", "mesh.nz = 4  # trailing comment",
             "partition.Nx = 2", "partition.Ny = 2", "partition.Nz = 2",
             "# full-line comment", ""]
    lines += list(extra)
    path.write_text("\n".join(lines) + "\n")
    return path


def test_config_file_roundtrip(tmp_path):
    p = write_config(tmp_path / "a.cfg",
                     ["scenario.kind = checkerboard", "scenario.exponent = 2",
                      "bddc.perturbed = true", "scaling.kind = alpha"])
    cfg = ProblemConfig.from_file(p)
    assert cfg.scenario == "checkerboard" and cfg.perturbed
    assert cfg.exponent == 2.0 and cfg.scaling == "alpha"
    # echo -> reparse is the identity
    echoed = cfg.echo()
    again = ProblemConfig.from_items(echoed)
    assert again == cfg
    assert again.echo() == echoed


def test_config_rejects_unknown_and_missing_keys(tmp_path):
    with pytest.raises(KeyError):
        ProblemConfig.from_items({"mesh.nx": "4", "bogus.key": "1"})
    with pytest.raises(KeyError):
        ProblemConfig.from_items({"mesh.nx": "4"})
    p = tmp_path / "bad.cfg"
    p.write_text("mesh.nx 4\n")
    with pytest.raises(ValueError):
        parse_config_file(p)


def test_overrides_apply_on_top():
    assert parse_overrides(["--solver.tol=1e-8"]) == {"solver.tol": "1e-8"}
    cfg = ProblemConfig(**SMALL)
    cfg2 = cfg.with_overrides(["--scaling.kind=beta", "--solver.maxit=17"])
    assert cfg2.scaling == "beta" and cfg2.maxit == 17
    assert cfg.scaling == "omega"  # original untouched
    with pytest.raises(ValueError):
        parse_overrides(["scaling.kind beta"])


def test_contrast_shorthand():
    cfg = ProblemConfig(**SMALL, scenario="checkerboard", exponent=3.0)
    assert np.isclose(contrast_of(cfg), 1e6)
    cfg = ProblemConfig(**SMALL, scenario="sinusoidal", c_max=4.0)
    assert np.isclose(contrast_of(cfg), 1e4)


def test_run_report_fields_and_determinism():
    cfg = ProblemConfig(**SMALL)
    r1, r2 = run(cfg), run(cfg)
    assert r1.converged and r1.iterations <= 25
    assert r1.n_dofs > 0 and r1.coarse_size == 12
    d1, d2 = json.loads(r1.to_json()), json.loads(r2.to_json())
    for d in (d1, d2):
        d.pop("timing")
    assert d1 == d2  # byte-identical modulo timing
    assert json.dumps(d1, sort_keys=True) == json.dumps(d2, sort_keys=True)


def test_csv_append(tmp_path):
    cfg = ProblemConfig(**SMALL)
    rep = run(cfg)
    path = tmp_path / "runs.csv"
    append_csv_row(path, cfg, rep)
    append_csv_row(path, cfg, rep)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 3 and rows[1][:3] == ["homogeneous", "8", "2"]


def test_sweep_runs_each_value(tmp_path):
    cfg = ProblemConfig(**SMALL, scenario="checkerboard")
    path = tmp_path / "sweep.csv"
    reports = sweep(cfg, "scenario.exponent", ["0", "1"], csv_path=path)
    assert len(reports) == 2
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 3
    contrasts = [float(r[rows[0].index("contrast")]) for r in rows[1:]]
    assert np.allclose(contrasts, [1.0, 100.0])


def run_cli(args, **kw):
    return subprocess.run([sys.executable, "-m", "pbbddc.cli", *args],
                          capture_output=True, text=True, **kw)


def test_cli_solve_and_report(tmp_path):
    report = tmp_path / "out.json"
    p = write_config(tmp_path / "a.cfg", [f"output.report = {report}"])
    res = run_cli(["solve", str(p), "--solver.tol=1e-8"])
    assert res.returncode == 0, res.stderr
    top = json.loads(res.stdout)
    assert top["converged"] and top["config"]["solver.tol"] == "1e-08"
    assert json.loads(report.read_text())["iterations"] == top["iterations"]


def test_cli_config_error_exit_code(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("mesh.nx = 4\n")
    res = run_cli(["solve", str(p)])
    assert res.returncode == 2
    assert "missing" in res.stderr.lower()


def test_cli_nonconvergence_exit_code(tmp_path):
    p = write_config(tmp_path / "a.cfg", ["solver.maxit = 1"])
    res = run_cli(["solve", str(p)])
    assert res.returncode != 0


def test_cli_sweep(tmp_path):
    p = write_config(tmp_path / "a.cfg", ["scenario.kind = checkerboard"])
    res = run_cli(["sweep", str(p), "--vary=scenario.exponent=0,1,2"],
                  cwd=tmp_path)
    assert res.returncode == 0, res.stderr
    assert len([l for l in res.stdout.splitlines() if "iterations" in l]) == 3
    assert (tmp_path / "sweep.csv").exists()
