import csv
import json

import numpy as np
import pytest

from radonlaw import cli


def _csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_exact_csv(tmp_path):
    out = tmp_path / "exact.csv"
    code = cli.main(["exact", "--p", "-1", "--t", "0.5,1.5", "--xs", "0:1:0.25", "--out", str(out)])
    assert code == cli.EXIT_OK
    rows = _csv(out)
    assert len(rows) == 10
    row = next(r for r in rows if float(r["t"]) == 0.5 and float(r["x"]) == 0.25)
    assert float(row["u_r"]) == pytest.approx(np.sqrt(2.0) - 1.0)
    assert float(row["atom_mass"]) == 0.5
    late = [r for r in rows if float(r["t"]) == 1.5]
    assert float(late[0]["xi"]) == pytest.approx((np.sqrt(1.5) - 1.0) ** 2, abs=1e-8)


def test_exact_pulse_csv(tmp_path):
    out = tmp_path / "pulse.csv"
    assert cli.main(["exact", "--p", "-1", "--n", "2", "--t", "5", "--xs", "0,2", "--out", str(out)]) == 0
    rows = _csv(out)
    assert float(rows[0]["xi"]) == pytest.approx(0.5 + (np.sqrt(5.0) - 1.0) ** 2, abs=1e-8)


def test_sweep_t0(tmp_path):
    out = tmp_path / "sweep.csv"
    assert cli.main(["sweep", "--p", "-1,-2,-0.5", "--quantity", "t0", "--out", str(out)]) == 0
    rows = _csv(out)
    assert [float(r["t0"]) for r in rows] == [1.0, 1.0, 1.0]


def test_sweep_rejects_bad_exponent(capsys):
    assert cli.main(["sweep", "--p", "1.5"]) == cli.EXIT_CONFIG


def test_simulate_writes_trajectories(tmp_path):
    out = tmp_path / "run"
    code = cli.main(
        ["simulate", "--flux", "power:-1", "--datum", "dirac:0:1", "--n", "16,32", "--T", "0.5",
         "--dx", str(2.0**-8), "--out", str(out)]
    )
    assert code == 0
    diag = json.loads((out / "diagnostics.json").read_text())
    assert [r["level"] for r in diag["runs"]] == [16, 32]
    assert all(r["mass_drift"] <= 1e-12 for r in diag["runs"])
    data = np.load(out / "traj_n32.npz")
    assert data["snaps"].shape[1] == diag["runs"][1]["n_cells"]


def test_verify_with_flags(tmp_path):
    report = tmp_path / "report.json"
    code = cli.main(
        ["verify", "--flux", "power:-1", "--datum", "dirac:0:1", "--n", "16,32,64", "--T", "1.5",
         "--dx", str(2.0**-8), "--checks", "mass,max-principle,aronson-benilan", "--report", str(report)]
    )
    rep = json.loads(report.read_text())
    assert code == (0 if rep["pass"] else 1)
    assert {c["name"] for c in rep["checks"]} >= {"mass-conservation", "maximum-principle", "aronson-benilan"}
    assert all(set(c) == {"name", "pass", "margin", "tolerance", "evidence_series"} for c in rep["checks"])


def test_schema_errors_exit_2(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"flux": "power:-1", "datum": "dirac:0:1", "levels": [0], "T": 1.0}))
    assert cli.main(["simulate", "--config", str(cfg)]) == cli.EXIT_CONFIG
    cfg.write_text(json.dumps({"flux": "power:-1", "datum": "dirac:0:1", "levels": [4], "T": 1.0, "bogus": 1}))
    assert cli.main(["simulate", "--config", str(cfg)]) == cli.EXIT_CONFIG


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as err:
        cli.main(["exact", "--t", "1"])
    assert err.value.code == cli.EXIT_CONFIG


def test_runtime_error_exits_3(tmp_path):
    # p = 2 is outside the power catalog
    assert cli.main(["exact", "--p", "2", "--t", "1", "--xs", "0,1"]) == cli.EXIT_RUNTIME


def test_workers_env(monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "1")
    assert cli.workers() == 1
    assert cli.pmap(abs, [-1, -2]) == [1, 2]


def test_parse_range():
    assert list(cli.parse_range("0:1:0.25")) == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert cli.parse_list("1,2", int) == [1, 2]
