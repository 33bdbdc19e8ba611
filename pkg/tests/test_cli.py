import json
import os

import numpy as np
import pytest

from hamflow import cli
from hamflow import hamiltonian as ha


def write_config(tmp_path, name="scenario.json", **overrides):
    cfg = {
        "family": {"id": "autonomous", "n": 1},
        "numeric": {"grid": 9, "mesh": 48, "trunc": 6.0},
        "reports": ["theorem-a"],
        "out": str(tmp_path / "results"),
    }
    cfg.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_families_listing(capsys):
    assert cli.main(["families"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    for fid in ("autonomous", "sech-perturbation", "rotating-asymptotics",
                "gamma-nor-embedding"):
        assert fid in out
    assert out.count("assumptions:") == 4
    assert "A3" in out  # periodic family marked


def test_selftest(capsys):
    assert cli.main(["selftest"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "passed" in out


def test_run_autonomous_agrees(tmp_path, capsys):
    cfgp = write_config(tmp_path)
    assert cli.main(["run", cfgp]) == cli.EXIT_OK
    report = (tmp_path / "results" / "report.txt").read_text()
    assert "theorem-a.sfl = 0" in report
    assert "theorem-a.maslov = 0" in report
    assert "all_agree = true" in report
    for table in ("tracks.csv", "crossings.csv", "convergence.csv"):
        assert (tmp_path / "results" / table).exists()


def test_run_gamma_nor_scenario(tmp_path):
    cfgp = write_config(tmp_path, **{
        "family": {"id": "gamma-nor-embedding", "n": 1},
        "numeric": {"grid": 17, "mesh": 96, "trunc": 6.0},
        "reports": ["theorem-b"],
    })
    assert cli.main(["run", cfgp]) == cli.EXIT_OK
    report = (tmp_path / "results" / "report.txt").read_text()
    assert "theorem-b.sfl = 1" in report
    assert "theorem-b.maslov = 1" in report


def test_run_sech_scenario_lists_crossing(tmp_path):
    cfgp = write_config(tmp_path, **{
        "family": {"id": "sech-perturbation", "amplitude": 2.0},
        "numeric": {"grid": 17, "mesh": 96, "trunc": 8.0},
    })
    assert cli.main(["run", cfgp]) == cli.EXIT_OK
    rows = (tmp_path / "results" / "crossings.csv").read_text().strip().splitlines()
    assert rows[0] == "lambda,dim,report"
    assert len(rows) == 2
    lam = float(rows[1].split(",")[0])
    assert lam == pytest.approx(0.75, abs=1e-3)


def test_tracks_columns_and_sorting(tmp_path):
    cfgp = write_config(tmp_path, **{
        "family": {"id": "sech-perturbation", "amplitude": 2.0},
        "numeric": {"grid": 9, "mesh": 64, "trunc": 8.0},
    })
    assert cli.main(["tracks", cfgp]) == cli.EXIT_OK
    lines = (tmp_path / "results" / "tracks.csv").read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header == ["lambda", "eig_1", "eig_2", "eig_3", "eig_4",
                      "phase_1", "phase_2", "intersection_dim"]
    lams = [float(l.split(",")[0]) for l in lines[1:]]
    assert lams == sorted(lams)
    # the eigenvalue column changes sign across the crossing and the phase
    # column passes zero in the same region
    rows = [l.split(",") for l in lines[1:]]
    eig = {float(r[0]): (float(r[1]) if r[1] else np.nan) for r in rows}
    phase = {float(r[0]): float(r[5]) for r in rows}
    assert np.sign(eig[0.625]) != np.sign(eig[0.875])
    assert np.sign(phase[0.625]) != np.sign(phase[0.875])


def test_schema_violations(tmp_path):
    bad1 = tmp_path / "bad1.json"
    bad1.write_text(json.dumps({"family": {"id": "autonomous"}, "numerics": {}}))
    assert cli.main(["run", str(bad1)]) == cli.EXIT_SCHEMA
    bad2 = tmp_path / "bad2.json"
    bad2.write_text(json.dumps({"family": {"id": "unknown-family"}}))
    assert cli.main(["run", str(bad2)]) == cli.EXIT_SCHEMA
    bad3 = tmp_path / "bad3.json"
    bad3.write_text(json.dumps({"family": {"id": "autonomous", "warp": 2}}))
    assert cli.main(["run", str(bad3)]) == cli.EXIT_SCHEMA
    bad4 = tmp_path / "bad4.json"
    bad4.write_text(json.dumps({"family": {"id": "autonomous"},
                                "numeric": {"mesh": 2}}))
    assert cli.main(["run", str(bad4)]) == cli.EXIT_SCHEMA
    bad5 = tmp_path / "bad5.json"
    bad5.write_text("not json {")
    assert cli.main(["run", str(bad5)]) == cli.EXIT_SCHEMA
    assert cli.main(["run", str(tmp_path / "missing.json")]) == cli.EXIT_SCHEMA


def test_numeric_failure_exit_code(tmp_path):
    cfgp = write_config(tmp_path, **{
        "family": {"id": "sech-perturbation", "amplitude": 2.0},
        "numeric": {"grid": 5, "mesh": 32, "trunc": 5.0},
        "reports": ["corollary-a"],   # sech family is not lambda-periodic
    })
    assert cli.main(["run", cfgp]) == cli.EXIT_NUMERIC


def test_disagreement_exit_code(tmp_path, monkeypatch):
    cfgp = write_config(tmp_path)

    def fake_report(*args, **kwargs):
        return ha.IndexReport(sfl=1, maslov=0)

    monkeypatch.setattr(ha, "theorem_A_report", fake_report)
    monkeypatch.setattr(cli.ha, "theorem_A_report", fake_report)
    assert cli.main(["run", cfgp]) == cli.EXIT_DISAGREE


def test_flag_overrides(tmp_path):
    cfgp = write_config(tmp_path)
    outdir = str(tmp_path / "other")
    assert cli.main(["run", cfgp, "--out", outdir, "--grid", "5",
                     "--mesh", "32", "--trunc", "5.0"]) == cli.EXIT_OK
    report = open(os.path.join(outdir, "report.txt")).read()
    assert "mesh = 32" in report
    assert "grid = 5" in report
    assert "trunc = 5" in report


def test_determinism(tmp_path):
    cfg1 = write_config(tmp_path, name="a.json", out=str(tmp_path / "o1"))
    cfg2 = write_config(tmp_path, name="b.json", out=str(tmp_path / "o2"))
    assert cli.main(["run", cfg1]) == cli.EXIT_OK
    assert cli.main(["run", cfg2]) == cli.EXIT_OK
    r1 = (tmp_path / "o1" / "report.txt").read_text()
    r2 = (tmp_path / "o2" / "report.txt").read_text()
    assert r1 == r2
    t1 = (tmp_path / "o1" / "tracks.csv").read_text()
    t2 = (tmp_path / "o2" / "tracks.csv").read_text()
    assert t1 == t2


def test_no_stray_tmp_files(tmp_path):
    cfgp = write_config(tmp_path)
    assert cli.main(["run", cfgp]) == cli.EXIT_OK
    leftovers = [p for p in (tmp_path / "results").iterdir() if p.suffix == ".tmp"]
    assert leftovers == []


def test_thread_env_honored(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "1")
    assert cli._thread_count() == 1
    monkeypatch.setenv(cli.THREADS_ENV, "junk")
    assert cli._thread_count() >= 1
    cfgp = write_config(tmp_path)
    monkeypatch.setenv(cli.THREADS_ENV, "2")
    assert cli.main(["tracks", cfgp]) == cli.EXIT_OK
