"""Command line front end: tasks, exit codes, reports, determinism."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from tomoprop.cli import main

# Half-resolution grid keeps each CLI task around a second without
# degrading any of the report quantities checked below.
SMALL_GRID = {"x_max": 8.0, "n_x": 512, "n_theta": 90, "q_max": 8.0, "n_q": 256}


def write_config(tmp_path, doc, name="job.json"):
    doc = dict(doc)
    doc.setdefault("grid", SMALL_GRID)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def read_json(tmp_path, name):
    with open(os.path.join(tmp_path, "out", name), encoding="utf-8") as fh:
        return json.load(fh)


def run(tmp_path, task, doc, extra=()):
    cfg = write_config(tmp_path, doc)
    argv = [task, "--config", cfg, "--output-dir", str(tmp_path / "out"), *extra]
    return main(argv)


# ---------------------------------------------------------------------------
# the six tasks


def test_tomogram_task(tmp_path):
    assert run(tmp_path, "tomogram", {}) == 0
    report = read_json(tmp_path, "report.json")
    assert report["task"] == "tomogram"
    assert report["row_norm_max_dev"] < 1e-8
    assert report["min_value"] > -1e-11
    assert (tmp_path / "out" / "tomogram.csv").exists()


def test_evolve_task_both_backends(tmp_path):
    assert run(tmp_path, "evolve", {"times": [0.5], "backend": "both"}) == 0
    report = read_json(tmp_path, "report.json")
    assert report["times"] == [0.5]
    assert report["dt"] == 1e-3
    assert report["l1_backend_gap"][0] < 1e-10
    for name in ("tomogram_map_000.csv", "tomogram_pde_000.csv"):
        assert (tmp_path / "out" / name).exists()


def test_evolve_task_map_only(tmp_path):
    assert run(tmp_path, "evolve", {"times": [0.5, 1.0]}) == 0
    report = read_json(tmp_path, "report.json")
    assert "l1_backend_gap" not in report
    assert (tmp_path / "out" / "tomogram_map_001.csv").exists()
    assert not (tmp_path / "out" / "tomogram_pde_000.csv").exists()


def test_invert_task(tmp_path):
    run(tmp_path, "tomogram", {})
    doc = {"input_path": str(tmp_path / "out" / "tomogram.csv")}
    cfg = write_config(tmp_path, doc, name="invert.json")
    rc = main(["invert", "--config", cfg,
               "--output-dir", str(tmp_path / "out2")])
    assert rc == 0
    with open(tmp_path / "out2" / "report.json", encoding="utf-8") as fh:
        report = json.load(fh)
    assert report["wigner_mass"] == pytest.approx(1.0, abs=1e-3)
    assert report["trace"] == pytest.approx(1.0, abs=1e-3)
    assert 0.995 < report["purity"] < 1.0005
    assert report["hermiticity_defect"] < 1e-12
    assert (tmp_path / "out2" / "wigner.csv").exists()
    assert (tmp_path / "out2" / "density.csv").exists()


def test_moments_task(tmp_path):
    assert run(tmp_path, "moments", {}) == 0
    report = read_json(tmp_path, "report.json")
    assert report["m1_abs_max"] < 1e-8
    assert report["m2_min"] == pytest.approx(0.5, abs=1e-6)
    assert report["m2_max"] == pytest.approx(0.5, abs=1e-6)
    assert (tmp_path / "out" / "moments.csv").exists()


def test_validate_task(tmp_path):
    assert run(tmp_path, "validate", {}) == 0
    report = read_json(tmp_path, "report.json")
    assert report["pass"] is True
    assert len(report["checks"]) == 7
    names = {c["name"] for c in report["checks"]}
    assert "vacuum_tomogram_linf" in names
    assert "wronskian_drift" in names
    for check in report["checks"]:
        assert check["measured"] <= check["threshold"]


def test_pipeline_check_task(tmp_path):
    doc = {
        "times": [1.0],
        "state": {"kind": "coherent", "alpha_re": 1.0},
        "hamiltonian": {"omega_sq": {"kind": "constant", "value": 1.0}},
    }
    assert run(tmp_path, "pipeline-check", doc) == 0
    report = read_json(tmp_path, "report.json")
    assert report["kind"] == "oscillator"
    rec = report["records"][0]
    assert rec["t"] == 1.0
    assert rec["trace_distance"] < 5e-3


# ---------------------------------------------------------------------------
# metadata and overrides


def test_run_meta_sidecar(tmp_path):
    import tomoprop

    run(tmp_path, "tomogram", {})
    meta = read_json(tmp_path, "run_meta.json")
    assert meta["status"] == "ok"
    assert meta["task"] == "tomogram"
    assert meta["files"] == ["tomogram.csv", "report.json"]
    assert meta["version"] == tomoprop.__version__
    assert "started_utc" in meta and "finished_utc" in meta
    # volatile fields live only in the sidecar
    report = read_json(tmp_path, "report.json")
    assert "started_utc" not in report


def test_override_flag_reaches_job(tmp_path):
    rc = run(tmp_path, "moments", {},
             extra=["--override", "state.kind=coherent",
                    "--override", "state.alpha_re=1.0"])
    assert rc == 0
    report = read_json(tmp_path, "report.json")
    # displaced state: m1 peaks at the angle row closest to theta = 0
    peak = np.sqrt(2.0) * np.cos(np.pi / 180.0)
    assert report["m1_abs_max"] == pytest.approx(peak, abs=1e-6)


# ---------------------------------------------------------------------------
# failure paths


def test_bad_json_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"times": [0.5],}')
    rc = main(["evolve", "--config", str(path)])
    assert rc == 2
    record = json.loads(capsys.readouterr().err)
    assert record["error"] == "ParseError"
    assert record["exit_code"] == 2
    assert "line 1" in record["message"]


def test_missing_config_exits_2(tmp_path, capsys):
    rc = main(["tomogram", "--config", str(tmp_path / "nope.json")])
    assert rc == 2
    record = json.loads(capsys.readouterr().err)
    assert record["error"] == "ParseError"


def test_validation_failure_exits_2_with_violations(tmp_path, capsys):
    cfg = write_config(tmp_path, {"times": [2.0, 1.0], "backend": "warp"})
    rc = main(["evolve", "--config", cfg])
    assert rc == 2
    record = json.loads(capsys.readouterr().err)
    assert record["error"] == "ValidationError"
    assert any("times not increasing" in v for v in record["violations"])
    assert any("backend" in v for v in record["violations"])


def test_numeric_failure_exits_3_with_error_file(tmp_path, capsys):
    doc = {"state": {"kind": "coherent", "alpha_re": 2.5}}
    rc = run(tmp_path, "tomogram", doc)
    assert rc == 3
    record = json.loads(capsys.readouterr().err)
    assert record["error"] == "SupportError"
    err = read_json(tmp_path, "error.json")
    assert err == record


def test_missing_input_exits_4(tmp_path, capsys):
    doc = {"input_path": str(tmp_path / "absent.csv")}
    rc = run(tmp_path, "invert", doc)
    assert rc == 4
    record = json.loads(capsys.readouterr().err)
    assert record["error"] == "IOError"
    assert record["exit_code"] == 4
    err = read_json(tmp_path, "error.json")
    assert err["error"] == "IOError"


# ---------------------------------------------------------------------------
# process-level behavior


def test_console_script_help():
    proc = subprocess.run(["tomoprop", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "tomogram" in proc.stdout


def test_thread_cap_applies_before_numpy():
    code = "import tomoprop.cli, os; print(os.environ.get('OMP_NUM_THREADS'))"
    env = {**os.environ, "TOMOPROP_THREADS": "3"}
    env.pop("OMP_NUM_THREADS", None)
    proc = subprocess.run([sys.executable, "-c", code],
                          capture_output=True, text=True, env=env)
    assert proc.stdout.strip() == "3"

    for val in (None, "0"):
        env = {**os.environ}
        env.pop("TOMOPROP_THREADS", None)
        env.pop("OMP_NUM_THREADS", None)
        if val is not None:
            env["TOMOPROP_THREADS"] = val
        proc = subprocess.run([sys.executable, "-c", code],
                              capture_output=True, text=True, env=env)
        assert proc.stdout.strip() == "None"
