"""Batch front door: parse a job config, run it, emit deterministic files.

Usage: tomoprop <task> --config job.json [--output-dir DIR]
       [--override key=value ...]

Exit codes: 0 success, 2 config error, 3 numeric or validation failure,
4 I/O error.  Every run writes report.json (machine-readable results, no
timestamps, byte identical across reruns) next to the task's data files;
volatile metadata (timestamps, version) is segregated into run_meta.json.
On failure an error.json record is written when the output directory is
usable, and the same record always goes to stderr.

TOMOPROP_THREADS caps the BLAS/FFT thread pools (0 or unset = automatic).
The cap must be exported to the environment before numpy first loads,
which is why this module resolves it at import time and defers all heavy
imports into the task bodies.
"""

import argparse
import datetime
import json
import os
import sys


def _apply_thread_env():
    val = os.environ.get("TOMOPROP_THREADS", "").strip()
    if val and val != "0":
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, val)


_apply_thread_env()

from .errors import ParseError, TomopropError, ValidationError  # noqa: E402


def _auto_dt(hamiltonian):
    """Step satisfying both backends' preconditions with a factor-2 margin."""
    sup = max(1.0, float(hamiltonian.omega_sq.upper_bound()))
    return min(1e-3, 2.5e-3 / sup)


def _map_evolved(w0, hamiltonian, t, dt):
    from . import quad_dynamics as qd

    if t == 0.0:
        from .transforms import Tomogram

        return Tomogram(w0.grid, w0.values.copy())
    traj = qd.solve_epsilon(hamiltonian, t, dt)
    m = qd.optical_map(qd.motion_integrals(traj, t))
    return qd.evolve_tomogram(w0, m)


def run_job(cfg):
    """Execute one validated job; returns (report dict, list of files written)."""
    import numpy as np

    from . import config as cfgmod
    from . import output as io
    from . import transforms as tr

    outdir = cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    files = []

    def emit(name, writer, *args):
        path = os.path.join(outdir, name)
        writer(path, *args)
        files.append(name)
        return path

    report = {"task": cfg.task}

    if cfg.task == "tomogram":
        from .states import density_from_wavefunction

        rho = density_from_wavefunction(cfgmod.build_state(cfg))
        w = tr.tomogram_from_density(rho, cfgmod.tomogram_grid(cfg))
        emit("tomogram.csv", io.write_tomogram, w)
        report["row_norm_max_dev"] = float(np.abs(w.row_norms() - 1.0).max())
        report["min_value"] = float(w.values.min())

    elif cfg.task == "evolve":
        from . import pde_evolution as pde
        from .states import density_from_wavefunction

        H = cfgmod.build_hamiltonian(cfg)
        dt = _auto_dt(H)
        rho = density_from_wavefunction(cfgmod.build_state(cfg))
        w0 = tr.tomogram_from_density(rho, cfgmod.tomogram_grid(cfg))
        report["dt"] = dt
        report["times"] = list(cfg.times)
        gaps = []
        for i, t in enumerate(cfg.times):
            per_backend = {}
            if cfg.backend in ("map", "both"):
                per_backend["map"] = _map_evolved(w0, H, t, dt)
                emit("tomogram_map_%03d.csv" % i, io.write_tomogram, per_backend["map"])
            if cfg.backend in ("pde", "both"):
                per_backend["pde"] = pde.evolve_semilagrangian(w0, H, t, dt)
                emit("tomogram_pde_%03d.csv" % i, io.write_tomogram, per_backend["pde"])
            if cfg.backend == "both":
                wx = w0.grid.x_trapezoid_weights
                gaps.append(float(np.mean(
                    np.abs(per_backend["map"].values - per_backend["pde"].values) @ wx
                )))
        if gaps:
            report["l1_backend_gap"] = gaps

    elif cfg.task == "invert":
        try:
            w = io.read_tomogram(cfg.input_path)
        except OSError as e:
            raise _IOFailure(f"cannot read input tomogram: {e}")
        w.validate()
        W = tr.inverse_radon(w)
        emit("wigner.csv", io.write_wigner, W)
        rho = tr.density_from_tomogram(w, cfgmod.coordinate_grid(cfg))
        emit("density.csv", io.write_density, rho)
        report["wigner_mass"] = float(W.mass())
        report["trace"] = float(rho.trace())
        report["purity"] = float(rho.purity())
        report["hermiticity_defect"] = float(rho.hermiticity_defect)

    elif cfg.task == "moments":
        from .states import density_from_wavefunction

        rho = density_from_wavefunction(cfgmod.build_state(cfg))
        tg = cfgmod.tomogram_grid(cfg)
        w = tr.tomogram_from_density(rho, tg)
        m1, m2 = tr.moments(w, 1), tr.moments(w, 2)
        emit("moments.csv", io.write_moments, tg, m1, m2)
        report["m1_abs_max"] = float(np.abs(m1).max())
        report["m2_min"] = float(m2.min())
        report["m2_max"] = float(m2.max())

    elif cfg.task == "validate":
        report["checks"] = _invariant_suite(cfg)
        report["pass"] = all(c["pass"] for c in report["checks"])

    elif cfg.task == "pipeline-check":
        from . import oracles
        from .states import density_from_wavefunction

        kind = "free" if cfg.hamiltonian["omega_sq"]["value"] == 0 else "oscillator"
        rho = density_from_wavefunction(cfgmod.build_state(cfg))
        tg = cfgmod.tomogram_grid(cfg)
        records = []
        for t in cfg.times:
            rec = oracles.pipeline_discrepancy(rho, kind, t, tgrid=tg)
            records.append({"t": t, **{k: float(v) for k, v in rec.items()}})
        report["kind"] = kind
        report["records"] = records

    else:
        raise ValidationError([f"unhandled task {cfg.task!r}"])

    emit("report.json", io.write_report, report)
    return report, files


def _invariant_suite(cfg):
    """Measured-defect checks behind the validate task."""
    import numpy as np

    from . import config as cfgmod
    from . import oracles
    from . import quad_dynamics as qd
    from . import transforms as tr
    from .states import density_from_wavefunction, make_vacuum

    checks = []

    def add(name, measured, threshold):
        checks.append({
            "name": name,
            "measured": float(measured),
            "threshold": float(threshold),
            "pass": bool(measured <= threshold),
        })

    tg = cfgmod.tomogram_grid(cfg)
    g = cfgmod.coordinate_grid(cfg)

    w_vac = tr.tomogram_from_density(density_from_wavefunction(make_vacuum(g)), tg)
    ref = np.exp(-tg.xs ** 2) / np.sqrt(np.pi)
    add("vacuum_tomogram_linf", np.abs(w_vac.values - ref).max(), 1e-5)
    add("row_norm_dev", np.abs(w_vac.row_norms() - 1.0).max(), 1e-3)
    add("negativity", max(0.0, -float(w_vac.values.min())), 1e-6)

    rho0 = density_from_wavefunction(cfgmod.build_state(cfg))
    w0 = tr.tomogram_from_density(rho0, tg)
    rho_back = tr.density_from_tomogram(w0, g)
    add("density_round_trip_trace_distance", oracles.trace_distance(rho0, rho_back), 1e-2)

    W = tr.wigner_from_density(rho0)
    w_r = tr.radon(W, tg)
    w_rb = tr.radon(tr.inverse_radon(w_r), tg)
    add("tomogram_round_trip_linf", np.abs(w_rb.values - w_r.values).max(), 2e-3)

    H = qd.QuadraticHamiltonian(qd.CosineSampler(1.0, 0.2, 2.0), qd.ConstantSampler(0.0))
    traj = qd.solve_epsilon(H, 10.0, 1e-3)
    wr = 2.0 * np.imag(traj.eps_dot * np.conj(traj.eps))
    add("wronskian_drift", np.abs(wr - 2.0).max(), 1e-8)
    det_defect = max(
        qd.motion_integrals(traj, t).det_defect for t in np.linspace(0.0, 10.0, 21)
    )
    add("det_lambda_defect", det_defect, 1e-8)

    return checks


class _IOFailure(Exception):
    """Internal: wraps an OSError from task I/O so main can exit 4."""


def _error_record(exc, code):
    return {"error": type(exc).__name__, "message": str(exc), "exit_code": code}


def _emit_error(record, outdir):
    sys.stderr.write(json.dumps(record) + "\n")
    if outdir:
        try:
            from . import output as io

            io.write_report(os.path.join(outdir, "error.json"), record)
        except OSError:
            pass


def _write_meta(outdir, record):
    try:
        from . import __version__
        from . import output as io

        io.write_report(
            os.path.join(outdir, "run_meta.json"),
            {**record, "version": __version__},
        )
    except OSError:
        pass


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="tomoprop",
        description="Optical tomogram transforms and propagators, batch style.",
    )
    parser.add_argument("task", choices=["tomogram", "evolve", "invert", "moments",
                                         "validate", "pipeline-check"])
    parser.add_argument("--config", required=True, help="path to the JSON job config")
    parser.add_argument("--output-dir", default=None, help="overrides output_dir")
    parser.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="dotted config override, repeatable")
    args = parser.parse_args(argv)

    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    outdir = None
    try:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise ParseError(f"cannot read config {args.config!r}: {e}")

        from . import config as cfgmod

        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(
                f"config is not valid JSON: line {e.lineno}, column {e.colno}: {e.msg}"
            )
        if not isinstance(doc, dict):
            raise ParseError(f"config {args.config!r} is not a JSON object document")
        doc["task"] = args.task
        if args.output_dir is not None:
            doc["output_dir"] = args.output_dir
        cfgmod.apply_overrides(doc, args.override)
        cfg = cfgmod.parse_config(json.dumps(doc))
        outdir = cfg.output_dir

        report, files = run_job(cfg)
    except (ParseError, ValidationError) as e:
        rec = _error_record(e, 2)
        if isinstance(e, ValidationError):
            rec["violations"] = e.violations
        _emit_error(rec, outdir)
        return 2
    except _IOFailure as e:
        _emit_error({"error": "IOError", "message": str(e), "exit_code": 4}, outdir)
        return 4
    except TomopropError as e:
        _emit_error(_error_record(e, 3), outdir)
        return 3
    except OSError as e:
        _emit_error(_error_record(e, 4), outdir)
        return 4

    finished = datetime.datetime.now(datetime.timezone.utc).isoformat()
    failed = cfg.task == "validate" and not report.get("pass", True)
    _write_meta(outdir, {
        "status": "invariants_failed" if failed else "ok",
        "task": cfg.task,
        "files": files,
        "started_utc": started,
        "finished_utc": finished,
    })
    if failed:
        sys.stderr.write("validate: one or more invariants failed, see report.json\n")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
