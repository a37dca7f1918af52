"""Command-line front end.

Exit codes are a stable contract for scripting:

== =====================================================
0  success
2  usage or configuration error
3  integration failure (partial output plus ``error.json``)
4  every row of a connection scan failed
== =====================================================
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
import warnings

import numpy as np

from . import __version__, adiabatic, berry, config, integrate, models, sweep
from .errors import ConfigurationError, InsufficientDataError, IntegrationError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INTEGRATION = 3
EXIT_SCAN_FAILED = 4

TRAJECTORY_HEADER = "t,R,f_ad,c0sq,c1sq,dyn_phase,geo_phase,norm_err"
CONNECTION_HEADER = "R,alpha00,re_alpha10,im_alpha10,beta0"


def _fmt(x):
    return repr(float(x))


def _write(path, text):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _write_json(path, obj):
    _write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _sidecar(path, command, cfg, **extra):
    meta = {
        "command": command,
        "version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config": cfg.to_dict(),
    }
    meta.update(extra)
    _write_json(path, meta)


def _load_config(args):
    cfg = config.load(args.config) if args.config else config.preset(args.preset)
    if getattr(args, "out", None):
        cfg.output_dir = args.out
    return cfg


def _outdir(cfg):
    os.makedirs(cfg.output_dir, exist_ok=True)
    return cfg.output_dir


# -- models -----------------------------------------------------------------


def registry():
    """Machine-readable listing of model variants, f-variants, schedules and
    presets; each preset's ``config`` parses with :func:`config.ExperimentConfig.from_dict`."""
    return {
        "variants": list(models.VARIANTS),
        "f_variants": ["Linear", "Log", "Power"],
        "schedules": ["LinearTime", "NonlinearTime"],
        "presets": {
            name: {
                "description": p["description"],
                "config": config.preset(name).to_dict(),
            }
            for name, p in config.PRESETS.items()
        },
    }


def cmd_models(args):
    reg = registry()
    if args.json:
        print(json.dumps(reg, indent=2, sort_keys=True))
        return EXIT_OK
    print("variants:   " + ", ".join(reg["variants"]))
    print("f variants: Linear (f=R), Log (f=ln|R|), Power(sigma) (f=|R|^(1-sigma))")
    print("schedules:  LinearTime(omega) (R=omega t), NonlinearTime(epsilon, sigma_t) (R=epsilon sign(t)|t|^sigma_t)")
    print("presets:")
    width = max(len(n) for n in reg["presets"])
    for name, p in reg["presets"].items():
        print(f"  {name:<{width}}  {p['description']}")
    return EXIT_OK


# -- run --------------------------------------------------------------------


def trajectory_csv(traj):
    """Trajectory CSV text.  Phases are NaN when fewer than two samples exist."""
    c0, c1 = adiabatic.coefficients(traj)
    n = len(traj.t)
    dyn = geo = np.full(n, math.nan)
    if n >= 2:
        frame = adiabatic.build_frame(traj)
        dyn, geo = frame.dynamical_phase, frame.geometric_phase
    lines = [TRAJECTORY_HEADER]
    for row in zip(traj.t, traj.R, c0, c0, c1, dyn, geo, traj.norm_err):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def cmd_run(args):
    cfg = _load_config(args)
    eps = args.epsilon if args.epsilon is not None else cfg.sweep.epsilon
    spec = cfg.model if eps is None else cfg.model.with_epsilon(eps)
    cfg.model = spec
    out = _outdir(cfg)
    csv_path = os.path.join(out, "trajectory.csv")
    try:
        traj = integrate.propagate_model(spec, cfg.integrator, n_samples=cfg.n_samples)
    except IntegrationError as exc:
        if exc.trajectory is not None:
            _write(csv_path, trajectory_csv(exc.trajectory))
        _write_json(
            os.path.join(out, "error.json"),
            {
                "command": "run",
                "error": str(exc),
                "samples_written": 0 if exc.trajectory is None else len(exc.trajectory),
            },
        )
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    _write(csv_path, trajectory_csv(traj))
    _sidecar(
        os.path.join(out, "trajectory.meta.json"),
        "run",
        cfg,
        epsilon=spec.sweep_variable,
        f_min=traj.f_min,
        t_min=traj.t_min,
        diagnostics=traj.diagnostics.to_dict(),
    )
    print(f"f_min={traj.f_min!r} at t={traj.t_min!r}; wrote {csv_path}")
    return EXIT_OK


# -- sweep ------------------------------------------------------------------


def fit_summary(records, spec, noise_floor=1e-10, threshold=0.9):
    """The fit JSON document for a finished sweep."""
    try:
        fit = sweep.fit_power_law(records, noise_floor=noise_floor)
        doc = {
            "slope": fit.slope,
            "intercept": fit.intercept,
            "r2": fit.r_squared,
            "n_points_used": fit.n_points_used,
            "noise_floor_excluded": fit.noise_floor_excluded,
            "outlier_excluded": fit.outlier_excluded,
        }
    except InsufficientDataError:
        doc = {"slope": None, "intercept": None, "r2": None, "n_points_used": 0}
    doc["predicted_exponent"] = sweep.predicted_exponent(spec)
    doc["verdict"] = sweep.breakdown_check(records, threshold=threshold)
    return doc


def cmd_sweep(args):
    cfg = _load_config(args)
    grid = cfg.sweep.epsilons
    if grid is None and cfg.sweep.epsilon is not None:
        grid = [cfg.sweep.epsilon]
    if args.jobs < 1:
        raise ConfigurationError("--jobs must be >= 1")
    out = _outdir(cfg)
    records = sweep.run_sweep(cfg.model, grid, cfg.integrator, jobs=args.jobs)
    _write(os.path.join(out, "sweep.csv"), sweep.to_csv(records))
    doc = fit_summary(records, cfg.model, cfg.sweep.noise_floor, cfg.sweep.threshold)
    _write_json(os.path.join(out, "fit.json"), doc)
    _sidecar(os.path.join(out, "sweep.meta.json"), "sweep", cfg, jobs=args.jobs)
    failed = [r for r in records if r.error]
    if failed:
        _write_json(
            os.path.join(out, "error.json"),
            {"command": "sweep", "failures": [{"epsilon": r.epsilon, "error": r.error} for r in failed]},
        )
        print(f"{len(failed)} sweep point(s) failed", file=sys.stderr)
        return EXIT_INTEGRATION
    slope = "n/a" if doc["slope"] is None else f"{doc['slope']:.4f}"
    print(f"slope={slope} predicted={doc['predicted_exponent']} verdict={doc['verdict']}")
    return EXIT_OK


# -- scan -------------------------------------------------------------------


def estimate_sigma(rows):
    """Singularity index from the finite, nonzero ``|alpha10|`` rows, or NaN."""
    R = np.array([r[0] for r in rows])
    mag = np.array([abs(r[2]) for r in rows])
    ok = np.isfinite(mag) & (mag > 0) & (R != 0)
    try:
        return berry.singularity_index(R[ok], mag[ok]).sigma
    except (InsufficientDataError, ValueError):
        return math.nan


def connection_csv(rows, sigma_hat):
    lines = [CONNECTION_HEADER]
    for R, a00, a10, b0 in rows:
        lines.append(",".join(_fmt(v) for v in (R, a00, a10.real, a10.imag, b0)))
    lines.append(f"# sigma_hat={_fmt(sigma_hat)}")
    return "\n".join(lines) + "\n"


def cmd_scan(args):
    cfg = _load_config(args)
    out = _outdir(cfg)
    grid = cfg.scan.grid()
    rows = berry.scan(cfg.model, grid)
    sigma_hat = estimate_sigma(rows)
    _write(os.path.join(out, "connection.csv"), connection_csv(rows, sigma_hat))
    n_failed = sum(1 for r in rows if not math.isfinite(r[1]))
    _sidecar(os.path.join(out, "connection.meta.json"), "scan", cfg, failed_rows=n_failed)
    if n_failed == len(rows):
        print("every scan row failed", file=sys.stderr)
        return EXIT_SCAN_FAILED
    print(f"sigma_hat={sigma_hat:.4f} ({n_failed} of {len(rows)} rows singular)")
    return EXIT_OK


# -- entry point --------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="adiabatic-lab",
        description="Adiabatic fidelity experiments on driven two-level systems.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("models", help="list model variants, schedules and presets")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_models)

    def experiment(name, help_, func):
        p = sub.add_parser(name, help=help_)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", metavar="PATH", help="experiment config (JSON)")
        src.add_argument("--preset", metavar="NAME", help="named built-in experiment")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides the config)")
        p.set_defaults(func=func)
        return p

    p = experiment("run", "propagate one trajectory", cmd_run)
    p.add_argument("--epsilon", type=float, metavar="X", help="value of the sweep variable")
    p = experiment("sweep", "sweep epsilon and fit the fidelity power law", cmd_sweep)
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="parallel sweep workers")
    experiment("scan", "tabulate Berry connections over a parameter grid", cmd_scan)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
