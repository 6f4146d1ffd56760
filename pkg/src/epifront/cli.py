"""Command-line interface and the parameter-sweep runner.

All model input comes from one TOML config (see config module); flags
select the subcommand, geometry overrides, and output targets.  Summaries
go to standard output as JSON with sorted keys; anything plottable goes
to CSV files under the configured output directory.  Numeric fields are
serialized via repr of the Python float, so identical configs reproduce
byte-identical outputs.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical
failure (non-convergence, invariant breach, empty bracket, ...).

Sweeps run the cross product of the requested axes, one classify run per
cell, and are resumable: completed cells (keyed by their canonical
parameter tuple) are skipped on rerun, and per-cell failures are recorded
in the table without aborting the sweep.  EPIFRONT_WORKERS sets the
process count (default 1, serial).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import itertools
import json
import multiprocessing
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classify import (
    NotApplicable,
    classify_run,
    find_d_star,
    find_mu_star,
    find_tau_star,
    vanishing_width_bound,
)
from .config import ConfigError, RunConfig, load_config
from .critical import (
    NoCriticalLength,
    critical_length,
    critical_length_zero_diffusion,
    min_kernel_scale,
    section4_compare,
)
from .discretization import assemble_block_operator, auto_grid, build_grid
from .dynamics import InitialData, cosine_profile, evolve_fixed, evolve_free
from .equilibrium import steady_state
from .kernels import validate_kernel
from .spectral import nu_curve, principal_eigenpair

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2

SWEEP_CAP = 10_000
SWEEP_AXES = ("model.d1", "model.d2", "model.a", "model.b", "model.c",
              "model.mu1", "model.mu2", "init.h0", "init.tau", "run.t_max")
SWEEP_COLUMNS = ("verdict", "final_width", "final_sup", "t_end", "l_star",
                 "error")


class _Parser(argparse.ArgumentParser):
    """argparse maps usage errors to exit 2; this tool reserves 2 for
    numerical failures, so remap them to exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# ---------------------------------------------------------------------------
# serialization helpers
# ---------------------------------------------------------------------------

def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def _json_out(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True, indent=2))


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _out_path(cfg: RunConfig, suffix: str) -> Path:
    return Path(cfg.output_dir) / f"{cfg.output_prefix}_{suffix}"


def _dx(cfg: RunConfig) -> float:
    if cfg.dx_target is not None:
        return cfg.dx_target
    return min_kernel_scale(cfg.params) / 20.0


def _initial_data(cfg: RunConfig) -> InitialData:
    theta = cosine_profile(cfg.h0)
    return InitialData(h0=cfg.h0, theta1=theta, theta2=theta, tau=cfg.tau)


def _grid(cfg: RunConfig, l: float):
    scales = [k.scale for k in cfg.params.kernels]
    return auto_grid(-0.5 * l, 0.5 * l, scales, dx_target=cfg.dx_target,
                     n_max=cfg.n_max)


def _l_star_or_inf(cfg: RunConfig) -> float:
    try:
        return critical_length(cfg.params, dx=_dx(cfg)).l_star
    except NoCriticalLength:
        return float("inf")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_eigen(args) -> int:
    cfg = load_config(args.config)
    grid = _grid(cfg, args.l)
    op = assemble_block_operator(cfg.params.linearization(),
                                 cfg.params.kernels, grid)
    eig = principal_eigenpair(op)
    if args.dump is not None:
        _write_csv(Path(args.dump), ("x", "phi1", "phi2"),
                   zip(grid.nodes, eig.phi1, eig.phi2))
    _json_out({"l": float(args.l), "dx": grid.dx, "n": grid.n,
               "lambda_p": eig.lambda_p, "residual": eig.residual,
               "iterations": eig.iterations})
    return EXIT_OK


def _cmd_nu(args) -> int:
    cfg = load_config(args.config)
    dx = min(_dx(cfg), args.l / 4.0)
    val = nu_curve(cfg.params.k11, args.l, dx)
    _json_out({"l": float(args.l), "dx": dx, "nu": val})
    return EXIT_OK


def _cmd_critical(args) -> int:
    cfg = load_config(args.config)
    finder = (critical_length_zero_diffusion if args.zero_diffusion
              else critical_length)
    res = finder(cfg.params, dx=cfg.dx_target)
    if args.samples is not None:
        _write_csv(Path(args.samples), ("l", "lambda_p"), res.curve_samples)
    _json_out({"l_star": res.l_star,
               "bracket": [res.bracket[0], res.bracket[1]],
               "tolerance": res.tolerance,
               "lambda_at_star": res.lambda_at_star,
               "r0": cfg.params.r0,
               "zero_diffusion": bool(args.zero_diffusion)})
    return EXIT_OK


def _cmd_compare4(args) -> int:
    cfg = load_config(args.config)
    l_values = np.linspace(args.l_min, args.l_max, args.count)
    report = section4_compare(cfg.params, l_values, dx=cfg.dx_target)
    rows = [(r.l, r.nu, r.lambda1, r.lambda2, r.lambda3, r.lambda4,
             r.lambda_p_closed, r.lambda_p_matrix) for r in report.rows]
    csv_path = _out_path(cfg, "compare4.csv")
    _write_csv(csv_path, ("l", "nu", "lambda1", "lambda2", "lambda3",
                          "lambda4", "lambda_p_closed", "lambda_p_matrix"),
               rows)
    summary = {
        "critical_lengths": {k: v for k, v in report.critical_lengths.items()},
        "no_crossing": {k: v for k, v in report.no_crossing.items()},
        "pointwise_ok": report.pointwise_ok,
        "lengths_ok": report.lengths_ok,
        "max_closed_matrix_gap": report.max_closed_matrix_gap,
        "csv": str(csv_path),
    }
    json_path = _out_path(cfg, "compare4.json")
    json_path.parent.mkdir(parents=True, exist_ok=True)
    json_path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    _json_out(summary)
    return EXIT_OK


def _cmd_steady(args) -> int:
    cfg = load_config(args.config)
    l = args.l if args.l is not None else 2.0 * cfg.h0
    grid = _grid(cfg, l)
    ss = steady_state(cfg.params, grid)
    _write_csv(_out_path(cfg, "steady.csv"), ("x", "u", "v"),
               zip(grid.nodes, ss.u, ss.v))
    _json_out({"l": float(l), "dx": grid.dx, "n": grid.n,
               "lambda_p": ss.lambda_p, "residual": ss.residual,
               "iterations": ss.iterations, "is_zero": ss.is_zero,
               "sup_u": float(np.max(ss.u)), "sup_v": float(np.max(ss.v))})
    return EXIT_OK


def _run_trajectory(cfg: RunConfig, fixed: bool):
    if fixed:
        grid = _grid(cfg, 2.0 * cfg.h0)
        theta = np.asarray(cosine_profile(cfg.h0)(grid.nodes))
        theta = np.clip(theta, 0.0, None)
        return evolve_fixed(cfg.params, grid, cfg.tau * theta,
                            cfg.tau * theta, cfg.t_max, dt=cfg.dt,
                            profile_every=cfg.profile_every)
    return evolve_free(cfg.params, _initial_data(cfg), cfg.t_max,
                       dt=cfg.dt, dx=cfg.dx_target,
                       profile_every=cfg.profile_every)


def _write_trajectory(cfg: RunConfig, traj) -> dict:
    ts_path = _out_path(cfg, "timeseries.csv")
    _write_csv(ts_path,
               ("t", "g", "h", "sup_u", "sup_v", "mass_u", "mass_v"),
               zip(traj.times, traj.g, traj.h, traj.sup_u, traj.sup_v,
                   traj.mass_u, traj.mass_v))
    prof_path = _out_path(cfg, "profiles.csv")
    rows = []
    for snap in traj.profiles:
        rows.extend(zip(itertools.repeat(snap.t), snap.x, snap.u, snap.v))
    _write_csv(prof_path, ("t", "x", "u", "v"), rows)
    return {"timeseries": str(ts_path), "profiles": str(prof_path)}


def _cmd_evolve(args) -> int:
    cfg = load_config(args.config)
    traj = _run_trajectory(cfg, args.fixed)
    paths = _write_trajectory(cfg, traj)
    _json_out({"mode": "fixed" if args.fixed else "free",
               "t_final": float(traj.times[-1]),
               "stop_reason": traj.stop_reason,
               "final_width": float(traj.width[-1]),
               "final_sup_u": float(traj.sup_u[-1]),
               "final_sup_v": float(traj.sup_v[-1]),
               "dt": traj.dt, "dx": traj.dx, "outputs": paths})
    return EXIT_OK


def _cmd_classify(args) -> int:
    cfg = load_config(args.config)
    l_star = _l_star_or_inf(cfg)
    stop_width = (l_star * (1.0 + cfg.margin) * 1.01
                  if np.isfinite(l_star) else None)
    traj = evolve_free(cfg.params, _initial_data(cfg), cfg.t_max,
                       dt=cfg.dt, dx=cfg.dx_target,
                       profile_every=cfg.profile_every,
                       stop_width=stop_width, stop_sup=0.5 * cfg.eps_v)
    outcome = classify_run(traj, l_star, margin=cfg.margin, eps_v=cfg.eps_v,
                           params=cfg.params)
    ev = outcome.evidence
    payload = {"verdict": outcome.verdict,
               "l_star": ev.l_star if np.isfinite(ev.l_star) else None,
               "r0": cfg.params.r0,
               "final_width": ev.final_width,
               "final_sup": ev.final_sup,
               "decay_rate": ev.decay_rate,
               "central_deviation": ev.central_deviation,
               "t_final": float(traj.times[-1]),
               "stop_reason": traj.stop_reason}
    if cfg.params.r0 <= 1.0:
        wb = vanishing_width_bound(traj, cfg.params)
        payload["width_bound"] = {"bound": wb.bound,
                                  "unweighted": wb.unweighted,
                                  "initial_width": wb.initial_width}
    _json_out(payload)
    return EXIT_OK


def _cmd_search(args) -> int:
    cfg = load_config(args.config)
    ratio = cfg.search_link_ratio
    common = dict(tol=cfg.search_tol, dx=cfg.dx_target)
    if cfg.search_parameter == "tau":
        res = find_tau_star(cfg.params, _initial_data(cfg),
                            cfg.search_bracket, t_max=cfg.search_t_max,
                            margin=cfg.margin, eps_v=cfg.eps_v,
                            dt=cfg.dt, **common)
    elif cfg.search_parameter == "mu1":
        res = find_mu_star(cfg.params, _initial_data(cfg),
                           lambda m: ratio * m, cfg.search_bracket,
                           t_max=cfg.search_t_max, margin=cfg.margin,
                           eps_v=cfg.eps_v, dt=cfg.dt, **common)
    else:
        res = find_d_star(cfg.params, cfg.h0, lambda d: ratio * d, **common)
    if isinstance(res, NotApplicable):
        _json_out({"parameter": cfg.search_parameter,
                   "not_applicable": res.reason})
        return EXIT_OK
    _json_out({"parameter": res.parameter, "value": res.value,
               "bracket": [res.bracket[0], res.bracket[1]],
               "tol": res.tol, "direction": res.direction,
               "runs": [{"value": r.value, "verdict": r.verdict,
                         "detail": r.detail, "t_end": r.t_end}
                        for r in res.runs]})
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    checks = []
    ok = True
    for name, k in zip(("j11", "j12", "j21", "j22"), cfg.params.kernels):
        report = validate_kernel(k)
        ok = ok and report.ok
        checks.extend({"kernel": name, "check": c.name, "passed": c.passed,
                       "detail": c.detail} for c in report.checks)
    _json_out({"ok": ok, "r0": cfg.params.r0, "checks": checks})
    return EXIT_OK if ok else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    config: RunConfig
    axes: tuple[tuple[str, tuple[float, ...]], ...]
    out_path: str


def parse_axis(text: str) -> tuple[str, tuple[float, ...]]:
    """Parse one --axis argument of the form path=v1,v2,..."""
    if "=" not in text:
        raise ValueError(f"axis '{text}' is not of the form path=v1,v2,...")
    path, _, values = text.partition("=")
    path = path.strip()
    if path not in SWEEP_AXES:
        raise ValueError(
            f"axis parameter '{path}' is not sweepable; choose from "
            f"{', '.join(SWEEP_AXES)}")
    try:
        parsed = tuple(float(v) for v in values.split(","))
    except ValueError:
        raise ValueError(f"axis '{path}': values must be numbers") from None
    if not parsed:
        raise ValueError(f"axis '{path}': empty value list")
    return path, parsed


def _apply_axes(cfg: RunConfig, paths, values) -> RunConfig:
    params = cfg.params
    other: dict = {}
    model: dict = {}
    for path, value in zip(paths, values):
        section, _, key = path.partition(".")
        if section == "model":
            model[key] = value
        elif path == "init.h0":
            other["h0"] = value
        elif path == "init.tau":
            other["tau"] = value
        elif path == "run.t_max":
            other["t_max"] = value
    if model:
        params = dataclasses.replace(params, **model)
    return dataclasses.replace(cfg, params=params, **other)


def _sweep_cell(task) -> dict:
    cfg, paths, values = task
    row = {path: _fmt(float(v)) for path, v in zip(paths, values)}
    try:
        cell = _apply_axes(cfg, paths, values)
        l_star = _l_star_or_inf(cell)
        stop_width = (l_star * (1.0 + cell.margin) * 1.01
                      if np.isfinite(l_star) else None)
        traj = evolve_free(cell.params, _initial_data(cell), cell.t_max,
                           dt=cell.dt, dx=cell.dx_target,
                           stop_width=stop_width,
                           stop_sup=0.5 * cell.eps_v)
        outcome = classify_run(traj, l_star, margin=cell.margin,
                               eps_v=cell.eps_v)
        row.update(verdict=outcome.verdict,
                   final_width=_fmt(outcome.evidence.final_width),
                   final_sup=_fmt(outcome.evidence.final_sup),
                   t_end=_fmt(float(traj.times[-1])),
                   l_star=_fmt(l_star), error="")
    except Exception as exc:  # recorded in the row, never fatal to the sweep
        row.update(verdict="Error", final_width="", final_sup="",
                   t_end="", l_star="", error=f"{type(exc).__name__}: {exc}")
    return row


def run_sweep(spec: SweepSpec) -> list[dict]:
    """Execute (or resume) the sweep, returning all rows in file order."""
    paths = tuple(path for path, _ in spec.axes)
    header = list(paths) + list(SWEEP_COLUMNS)
    cells = list(itertools.product(*(vals for _, vals in spec.axes)))
    if len(cells) > SWEEP_CAP:
        raise ValueError(
            f"sweep has {len(cells)} cells, over the cap of {SWEEP_CAP}")

    out = Path(spec.out_path)
    existing: list[dict] = []
    done: set[tuple] = set()
    if out.exists():
        with open(out, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != header:
                raise ValueError(
                    f"existing sweep table {out} has columns "
                    f"{reader.fieldnames}, expected {header}")
            for row in reader:
                existing.append(row)
                done.add(tuple(row[p] for p in paths))

    pending = [(spec.config, paths, values) for values in cells
               if tuple(_fmt(float(v)) for v in values) not in done]
    workers = int(os.environ.get("EPIFRONT_WORKERS", "1"))
    if workers > 1 and len(pending) > 1:
        with multiprocessing.Pool(workers) as pool:
            new_rows = pool.map(_sweep_cell, pending)
    else:
        new_rows = [_sweep_cell(task) for task in pending]

    out.parent.mkdir(parents=True, exist_ok=True)
    write_header = not out.exists()
    with open(out, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=header)
        if write_header:
            writer.writeheader()
        for row in new_rows:
            writer.writerow(row)
    return existing + new_rows


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    try:
        axes = tuple(parse_axis(text) for text in args.axis or [])
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out_path = args.out or str(_out_path(cfg, "sweep.csv"))
    rows = run_sweep(SweepSpec(config=cfg, axes=axes, out_path=out_path))
    verdicts = [row["verdict"] for row in rows]
    _json_out({"cells": len(rows),
               "spreading": verdicts.count("Spreading"),
               "vanishing": verdicts.count("Vanishing"),
               "undecided": verdicts.count("Undecided"),
               "errors": verdicts.count("Error"),
               "table": str(out_path)})
    return EXIT_OK


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="epifront",
                     description="nonlocal epidemic front toolkit")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="TOML config path")
        p.set_defaults(func=func)
        return p

    p = add("eigen", _cmd_eigen,
            "principal eigenvalue on a symmetric interval")
    p.add_argument("--l", type=float, required=True, help="interval length")
    p.add_argument("--dump", help="write x,phi1,phi2 CSV here")

    p = add("nu", _cmd_nu, "base eigenvalue curve of the scaled kernel")
    p.add_argument("--l", type=float, required=True, help="interval length")

    p = add("critical", _cmd_critical, "critical habitat length L*")
    p.add_argument("--zero-diffusion", action="store_true",
                   help="compute the zero-diffusion length instead")
    p.add_argument("--samples", help="write l,lambda_p samples CSV here")

    p = add("compare4", _cmd_compare4,
            "closed-form eigenvalue curves vs. the matrix eigenvalue")
    p.add_argument("--l-min", type=float, default=0.5)
    p.add_argument("--l-max", type=float, default=6.0)
    p.add_argument("--count", type=int, default=12)

    p = add("steady", _cmd_steady, "steady state on a fixed interval")
    p.add_argument("--l", type=float, help="interval length (default 2*h0)")

    p = add("evolve", _cmd_evolve, "time-step the model")
    p.add_argument("--fixed", action="store_true",
                   help="fixed interval instead of free fronts")

    add("classify", _cmd_classify, "spreading/vanishing verdict for a run")
    add("search", _cmd_search, "threshold bisection (see [search] config)")

    p = add("sweep", _cmd_sweep, "classify over a parameter cross product")
    p.add_argument("--axis", action="append",
                   help="path=v1,v2,... (repeatable); "
                        f"paths: {', '.join(SWEEP_AXES)}")
    p.add_argument("--out", help="sweep table path (default from [output])")

    add("validate", _cmd_validate, "validate config and kernels")
    return parser


def run_command(argv: list[str]) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv: list[str] | None = None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    raise SystemExit(main())
