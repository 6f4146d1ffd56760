"""Tests for the command-line interface and the sweep runner."""

from __future__ import annotations

import csv
import json
import math

import pytest

from epifront.cli import (
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_USAGE,
    SweepSpec,
    parse_axis,
    run_command,
    run_sweep,
)
from epifront.config import load_config


def write(tmp_path, text, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run(capsys, *argv):
    code = run_command(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------

def test_missing_required_flag_exits_usage(capsys):
    with pytest.raises(SystemExit) as exc:
        run_command(["eigen"])
    assert exc.value.code == EXIT_USAGE


def test_unknown_subcommand_exits_usage(capsys):
    with pytest.raises(SystemExit) as exc:
        run_command(["frobnicate"])
    assert exc.value.code == EXIT_USAGE


def test_config_error_exits_usage(tmp_path, capsys):
    cfg = write(tmp_path, "[model]\nc = -1\n")
    code, _, err = run(capsys, "eigen", "--config", cfg, "--l", "2")
    assert code == EXIT_USAGE
    assert "model.c" in err


def test_numerical_failure_exits_numeric(tmp_path, capsys):
    # R0 < 1: no critical length exists
    cfg = write(tmp_path, "[model]\nc = 0.4\n")
    code, _, _ = run(capsys, "critical", "--config", cfg)
    assert code == EXIT_NUMERIC


# ---------------------------------------------------------------------------
# subcommand output shapes
# ---------------------------------------------------------------------------

def test_eigen_reports_eigenvalue_and_dumps_eigenfunction(tmp_path, capsys):
    cfg = write(tmp_path, "")
    dump = tmp_path / "eig.csv"
    code, payload = run_json(capsys, "eigen", "--config", cfg,
                             "--l", "4", "--dump", str(dump))
    assert code == EXIT_OK
    assert payload["lambda_p"] == pytest.approx(0.3159, abs=5e-3)
    assert payload["residual"] < 1e-8
    with open(dump, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "phi1", "phi2"]
    assert len(rows) - 1 == payload["n"]
    assert all(float(r[1]) > 0 and float(r[2]) > 0 for r in rows[1:])


def test_critical_matches_direct_computation(tmp_path, capsys):
    cfg = write(tmp_path, "")
    code, payload = run_json(capsys, "critical", "--config", cfg)
    assert code == EXIT_OK
    assert payload["l_star"] == pytest.approx(1.6446, abs=2e-3)
    lo, hi = payload["bracket"]
    assert lo < payload["l_star"] < hi
    assert payload["r0"] == 2.0


def test_evolve_writes_timeseries_and_profiles(tmp_path, capsys):
    cfg = write(tmp_path, f"""
[run]
t_max = 2.0
[output]
dir = "{tmp_path}/out"
prefix = "demo"
profile_every = 10
""")
    code, payload = run_json(capsys, "evolve", "--config", cfg)
    assert code == EXIT_OK
    assert payload["stop_reason"] == "t_max"
    with open(payload["outputs"]["timeseries"], newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert set(rows[0]) == {"t", "g", "h", "sup_u", "sup_v",
                            "mass_u", "mass_v"}
    widths = [float(r["h"]) - float(r["g"]) for r in rows]
    assert all(b > a for a, b in zip(widths, widths[1:]))
    with open(payload["outputs"]["profiles"], newline="") as fh:
        prows = list(csv.DictReader(fh))
    assert set(prows[0]) == {"t", "x", "u", "v"}
    # the final snapshot is always present
    assert max(float(r["t"]) for r in prows) == pytest.approx(2.0)


def test_classify_vanishing_includes_width_bound(tmp_path, capsys):
    cfg = write(tmp_path, "[model]\nc = 0.4\n[init]\nh0 = 0.8\n"
                          "[run]\nt_max = 60.0\n"
                          f'[output]\ndir = "{tmp_path}/out"\n')
    code, payload = run_json(capsys, "classify", "--config", cfg)
    assert code == EXIT_OK
    assert payload["verdict"] == "Vanishing"
    assert payload["l_star"] is None
    assert payload["final_width"] <= payload["width_bound"]["bound"]


def test_classify_spreading_when_habitat_exceeds_critical(tmp_path, capsys):
    cfg = write(tmp_path, "[init]\nh0 = 1.2\n[run]\nt_max = 40.0\n"
                          f'[output]\ndir = "{tmp_path}/out"\n')
    code, payload = run_json(capsys, "classify", "--config", cfg)
    assert code == EXIT_OK
    assert payload["verdict"] == "Spreading"
    assert payload["final_width"] > payload["l_star"]


def test_search_d1_reports_bracket_and_audits(tmp_path, capsys):
    root2 = math.sqrt(2.0)
    cfg = write(tmp_path, f"""
[model]
c = {root2}
g = {{family = "rational", alpha = 1.0, beta = {root2}}}
[init]
h0 = 1.2
[search]
parameter = "d1"
tol = 0.001
""")
    code, payload = run_json(capsys, "search", "--config", cfg)
    assert code == EXIT_OK
    assert payload["parameter"] == "d1"
    assert payload["value"] == pytest.approx(2.878, abs=0.01)
    assert payload["direction"] == "spreading_at_or_below"
    runs = sorted(payload["runs"], key=lambda r: r["value"])
    lams = [r["detail"] for r in runs]
    assert all(x > y for x, y in zip(lams, lams[1:]))


def test_search_not_applicable_is_success(tmp_path, capsys):
    cfg = write(tmp_path, "[model]\nc = 0.5\n"
                          'g = {family = "rational", alpha = 1.0, beta = 0.5}\n'
                          '[search]\nparameter = "d1"\n')
    code, payload = run_json(capsys, "search", "--config", cfg)
    assert code == EXIT_OK
    assert "vanishing for every d1" in payload["not_applicable"]


def test_validate_flags_defective_kernel(tmp_path, capsys):
    good = write(tmp_path, "", name="good.toml")
    code, payload = run_json(capsys, "validate", "--config", good)
    assert code == EXIT_OK and payload["ok"] is True
    bad = write(tmp_path, "[kernels]\nj11 = {family = \"table\", "
                          "table_x = [-1.0, 0.0, 2.0], "
                          "table_y = [0.0, 1.0, 0.0]}\n", name="bad.toml")
    code, payload = run_json(capsys, "validate", "--config", bad)
    assert code == EXIT_NUMERIC and payload["ok"] is False
    failed = [c for c in payload["checks"] if not c["passed"]]
    assert any(c["check"] == "even" for c in failed)


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------

def test_reruns_are_byte_identical(tmp_path, capsys):
    cfg = write(tmp_path, f"""
[run]
t_max = 1.0
[output]
dir = "{tmp_path}/out"
""")
    _, first, _ = run(capsys, "eigen", "--config", cfg, "--l", "3")
    _, second, _ = run(capsys, "eigen", "--config", cfg, "--l", "3")
    assert first == second
    run(capsys, "evolve", "--config", cfg)
    ts = (tmp_path / "out" / "run_timeseries.csv").read_bytes()
    run(capsys, "evolve", "--config", cfg)
    assert (tmp_path / "out" / "run_timeseries.csv").read_bytes() == ts


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def test_parse_axis():
    path, values = parse_axis("model.c=1.5,2.0,2.5")
    assert path == "model.c" and values == (1.5, 2.0, 2.5)
    with pytest.raises(ValueError, match="not of the form"):
        parse_axis("model.c")
    with pytest.raises(ValueError, match="not sweepable"):
        parse_axis("model.kernel=1.0")
    with pytest.raises(ValueError, match="must be numbers"):
        parse_axis("model.c=fast")


def _sweep_config(tmp_path):
    return write(tmp_path, "[run]\nt_max = 40.0\n"
                           f'[output]\ndir = "{tmp_path}/out"\n')


def test_sweep_runs_grid_and_resumes(tmp_path, capsys):
    cfg = _sweep_config(tmp_path)
    out = str(tmp_path / "sweep.csv")
    axes = ["--axis", "init.tau=0.2,1.5", "--axis", "init.h0=0.4,0.9"]
    code, payload = run_json(capsys, "sweep", "--config", cfg, *axes,
                             "--out", out)
    assert code == EXIT_OK
    assert payload["cells"] == 4
    assert payload["spreading"] + payload["vanishing"] == 4

    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    by_cell = {(r["init.tau"], r["init.h0"]): r["verdict"] for r in rows}
    # spreading is monotone in both axes across this frontier
    assert by_cell[("0.2", "0.4")] == "Vanishing"
    assert by_cell[("1.5", "0.9")] == "Spreading"

    # drop one row; the rerun recomputes exactly that cell
    survivor = [r for r in rows if (r["init.tau"], r["init.h0"])
                != ("1.5", "0.4")]
    with open(out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(survivor)
    code, payload = run_json(capsys, "sweep", "--config", cfg, *axes,
                             "--out", out)
    assert code == EXIT_OK and payload["cells"] == 4
    with open(out, newline="") as fh:
        again = list(csv.DictReader(fh))
    assert len(again) == 4
    assert (again[-1]["init.tau"], again[-1]["init.h0"]) == ("1.5", "0.4")
    assert {tuple(r.items()) for r in again} == {tuple(r.items()) for r in rows}


def test_sweep_frontier_is_monotone_in_each_axis(tmp_path, capsys):
    # expansion capacity and initial amplitude both push toward spreading,
    # so the verdict grid must be monotone along every row and column
    cfg = write(tmp_path, "[init]\nh0 = 0.5\n[run]\nt_max = 60.0\n"
                          f'[output]\ndir = "{tmp_path}/out"\n')
    out = str(tmp_path / "frontier.csv")
    code, _ = run_json(capsys, "sweep", "--config", cfg,
                       "--axis", "model.mu1=0.1,1.0,10.0",
                       "--axis", "init.tau=0.2,0.7,1.5", "--out", out)
    assert code == EXIT_OK
    rank = {"Vanishing": 0, "Undecided": 1, "Spreading": 2}
    with open(out, newline="") as fh:
        cells = {(float(r["model.mu1"]), float(r["init.tau"])):
                 rank[r["verdict"]] for r in csv.DictReader(fh)}
    mus, taus = (0.1, 1.0, 10.0), (0.2, 0.7, 1.5)
    for mu in mus:
        row = [cells[(mu, tau)] for tau in taus]
        assert row == sorted(row)
    for tau in taus:
        col = [cells[(mu, tau)] for mu in mus]
        assert col == sorted(col)
    assert cells[(0.1, 0.2)] == 0 and cells[(10.0, 1.5)] == 2


def test_sweep_without_axes_is_single_cell(tmp_path, capsys):
    cfg = write(tmp_path, "[init]\nh0 = 1.2\n[run]\nt_max = 20.0\n"
                          f'[output]\ndir = "{tmp_path}/out"\n')
    out = str(tmp_path / "one.csv")
    code, payload = run_json(capsys, "sweep", "--config", cfg, "--out", out)
    assert code == EXIT_OK and payload["cells"] == 1
    assert payload["spreading"] == 1


def test_sweep_bad_axis_exits_usage(tmp_path, capsys):
    cfg = _sweep_config(tmp_path)
    code, _, err = run(capsys, "sweep", "--config", cfg,
                       "--axis", "model.zeta=1.0")
    assert code == EXIT_USAGE and "not sweepable" in err


def test_sweep_cell_failure_is_recorded_not_fatal(tmp_path, capsys):
    cfg = _sweep_config(tmp_path)
    out = str(tmp_path / "err.csv")
    # a = -1 fails model validation inside that one cell
    code, payload = run_json(capsys, "sweep", "--config", cfg,
                             "--axis", "model.a=-1.0,1.0",
                             "--axis", "init.h0=1.2", "--out", out)
    assert code == EXIT_OK
    assert payload["errors"] == 1
    with open(out, newline="") as fh:
        rows = {r["model.a"]: r for r in csv.DictReader(fh)}
    assert rows["-1.0"]["verdict"] == "Error"
    assert "ValueError" in rows["-1.0"]["error"]
    assert rows["1.0"]["verdict"] == "Spreading"
    assert rows["1.0"]["error"] == ""


def test_sweep_cell_cap(tmp_path):
    cfg = load_config(write(tmp_path, ""))
    axes = (("model.c", tuple(float(i) for i in range(1, 102))),
            ("init.h0", tuple(float(i) for i in range(1, 102))))
    spec = SweepSpec(config=cfg, axes=axes,
                     out_path=str(tmp_path / "cap.csv"))
    with pytest.raises(ValueError, match="over the cap"):
        run_sweep(spec)


def test_sweep_rejects_mismatched_existing_table(tmp_path):
    cfg = load_config(write(tmp_path, ""))
    out = tmp_path / "old.csv"
    out.write_text("model.c,verdict\n2.0,Spreading\n")
    spec = SweepSpec(config=cfg, axes=(("init.tau", (1.0,)),),
                     out_path=str(out))
    with pytest.raises(ValueError, match="columns"):
        run_sweep(spec)
