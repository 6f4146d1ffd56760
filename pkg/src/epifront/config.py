"""TOML run configuration: loading, validation, defaults.

The config file is the single source of model truth for the command-line
tools; flags only select the subcommand and output targets.  Parsing is
fail-closed: unknown sections or keys, type mismatches, and constraint
violations are all collected (not just the first) and reported with their
full key path, and any error prevents all computation.

Sections and defaults (the defaults reproduce the standard benchmark
parameter set: d = 1, a = b = 1, c = 2, G(z) = z/(1+z), tent kernels of
scale 1, mu = 1):

    [model]     d1 d2 a b c mu1 mu2
    [model.g]   family ("rational" | "table"), alpha, beta | table_z, table_g
    [kernels]   shared = {family, scale}  or  j11/j12/j21/j22 blocks;
                family in {tent, gaussian, truncated_gaussian, table};
                table kernels take table_x/table_y instead of scale
    [grid]      dx_target (0 = automatic), n_max
    [init]      h0, tau, profile ("cosine")
    [run]       t_max, dt (0 = automatic), deterministic (must be true)
    [classify]  margin, eps_v
    [search]    parameter ("tau" | "mu1" | "d1"), bracket, tol,
                link_ratio, t_max
    [output]    dir, prefix, profile_every (0 = final profile only)
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .kernels import (
    GAUSSIAN,
    KernelSpec,
    TABLE,
    TENT,
    TRUNCATED_GAUSSIAN,
    gaussian,
    tabulated,
    tent,
    truncated_gaussian,
)
from .model import GFunction, ModelParams, g_rational, g_tabulated


class ConfigError(ValueError):
    """All validation problems found in one config, each with its key path."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(
            f"  - {e}" for e in self.errors))


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    dx_target: float | None
    n_max: int
    h0: float
    tau: float
    profile: str
    t_max: float
    dt: float | None
    margin: float
    eps_v: float
    search_parameter: str
    search_bracket: tuple[float, float]
    search_tol: float
    search_link_ratio: float
    search_t_max: float
    output_dir: str
    output_prefix: str
    profile_every: int | None


_KERNEL_FAMILIES = (TENT, GAUSSIAN, TRUNCATED_GAUSSIAN, TABLE)
_SEARCH_PARAMETERS = ("tau", "mu1", "d1")


class _Collector:
    """Walks the raw TOML tree, recording every problem with its key path."""

    def __init__(self, raw: dict):
        self.raw = raw
        self.errors: list[str] = []

    def section(self, name: str, known: tuple[str, ...]) -> dict:
        sec = self.raw.get(name, {})
        if not isinstance(sec, dict):
            self.errors.append(f"{name}: expected a section (table)")
            return {}
        for key in sec:
            if key not in known:
                self.errors.append(f"{name}.{key}: unknown key")
        return sec

    def number(self, sec: dict, path: str, key: str, default,
               *, positive=False, nonnegative=False):
        if key not in sec:
            return default
        val = sec[key]
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            self.errors.append(f"{path}.{key}: expected a number, "
                               f"got {val!r}")
            return default
        val = float(val)
        if positive and val <= 0.0:
            self.errors.append(f"{path}.{key}: must be positive, got {val:g}")
        if nonnegative and val < 0.0:
            self.errors.append(f"{path}.{key}: must not be negative, "
                               f"got {val:g}")
        return val

    def string(self, sec: dict, path: str, key: str, default,
               allowed: tuple[str, ...] | None = None):
        if key not in sec:
            return default
        val = sec[key]
        if not isinstance(val, str):
            self.errors.append(f"{path}.{key}: expected a string, got {val!r}")
            return default
        if allowed is not None and val not in allowed:
            self.errors.append(
                f"{path}.{key}: must be one of {', '.join(allowed)}; "
                f"got '{val}'")
            return default
        return val


def _parse_kernel(col: _Collector, raw, path: str) -> KernelSpec | None:
    if not isinstance(raw, dict):
        col.errors.append(f"{path}: expected a table with a 'family' key")
        return None
    known = ("family", "scale", "table_x", "table_y")
    for key in raw:
        if key not in known:
            col.errors.append(f"{path}.{key}: unknown key")
    family = col.string(raw, path, "family", None, allowed=_KERNEL_FAMILIES)
    if family is None:
        col.errors.append(f"{path}.family: required")
        return None
    try:
        if family == TABLE:
            xs = raw.get("table_x")
            ys = raw.get("table_y")
            if xs is None or ys is None:
                col.errors.append(f"{path}: table kernels need table_x "
                                  "and table_y")
                return None
            return tabulated(xs, ys)
        scale = col.number(raw, path, "scale", 1.0, positive=True)
        factory = {TENT: tent, GAUSSIAN: gaussian,
                   TRUNCATED_GAUSSIAN: truncated_gaussian}[family]
        return factory(scale)
    except (ValueError, TypeError) as exc:
        col.errors.append(f"{path}: {exc}")
        return None


def _parse_kernels(col: _Collector) -> tuple[KernelSpec, ...] | None:
    sec = col.section("kernels", ("shared", "j11", "j12", "j21", "j22"))
    if "shared" in sec:
        extra = [k for k in ("j11", "j12", "j21", "j22") if k in sec]
        if extra:
            col.errors.append(
                "kernels: 'shared' excludes per-block keys "
                f"({', '.join(extra)})")
            return None
        k = _parse_kernel(col, sec["shared"], "kernels.shared")
        return None if k is None else (k, k, k, k)
    out = []
    for name in ("j11", "j12", "j21", "j22"):
        if name not in sec:
            out.append(tent(1.0))
            continue
        k = _parse_kernel(col, sec[name], f"kernels.{name}")
        if k is None:
            return None
        out.append(k)
    return tuple(out)


def _parse_g(col: _Collector, model_sec: dict) -> GFunction | None:
    raw = model_sec.get("g", {})
    if not isinstance(raw, dict):
        col.errors.append("model.g: expected a section (table)")
        return None
    known = ("family", "alpha", "beta", "table_z", "table_g")
    for key in raw:
        if key not in known:
            col.errors.append(f"model.g.{key}: unknown key")
    family = col.string(raw, "model.g", "family", "rational",
                        allowed=("rational", "table"))
    try:
        if family == "table":
            zs, gs = raw.get("table_z"), raw.get("table_g")
            if zs is None or gs is None:
                col.errors.append("model.g: table family needs table_z "
                                  "and table_g")
                return None
            return g_tabulated(zs, gs)
        alpha = col.number(raw, "model.g", "alpha", 1.0, positive=True)
        beta = col.number(raw, "model.g", "beta", 1.0, positive=True)
        return g_rational(alpha, beta)
    except (ValueError, TypeError) as exc:
        col.errors.append(f"model.g: {exc}")
        return None


def load_config(path: str | Path) -> RunConfig:
    """Parse and fully validate a TOML config, raising ConfigError on any
    problem (all problems are collected and reported together)."""
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError([f"config file not found: {path}"]) from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"TOML syntax: {exc}"]) from None

    col = _Collector(raw)
    for name in raw:
        if name not in ("model", "kernels", "grid", "init", "run",
                        "classify", "search", "output"):
            col.errors.append(f"{name}: unknown section")

    model = col.section("model", ("d1", "d2", "a", "b", "c", "mu1", "mu2",
                                  "g"))
    d1 = col.number(model, "model", "d1", 1.0, nonnegative=True)
    d2 = col.number(model, "model", "d2", 1.0, nonnegative=True)
    a = col.number(model, "model", "a", 1.0, positive=True)
    b = col.number(model, "model", "b", 1.0, positive=True)
    c = col.number(model, "model", "c", 2.0, positive=True)
    mu1 = col.number(model, "model", "mu1", 1.0, positive=True)
    mu2 = col.number(model, "model", "mu2", 1.0, positive=True)
    gfun = _parse_g(col, model)
    kernels = _parse_kernels(col)

    grid = col.section("grid", ("dx_target", "n_max"))
    dx_target = col.number(grid, "grid", "dx_target", 0.0, nonnegative=True)
    n_max = col.number(grid, "grid", "n_max", 4001, positive=True)

    init = col.section("init", ("h0", "tau", "profile"))
    h0 = col.number(init, "init", "h0", 1.0, positive=True)
    tau = col.number(init, "init", "tau", 1.0, positive=True)
    profile = col.string(init, "init", "profile", "cosine",
                         allowed=("cosine",))

    run = col.section("run", ("t_max", "dt", "deterministic"))
    t_max = col.number(run, "run", "t_max", 100.0, positive=True)
    dt = col.number(run, "run", "dt", 0.0, nonnegative=True)
    if "deterministic" in run and run["deterministic"] is not True:
        col.errors.append(
            "run.deterministic: only 'true' is supported — every "
            "computation here is deterministic by construction")

    cls = col.section("classify", ("margin", "eps_v"))
    margin = col.number(cls, "classify", "margin", 0.05, positive=True)
    eps_v = col.number(cls, "classify", "eps_v", 1e-8, positive=True)

    search = col.section("search", ("parameter", "bracket", "tol",
                                    "link_ratio", "t_max"))
    parameter = col.string(search, "search", "parameter", "tau",
                           allowed=_SEARCH_PARAMETERS)
    bracket_raw = search.get("bracket", [0.5, 2.0])
    bracket = (0.5, 2.0)
    if (not isinstance(bracket_raw, list) or len(bracket_raw) != 2
            or any(isinstance(v, bool) or not isinstance(v, (int, float))
                   for v in bracket_raw)):
        col.errors.append("search.bracket: expected two numbers [lo, hi]")
    elif not 0.0 < float(bracket_raw[0]) < float(bracket_raw[1]):
        col.errors.append("search.bracket: needs 0 < lo < hi, got "
                          f"{bracket_raw}")
    else:
        bracket = (float(bracket_raw[0]), float(bracket_raw[1]))
    search_tol = col.number(search, "search", "tol", 1e-3, positive=True)
    link_ratio = col.number(search, "search", "link_ratio", 1.0,
                            positive=True)
    search_t_max = col.number(search, "search", "t_max", 500.0,
                              positive=True)

    output = col.section("output", ("dir", "prefix", "profile_every"))
    out_dir = col.string(output, "output", "dir", "out")
    prefix = col.string(output, "output", "prefix", "run")
    profile_every = col.number(output, "output", "profile_every", 0.0,
                               nonnegative=True)

    params = None
    if gfun is not None and kernels is not None and not col.errors:
        try:
            params = ModelParams(d1=d1, d2=d2, a=a, b=b, c=c, g=gfun,
                                 k11=kernels[0], k12=kernels[1],
                                 k21=kernels[2], k22=kernels[3],
                                 mu1=mu1, mu2=mu2)
        except ValueError as exc:
            col.errors.append(f"model: {exc}")
    if col.errors:
        raise ConfigError(col.errors)
    return RunConfig(
        params=params,
        dx_target=None if dx_target == 0.0 else dx_target,
        n_max=int(n_max),
        h0=h0, tau=tau, profile=profile,
        t_max=t_max, dt=None if dt == 0.0 else dt,
        margin=margin, eps_v=eps_v,
        search_parameter=parameter, search_bracket=bracket,
        search_tol=search_tol, search_link_ratio=link_ratio,
        search_t_max=search_t_max,
        output_dir=out_dir, output_prefix=prefix,
        profile_every=None if profile_every == 0.0 else int(profile_every))
