"""Command-line front end.

Every subcommand takes either ``--config run.json`` or a ``--preset`` with
optional overrides, and writes CSV/JSON artifacts into ``--out``:

* ``field.csv``  header ``t,x,u``
* ``probe.csv``  header ``t,u`` (``probe_<i>.csv`` when there are several probes)
* ``report.json`` pretty-printed with sorted keys

Errors are reported as a JSON object on stderr with a nonzero exit status.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import analysis as an
from . import cauchy, ibvp, series, specfun, utm
from . import similarity as sim
from .errors import ConfigError, MismatchedProblem, SelfSimError

log = logging.getLogger("selfsim")

SCHEMA_VERSION = 1
METHODS = ("cn", "series", "utm", "cauchy", "mode")
INITIALS = ("hermite1", "gaussian", "kummer_c_star", "homogeneous_part", "sine_mode")
BOUNDARIES = ("hermite_trace", "kummer_trace", "zero", "sine_mode")


@dataclass
class RunConfig:
    command: str = "solve-ibvp"
    initial: str | dict = "hermite1"
    boundary: str | dict = "hermite_trace"
    kind: str = "dirichlet"
    D: float = 1.0
    n: int = 401
    dt: float = 1e-3
    t_end: float = 20.0
    probes: list = field(default_factory=lambda: [1.0])
    times: list = field(default_factory=list)
    window: list = field(default_factory=lambda: [10.0, 100.0])
    t_star: float | None = None
    method: str = "cn"
    N: int = 60
    out: str = "."
    schema_version: int = SCHEMA_VERSION

    def problem_key(self) -> dict:
        """The fields that define the mathematical problem (not how it is solved)."""
        return {k: getattr(self, k) for k in ("initial", "boundary", "kind", "D")}


PRESETS = {
    "case4": dict(initial="hermite1", boundary="hermite_trace", D=1.0, n=401, dt=1e-3, t_end=100.0,
                  probes=[1.0], times=[0.5, 1.0, 2.0, 5.0, 10.0, 20.0], t_star=-0.5),
    "case4-large": dict(initial="hermite1", boundary="hermite_trace", D=200.0, n=4001, dt=1e-2, t_end=100.0,
                        probes=[-1.0], times=[1.0, 10.0, 100.0], t_star=-0.5),
    "fig2": dict(initial="homogeneous_part", boundary="zero", D=1.0, n=401, dt=1e-3, t_end=100.0,
                 probes=[0.0], times=[0.1, 0.5, 1.0, 2.0], t_star=-1.0),
    "fig22": dict(initial="gaussian", boundary="kummer_trace", D=1.0, n=401, dt=1e-3, t_end=5.0,
                  probes=[0.0], times=[0.5, 1.0, 2.0, 5.0], t_star=-1.0),
}


# ---------------------------------------------------------------------------
# configuration


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.schema_version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {cfg.schema_version}")
    if cfg.method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}")
    if isinstance(cfg.initial, str) and cfg.initial not in INITIALS:
        raise ConfigError(f"initial must be one of {INITIALS} or {{'file': path}}")
    if isinstance(cfg.boundary, str) and cfg.boundary not in BOUNDARIES:
        raise ConfigError(f"boundary must be one of {BOUNDARIES} or {{'file': path}}")
    for key in ("initial", "boundary"):
        val = getattr(cfg, key)
        if isinstance(val, dict):
            path = val.get("file")
            if not path or not Path(path).is_file():
                raise ConfigError(f"{key} file {path!r} does not exist")
    if cfg.kind not in ("dirichlet", "neumann", "robin"):
        raise ConfigError("kind must be dirichlet, neumann or robin")
    if not (cfg.D > 0 and cfg.n >= 3 and cfg.dt > 0 and cfg.t_end > 0 and cfg.N >= 1):
        raise ConfigError("D, dt, t_end must be positive, n >= 3 and N >= 1")
    if cfg.dt > cfg.t_end:
        raise ConfigError("dt must not exceed t_end")
    if any(abs(float(x)) > cfg.D for x in cfg.probes):
        raise ConfigError("probe points must lie in [-D, D]")
    if any(not 0 <= float(t) <= cfg.t_end for t in cfg.times):
        raise ConfigError("output times must lie in [0, t_end]")
    if len(cfg.window) != 2 or not cfg.window[0] < cfg.window[1]:
        raise ConfigError("window must be [t_min, t_max] with t_min < t_max")
    return cfg


def load_config(path: str | None, args: argparse.Namespace | None = None) -> RunConfig:
    """Merge, in increasing priority: defaults, preset, JSON file, command-line flags."""
    base: dict = {}
    preset = getattr(args, "preset", None) if args is not None else None
    doc: dict = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        if "schema_version" not in doc:
            raise ConfigError("config is missing schema_version")
        preset = doc.pop("preset", preset)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        base.update(PRESETS[preset])
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    base.update(doc)
    if args is not None:
        for flag, key in (("D", "D"), ("n", "n"), ("dt", "dt"), ("t_end", "t_end"), ("out", "out"),
                          ("method", "method"), ("N", "N"), ("t_star", "t_star")):
            val = getattr(args, flag, None)
            if val is not None:
                base[key] = val
        if getattr(args, "probe", None):
            base["probes"] = [_parse_probe(p) for p in args.probe]
        if getattr(args, "window", None):
            base["window"] = list(args.window)
        base["command"] = args.command
    try:
        cfg = RunConfig(**base)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    # Presets are written for D = 1 style probes; keep them inside the domain.
    if preset is not None and "probes" not in doc and not getattr(args, "probe", None):
        cfg.probes = [float(np.clip(p, -cfg.D, cfg.D)) for p in cfg.probes]
    cfg.times = [t for t in cfg.times if t <= cfg.t_end] if "times" not in doc else cfg.times
    return _validate(cfg)


def _parse_probe(text: str) -> float:
    key, _, val = text.partition("=")
    if key.strip() != "x" or not val:
        raise ConfigError(f"probe must look like x=<value>, got {text!r}")
    try:
        return float(val)
    except ValueError as exc:
        raise ConfigError(f"bad probe value {val!r}") from exc


# ---------------------------------------------------------------------------
# problem assembly


@dataclass
class Setup:
    cfg: RunConfig
    grid: ibvp.Grid1D
    u0: Callable  # vectorised initial profile
    g: Callable | None  # Dirichlet value at -D (None means zero)
    h: Callable | None
    problem: ibvp.IBVPProblem
    exact: ibvp.ClosedForm | None
    t_star: float | None
    c_star: float | None = None


def _read_columns(path: str, names: tuple[str, ...]) -> list[np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    try:
        return [np.array([float(r[n]) for r in rows]) for n in names]
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path} needs numeric columns {names}") from exc


def _closed_form(name: str, D: float) -> tuple[ibvp.ClosedForm, float | None]:
    if name == "hermite_trace":
        return ibvp.hermite_closed_form(), None
    if name == "kummer_trace":
        c = an.compatibility_constant(D)
        return ibvp.kummer_closed_form(c), c
    if name == "sine_mode":
        return ibvp.sine_mode_closed_form(D), None
    return ibvp.zero_closed_form(), None


def build_setup(cfg: RunConfig) -> Setup:
    grid = ibvp.Grid1D(cfg.D, cfg.n)
    c_star = None
    # initial data
    if isinstance(cfg.initial, dict):
        xs, us = _read_columns(cfg.initial["file"], ("x", "u"))
        data = cauchy.InitialData.tabulated(xs, us)
        u0 = lambda x: np.asarray(data(x), dtype=float)
    elif cfg.initial == "hermite1":
        u0 = lambda x: np.asarray(x) * np.exp(-0.5 * np.asarray(x) ** 2)
    elif cfg.initial == "gaussian":
        u0 = lambda x: np.exp(-0.5 * np.asarray(x) ** 2)
    elif cfg.initial == "sine_mode":
        u0 = lambda x: ibvp.sine_mode_closed_form(cfg.D)(x, 0.0)
    else:
        c_star = an.compatibility_constant(cfg.D)
        kum = ibvp.kummer_closed_form(c_star)
        if cfg.initial == "kummer_c_star":
            u0 = lambda x: kum(x, 0.0)
        else:
            u0 = lambda x: np.exp(-0.5 * np.asarray(x) ** 2) - kum(x, 0.0)
    # boundary data
    exact = None
    if isinstance(cfg.boundary, dict):
        if cfg.kind != "dirichlet":
            raise ConfigError("tabulated boundary data are Dirichlet only")
        ts, left, right = _read_columns(cfg.boundary["file"], ("t", "left", "right"))
        lspec = ibvp.tabulated_boundary(ibvp.Side.LEFT, ibvp.Kind.DIRICHLET, ts, left)
        rspec = ibvp.tabulated_boundary(ibvp.Side.RIGHT, ibvp.Kind.DIRICHLET, ts, right)
        g, h = lspec.source, rspec.source
    else:
        form, c = _closed_form(cfg.boundary, cfg.D)
        c_star = c if c is not None else c_star
        make = {"dirichlet": ibvp.consonant_dirichlet, "neumann": ibvp.consonant_neumann,
                "robin": ibvp.consonant_robin}[cfg.kind]
        lspec, rspec = make(form, cfg.D)
        g = None if cfg.boundary == "zero" else (lambda t, f=form: f(-cfg.D, t))
        h = None if cfg.boundary == "zero" else (lambda t, f=form: f(cfg.D, t))
        if _same_solution(cfg.initial, cfg.boundary):
            exact = form
    t_star = cfg.t_star
    if t_star is None and exact is not None:
        t_star = exact.t_star
    problem = ibvp.IBVPProblem(grid, u0(grid.x), lspec, rspec, cfg.t_end, cfg.dt)
    return Setup(cfg, grid, u0, g, h, problem, exact, t_star, c_star)


def _same_solution(initial, boundary) -> bool:
    pairs = {("hermite1", "hermite_trace"), ("kummer_c_star", "kummer_trace"), ("sine_mode", "sine_mode")}
    return isinstance(initial, str) and isinstance(boundary, str) and (initial, boundary) in pairs


def _require_dirichlet(s: Setup, method: str) -> None:
    if s.cfg.kind != "dirichlet":
        raise ConfigError(f"method {method} handles Dirichlet data only")


def _cauchy_data(s: Setup) -> cauchy.InitialData:
    if isinstance(s.cfg.initial, dict):
        xs, us = _read_columns(s.cfg.initial["file"], ("x", "u"))
        return cauchy.InitialData.tabulated(xs, us)
    if s.cfg.initial in ("hermite1", "gaussian", "kummer_c_star"):
        return cauchy.InitialData.preset(s.cfg.initial, D=s.cfg.D)
    raise ConfigError(f"the whole-line problem is not defined for initial data {s.cfg.initial!r}")


def evaluator(s: Setup, method: str) -> Callable[[np.ndarray, float], np.ndarray]:
    """A function (x array, t) -> u array for the chosen method (snapshots need t > 0)."""
    if method == "cn":
        cache: dict = {}

        def run_cn(xs, t):
            if "field" not in cache:
                cache["field"] = ibvp.crank_nicolson_solve(s.problem, save_times=cache.get("times"))
            f = cache["field"]
            i = int(np.argmin(np.abs(f.times - t)))
            if abs(f.times[i] - t) > 1e-9 * max(1.0, t):
                raise ConfigError(f"time {t} is not a stored level")
            return np.interp(xs, s.grid.x, f.values[i])

        run_cn.cache = cache
        return run_cn
    if method == "series":
        _require_dirichlet(s, method)
        sol = series.SineSeriesSolution.from_initial(lambda x: float(s.u0(np.asarray(x))), s.cfg.D, s.cfg.N, s.g, s.h)
        return lambda xs, t: np.atleast_1d(sol(xs, t))
    if method == "utm":
        _require_dirichlet(s, method)
        return lambda xs, t: np.atleast_1d(utm.utm_solve(s.u0, s.g, s.h, s.cfg.D, xs, t))
    if method == "cauchy":
        data = _cauchy_data(s)
        return lambda xs, t: np.array([cauchy.heat_kernel_solve(data, float(x), t) for x in np.atleast_1d(xs)])
    if s.exact is None:
        raise ConfigError("method 'mode' needs initial and boundary data from the same closed form")
    return lambda xs, t: np.atleast_1d(s.exact(xs, t))


# ---------------------------------------------------------------------------
# output helpers


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_rows(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


def _write_probes(out: Path, probes: list, times: np.ndarray, series_: list[np.ndarray]) -> list[str]:
    names = ["probe.csv"] if len(probes) == 1 else [f"probe_{i}.csv" for i in range(len(probes))]
    for name, vals in zip(names, series_):
        _write_rows(out / name, ["t", "u"], zip(times, vals))
    return names


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fits(cfg: RunConfig, t_star: float | None, times: np.ndarray, probes: list, values: list) -> dict:
    lo, hi = cfg.window
    if t_star is None or times.size == 0 or times[-1] < hi * (1 - 1e-12):
        return {}
    fits = {}
    for x, vals in zip(probes, values):
        try:
            fits[f"x={x}"] = an.classify_decay(an.TimeSeries(times, vals), t_star, (lo, hi)).as_dict()
        except SelfSimError as exc:
            fits[f"x={x}"] = {"error": type(exc).__name__, "message": str(exc)}
    return fits


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve_ibvp(cfg: RunConfig) -> dict:
    s = build_setup(cfg)
    out = _outdir(cfg)
    lo, hi = cfg.window
    extra = [cfg.times]
    if hi <= cfg.t_end:
        extra.append(an.log_times(lo, hi))
    save = np.unique(np.concatenate([np.linspace(0.0, cfg.t_end, 201)] + [np.asarray(e, float) for e in extra]))
    start = time.perf_counter()
    f = ibvp.crank_nicolson_solve(s.problem, save_times=save)
    elapsed = time.perf_counter() - start
    f.to_csv(out / "field.csv")
    probe_vals = [f.probe(x) for x in cfg.probes]
    report = {
        "method": "cn",
        "runtime_s": elapsed,
        "probe_files": _write_probes(out, cfg.probes, f.times, probe_vals),
        "compatibility_residuals": list(ibvp.compatibility_check(s.problem)),
        "fits": _fits(cfg, s.t_star, f.times, cfg.probes, probe_vals),
    }
    ms = ibvp.mass_series(f)
    report["mass"] = {"max_abs_M": float(np.max(np.abs(ms.M))), "max_flux_residual": float(np.max(ms.residual)),
                      "M_final": float(ms.M[-1])}
    if cfg.kind == "dirichlet":
        report["underflow"] = an.underflow_audit((s.problem.left, s.problem.right), cfg.t_end,
                                                 float(np.max(np.abs(s.problem.initial)))).as_dict()
    if s.exact is not None:
        err = max(float(np.max(np.abs(f.values[i] - s.exact(s.grid.x, t)))) for i, t in enumerate(f.times))
        report["max_abs_error_vs_exact"] = err
    return report


def _sampled(cfg: RunConfig, method: str) -> dict:
    s = build_setup(cfg)
    out = _outdir(cfg)
    times = np.array(sorted({float(t) for t in cfg.times if t > 0} or {cfg.t_end}))
    ev = evaluator(s, method)
    start = time.perf_counter()
    values = np.array([ev(s.grid.x, t) for t in times])
    elapsed = time.perf_counter() - start
    ibvp.SolutionField(s.grid, times, values).to_csv(out / "field.csv")
    probe_vals = [np.array([float(ev(np.array([x]), t)[0]) for t in times]) for x in cfg.probes]
    report = {"method": method, "runtime_s": elapsed,
              "probe_files": _write_probes(out, cfg.probes, times, probe_vals)}
    if s.exact is not None:
        report["max_abs_error_vs_exact"] = float(np.max(np.abs(values - np.array([s.exact(s.grid.x, t) for t in times]))))
    return report


def cmd_solve_series(cfg: RunConfig) -> dict:
    report = _sampled(cfg, "series")
    report["N"] = cfg.N
    return report


def cmd_solve_utm(cfg: RunConfig) -> dict:
    s = build_setup(cfg)
    _require_dirichlet(s, "utm")
    times = sorted({float(t) for t in cfg.times if t > 0} or {cfg.t_end})
    resid = max(utm.utm_evaluate(s.u0, s.g, s.h, cfg.D, np.asarray(cfg.probes, float), t).max_residual for t in times)
    report = _sampled(cfg, "utm")
    report["max_imag_residual"] = resid
    return report


def cmd_solve_cauchy(cfg: RunConfig) -> dict:
    return _sampled(cfg, "cauchy")


def cmd_decompose(cfg: RunConfig) -> dict:
    if cfg.initial != "gaussian" or cfg.boundary != "kummer_trace":
        raise ConfigError("decompose is defined for gaussian initial data with Kummer boundary traces")
    out = _outdir(cfg)
    dec = an.build_decomposition(cfg.D, n=cfg.n, t_end=cfg.t_end, dt=cfg.dt)
    times = np.array(sorted({0.0} | {float(t) for t in cfg.times}))
    u = ibvp.crank_nicolson_solve(dec.original, save_times=times)
    u1_series = series.SineSeriesSolution.from_initial(
        lambda x: math.exp(-0.5 * x * x) - float(dec.consonant(x, 0.0)), cfg.D, 10)
    x = dec.original.grid.x
    u2 = np.array([dec.consonant(x, t) for t in u.times])
    u1 = np.array([dec.homogeneous.initial if t == 0 else u1_series(x, t) for t in u.times])
    grid = dec.original.grid
    u.to_csv(out / "field.csv")
    ibvp.SolutionField(grid, u.times, u1).to_csv(out / "field_u1.csv")
    ibvp.SolutionField(grid, u.times, u2).to_csv(out / "field_u2.csv")
    diffs = {repr(float(t)): float(np.max(np.abs(u.values[i] - u1[i] - u2[i])))
             for i, t in enumerate(u.times) if t > 0}
    return {"c_star": dec.c_star, "series_modes": 10, "max_abs_disagreement": diffs,
            "agreement_tol": 1e-4, "agree": all(v < 1e-4 for v in diffs.values()),
            "files": ["field.csv", "field_u1.csv", "field_u2.csv"]}


def cmd_fit_decay(cfg: RunConfig, input_path: str | None) -> dict:
    if input_path:
        ts_, us = _read_columns(input_path, ("t", "u"))
        series_ = [an.TimeSeries(ts_, us)]
        labels = [input_path]
        t_star = cfg.t_star
    else:
        s = build_setup(cfg)
        lo, hi = cfg.window
        if hi > cfg.t_end:
            raise ConfigError("t_end must reach the end of the fit window")
        f = ibvp.crank_nicolson_solve(s.problem, save_times=an.log_times(lo, hi))
        series_ = [an.TimeSeries.from_field(f, x) for x in cfg.probes]
        labels = [f"x={x}" for x in cfg.probes]
        t_star = s.t_star
        report_extra = {"underflow": an.underflow_audit((s.problem.left, s.problem.right), cfg.t_end,
                                                        float(np.max(np.abs(s.problem.initial)))).as_dict()}
    fits = {}
    for label, ts in zip(labels, series_):
        if t_star is None:
            fit = an.search_t_star(ts, tuple(cfg.window))
            fits[label] = {"searched_t_star": fit.t_star, **an.classify_decay(ts, fit.t_star, tuple(cfg.window)).as_dict()}
        else:
            fits[label] = an.classify_decay(ts, t_star, tuple(cfg.window)).as_dict()
    report = {"fits": fits}
    if not input_path:
        report.update(report_extra)
    _outdir(cfg)
    return report


def cmd_compare(cfg_a: RunConfig, cfg_b: RunConfig, tol: float) -> dict:
    if cfg_a.problem_key() != cfg_b.problem_key():
        raise MismatchedProblem(f"configs describe different problems: {cfg_a.problem_key()} vs {cfg_b.problem_key()}")
    times = sorted({float(t) for t in cfg_a.times if t > 0} or {cfg_a.t_end})
    xs = np.asarray(cfg_a.probes, dtype=float)
    results = []
    for cfg in (cfg_a, cfg_b):
        s = build_setup(cfg)
        ev = evaluator(s, cfg.method)
        if cfg.method == "cn":
            ev.cache["times"] = times
        results.append(np.array([ev(xs, t) for t in times]))
    diff = np.abs(results[0] - results[1])
    _outdir(cfg_a)
    return {"methods": [cfg_a.method, cfg_b.method], "probes_x": xs.tolist(), "times": times,
            "max_abs_diff": float(diff.max()), "mean_abs_diff": float(diff.mean()), "tol": tol,
            "pass": bool(diff.max() < tol)}


def cmd_eval_mode(args: argparse.Namespace) -> dict:
    mode = sim.SelfSimilarMode(args.c1, args.c2, args.nu, args.second_branch)
    xi = np.linspace(args.xi_min, args.xi_max, args.samples)
    w = np.asarray(sim.stationary_profile(mode, xi))
    res = np.asarray(sim.stationary_residual(mode, mode.b, xi))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_rows(out / "profile.csv", ["xi", "w", "residual"], zip(xi, w, res))
    return {"nu": args.nu, "b": mode.b, "c1": args.c1, "c2": args.c2, "second_branch": args.second_branch,
            "max_abs_residual": float(np.max(np.abs(res))), "file": "profile.csv"}


def cmd_specfun_eval(args: argparse.Namespace) -> dict:
    a = args.args
    fn = args.function
    table = {
        "kummer_1f1": (3, lambda: specfun.kummer_1f1(*a)),
        "kummer_asymptotic": (3, lambda: specfun.kummer_asymptotic(*a)),
        "hermite_nu": (2, lambda: specfun.hermite_nu(*a)),
        "hermite_poly": (2, lambda: specfun.hermite_poly(int(a[0]), a[1])),
        "erfi": (1, lambda: specfun.erfi(a[0])),
        "log_gamma": (1, lambda: specfun.log_gamma(a[0])),
    }
    arity, call = table[fn]
    if len(a) != arity:
        raise ConfigError(f"{fn} takes {arity} arguments")
    value = call()
    if fn == "log_gamma":
        return {"function": fn, "args": a, "value": value[0], "sign": value[1]}
    return {"function": fn, "args": a, "value": float(value)}


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--D", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--probe", action="append", metavar="x=V", help="probe point (repeatable)")
    p.add_argument("--out", help="output directory (default .)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="selfsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval-mode", help="tabulate a stationary profile and its ODE residual")
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=0.0)
    p.add_argument("--second-branch", action="store_true")
    p.add_argument("--xi-min", type=float, default=-5.0)
    p.add_argument("--xi-max", type=float, default=5.0)
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--out", default=".")

    p = sub.add_parser("specfun-eval", help="evaluate one special function")
    p.add_argument("function", choices=["kummer_1f1", "kummer_asymptotic", "hermite_nu", "hermite_poly",
                                        "erfi", "log_gamma"])
    p.add_argument("args", type=float, nargs="+")
    p.add_argument("--out")

    solvers = {"solve-ibvp": "Crank-Nicolson finite-difference solve",
               "solve-series": "sine-series solve on [-D, D]",
               "solve-utm": "unified transform (contour integral) solve",
               "solve-cauchy": "whole-line heat-kernel solve",
               "decompose": "split a Kummer-trace problem into two simpler ones"}
    for name, text in solvers.items():
        p = sub.add_parser(name, help=text)
        _common(p)
        if name == "solve-series":
            p.add_argument("--N", type=int, help="number of sine modes (default 60)")

    p = sub.add_parser("fit-decay", help="classify the decay of a probe series")
    _common(p)
    p.add_argument("--input", help="CSV with columns t,u (otherwise solve the configured problem)")
    p.add_argument("--t-star", dest="t_star", type=float)
    p.add_argument("--window", type=float, nargs=2, metavar=("T_MIN", "T_MAX"))

    p = sub.add_parser("compare", help="cross-validate two methods (or two configs) at probe points")
    _common(p)
    p.add_argument("--config-b", help="second configuration (with --config)")
    p.add_argument("--methods", default="cn,series", help="two methods from " + ",".join(METHODS))
    p.add_argument("--tol", type=float, default=1e-5)
    return parser


def run(argv: list[str] | None = None) -> int:
    """Parse `argv`, run one command and return the exit status."""
    level = os.environ.get("SELFSIM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, out = _dispatch(args)
    except SelfSimError as exc:
        _fail(exc, 2 if isinstance(exc, ConfigError) else 1)
        return 2 if isinstance(exc, ConfigError) else 1
    except (ValueError, ArithmeticError, OSError) as exc:
        _fail(exc, 1)
        return 1
    if out is not None:
        _write_json(Path(out) / "report.json", report)
    print(json.dumps(_jsonable(report), indent=2, sort_keys=True))
    return 0


def _fail(exc: Exception, status: int) -> None:
    log.debug("command failed", exc_info=exc)
    err = {"error": type(exc).__name__, "message": str(exc), "status": status}
    sys.stderr.write(json.dumps(err, indent=2, sort_keys=True) + "\n")


def _dispatch(args: argparse.Namespace) -> tuple[dict, str | None]:
    if args.command == "eval-mode":
        return cmd_eval_mode(args), args.out
    if args.command == "specfun-eval":
        report = cmd_specfun_eval(args)
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
        return report, args.out
    standalone = args.command == "fit-decay" and args.input
    if args.config is None and args.preset is None and not standalone:
        raise ConfigError("give --config or --preset")
    cfg = load_config(args.config, args)
    report = {"config": asdict(cfg)}
    if args.command == "compare":
        methods = args.methods.split(",")
        if args.config_b:
            cfg_b = load_config(args.config_b, args)
            cfg_b = replace(cfg_b, command="compare")
            pair = (cfg, cfg_b)
        else:
            if len(methods) != 2 or any(m not in METHODS for m in methods):
                raise ConfigError(f"--methods needs two of {METHODS}")
            pair = (replace(cfg, method=methods[0]), replace(cfg, method=methods[1]))
        report.update(cmd_compare(*pair, args.tol))
        return report, cfg.out
    handler = {
        "solve-ibvp": cmd_solve_ibvp,
        "solve-series": cmd_solve_series,
        "solve-utm": cmd_solve_utm,
        "solve-cauchy": cmd_solve_cauchy,
        "decompose": cmd_decompose,
    }.get(args.command)
    if handler is not None:
        report.update(handler(cfg))
    else:
        report.update(cmd_fit_decay(cfg, args.input))
    return report, cfg.out


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
