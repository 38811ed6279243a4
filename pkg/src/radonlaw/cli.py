"""Command-line entry point: ``radonlaw simulate | exact | verify | sweep``.

Exit codes: 0 success, 1 a check failed, 2 bad configuration or usage,
3 runtime error.  ``RADONLAW_WORKERS`` sets the size of the process pool used
for independent runs (default 1, i.e. sequential).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from . import analysis, exact
from . import flux as fluxlib
from . import measure
from .errors import ConfigError, RadonLawError
from .report import CheckReport, _clean, aggregate
from .solver import SolverConfig, required_padding, run

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
WORKERS_ENV = "RADONLAW_WORKERS"

CHECKS = ("mass", "max-principle", "entropy", "aronson-benilan", "waiting-time", "singular-mass-monotone")

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["flux", "datum", "levels", "T"],
    "additionalProperties": False,
    "properties": {
        "flux": {"oneOf": [{"type": "string"}, {"type": "object", "required": ["kind"]}]},
        "datum": {"oneOf": [{"type": "string"}, {"type": "object"}]},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "x_min": {"type": "number"},
                "x_max": {"type": "number"},
                "dx": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "levels": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "T": {"type": "number", "exclusiveMinimum": 0},
        "snapshots": {
            "oneOf": [
                {"type": "integer", "minimum": 1},
                {"type": "array", "items": {"type": "number", "minimum": 0}},
            ]
        },
        "cfl": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "scheme": {"enum": ["godunov", "engquist-osher"]},
        "min_cells": {"type": "integer", "minimum": 1},
        "checks": {"type": "array", "items": {"enum": list(CHECKS)}},
        "output": {"type": "string"},
        "seed": {"type": "integer"},
    },
}

DEFAULTS = {"grid": {}, "snapshots": 200, "cfl": 0.45, "scheme": "godunov", "min_cells": 2, "seed": 0}


# --- configuration ---------------------------------------------------------------

def workers():
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be at least 1")
    return n


def pmap(fn, items):
    """Map over ``items`` in a process pool (or inline for one worker)."""
    items = list(items)
    n = min(workers(), len(items)) if items else 1
    if n <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def validate_config(cfg):
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None
    out = {**DEFAULTS, **cfg}
    out["grid"] = {**DEFAULTS["grid"], **cfg.get("grid", {})}
    return out


def load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def build_flux(spec):
    try:
        return fluxlib.parse_flux(spec) if isinstance(spec, str) else fluxlib.from_config(spec)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad flux spec {spec!r}: {exc}") from None


def datum_spec(spec):
    try:
        return measure.parse_datum(spec) if isinstance(spec, str) else spec
    except ValueError as exc:
        raise ConfigError(f"bad datum spec {spec!r}: {exc}") from None


def auto_grid(dspec, flux, T, dx, n_min):
    """Grid covering the datum support plus the padding the solver demands."""
    pts = []
    for x, _ in dspec.get("atoms", []):
        pts += [x - 1.0 / n_min, x + 1.0 / n_min]
    dens = dspec.get("density", {"kind": "zero"})
    if dens.get("kind") == "indicator":
        pts += [dens["a"], dens["b"]]
    elif dens.get("kind") == "samples":
        pts += [dens["x_min"], dens["x_max"]]
    if not pts:
        pts = [0.0, 1.0]
    left, right = required_padding(flux, T, dx)
    margin = 4 * dx
    return measure.Grid.covering(min(pts) - left - margin, max(pts) + right + margin, dx)


def default_dx(levels):
    """``2^-8``, refined so every pulse spans at least two cells."""
    k = max(8, math.ceil(math.log2(max(levels))))
    return 2.0**-k


def _grid_for(cfg, flux, dspec):
    g = cfg["grid"]
    dx = float(g["dx"]) if "dx" in g else default_dx(cfg["levels"])
    if "x_min" in g and "x_max" in g:
        return measure.Grid.covering(g["x_min"], g["x_max"], dx)
    return auto_grid(dspec, flux, cfg["T"], dx, min(cfg["levels"]))


def _solver_config(cfg, grid):
    snaps = cfg["snapshots"]
    kw = {"n_snapshots": snaps} if isinstance(snaps, int) else {"snapshot_times": snaps}
    return SolverConfig(grid, float(cfg["T"]), cfl=cfg["cfl"], scheme=cfg["scheme"], **kw)


def _run_level(job):
    """Worker body: one level ``n`` of a configured experiment."""
    cfg, n = job
    flux = build_flux(cfg["flux"])
    dspec = datum_spec(cfg["datum"])
    grid = _grid_for(cfg, flux, dspec)
    m = measure.from_config(dspec, grid)
    u0n = measure.dirac_regularize(m, n, grid, min_cells=cfg["min_cells"])
    return run(u0n, flux, _solver_config(cfg, grid), level=n, datum_id=json.dumps(dspec, sort_keys=True), atoms=m.atoms)


def build_runs(cfg):
    return pmap(_run_level, [(cfg, n) for n in cfg["levels"]])


def save_run(traj, path):
    d = traj.diagnostics
    np.savez(
        path,
        times=traj.times,
        snaps=traj.snaps,
        flux_int=traj.flux_int,
        edges=traj.grid.edges,
        level=np.int64(traj.level or 0),
        diag_t=d["t"],
        diag_mass=d["mass"],
        diag_min=d["min"],
        diag_max=d["max"],
    )


def write_json(obj, path=None):
    text = json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def parse_list(text, cast=float):
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise ConfigError("empty list")
    try:
        return [cast(s) for s in items]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_range(text):
    """``a:b:step`` inclusive of ``b`` (up to rounding), or a comma list."""
    if ":" not in text:
        return np.array(parse_list(text))
    try:
        a, b, h = (float(v) for v in text.split(":"))
    except ValueError:
        raise ConfigError(f"range must be a:b:step, got {text!r}") from None
    if h <= 0 or b < a:
        raise ConfigError(f"empty range {text!r}")
    k = int(math.floor((b - a) / h + 1e-9))
    return np.round(a + h * np.arange(k + 1), 12)


# --- checks on configured runs ------------------------------------------------------

def run_checks(cfg, runs):
    reports = []
    checks = cfg.get("checks") or ["mass", "max-principle"]
    top = max(runs, key=lambda r: r.level)
    for name in checks:
        if name == "mass":
            reports += [analysis.mass_check(r) for r in runs]
        elif name == "max-principle":
            reports += [analysis.max_principle_check(r) for r in runs]
        elif name == "entropy":
            reports += [analysis.entropy_check(r, seed=cfg["seed"]) for r in runs]
        elif name == "aronson-benilan":
            T = top.T
            t1, t2 = _nearest(top, T / 4), _nearest(top, T / 2)
            reports += [analysis.aronson_benilan_check(r, times=(t1, t2)) for r in runs]
        elif name == "waiting-time":
            rep = analysis.estimate_waiting_time(runs)
            ok = bool(rep.within_bounds)
            margin = 0.0 if rep.t0_estimate is None else rep.t0_estimate
            reports.append(CheckReport("waiting-time", ok, margin, 0.05, rep.to_dict()))
        elif name == "singular-mass-monotone":
            reports += [analysis.monotone_singular_mass_check(top, x) for x, _ in top.atoms]
    return reports


def _nearest(traj, t):
    return float(traj.times[np.argmin(np.abs(traj.times - t))])


# --- recipes -------------------------------------------------------------------

def recipe_waiting_time(dx=2.0**-12):
    cfg = validate_config(
        {"flux": "power:-1", "datum": "dirac:0:1", "levels": [2**8, 2**10, 2**12], "T": 2.0, "grid": {"dx": dx}}
    )
    runs = build_runs(cfg)
    rep = analysis.estimate_waiting_time(runs)
    t0 = rep.t0_estimate
    ok = t0 is not None and 0.95 <= t0 <= 1.05 and rep.lower_bound == 1.0 and rep.upper_bound == 1.0
    margin = -math.inf if t0 is None else 0.05 - abs(t0 - 1.0)
    checks = [CheckReport("waiting-time", ok, margin, 0.05, rep.to_dict())]
    return "unit Dirac mass with a bounded power flux: the waiting-time bounds coincide and t0 = 1", checks


def rn_oracle_errors(dxs, times=(0.5, 2.0, 4.0, 6.0), n=2, p=-1.0):
    """L1 distance between FV runs and the closed-form pulse solution."""
    T = max(times)
    sol = exact.PulseSolution(n, p, T)
    jobs = [(dx, tuple(times), n, p) for dx in dxs]
    runs = pmap(_rn_run, jobs)
    errs = []
    for r in runs:
        g = r.grid
        errs.append([float(np.sum(np.abs(r.at(t) - sol.cell_averages(g, t))) * g.dx) for t in times])
    return np.array(errs), runs


def _rn_run(job):
    dx, times, n, p = job
    flux = fluxlib.power(p)
    T = max(times)
    left = -1.0 / n
    _, right = required_padding(flux, T, dx)
    g = measure.Grid.covering(left - 4 * dx, 1.0 / n + right + 4 * dx, dx)
    u0 = measure.dirac_regularize(measure.RadonMeasure.dirac(), n, g)
    return run(u0, flux, SolverConfig(g, T, snapshot_times=np.linspace(0, T, 241)), level=n, datum_id="pulse")


def recipe_rn_oracle(kmin=8, kmax=11):
    dxs = [2.0**-k for k in range(kmin, kmax + 1)]
    times = (0.5, 2.0, 4.0, 6.0)
    errs, _ = rn_oracle_errors(dxs, times)
    ratios = errs[:-1] / errs[1:]
    lo, hi = 1.6, 2.4
    margin = float(min(np.min(ratios) - lo, hi - np.max(ratios)))
    checks = [
        CheckReport(
            "rn-oracle-convergence",
            bool(np.all((ratios >= lo) & (ratios <= hi))),
            margin,
            0.4,
            {"dx": dxs, "t": times, "l1_error": errs, "ratio": ratios},
        )
    ]
    return "finite-volume solution of the n = 2 pulse problem converges at first order to the closed form", checks


def recipe_nonuniqueness(dx=2.0**-10):
    flux = fluxlib.power(-1.0)
    t = 0.5
    xs = [0.1, 0.2, 0.3, 0.4]
    sol = exact.ExactSolution(-1.0, 1.0)
    g = measure.Grid.covering(-0.25, 1.0 + 8 * math.sqrt(dx) + 0.25, dx)
    witness = exact.frozen_dirac_solution(measure.RadonMeasure.dirac(), flux, SolverConfig(g, 1.0, n_snapshots=20))
    checks = [
        analysis.blowup_bound_check(sol, flux, 0.0, t, xs=xs),
        analysis.nonuniqueness_contrast(sol, witness, flux, 0.0, t, xs=xs),
    ]
    return "keeping the atom frozen gives an entropy solution that violates the blow-up bound, so uniqueness fails", checks


def recipe_regularization(dx=2.0**-12):
    cfg = validate_config(
        {"flux": "power:0.5", "datum": "dirac:0:1", "levels": [2**10, 2**11, 2**12], "T": 0.1, "grid": {"dx": dx}, "snapshots": 100}
    )
    runs = build_runs(cfg)
    return "unbounded flux: the atom dissolves at once", regularization_checks(runs, 0.1)


def regularization_checks(runs, t):
    flux = runs[0].flux
    w = max(16 * runs[0].grid.dx, flux.lipschitz * runs[0].T / 8)
    sups = analysis.sup_trend(runs, 0.0, t, w)
    v = np.array(list(sups.values()))
    spread = float((v.max() - v.min()) / v.max())
    sol = exact.ExactSolution(flux.params["p"], t)
    ref = float(sol.regular(sol.shock(t), t))
    top = max(runs, key=lambda r: r.level)
    sm = analysis.singular_mass(top, 0.0, t)
    return [
        CheckReport(
            "sup-norm-uniform-in-n",
            spread <= 0.10 and v.max() <= ref * 1.1,
            0.10 - spread,
            0.10,
            {"levels": list(sups), "sup": v, "exact_sup": ref, "window": w},
        ),
        CheckReport("singular-mass-vanishes", sm <= 0.05, 0.05 - sm, 0.05, {"t": t, "singular_mass": sm}),
    ]


RECIPES = {
    "dirac-waiting-time": recipe_waiting_time,
    "rn-oracle": recipe_rn_oracle,
    "nonuniqueness": recipe_nonuniqueness,
    "instant-regularization": recipe_regularization,
}


# --- subcommands -----------------------------------------------------------------

def _merged_config(args):
    cfg = load_config(args.config) if args.config else {}
    if args.flux:
        cfg["flux"] = args.flux
    if args.datum:
        cfg["datum"] = args.datum
    if args.n:
        cfg["levels"] = parse_list(args.n, int)
    if args.T is not None:
        cfg["T"] = args.T
    if args.dx is not None:
        cfg.setdefault("grid", {})["dx"] = args.dx
    if getattr(args, "checks", None):
        cfg["checks"] = parse_list(args.checks, str)
    if args.out:
        cfg["output"] = args.out
    return validate_config(cfg)


def cmd_simulate(args):
    cfg = _merged_config(args)
    runs = build_runs(cfg)
    out = Path(cfg.get("output", "radonlaw-out"))
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    for r in runs:
        path = out / f"traj_n{r.level}.npz"
        save_run(r, path)
        summary.append(
            {
                "level": r.level,
                "file": path.name,
                "n_cells": r.grid.n_cells,
                "dx": r.grid.dx,
                "steps": int(r.diagnostics["t"].size),
                "mass_drift": r.mass_drift(),
                "max": float(np.max(r.diagnostics["max"])) if r.diagnostics["max"].size else float(np.max(r.initial)),
                "min": float(np.min(r.diagnostics["min"])) if r.diagnostics["min"].size else float(np.min(r.initial)),
            }
        )
    write_json({"config": cfg, "runs": summary}, out / "diagnostics.json")
    for s in summary:
        print(f"n={s['level']}: {s['file']} mass drift {s['mass_drift']:.2e}")
    return EXIT_OK


def cmd_exact(args):
    xs = parse_range(args.xs)
    ts = parse_list(args.t)
    if args.n:
        sol = exact.PulseSolution(args.n, args.p, max(max(ts), args.T or 0.0))
    else:
        sol = exact.ExactSolution(args.p, max(max(ts), args.T or 0.0))
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "u_r", "atom_mass", "xi"])
        for t in ts:
            if args.n:
                vals = np.atleast_1d(sol(xs, t))
                atom = 0.0
                xi = sol.shock(t) if t > sol.tn else float("nan")
            else:
                vals = np.atleast_1d(sol.regular(xs, t))
                atom = sol.atom_mass(t)
                xi = sol.left_edge(t)
            for x, v in zip(xs, vals):
                w.writerow([repr(float(t)), repr(float(x)), repr(float(v)), repr(float(atom)), repr(float(xi))])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_verify(args):
    if args.recipe:
        names = list(RECIPES) if args.recipe == "all" else [args.recipe]
        blocks, ok = [], True
        for name in names:
            claim, checks = RECIPES[name]()
            block = aggregate(checks, header=claim)
            block["recipe"] = name
            blocks.append(block)
            ok &= block["pass"]
            for c in checks:
                print(f"[{'PASS' if c.passed else 'FAIL'}] {name}: {c.name} (margin {c.margin:.3g})", file=sys.stderr)
        report = {"pass": ok, "recipes": blocks}
    else:
        cfg = _merged_config(args)
        runs = build_runs(cfg)
        checks = run_checks(cfg, runs)
        report = aggregate(checks)
        ok = report["pass"]
        for c in checks:
            print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name} (margin {c.margin:.3g})", file=sys.stderr)
    write_json(report, args.report)
    return EXIT_OK if ok else EXIT_FAIL


def _sweep_point(job):
    quantity, p, mass, ts = job
    flux = fluxlib.power(p)
    if quantity == "t0":
        T = math.inf
        lo, hi = analysis.waiting_time_bounds(flux, [(0.0, mass)], T)
        t0 = lo if lo == hi else float("nan")
        return [{"p": p, "mass": mass, "lower": lo, "upper": hi, "t0": t0}]
    sol = exact.ExactSolution(p, max(ts))
    return [{"p": p, "t": t, "singular_mass": sol.atom_mass(t)} for t in ts]


def cmd_sweep(args):
    ps = parse_list(args.p)
    ts = parse_list(args.t) if args.t else [0.25, 0.5, 0.75, 1.0, 1.25, 1.5]
    for p in ps:
        if not (p < 1 and p != 0):
            raise ConfigError(f"power exponent must satisfy p < 1, p != 0 (got {p})")
        if args.quantity == "singular-mass" and p > 0:
            raise ConfigError("the singular-mass sweep needs p < 0")
    rows = [r for chunk in pmap(_sweep_point, [(args.quantity, p, args.mass, ts) for p in ps]) for r in chunk]
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        cols = list(rows[0])
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(float(v)) for k, v in r.items()})
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


# --- argument parsing --------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _experiment_args(sp):
    sp.add_argument("--config", help="JSON experiment config")
    sp.add_argument("--flux", help="flux, e.g. power:-1, exponential:1, logarithmic, loglog, linear:0.5")
    sp.add_argument("--datum", help="initial measure, e.g. dirac:0:1+indicator:1:2")
    sp.add_argument("--n", help="comma-separated levels n")
    sp.add_argument("--T", type=float, help="horizon")
    sp.add_argument("--dx", type=float, help="cell size")
    sp.add_argument("--out", help="output directory")


def make_parser():
    ap = _Parser(prog="radonlaw", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    sp = sub.add_parser("simulate", help="run the finite-volume solver for each level n")
    _experiment_args(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("exact", help="sample closed-form solutions as CSV")
    sp.add_argument("--p", type=float, required=True, help="power exponent, p < 1 and p != 0")
    sp.add_argument("--t", required=True, help="comma-separated times")
    sp.add_argument("--xs", required=True, help="a:b:step or comma list")
    sp.add_argument("--n", type=int, help="sample the pulse problem of level n instead")
    sp.add_argument("--T", type=float, help="integration horizon for shock curves")
    sp.add_argument("--out", help="CSV path (default stdout)")
    sp.set_defaults(func=cmd_exact)

    sp = sub.add_parser("verify", help="run checks or a named recipe; JSON report")
    sp.add_argument("--recipe", choices=sorted(RECIPES) + ["all"])
    _experiment_args(sp)
    sp.add_argument("--checks", help=f"comma-separated subset of {', '.join(CHECKS)}")
    sp.add_argument("--report", help="JSON report path (default stdout)")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sweep", help="parameter sweeps over the power exponent")
    sp.add_argument("--p", required=True, help="comma-separated exponents")
    sp.add_argument("--quantity", choices=["t0", "singular-mass"], default="t0")
    sp.add_argument("--mass", type=float, default=1.0, help="atom mass for t0 bounds")
    sp.add_argument("--t", help="comma-separated times for singular-mass")
    sp.add_argument("--out", help="CSV path (default stdout)")
    sp.set_defaults(func=cmd_sweep)
    return ap


def _glue_negative_values(argv):
    """Let ``--p -1,-2`` through: argparse would read ``-1,-2`` as an option."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--p", "--t", "--xs", "--n"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = make_parser().parse_args(_glue_negative_values(argv))
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"radonlaw: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RadonLawError as exc:
        print(f"radonlaw: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        print(f"radonlaw: unexpected error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
