"""Command-line entry point: ``geosoliton {run,check,map,report,list}``.

Configs are flat JSON objects with a ``schema`` field naming the command.
Exit codes: 0 success, 1 usage/config/IO error, 2 numerical or check failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, checks, maps, surfaces
from .errors import GeosolitonError, GridMismatch
from .io import Snapshot, atomic_write_text, read_snapshot, write_json, write_snapshot
from .solvers import REGISTRY, TimeSteppingConfig
from .spectral import Grid1D, Grid2D, random_field
from .spin import SPIN_MODELS

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

MAPS = ("lakshmanan", "mnv", "mxxii", "gauge_to_strachan", "gauge_from_strachan")


class ConfigError(Exception):
    """Bad configuration, usage or input files (exit code 1)."""


def _versions():
    import scipy

    return {"geosoliton": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__}


def _load_config(path, schema):
    if path is None:
        return {"schema": schema}
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("schema", schema) != schema:
        raise ConfigError(f"config schema is {cfg.get('schema')!r}, expected {schema!r}")
    return cfg


def _out_dir(args, default):
    out = args.out or os.environ.get("OUTPUT_DIR") or default
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _say(args, msg):
    if not args.quiet:
        print(msg)


# run -----------------------------------------------------------------------------------


def _grid_from_config(spec, one_d):
    try:
        if one_d:
            return Grid1D(int(spec.get("n", 256)), float(spec.get("l", 2 * np.pi)))
        return Grid2D(int(spec.get("nx", 64)), int(spec.get("ny", spec.get("nx", 64))),
                      float(spec.get("lx", 2 * np.pi)), float(spec.get("ly", spec.get("lx", 2 * np.pi))))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid: {exc}") from exc


def _initial_state(eq_id, grid, init, seed):
    kind = init.get("kind", "zero")
    complex_state = REGISTRY[eq_id].state_kind == "complex"
    shape = grid.shape
    if kind == "zero":
        return np.zeros(shape, dtype=complex if complex_state else float)
    if kind == "random":
        return random_field(
            grid,
            int(init.get("seed", seed)),
            float(init.get("amplitude", 0.1)),
            int(init.get("band", 3)),
            zero_xmean=bool(init.get("zero_xmean", eq_id in ("kp", "nv"))),
            zero_ymean=bool(init.get("zero_ymean", eq_id == "nv")),
            complex_values=complex_state,
        )
    if kind == "plane_wave":
        amp, jx, jy = float(init.get("amplitude", 0.1)), int(init.get("jx", 1)), int(init.get("jy", 0))
        if isinstance(grid, Grid1D):
            return amp * np.exp(2j * np.pi * jx * grid.x / grid.l)
        X, Y = grid.mesh()
        return amp * np.exp(2j * np.pi * (jx * X / grid.lx + jy * Y / grid.ly))
    if kind == "nls_soliton":
        if not isinstance(grid, Grid1D):
            raise ConfigError("nls_soliton initial data needs a 1D grid")
        v = 4 * np.pi * int(init.get("harmonic", 5)) / grid.l
        return checks.nls_soliton(grid.x, 0.0, float(init.get("amplitude", 1.0)), v, grid.l)
    if kind == "kp_line":
        kappa, mu = float(init.get("kappa", 0.5)), float(init.get("mu", 1.0))
        alpha2 = float(init.get("alpha2", 1.0))
        return checks.fit_kp_line(grid, kappa, mu, alpha2)[2]
    if kind == "line":
        d = init.get("direction", [1, 1])
        return checks.strachan_line_data(grid, float(init.get("amplitude", 0.05)), (int(d[0]), int(d[1])))
    if kind == "snapshot":
        snap = read_snapshot(init["path"])
        if snap.values.shape != shape:
            raise GridMismatch(f"snapshot has shape {snap.values.shape}, grid is {shape}")
        return snap.values
    raise ConfigError(f"unknown initial data kind {kind!r}")


def _solve(eq_id, grid, q0, params, cfg):
    p = dict(params)
    if eq_id == "nls":
        return REGISTRY["nls"].solve(grid, q0, cfg, int(p.get("sig", 1)))
    if eq_id == "kp":
        return REGISTRY["kp"].solve(grid, q0, float(p.get("alpha2", 1.0)), cfg)
    if eq_id == "nv":
        return REGISTRY["nv"].solve(grid, q0, float(p.get("alpha", 1.0)), float(p.get("beta", 1.0)), cfg)
    if eq_id == "mnv":
        return REGISTRY["mnv"].solve(grid, np.real(q0), cfg)
    if eq_id == "ds":
        return REGISTRY["ds"].solve(grid, q0, cfg, int(p.get("sig", 1)), float(p.get("alpha", 1 / np.sqrt(2))))
    if eq_id == "strachan":
        return REGISTRY["strachan"].solve(grid, q0, cfg, int(p.get("sig", 1)))
    raise ConfigError(f"{eq_id} has no solver (residual only)")


def _write_conserved(path, traj):
    names = sorted(traj.conserved_series)
    lines = [",".join(["time"] + names)]
    for i, t in enumerate(traj.times):
        lines.append(",".join([repr(float(t))] + [repr(float(traj.conserved_series[n][i])) for n in names]))
    atomic_write_text(path, "\n".join(lines) + "\n")


def cmd_run(args):
    cfg = _load_config(args.config, "run")
    eq_id = args.equation or cfg.get("equation")
    if eq_id not in REGISTRY:
        raise ConfigError(f"unknown equation {eq_id!r} (known: {', '.join(REGISTRY)})")
    desc = REGISTRY[eq_id]
    params = cfg.get("params", {})
    unknown = set(params) - set(desc.params)
    if unknown:
        raise ConfigError(f"unknown parameters for {eq_id}: {sorted(unknown)}")
    try:
        stepping = TimeSteppingConfig(**cfg.get("stepping", {"dt": 1e-3, "n_steps": 10}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad stepping config: {exc}") from exc
    grid = _grid_from_config(cfg.get("grid", {}), eq_id == "nls")
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    out = _out_dir(args, f"runs/run_{eq_id}")
    manifest = {
        "command": "run",
        "equation": eq_id,
        "params": params,
        "grid": cfg.get("grid", {}),
        "stepping": vars(stepping),
        "initial": cfg.get("initial", {"kind": "zero"}),
        "seed": seed,
        "output_dir": str(out),
        "versions": _versions(),
        "config": cfg,
    }
    t0 = time.time()
    status = EXIT_OK
    try:
        q0 = _initial_state(eq_id, grid, cfg.get("initial", {"kind": "zero"}), seed)
        traj = _solve(eq_id, grid, q0, params, stepping)
    except (GridMismatch, OSError, KeyError) as exc:
        raise ConfigError(f"bad initial data: {exc}") from exc
    except (GeosolitonError, FloatingPointError) as exc:
        manifest.update(status="failed", failure={"type": type(exc).__name__, "message": str(exc)})
        manifest["wall_clock"] = {"start": t0, "elapsed": time.time() - t0}
        write_json(out / "manifest.json", manifest)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for i, (t, q) in enumerate(zip(traj.times, traj.states)):
        write_snapshot(out, Snapshot(q, grid, f"q_{i:05d}", t))
    _write_conserved(out / "conserved.csv", traj)
    manifest.update(status="ok", snapshots=len(traj), diagnostics=traj.diagnostics,
                    conserved_series=traj.conserved_series)
    manifest["wall_clock"] = {"start": t0, "elapsed": time.time() - t0}
    write_json(out / "manifest.json", manifest)
    _say(args, f"{eq_id}: {len(traj)} snapshots written to {out}")
    return status


# check ---------------------------------------------------------------------------------


def cmd_check(args):
    cfg = _load_config(args.config, "check")
    ids = list(checks.CHECKS) if args.check_id == "all" else [args.check_id]
    for cid in ids:
        if cid not in checks.CHECKS:
            raise ConfigError(f"unknown check {cid!r} (known: {', '.join(checks.CHECKS)})")
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    tol = args.tol if args.tol is not None else cfg.get("tol")
    per_check = cfg.get("params", {})
    out = _out_dir(args, f"runs/check_{args.check_id}")
    results, timings, failed = {}, {}, False
    for cid in ids:
        try:
            r = checks.run_check(cid, seed=seed, tol=tol, **per_check.get(cid, {}))
        except TypeError as exc:
            raise ConfigError(f"bad parameters for {cid}: {exc}") from exc
        except (GeosolitonError, FloatingPointError) as exc:
            failed = True
            results[cid] = {"check_id": cid, "status": "fail", "passed": False,
                            "error": {"type": type(exc).__name__, "message": str(exc)}}
            write_json(out / f"{cid}.json", results[cid])
            print(f"FAIL {cid}: {type(exc).__name__}: {exc}", file=sys.stderr)
            continue
        results[cid] = r.to_json()
        timings[cid] = r.elapsed
        failed |= not r.passed
        write_json(out / f"{cid}.json", results[cid])
        _say(args, r.summary())
    summary = {cid: results[cid]["status"] for cid in ids}
    write_json(out / "summary.json", summary)
    write_json(out / "manifest.json", {
        "command": "check", "check_id": args.check_id, "seed": seed, "tol": tol, "params": per_check,
        "output_dir": str(out), "versions": _versions(), "config": cfg, "wall_clock": timings,
    })
    return EXIT_NUMERIC if failed else EXIT_OK


# map -----------------------------------------------------------------------------------


def _companion(cfg, key, snap):
    """Optional second input field given by path in the config; zero if absent."""
    if key not in cfg:
        return np.zeros(snap.values.shape)
    other = read_snapshot(cfg[key])
    if other.values.shape != snap.values.shape or other.grid != snap.grid:
        raise GridMismatch(f"{key} snapshot grid does not match the input grid")
    return other.values


def cmd_map(args):
    cfg = _load_config(args.config, "map")
    if args.map_id not in MAPS:
        raise ConfigError(f"unknown map {args.map_id!r} (known: {', '.join(MAPS)})")
    try:
        snap = read_snapshot(args.input)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read snapshot {args.input}: {exc}") from exc
    grid = snap.grid
    out = _out_dir(args, f"runs/map_{args.map_id}")
    tol = args.tol if args.tol is not None else float(cfg.get("tol", 1e-10))
    try:
        if args.map_id == "lakshmanan":
            if not isinstance(grid, Grid1D):
                raise GridMismatch("the 1D map needs a 1D snapshot")
            rep = maps.lakshmanan_map_1d(grid, snap.values, _companion(cfg, "tau", snap), tol)
        elif args.map_id == "mnv":
            rep = maps.mnv_map(grid, snap.values, tol)
            rep.diagnostics.pop("m")
        elif args.map_id == "mxxii":
            rep = maps.mxxii_map(grid, snap.values, _companion(cfg, "tau", snap), float(cfg.get("b", 1.0)), tol)
        elif args.map_id == "gauge_to_strachan":
            rep = maps.gauge_to_strachan(grid, snap.values)
        else:
            rep = maps.gauge_from_strachan(grid, snap.values)
    except GridMismatch as exc:
        raise ConfigError(str(exc)) from exc
    except GeosolitonError as exc:
        write_json(out / "diagnostics.json", {"map": args.map_id, "status": "failed",
                                             "error": {"type": type(exc).__name__, "message": str(exc)}})
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    write_snapshot(out, Snapshot(rep.values, grid, "q", snap.time))
    write_json(out / "diagnostics.json", {"map": args.map_id, "status": "ok", "input": str(args.input),
                                         "diagnostics": rep.diagnostics})
    write_json(out / "manifest.json", {"command": "map", "map_id": args.map_id, "config": cfg,
                                       "input": str(args.input), "output_dir": str(out),
                                       "versions": _versions()})
    _say(args, f"{args.map_id}: wrote {out / 'q.bin'}")
    return EXIT_OK


# report --------------------------------------------------------------------------------


def cmd_report(args):
    run_dir = Path(args.run_dir)
    try:
        manifest = json.loads((run_dir / "manifest.json").read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{run_dir} is not a run directory: {exc}") from exc
    out = _out_dir(args, str(run_dir))
    if manifest.get("command") == "check":
        summary = json.loads((run_dir / "summary.json").read_text())
        rows = [[cid, status] for cid, status in summary.items()]
        header = ["check", "status"]
    else:
        path = run_dir / "conserved.csv"
        if not path.exists():
            raise ConfigError(f"{run_dir} has no conserved.csv")
        with path.open() as fh:
            table = list(csv.reader(fh))
        header = table[0] + [f"{n}_drift" for n in table[0][1:]]
        first = [float(v) for v in table[1][1:]]
        rows = []
        for row in table[1:]:
            vals = [float(v) for v in row[1:]]
            rows.append(row + [repr(v - f) for v, f in zip(vals, first)])
    text = "\n".join(",".join(r) for r in [header] + rows) + "\n"
    atomic_write_text(out / "report.csv", text)
    if not args.quiet:
        widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
        for r in [header] + rows:
            print("  ".join(str(c).ljust(w) for c, w in zip(r, widths)))
    return EXIT_OK


# list ----------------------------------------------------------------------------------


def cmd_list(args):
    listing = {
        "equations": {k: {"state_kind": d.state_kind, "constraints": list(d.constraints),
                          "conserved": list(d.conserved), "params": d.params,
                          "solver": d.solve is not None} for k, d in REGISTRY.items()},
        "checks": {k: (fn.__doc__ or "").strip().split("\n")[0] for k, fn in checks.CHECKS.items()},
        "maps": list(MAPS),
        "spin_models": {k: v["params"] for k, v in SPIN_MODELS.items()},
        "surfaces": ["plane", "torus:R,rho", "cylinder:" + "|".join(surfaces.CYLINDER_PROFILES), "graph:PATH"],
    }
    print(json.dumps(listing, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="geosoliton", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="integrate a soliton equation")
    p.add_argument("equation", nargs="?")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("check", parents=[common], help="run a named check, or all")
    p.add_argument("check_id")
    p.set_defaults(func=cmd_check)
    p = sub.add_parser("map", parents=[common], help="apply a field map to a snapshot")
    p.add_argument("map_id")
    p.add_argument("input")
    p.set_defaults(func=cmd_map)
    p = sub.add_parser("report", parents=[common], help="tabulate a finished run")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_report)
    p = sub.add_parser("list", parents=[common], help="dump the registries")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
