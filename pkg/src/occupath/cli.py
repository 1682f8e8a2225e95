"""Command-line harness: map training, planning, and benchmarks.

Subcommands:

* ``train-map``  ingest a CARMEN log or synthetic world file and fit
  the occupancy model.
* ``plan``       run the stochastic planner against a trained map.
* ``rrt``        run the RRT* baseline against the same map.
* ``benchmark``  repeated-seed experiment producing per-seed outputs
  and a mean/standard-error summary table.

Every flag can also be supplied through ``--config FILE`` (JSON, keys
matching the flag names with underscores); explicit flags win.  Exit
codes: 0 success, 1 planner found no feasible plan, 2 I/O failure,
3 invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path as FsPath

import numpy as np

from . import features as ft
from . import metrics as mt
from . import objective as obj
from . import planner as pl
from . import rrtstar as rrt
from . import worldio as wio
from .errors import (
    ConfigError,
    EmptyLogError,
    InvalidArgumentError,
    InvalidEndpointError,
    OccupathError,
)
from .occupancy import HilbertMap, train_map
from .path import PolylineOffset, export_csv

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_IO = 2
EXIT_CONFIG = 3

MAP_DEFAULTS = {
    "features": 1000,
    "lengthscale": 0.3,
    "epochs": 5,
    "step": 0.01,
    "l2": 1e-4,
    "train_batch": 256,
    "train_seed": 0,
    "feature_seed": 0,
    "domain_pad": 0.5,
    "free_per_beam": wio.FREE_PER_BEAM,
    "hit_margin": wio.HIT_MARGIN,
    "discard_max_range": False,
    "subsample": wio.SCAN_SUBSAMPLE,
    "use_odometry": False,
    "max_range": wio.DEFAULT_MAX_RANGE,
    "grid_spacing": 1.6,
    "beams": 90,
    "scan_range": 14.0,
}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage errors as config errors (exit 3)."""

    def error(self, message):
        raise ConfigError(message)


def _load_config(path) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return doc


def _pick(args, cfg: dict, key: str, default):
    v = getattr(args, key, None)
    if v is not None:
        return v
    if key in cfg:
        return cfg[key]
    return default


def _parse_point(text) -> np.ndarray:
    try:
        vals = [float(v) for v in str(text).replace(";", ",").split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad coordinate {text!r}: {exc}") from None
    if len(vals) < 1:
        raise ConfigError(f"bad coordinate {text!r}")
    return np.array(vals)


def _parse_body(text) -> obj.BodyModel:
    if text is None:
        return obj.point_body()
    if isinstance(text, (list, tuple)):
        return obj.BodyModel(offsets=np.asarray(text, dtype=float))
    rows = [r for r in str(text).split(";") if r.strip()]
    return obj.BodyModel(offsets=np.array([
        [float(v) for v in r.split(",")] for r in rows
    ]))


def _parse_via(text, start, goal):
    """Optional intermediate waypoints -> polyline offset, else None."""
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        rows = np.asarray(text, dtype=float)
    else:
        rows = np.array([
            [float(v) for v in r.split(",")]
            for r in str(text).split(";") if r.strip()
        ])
    if rows.size == 0:
        return None
    return PolylineOffset(vertices=np.vstack([start, rows, goal]))


def _outdir(args, cfg) -> FsPath:
    out = _pick(args, cfg, "outdir", None) or os.environ.get("OCCUPATH_OUTDIR") or "out"
    return FsPath(out)


def _write_json(doc: dict, file) -> None:
    with open(file, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


# -- train-map ----------------------------------------------------------------


def _grid_scan_poses(world: wio.SyntheticWorld, spacing: float) -> list[np.ndarray]:
    lo, hi = world.bounds
    xs = np.arange(lo[0] + spacing / 2.0, hi[0], spacing)
    ys = np.arange(lo[1] + spacing / 2.0, hi[1], spacing)
    return [
        np.array([x, y, 0.0])
        for x in xs for y in ys
        if world.point_free((x, y))
    ]


def _ingest_points(source: dict, opts: dict):
    """Labeled training points from a CARMEN log or a world file.

    source holds either {"carmen": path} or {"world": path}; opts are
    resolved map options.  Returns (points list, source description).
    """
    if source.get("carmen"):
        path = source["carmen"]
        with open(path) as fh:
            scans = wio.parse_carmen(
                fh,
                max_range=opts["max_range"],
                use_odometry=opts["use_odometry"],
            )
        scans = wio.subsample_scans(scans, opts["subsample"])
        bounds = None
        desc = f"carmen log {path} ({len(scans)} scans after subsampling)"
    else:
        path = source["world"]
        world = wio.SyntheticWorld.load(path)
        poses = _grid_scan_poses(world, opts["grid_spacing"])
        if not poses:
            raise ConfigError("no free grid poses found; lower grid_spacing")
        scans = [
            wio.simulate_laser(world, pose, beams=opts["beams"],
                               fov=2.0 * np.pi, max_range=opts["scan_range"],
                               timestamp=0.1 * i)
            for i, pose in enumerate(poses)
        ]
        bounds = world.bounds  # keep stray max-range beams out of the domain
        desc = f"world {path} ({len(scans)} simulated scans)"
    points = wio.scans_to_points(
        scans,
        free_per_beam=opts["free_per_beam"],
        hit_margin=opts["hit_margin"],
        max_range_discard=opts["discard_max_range"],
        bounds=bounds,
    )
    return points, desc


def _train_from_source(source: dict, opts: dict) -> HilbertMap:
    points, desc = _ingest_points(source, opts)
    xs, ys = wio.points_to_arrays(points)
    lo = xs.min(axis=0) - opts["domain_pad"]
    hi = xs.max(axis=0) + opts["domain_pad"]
    fmap = ft.build_rff(
        opts["features"], opts["lengthscale"], opts["feature_seed"],
        domain=np.vstack([lo, hi]),
    )
    occ = train_map(
        xs, ys, fmap,
        epochs=opts["epochs"], step=opts["step"], l2=opts["l2"],
        batch=opts["train_batch"], seed=opts["train_seed"],
    )
    n_occ = int(np.sum(ys > 0))
    print(f"trained on {desc}")
    print(f"points: {len(points)} ({n_occ} occupied, {len(points) - n_occ} free)")
    print(f"final log-loss: {occ.meta.final_logloss:.4f}")
    return occ


def _resolve_map_opts(args, cfg) -> dict:
    return {k: _pick(args, cfg, k, v) for k, v in MAP_DEFAULTS.items()}


def cmd_train_map(args) -> int:
    cfg = _load_config(args.config)
    source = {}
    carmen = _pick(args, cfg, "carmen", None)
    world = _pick(args, cfg, "world", None)
    if bool(carmen) == bool(world):
        raise ConfigError("give exactly one of --carmen or --world")
    source["carmen"] = carmen
    source["world"] = world
    out = _pick(args, cfg, "out", None)
    if out is None:
        raise ConfigError("--out is required")
    occ = _train_from_source(source, _resolve_map_opts(args, cfg))
    FsPath(out).parent.mkdir(parents=True, exist_ok=True)
    occ.save(out)
    print(f"map written to {out}")
    return EXIT_OK


# -- plan / rrt ---------------------------------------------------------------


def _resolve_planner_config(args, cfg, seed) -> pl.PlannerConfig:
    base = pl.Schedule()
    sched = pl.Schedule(
        eta0=_pick(args, cfg, "eta0", base.eta0),
        tau=_pick(args, cfg, "tau", base.tau),
        decay=_pick(args, cfg, "decay", base.decay),
    )
    return pl.PlannerConfig(
        p_safe=_pick(args, cfg, "p_safe", 0.55),
        batch=_pick(args, cfg, "batch", 20),
        smooth_weight=_pick(args, cfg, "smooth_weight", 1e-2),
        schedule=sched,
        max_iters=_pick(args, cfg, "max_iters", 150),
        eps_w=_pick(args, cfg, "eps_w", 1e-3),
        patience=_pick(args, cfg, "patience", 10),
        dense=_pick(args, cfg, "dense", 500),
        seed=seed,
        eps_b=_pick(args, cfg, "eps_b", 1e-6),
        metric=_pick(args, cfg, "metric", "identity"),
        boundary_each_sample=_pick(args, cfg, "boundary_each_sample", False),
        snapshot_every=_pick(args, cfg, "snapshot_every", 0),
        dyn_relative_to_offset=_pick(args, cfg, "dyn_relative_to_offset", False),
    )


def _resolve_rrt_config(args, cfg, seed) -> rrt.RrtConfig:
    return rrt.RrtConfig(
        max_samples=_pick(args, cfg, "max_samples", 6000),
        steer_step=_pick(args, cfg, "steer_step", 0.5),
        neighbor_gamma=_pick(args, cfg, "neighbor_gamma", 2.0),
        collision_resolution=_pick(args, cfg, "collision_resolution", 0.05),
        p_safe=_pick(args, cfg, "p_safe", 0.55),
        goal_bias=_pick(args, cfg, "goal_bias", 0.05),
        seed=seed,
    )


def _path_features(args, cfg, occ: HilbertMap) -> ft.FeatureMap:
    return ft.build_rff(
        _pick(args, cfg, "path_features", 100),
        _pick(args, cfg, "path_lengthscale", 0.1),
        _pick(args, cfg, "path_feature_seed", 0),
    )


def _run_sgd(occ, start, goal, body, fmap, pcfg, outdir, offset=None) -> dict:
    """One stochastic-planner run; writes path/run/trace/metrics files."""
    rundir = outdir / "sgd" / str(pcfg.seed)
    rundir.mkdir(parents=True, exist_ok=True)
    result = pl.plan(occ, start, goal, body, fmap, pcfg, offset=offset)
    export_csv(result.path, rundir / "path.csv", resolution=mt.SWEEP_RESOLUTION)
    _write_json(result.run.to_doc(), rundir / "run.json")
    with open(rundir / "trace.csv", "w") as fh:
        fh.write("iteration,max_occupancy\n")
        for rec in result.run.records:
            fh.write(f"{rec.n},{rec.max_occ!r}\n")
    points = mt.sweep_path(result.path)
    metrics = mt.path_metrics(
        points, occ, samples=result.run.samples_drawn,
        method="sgd", seed=pcfg.seed, status=result.run.status,
    )
    # a plan is usable whenever the swept path stays under the safety
    # threshold, even if the iteration budget ran out before the weight
    # stopping rule fired
    metrics["feasible"] = bool(metrics["max_occupancy"] <= pcfg.p_safe)
    _write_json(metrics, rundir / "metrics.json")
    return metrics


def _run_rrt(occ, start, goal, rcfg, outdir) -> dict:
    rundir = outdir / "rrt" / str(rcfg.seed)
    rundir.mkdir(parents=True, exist_ok=True)
    result = rrt.rrt_star_plan(occ, start, goal, rcfg)
    doc = result.to_doc()
    doc["config"] = rcfg.to_doc()
    _write_json(doc, rundir / "run.json")
    if result.status != "ok":
        metrics = {
            "method": "rrt", "seed": rcfg.seed, "status": result.status,
            "max_occupancy": None, "length_m": None,
            "samples": result.samples_total,
            "sweep_resolution": mt.SWEEP_RESOLUTION,
            "feasible": False,
        }
        _write_json(metrics, rundir / "metrics.json")
        return metrics
    rrt.export_polyline_csv(result.polyline, rundir / "path.csv")
    points = mt.sweep_polyline(result.polyline)
    metrics = mt.path_metrics(
        points, occ, samples=result.samples_total,
        method="rrt", seed=rcfg.seed, status=result.status,
    )
    metrics["samples_to_first"] = result.samples_to_first
    metrics["feasible"] = True
    _write_json(metrics, rundir / "metrics.json")
    return metrics


def cmd_plan(args) -> int:
    cfg = _load_config(args.config)
    occ = HilbertMap.load(_require(args, cfg, "map"))
    start = _parse_point(_require(args, cfg, "start"))
    goal = _parse_point(_require(args, cfg, "goal"))
    body = _parse_body(_pick(args, cfg, "body", None))
    seed = _pick(args, cfg, "seed", 0)
    pcfg = _resolve_planner_config(args, cfg, seed)
    fmap = _path_features(args, cfg, occ)
    offset = _parse_via(_pick(args, cfg, "via", None), start, goal)
    metrics = _run_sgd(occ, start, goal, body, fmap, pcfg, _outdir(args, cfg),
                       offset=offset)
    print(json.dumps(metrics, sort_keys=True, indent=1))
    return EXIT_OK if metrics["feasible"] else EXIT_INFEASIBLE


def cmd_rrt(args) -> int:
    cfg = _load_config(args.config)
    occ = HilbertMap.load(_require(args, cfg, "map"))
    start = _parse_point(_require(args, cfg, "start"))
    goal = _parse_point(_require(args, cfg, "goal"))
    seed = _pick(args, cfg, "seed", 0)
    rcfg = _resolve_rrt_config(args, cfg, seed)
    metrics = _run_rrt(occ, start, goal, rcfg, _outdir(args, cfg))
    print(json.dumps(metrics, sort_keys=True, indent=1))
    return EXIT_OK if metrics["feasible"] else EXIT_INFEASIBLE


def _require(args, cfg, key):
    v = _pick(args, cfg, key, None)
    if v is None:
        raise ConfigError(f"--{key.replace('_', '-')} is required")
    return v


# -- benchmark ----------------------------------------------------------------

METRIC_KEYS = ("max_occupancy", "length_m", "samples")


def cmd_benchmark(args) -> int:
    spec = _load_config(args.spec)
    if not spec:
        raise ConfigError("--spec file is required")
    seeds = spec.get("seeds")
    if not seeds:
        raise ConfigError("spec needs a non-empty seeds list")
    methods = spec.get("methods", ["sgd", "rrt"])
    for m in methods:
        if m not in ("sgd", "rrt"):
            raise ConfigError(f"unknown method {m!r}")
    start = np.asarray(spec.get("start"), dtype=float)
    goal = np.asarray(spec.get("goal"), dtype=float)
    if start.ndim != 1 or goal.shape != start.shape:
        raise ConfigError("spec needs start and goal vectors")
    outdir = FsPath(args.outdir) if args.outdir else FsPath(
        spec.get("outdir") or os.environ.get("OCCUPATH_OUTDIR") or "out")
    outdir.mkdir(parents=True, exist_ok=True)

    source = {"carmen": spec.get("carmen"), "world": spec.get("world")}
    if bool(source["carmen"]) == bool(source["world"]):
        raise ConfigError("spec needs exactly one of carmen or world")
    # data paths in a spec are relative to the spec file, not the cwd
    spec_dir = FsPath(args.spec).resolve().parent
    for key in ("carmen", "world"):
        if source[key] and not FsPath(source[key]).is_absolute():
            source[key] = str(spec_dir / source[key])
    map_opts = dict(MAP_DEFAULTS)
    map_opts.update(spec.get("map", {}))
    occ = _train_from_source(source, map_opts)
    occ.save(outdir / "map.json")

    body = _parse_body(spec.get("body"))
    offset = _parse_via(spec.get("planner", {}).get("via"), start, goal)
    ns = argparse.Namespace()  # spec dicts only, no CLI flags to overlay
    rows = {m: [] for m in methods}
    for seed in seeds:
        for method in methods:
            try:
                if method == "sgd":
                    pcfg = _resolve_planner_config(ns, spec.get("planner", {}), seed)
                    fmap = _path_features(ns, spec.get("planner", {}), occ)
                    metrics = _run_sgd(occ, start, goal, body, fmap, pcfg,
                                       outdir, offset=offset)
                else:
                    rcfg = _resolve_rrt_config(ns, spec.get("rrt", {}), seed)
                    metrics = _run_rrt(occ, start, goal, rcfg, outdir)
            except OccupathError as exc:
                log.error("seed %s method %s failed: %s", seed, method, exc)
                metrics = {"method": method, "seed": seed, "status": "error",
                           "error": str(exc)}
            rows[method].append(metrics)

    table = _summarize(rows, seeds, methods)
    _write_summary_csv(table, seeds, outdir / "summary.csv")
    _print_summary(table)
    ok = all(any(r.get("feasible") for r in rows[m]) for m in methods)
    return EXIT_OK if ok else EXIT_INFEASIBLE


def _good(row) -> bool:
    """Rows that produced a measurable path enter the summary means."""
    return row.get("max_occupancy") is not None


def _summarize(rows, seeds, methods) -> list[dict]:
    table = []
    for method in methods:
        good = [r for r in rows[method] if _good(r)]
        for key in METRIC_KEYS:
            values = [r[key] for r in good]
            mean, se = mt.mean_stderr(values) if values else (None, None)
            per_seed = {}
            for seed, r in zip(seeds, rows[method]):
                per_seed[seed] = r.get(key) if _good(r) else None
            table.append({
                "method": method, "metric": key,
                "mean": mean, "stderr": se, "per_seed": per_seed,
            })
    return table


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(round(v, 10))
    return str(v)


def _write_summary_csv(table, seeds, file) -> None:
    cols = ["method", "metric", "mean", "stderr"] + [f"seed_{s}" for s in seeds]
    with open(file, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in table:
            vals = [row["method"], row["metric"], _fmt(row["mean"]),
                    _fmt(row["stderr"])]
            vals += [_fmt(row["per_seed"][s]) for s in seeds]
            fh.write(",".join(vals) + "\n")


def _print_summary(table) -> None:
    print(f"{'method':<8}{'metric':<16}{'mean':>14}{'stderr':>12}")
    for row in table:
        mean = "n/a" if row["mean"] is None else f"{row['mean']:.4f}"
        se = "n/a" if row["stderr"] is None else f"{row['stderr']:.4f}"
        print(f"{row['method']:<8}{row['metric']:<16}{mean:>14}{se:>12}")


# -- entry point --------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="occupath", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    tm = sub.add_parser("train-map", help="fit an occupancy map from scans")
    tm.add_argument("--carmen", help="CARMEN-format laser log")
    tm.add_argument("--world", help="synthetic world JSON file")
    tm.add_argument("--out", help="output map file")
    tm.add_argument("--config", help="JSON config overlay")
    tm.add_argument("--features", type=int)
    tm.add_argument("--lengthscale", type=float)
    tm.add_argument("--epochs", type=int)
    tm.add_argument("--step", type=float)
    tm.add_argument("--l2", type=float)
    tm.add_argument("--train-batch", dest="train_batch", type=int)
    tm.add_argument("--train-seed", dest="train_seed", type=int)
    tm.add_argument("--feature-seed", dest="feature_seed", type=int)
    tm.add_argument("--domain-pad", dest="domain_pad", type=float)
    tm.add_argument("--free-per-beam", dest="free_per_beam", type=int)
    tm.add_argument("--hit-margin", dest="hit_margin", type=float)
    tm.add_argument("--discard-max-range", dest="discard_max_range",
                    action=argparse.BooleanOptionalAction, default=None)
    tm.add_argument("--subsample", type=int)
    tm.add_argument("--use-odometry", dest="use_odometry",
                    action=argparse.BooleanOptionalAction, default=None)
    tm.add_argument("--max-range", dest="max_range", type=float)
    tm.add_argument("--grid-spacing", dest="grid_spacing", type=float)
    tm.add_argument("--beams", type=int)
    tm.add_argument("--scan-range", dest="scan_range", type=float)
    tm.set_defaults(func=cmd_train_map)

    def planning_common(p):
        p.add_argument("--map", help="trained map file")
        p.add_argument("--start", help="start coordinates, comma-separated")
        p.add_argument("--goal", help="goal coordinates, comma-separated")
        p.add_argument("--seed", type=int)
        p.add_argument("--outdir", help="output directory")
        p.add_argument("--config", help="JSON config overlay")
        p.add_argument("--p-safe", dest="p_safe", type=float)

    pp = sub.add_parser("plan", help="run the stochastic planner")
    planning_common(pp)
    pp.add_argument("--body", help="body offsets 'dx,dy;dx,dy;...'")
    pp.add_argument("--via", help="seed-route waypoints 'x,y;x,y;...'")
    pp.add_argument("--batch", type=int)
    pp.add_argument("--smooth-weight", dest="smooth_weight", type=float)
    pp.add_argument("--eta0", type=float)
    pp.add_argument("--tau", type=float)
    pp.add_argument("--decay", type=float)
    pp.add_argument("--max-iters", dest="max_iters", type=int)
    pp.add_argument("--eps-w", dest="eps_w", type=float)
    pp.add_argument("--patience", type=int)
    pp.add_argument("--dense", type=int)
    pp.add_argument("--eps-b", dest="eps_b", type=float)
    pp.add_argument("--metric")
    pp.add_argument("--boundary-each-sample", dest="boundary_each_sample",
                    action=argparse.BooleanOptionalAction, default=None)
    pp.add_argument("--snapshot-every", dest="snapshot_every", type=int)
    pp.add_argument("--dyn-relative-to-offset", dest="dyn_relative_to_offset",
                    action=argparse.BooleanOptionalAction, default=None)
    pp.add_argument("--path-features", dest="path_features", type=int)
    pp.add_argument("--path-lengthscale", dest="path_lengthscale", type=float)
    pp.add_argument("--path-feature-seed", dest="path_feature_seed", type=int)
    pp.set_defaults(func=cmd_plan)

    pr = sub.add_parser("rrt", help="run the RRT* baseline")
    planning_common(pr)
    pr.add_argument("--max-samples", dest="max_samples", type=int)
    pr.add_argument("--steer-step", dest="steer_step", type=float)
    pr.add_argument("--neighbor-gamma", dest="neighbor_gamma", type=float)
    pr.add_argument("--collision-resolution", dest="collision_resolution",
                    type=float)
    pr.add_argument("--goal-bias", dest="goal_bias", type=float)
    pr.set_defaults(func=cmd_rrt)

    bm = sub.add_parser("benchmark", help="repeated-seed experiment")
    bm.add_argument("--spec", help="experiment spec JSON", required=True)
    bm.add_argument("--outdir", help="output directory override")
    bm.set_defaults(func=cmd_benchmark)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("OCCUPATH_LOGLEVEL", "WARNING"))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidEndpointError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (FileNotFoundError, IsADirectoryError, PermissionError,
            EmptyLogError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InvalidArgumentError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OccupathError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())