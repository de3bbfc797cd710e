"""Command-line front end.

Subcommands:

    hololab run-example <name>      replay an entry's golden data
    hololab holonomy <config.json>  integrate configured loops
    hololab algebra <config.json>   closure experiment over sampled loops
    hololab verify [config.json]    run the verification suite
    hololab catalog list            list stable entry names

Exit codes: 0 success, 1 numerical/tolerance failure, 2 usage or config
error.  HOLOLAB_SEED overrides the config seed.  Reports are JSON with
"schema": 1 and are deterministic for a fixed config and seed (up to the
timestamp field).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

from . import catalog as cat
from . import liealg, verify
from .errors import (ConfigError, ExprSyntaxError, HololabError, NotClosed,
                     UnboundVariable, UnknownExample, UnknownIdentifier)
from .experiments import run_closure_experiment
from .manifold import (ConnectionKind, CoordinateChart, DensityField, MetricField,
                       WeightedManifold, metric_at, ricci_at)
from .transport import (DEFAULT_STEPS, Loop, LoopFamily, family_derivative,
                        holonomy, polyline_segments, random_rectangle_loops,
                        rectangle_loop, transport_frame_trajectory)

SCHEMA_VERSION = 1

_KINDS = {
    "levi_civita": ConnectionKind.LEVI_CIVITA,
    "weighted": ConnectionKind.WEIGHTED,
    "dual_weighted": ConnectionKind.DUAL_WEIGHTED,
}


def _fail_usage(msg):
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")


def _resolve_seed(config):
    env = os.environ.get("HOLOLAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"HOLOLAB_SEED must be an integer, got {env!r}")
    return int(config.get("seed", 0))


def _build_custom_manifold(spec):
    try:
        dim = int(spec["dim"])
        coords = tuple(spec["coords"])
        phi_src = spec["phi"]
        metric_spec = spec["metric"]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"custom manifold missing field: {exc}")
    if len(coords) != dim:
        raise ConfigError("coords length must equal dim")
    domain = []
    for pair in spec.get("domain", [[None, None]] * dim):
        lo = -math.inf if pair[0] is None else float(pair[0])
        hi = math.inf if pair[1] is None else float(pair[1])
        domain.append((lo, hi))
    periodicity = tuple(None if p is None else float(p)
                        for p in spec.get("periodicity", [None] * dim))
    signature = tuple(spec.get("signature", (dim, 0)))
    chart = CoordinateChart(dim=dim, coord_names=coords, periodicity=periodicity,
                            domain=tuple(domain))
    try:
        if "diag" in metric_spec:
            metric = MetricField.from_expressions(chart, list(metric_spec["diag"]),
                                                  signature=signature)
        elif "full" in metric_spec:
            metric = MetricField.from_expressions(chart, metric_spec["full"],
                                                  signature=signature)
        else:
            raise ConfigError("metric needs a 'diag' or 'full' key")
        density = DensityField.from_expression(chart, phi_src)
    except ExprSyntaxError as exc:
        raise ConfigError(f"expression error at offset {exc.offset}: {exc}")
    except (UnknownIdentifier, UnboundVariable) as exc:
        raise ConfigError(str(exc))
    return WeightedManifold(chart=chart, metric=metric, density=density,
                            name=spec.get("name", "custom"))


def _entry_from_config(config):
    """Returns (CatalogEntry | None, WeightedManifold)."""
    mspec = config.get("manifold")
    if mspec is None:
        raise ConfigError("config needs a 'manifold' section")
    if "catalog" in mspec:
        entry = cat.get_entry(mspec["catalog"])
        return entry, entry.manifold
    if "custom" in mspec:
        M = _build_custom_manifold(mspec["custom"])
        return None, M
    raise ConfigError("manifold must have a 'catalog' or 'custom' key")


def _loops_from_config(config, M):
    loops = []
    families = []
    for i, spec in enumerate(config.get("loops", [])):
        if "polyline" in spec:
            pts = [np.asarray(p, dtype=float) for p in spec["polyline"]]
            if len(pts) < 2:
                raise ConfigError(f"loop {i}: polyline needs at least 2 points")
            loops.append(Loop(segments=polyline_segments(pts), basepoint=pts[0]))
        elif "rect" in spec:
            c0, c1 = (np.asarray(p, dtype=float) for p in spec["rect"])
            moved = np.nonzero(np.abs(c1 - c0) > 0)[0]
            if len(moved) != 2:
                raise ConfigError(
                    f"loop {i}: rect corners must differ in exactly 2 coordinates")
            a, b = (int(moved[0]), int(moved[1]))
            loops.append(rectangle_loop(c0, a, b, c1[a] - c0[a], c1[b] - c0[b]))
        elif "family" in spec:
            fs = spec["family"]
            c0, c1 = (np.asarray(p, dtype=float) for p in fs["rect"])
            moved = np.nonzero(np.abs(c1 - c0) > 0)[0]
            if len(moved) != 2:
                raise ConfigError(
                    f"loop {i}: family rect corners must differ in 2 coordinates")
            a, b = (int(moved[0]), int(moved[1]))
            s_max = float(fs.get("s_max", 1.0))

            def make(s, c0=c0, a=a, b=b, da=c1[a] - c0[a], db=c1[b] - c0[b]):
                return rectangle_loop(c0, a, b, s * da, s * db)

            families.append((LoopFamily(family=make, s_max=s_max),
                             float(fs.get("s_step", 1e-2))))
        else:
            raise ConfigError(f"loop {i}: need 'polyline', 'rect' or 'family'")
    return loops, families


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_report(report, config, args):
    path = getattr(args, "output", None) or config.get("output")
    if path:
        with open(path, "w") as fh:
            json.dump(report, fh, indent=2, default=_json_default)
            fh.write("\n")
        print(f"report written to {path}")


def _base_report(command, config, seed):
    return {
        "schema": SCHEMA_VERSION,
        "command": command,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        "seed": seed,
        "config": config,
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_run_example(args):
    try:
        entry = cat.get_entry(args.name)
    except UnknownExample as exc:
        return _fail_usage(str(exc))
    results = []
    all_pass = True
    print(f"== {entry.name}: {len(entry.goldens)} golden checks")
    for check in entry.goldens:
        r = check.evaluate(entry)
        results.append(r)
        all_pass &= r["passed"]
        kind = "rel" if r["relative"] else "abs"
        print(f"  {r['name']:32s} |delta|={r['max_error']:.3e} ({kind}) "
              f"tol={r['tol']:.0e}  {'ok' if r['passed'] else 'FAIL'}")
        if not r["passed"] or args.verbose:
            print(f"    expected: {np.asarray(r['expected']).ravel()[:6]}")
            print(f"    computed: {np.asarray(r['computed']).ravel()[:6]}")
    report = _base_report("run-example", {"name": entry.name}, seed=0)
    report["results"] = results
    report["passed"] = all_pass
    _write_report(report, {}, args)
    return 0 if all_pass else 1


def _tasks_from_config(config, default):
    tasks = config.get("tasks", default)
    if not tasks:
        raise ConfigError("tasks must be a nonempty list")
    unknown = set(tasks) - {"holonomy", "algebra", "verify", "curvature"}
    if unknown:
        raise ConfigError(f"unknown tasks: {sorted(unknown)}")
    return tasks


def cmd_holonomy(args):
    config = _load_config(args.config)
    seed = _resolve_seed(config)
    entry, M = _entry_from_config(config)
    kind = _KINDS.get(config.get("connection", "weighted"))
    if kind is None:
        raise ConfigError(f"unknown connection kind {config.get('connection')!r}")
    steps = int(config.get("steps", DEFAULT_STEPS))
    include_log = bool(config.get("include_log", False))
    tasks = _tasks_from_config(config, ["holonomy"])
    loops, families = _loops_from_config(config, M)
    report = _base_report("holonomy", config, seed)
    results = []
    exit_code = 0
    if "curvature" in tasks:
        at = (entry.basepoint if entry is not None
              else np.array([(lo + hi) / 2 for lo, hi in M.chart.sample_box()]))
        ric = ricci_at(M, kind, at)
        report["curvature"] = {"point": at.tolist(), "ricci": ric.tolist()}
        print(f"ricci at {np.round(at, 4).tolist()}: {np.round(ric, 8).tolist()}")
    for i, loop in enumerate(loops):
        item = {"loop": i}
        try:
            h = holonomy(M, kind, loop, steps=steps)
            item.update(matrix=h.matrix.tolist(),
                        det=float(np.linalg.det(h.matrix)),
                        est_error=h.est_error, steps_used=h.steps_used)
            if include_log:
                item["log"] = liealg.mat_log(h.matrix).tolist()
            if args.plot:
                item["plot_csv"] = _write_plot_csv(args.plot, i, M, kind, loop, steps)
        except NotClosed as exc:
            item["error"] = f"not closed: {exc}"
            exit_code = 1
        except HololabError as exc:
            item["error"] = str(exc)
            exit_code = 1
        results.append(item)
    for j, (fam, s_step) in enumerate(families):
        D = family_derivative(M, kind, fam, s_step=s_step, steps=steps)
        results.append({"family": j, "derivative": D.tolist()})
    report["results"] = results
    for item in results:
        if "matrix" in item:
            print(f"loop {item['loop']}: det={item['det']:.12f} "
                  f"est_error={item['est_error']:.2e}")
        elif "derivative" in item:
            print(f"family {item['family']}: derivative computed")
        else:
            print(f"loop {item['loop']}: ERROR {item['error']}")
    _write_report(report, config, args)
    return exit_code


def _write_plot_csv(prefix, index, M, kind, loop, steps):
    path = f"{prefix}_loop{index}.csv"
    positions, frames = transport_frame_trajectory(M, kind, loop, steps=steps)
    n = M.dim
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        names = list(M.chart.coord_names)
        frame_cols = [f"P{i}{j}" for i in range(n) for j in range(n)]
        writer.writerow(["sample"] + names + frame_cols)
        for k, (pos, P) in enumerate(zip(positions, frames)):
            writer.writerow([k] + [repr(float(v)) for v in pos] +
                            [repr(float(v)) for v in P.ravel()])
    return path


def cmd_algebra(args):
    config = _load_config(args.config)
    seed = _resolve_seed(config)
    entry, M = _entry_from_config(config)
    kind = _KINDS.get(config.get("connection", "weighted"))
    if kind is None:
        raise ConfigError(f"unknown connection kind {config.get('connection')!r}")
    steps = int(config.get("steps", DEFAULT_STEPS))
    aspec = config.get("algebra", {})
    loops, families = _loops_from_config(config, M)
    n_random = int(aspec.get("random_loops", 40 if not loops else 0))
    if n_random:
        region = aspec.get("region")
        if region is None:
            if entry is None:
                raise ConfigError("custom manifolds need algebra.region for sampling")
            region = entry.sample_region
        basepoint = (np.asarray(aspec["basepoint"], dtype=float)
                     if "basepoint" in aspec
                     else (entry.basepoint if entry is not None else None))
        loops += random_rectangle_loops(M, region, n_random, seed,
                                        basepoint=basepoint)
    extra = [family_derivative(M, kind, fam, s_step=s_step, steps=steps)
             for fam, s_step in families]
    if entry is not None and aspec.get("include_catalog_families", False):
        extra += [family_derivative(M, kind, fam, steps=steps)
                  for fam in entry.families.values()]
    form = None
    if entry is not None and entry.companion is not None:
        form = metric_at(entry.companion, entry.basepoint)
    exp = run_closure_experiment(M, kind, loops, extra_generators=extra,
                                 form=form, steps=steps)
    report = _base_report("algebra", config, seed)
    report["results"] = {
        "dimension": exp.dim,
        "tag": str(exp.tag),
        "loop_count": exp.loop_count,
        "generators_used": exp.used_count,
        "max_det_error": max((abs(d) for d in exp.det_errors), default=0.0),
        "basis": [b.tolist() for b in exp.basis.basis],
    }
    print(f"algebra dimension: {exp.dim}   tag: {exp.tag}")
    print(f"generators: {exp.used_count} usable of {exp.loop_count} loops; "
          f"max |det-1| = {report['results']['max_det_error']:.2e}")
    if args.conjecture:
        n = M.dim
        full = n * (n - 1) // 2
        strictly_upper = all(np.abs(np.tril(b)).max() <= 1e-6
                             for b in exp.basis.basis)
        report["results"]["conjecture_experiment"] = {
            "note": "EXPERIMENT: no pass/fail semantics",
            "ambient_dim": n,
            "strictly_upper_triangular_dim": full,
            "observed_dim": exp.dim,
            "observed_dim_equals_full": bool(exp.dim == full),
            "all_elements_strictly_upper": bool(strictly_upper),
        }
        print(f"EXPERIMENT: observed dim {exp.dim} <= {full} "
              f"(full strictly-upper dimension); "
              f"equality: {exp.dim == full}; "
              f"strictly upper: {strictly_upper}")
    _write_report(report, config, args)
    return 0


def cmd_verify(args):
    config = _load_config(args.config) if args.config else {}
    seed = _resolve_seed(config)
    samples = config.get("samples", {})
    n_paths = int(samples.get("paths", 20))
    n_loops = int(samples.get("loops", 20))
    n_points = int(samples.get("points", 50))
    steps = int(config.get("steps", DEFAULT_STEPS))
    if "manifold" in config and "custom" in config["manifold"]:
        M = _build_custom_manifold(config["manifold"]["custom"])
        region = config.get("region")
        if region is None:
            region = M.chart.sample_box()
        basepoint = np.array([(lo + hi) / 2 for lo, hi in region])
        entries = [cat.CatalogEntry(name=M.name, manifold=M, basepoint=basepoint,
                                    sample_region=tuple(tuple(r) for r in region))]
    elif "entries" in config:
        entries = [cat.get_entry(name) for name in config["entries"]]
    else:
        entries = cat.default_entries()
    reports = verify.default_suite(entries, seed=seed, n_paths=n_paths,
                                   n_loops=n_loops, n_points=n_points, steps=steps)
    wanted = config.get("checks")
    if wanted:
        reports = [r for r in reports if r.check_name in wanted]
    report = _base_report("verify", config, seed)
    report["results"] = [r.to_dict() for r in reports]
    ok = all(r.passed for r in reports)
    report["passed"] = ok
    for r in reports:
        print(f"{r.check_name:26s} {r.entry_name:14s} "
              f"max={r.max_violation:.3e} tol={r.tol:.0e} "
              f"{'ok' if r.passed else 'FAIL'}")
    print(f"verification suite: {'all passed' if ok else 'FAILURES PRESENT'}")
    _write_report(report, config, args)
    return 0 if ok else 1


def cmd_catalog(args):
    if args.action != "list":
        return _fail_usage(f"unknown catalog action {args.action!r}")
    print("stable catalog names:")
    for name in cat.list_names():
        print(f"  {name}")
    print("default verification entries:")
    for entry in cat.default_entries():
        p, q = entry.manifold.metric.signature
        print(f"  {entry.name:14s} dim={entry.dim} signature=({p},{q})"
              f"{' +companion' if entry.companion is not None else ''}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hololab",
        description="numerical holonomy of weighted connections on manifolds "
                    "with density")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-example", help="replay golden data for an entry")
    p.add_argument("name")
    p.add_argument("--output", help="write a JSON report")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(fn=cmd_run_example)

    p = sub.add_parser("holonomy", help="integrate configured loops")
    p.add_argument("config")
    p.add_argument("--output", help="override the config's output path")
    p.add_argument("--plot", help="CSV prefix for transported-frame trajectories")
    p.set_defaults(fn=cmd_holonomy)

    p = sub.add_parser("algebra", help="holonomy-algebra closure experiment")
    p.add_argument("config")
    p.add_argument("--output")
    p.add_argument("--conjecture", action="store_true",
                   help="report the strictly-upper-triangular experiment")
    p.set_defaults(fn=cmd_algebra)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("config", nargs="?")
    p.add_argument("--output")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("catalog", help="catalog utilities")
    p.add_argument("action", choices=["list"])
    p.set_defaults(fn=cmd_catalog)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        return _fail_usage(str(exc))
    except UnknownExample as exc:
        return _fail_usage(str(exc))
    except HololabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
