"""Command line front end.

Subcommands: ingest, reweight, estimate, bounds, bootstrap, simulate,
report.  Exit codes: 0 success, 2 input/validation error, 3 estimation
error, 4 inference error.  All JSON output carries a ``schema_version``
field and is emitted with sorted keys so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__, SCHEMA_VERSION
from . import bootstrap as _boot
from . import bounds as _bounds
from . import estimators as _est
from . import reweighting as _rw
from . import simulate as _sim
from .data import EstimateReport, Sample, ingest_csv, write_csv
from .errors import (ESTIMATION_ERRORS, INFERENCE_ERRORS, VALIDATION_ERRORS,
                     InvalidConfig, StrataBoundsError)

__all__ = ["main"]


# --- shared helpers -----------------------------------------------------------

def _add_col_flags(p):
    p.add_argument("--col-z", default="z")
    p.add_argument("--col-d", default="d")
    p.add_argument("--col-y", default="y")
    p.add_argument("--col-cluster", default="cluster")
    p.add_argument("--col-block", default="block")
    p.add_argument("--col-weight", default="weight")
    p.add_argument("--col-aux", action="append", default=[],
                   metavar="NAME:COL", help="covariate mapping, repeatable")


def _schema(args):
    schema = {"z": args.col_z, "d": args.col_d, "y": args.col_y,
              "cluster": args.col_cluster, "block": args.col_block,
              "weight": args.col_weight}
    aux = {}
    for item in args.col_aux:
        name, _, col = item.partition(":")
        aux[name] = col or name
    return schema, aux


def _load(path, args, label=""):
    schema, aux = _schema(args)
    return ingest_csv(path, schema=schema, aux_columns=aux, label=label or str(path))


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def _dump_json(obj, path):
    obj = dict(obj)
    obj.setdefault("schema_version", SCHEMA_VERSION)
    text = json.dumps(obj, sort_keys=True, indent=2, allow_nan=False,
                      default=_json_default)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def _print_json(obj):
    obj = dict(obj)
    obj.setdefault("schema_version", SCHEMA_VERSION)
    print(json.dumps(obj, sort_keys=True, indent=2, allow_nan=False,
                     default=_json_default))


def _write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, float) else v
                        for v in row])


# --- SVG rendering (no plotting dependency) -----------------------------------

def _svg_figure(lines, path, xlabel="tau_12", ylabel="tau_02", size=480, margin=56):
    """Render labelled polylines to a standalone SVG file.

    ``lines`` is a list of (label, Nx2 array, stroke, width, opacity).
    """
    pts = np.vstack([ln[1] for ln in lines if len(ln[1])])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.where(hi - lo > 1e-12, hi - lo, 1.0)
    lo = lo - 0.05 * span
    hi = hi + 0.05 * span
    span = hi - lo

    def sx(x):
        return margin + (x - lo[0]) / span[0] * (size - 2 * margin)

    def sy(y):
        return size - margin - (y - lo[1]) / span[1] * (size - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<line x1="{margin}" y1="{size - margin}" x2="{size - margin}" '
        f'y2="{size - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{size - margin}" stroke="black"/>',
    ]
    for frac in (0.0, 0.5, 1.0):
        xv = lo[0] + frac * span[0]
        yv = lo[1] + frac * span[1]
        parts.append(f'<text x="{sx(xv):.1f}" y="{size - margin + 16}" '
                     f'font-size="10" text-anchor="middle">{xv:.3g}</text>')
        parts.append(f'<text x="{margin - 6}" y="{sy(yv):.1f}" font-size="10" '
                     f'text-anchor="end">{yv:.3g}</text>')
    parts.append(f'<text x="{size / 2:.1f}" y="{size - 12}" font-size="12" '
                 f'text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="14" y="{size / 2:.1f}" font-size="12" '
                 f'text-anchor="middle" transform="rotate(-90 14 {size / 2:.1f})">'
                 f'{ylabel}</text>')
    for i, (label, arr, stroke, width, opacity) in enumerate(lines):
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in arr)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{stroke}" '
                     f'stroke-width="{width}" stroke-opacity="{opacity}"/>')
        if label:
            x0, y0 = arr[0]
            parts.append(f'<text x="{sx(x0) + 4:.1f}" y="{sy(y0) - 4:.1f}" '
                         f'font-size="10" fill="{stroke}">{label}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


# --- subcommands --------------------------------------------------------------

def _cmd_ingest(args):
    sample = _load(args.input, args)
    blocks = sample.blocks
    summary = {
        "input": args.input,
        "units": sample.n,
        "blocks": {str(b): {"units": int(idx.size),
                            "propensity": sample.propensity(b)}
                   for b, idx in blocks.items()},
        "arm_counts": {"control": int((sample.z == 0).sum()),
                       "treated": int((sample.z == 1).sum())},
        "takeup_counts": {str(d): int((sample.d == d).sum()) for d in (0, 1, 2)},
    }
    if args.out:
        write_csv(sample, args.out)
        summary["out"] = args.out
    _print_json(summary)
    return 0


def _cmd_reweight(args):
    source = _load(args.source, args, label="source")
    target = _load(args.target, args, label="target")
    edges = None
    if args.bin_edges:
        edges = [float(v) for v in args.bin_edges.split(",")]
    model = _rw.fit_density_ratio(source, target, args.covariate,
                                  bins=edges if edges else args.bins)
    weighted = _rw.apply_weights(source, model)
    write_csv(weighted, args.out)
    sidecar = args.out + ".model.json"
    _dump_json(model.to_dict(), sidecar)
    _print_json({"out": args.out, "model": sidecar,
                 "kept_units": weighted.n, "dropped_units": source.n - weighted.n})
    return 0


def _reports(sample, floor, warn_tol):
    shares = _est.estimate_shares(sample, warn_tol=warn_tol)
    cm = _est.cell_means(sample)
    reports = [
        _est.estimate_itt(sample),
        _est.estimate_first_stage(sample),
        _est.estimate_late(sample, floor=floor),
        _est.estimate_mu0(sample, floor=floor, shares=shares),
        _est.estimate_mu1(sample, floor=floor, shares=shares),
        EstimateReport(name="control_mean", point=float(cm.arm_mean[0])),
    ]
    return shares, cm, reports


def _cmd_estimate(args):
    sample = _load(args.input, args)
    shares, cm, reports = _reports(sample, args.floor, args.warn_tol)

    print(f"{'quantity':<14} {'estimate':>10}")
    for r in reports:
        print(f"{r.name:<14} {r.point:>10.4f}")
    print()
    print(f"{'take-up':<14} {'control':>10} {'treated':>10}")
    for d, label in ((0, "d=0 none"), (1, "d=1 alt"), (2, "d=2 program")):
        print(f"{label:<14} {cm.p[d, 0]:>10.4f} {cm.p[d, 1]:>10.4f}")
    print()
    print(f"{'stratum':<14} {'share':>10} {'raw':>10}")
    for name, clamped, raw in zip(_est.SHARE_NAMES, shares.as_array(),
                                  shares.raw_array()):
        print(f"{name:<14} {clamped:>10.4f} {raw:>10.4f}")

    if args.json:
        _dump_json({
            "estimates": [r.to_dict() for r in reports],
            "shares": shares.to_dict(),
            "takeup": {"p": cm.p.tolist(), "mean": cm.mean.tolist()},
        }, args.json)
    return 0


def _cmd_bounds(args):
    sample = _load(args.input, args)
    out = {}
    complier = _bounds.complier_effect_bounds(sample, floor=args.floor)
    out["complier"] = complier.to_dict()
    subst = _bounds.substitutor_effect_bounds(
        sample, method=args.method, floor=args.floor, intersect=args.intersect)
    out["substitutor"] = subst.to_dict()
    _dump_json(out, args.out_json)

    line = _bounds.bounds_line(sample, grid=args.grid, floor=args.floor)
    if args.out_line:
        _write_rows(args.out_line, ["tau_12", "tau_02"],
                    [(float(a), float(b)) for a, b in line])
    if args.out_svg:
        _svg_figure([("bounds", line, "black", 1.5, 1.0)], args.out_svg)
    print(f"complier     [{complier.lower:.4f}, {complier.upper:.4f}]")
    print(f"substitutor  [{subst.lower:.4f}, {subst.upper:.4f}]")
    return 0


def _cmd_bootstrap(args):
    sample = _load(args.input, args)
    spec = _boot.BootstrapSpec(reps=args.reps, seed=args.seed, alpha=args.alpha,
                               resample_unit=args.resample)
    report = _boot.bootstrap_ci(sample, args.stat, spec)
    if args.trace:
        _write_rows(args.trace, ["replicate", args.stat],
                    [(i, float(v)) for i, v in
                     enumerate(report.meta["replicates"])])
    _print_json({"report": report.to_dict()})
    return 0


def _simulate_config(args):
    if args.preset:
        if args.preset not in _sim.PRESETS:
            raise InvalidConfig(f"unknown preset {args.preset!r}; "
                                f"choices: {sorted(_sim.PRESETS)}")
        base = _sim.PRESETS[args.preset]
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.clusters is not None:
            overrides["cluster_count"] = args.clusters
        if args.cluster_size is not None:
            overrides["cluster_size"] = args.cluster_size
        if args.icc is not None:
            overrides["icc"] = args.icc
        if overrides:
            fields = {k: getattr(base, k) for k in base.__dataclass_fields__}
            fields.update(overrides)
            base = _sim.DgpConfig(**fields)
        return base
    raise InvalidConfig("simulate requires --preset (custom DGPs via the library)")


def _truth_dict(truth):
    return {
        "pi": [float(v) for v in truth.pi],
        "itt": float(truth.itt), "first_stage": float(truth.first_stage),
        "late": float(truth.late),
        "tau02": float(truth.tau02), "tau12": float(truth.tau12),
        "mu0": float(truth.mu0), "mu1": float(truth.mu1),
        "complier_bounds": [float(v) for v in truth.complier_bounds]
        if truth.complier_bounds is not None else None,
        "substitutor_bounds": [float(v) for v in truth.substitutor_bounds]
        if truth.substitutor_bounds is not None else None,
    }


def _cmd_simulate(args):
    if args.check:
        return _oracle_check()
    config = _simulate_config(args)
    pop = _sim.generate(config)
    write_csv(pop.sample, args.out,
              extra_columns={"stratum": [_sim.STRATA[s] for s in pop.strata]})
    _dump_json({"finite_population": _truth_dict(pop.truth),
                "super_population": _truth_dict(pop.truth_super),
                "config": {"preset": args.preset, "seed": config.seed,
                           "cluster_count": config.cluster_count,
                           "cluster_size": config.cluster_size,
                           "icc": config.icc, "family": config.family}},
               args.out + ".truth.json")
    _print_json({"out": args.out, "truth": args.out + ".truth.json",
                 "units": pop.sample.n})
    return 0


def _oracle_check():
    """Fast self-test of the simulation oracle; prints PASS/FAIL lines."""
    checks = []

    cfg = _sim.DgpConfig(strata_probs=(0, 0, 0, 1, 0),
                         outcome_means=((0,) * 3,) * 3 + ((0, 0, 1), (0, 0, 0)),
                         outcome_noise=0.0, family="normal",
                         cluster_count=40, cluster_size=10, icc=0.0, seed=1)
    pop = _sim.generate(cfg)
    ok = (np.all(pop.sample.d[pop.sample.z == 0] == 0)
          and np.all(pop.sample.d[pop.sample.z == 1] == 2)
          and abs(pop.truth.tau02 - 1.0) < 1e-12)
    checks.append(("all-complier degenerate DGP", ok))

    cfg = _sim.PRESET_T2
    cfg = _sim.DgpConfig(**{**{k: getattr(cfg, k) for k in cfg.__dataclass_fields__},
                            "cluster_count": 1000, "cluster_size": 100,
                            "icc": 0.0, "seed": 11})
    pop = _sim.generate(cfg)
    est = _est.estimate_shares(pop.sample).as_array()
    checks.append(("preset share recovery at n=100000",
                   bool(np.all(np.abs(est - np.array(cfg.strata_probs)) < 0.01))))

    lo_a, hi_a = _sim.analytic_bounds(cfg)[0]
    cb = _bounds.complier_effect_bounds(pop.sample)
    checks.append(("complier bounds near analytic truth",
                   abs(cb.lower - lo_a) < 0.05 and abs(cb.upper - hi_a) < 0.05))

    pop = _sim.balanced_population((2, 1, 0, 2, 2), y2_values=(0.0, 1.0, 2.0, 3.0))
    enum = _sim.brute_force_sharpness(pop)
    ob = _bounds.complier_outcome_bounds(pop.sample)
    checks.append(("brute-force equality on small instance",
                   abs(enum[0] - ob.lower) < 1e-9 and abs(enum[1] - ob.upper) < 1e-9))

    failed = 0
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failed += 0 if ok else 1
    return 1 if failed else 0


def _bounds_statistic(floor):
    def stat(s):
        shares = _est.estimate_shares(s)
        cb = _bounds.complier_effect_bounds(s, floor=floor, shares=shares)
        sbd = _bounds.substitutor_effect_bounds(s, floor=floor, shares=shares)
        return {
            "itt": _est.estimate_itt(s).point,
            "first_stage": _est.estimate_first_stage(s).point,
            "late": _est.estimate_late(s, floor=floor).point,
            "tau02_lower": cb.lower, "tau02_upper": cb.upper,
            "tau12_lower": sbd.lower, "tau12_upper": sbd.upper,
        }
    return stat


def _run_report(sample, outdir, args, prefix=""):
    import os
    os.makedirs(outdir, exist_ok=True)

    def path(name):
        return os.path.join(outdir, prefix + name)

    shares, cm, reports = _reports(sample, args.floor, args.warn_tol)

    spec = _boot.BootstrapSpec(reps=args.reps, seed=args.seed, alpha=args.alpha)
    stat = _bounds_statistic(args.floor)
    reps, names, n_failed = _boot.bootstrap_replicates(sample, stat, spec)
    point = stat(sample)
    qlo, qhi = args.alpha / 2, 1 - args.alpha / 2
    ci = {name: [float(v) for v in np.quantile(reps[:, j], [qlo, qhi])]
          for j, name in enumerate(names)}
    se = {name: float(reps[:, j].std(ddof=1)) for j, name in enumerate(names)}

    # (a) headline estimates with bootstrap CIs
    est_rows = []
    for r in reports:
        row = r.to_dict()
        if r.name in ci:
            row["se"], row["ci"] = se[r.name], ci[r.name]
            row["method"] = "cluster_bootstrap"
        est_rows.append(row)
    _dump_json({"estimates": est_rows,
                "bootstrap": {"reps": args.reps, "seed": args.seed,
                              "alpha": args.alpha, "failed": n_failed}},
               path("estimates.json"))

    # (b) take-up by arm
    _write_rows(path("takeup.csv"), ["d", "control_share", "treated_share",
                                     "control_mean_y", "treated_mean_y"],
                [(d, float(cm.p[d, 0]), float(cm.p[d, 1]),
                  float(cm.mean[d, 0]), float(cm.mean[d, 1]))
                 for d in (0, 1, 2)])

    # (c) strata shares
    _write_rows(path("shares.csv"), ["stratum", "share", "raw"],
                [(name, float(c), float(r)) for name, c, r in
                 zip(_est.SHARE_NAMES, shares.as_array(), shares.raw_array())])

    # (d) bounds with per-endpoint bootstrap CIs
    _dump_json({
        "complier": {"lower": point["tau02_lower"], "upper": point["tau02_upper"],
                     "ci_lower": ci["tau02_lower"], "ci_upper": ci["tau02_upper"]},
        "substitutor": {"lower": point["tau12_lower"], "upper": point["tau12_upper"],
                        "ci_lower": ci["tau12_lower"], "ci_upper": ci["tau12_upper"]},
        "late": {"point": point["late"], "ci": ci["late"]},
    }, path("bounds.json"))

    # (e) bounds line, replicate streaks, SVG
    line = _bounds.bounds_line(sample, grid=args.grid, floor=args.floor)
    _write_rows(path("bounds_line.csv"), ["tau_12", "tau_02"],
                [(float(a), float(b)) for a, b in line])
    streak_cols = ["tau02_lower", "tau02_upper", "tau12_lower", "tau12_upper"]
    jmap = {name: names.index(name) for name in streak_cols}
    _write_rows(path("streaks.csv"), ["replicate"] + streak_cols,
                [(i, *(float(reps[i, jmap[c]]) for c in streak_cols))
                 for i in range(reps.shape[0])])

    streak_lines = []
    step = max(1, reps.shape[0] // 60)
    for i in range(0, reps.shape[0], step):
        seg = np.array([[reps[i, jmap["tau12_lower"]], reps[i, jmap["tau02_upper"]]],
                        [reps[i, jmap["tau12_upper"]], reps[i, jmap["tau02_lower"]]]])
        streak_lines.append(("", seg, "steelblue", 0.7, 0.25))
    _svg_figure(streak_lines + [("bounds", line, "black", 1.6, 1.0)],
                path("figure.svg"))
    return {"shares": [float(v) for v in shares.as_array()],
            "late": point["late"], "ci": ci}


def _cmd_report(args):
    import os
    if args.from_manifest:
        with open(args.from_manifest, encoding="utf-8") as fh:
            manifest = json.load(fh)
        saved = manifest["args"]
        for key, val in saved.items():
            # the destination directory stays whatever this invocation chose
            if key not in ("from_manifest", "outdir"):
                setattr(args, key, val)
        args.from_manifest = None

    os.makedirs(args.outdir, exist_ok=True)
    manifest = {"version": __version__,
                "args": {k: v for k, v in sorted(vars(args).items())
                         if k not in ("func",)}}
    _dump_json(manifest, os.path.join(args.outdir, "manifest.json"))

    if args.sample_a and args.sample_b:
        a = _load(args.sample_a, args, label="a")
        b = _load(args.sample_b, args, label="b")
        if args.reweight_a_to_b:
            model = _rw.fit_density_ratio(a, b, args.reweight_a_to_b,
                                          bins=args.bins)
            a = _rw.apply_weights(a, model)
            _dump_json(model.to_dict(),
                       os.path.join(args.outdir, "reweight_model.json"))
        out_a = _run_report(a, os.path.join(args.outdir, "a"), args)
        out_b = _run_report(b, os.path.join(args.outdir, "b"), args)
        _print_json({"outdir": args.outdir, "a": out_a, "b": out_b})
        return 0

    if args.preset:
        config = _simulate_config(args)
        pop = _sim.generate(config)
        sample = pop.sample
        write_csv(sample, os.path.join(args.outdir, "sample.csv"))
        _dump_json({"finite_population": _truth_dict(pop.truth),
                    "super_population": _truth_dict(pop.truth_super)},
                   os.path.join(args.outdir, "truth.json"))
    elif args.input:
        sample = _load(args.input, args)
    else:
        raise InvalidConfig("report needs --input, --preset, or --sample-a/--sample-b")
    out = _run_report(sample, args.outdir, args)
    _print_json({"outdir": args.outdir, **out})
    return 0


# --- parser -------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="strata-bounds",
        description="Principal-strata shares, LATE, and trimming bounds for "
                    "three-option take-up experiments.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("ingest", help="validate a CSV and print a summary")
    sp.add_argument("--input", required=True)
    sp.add_argument("--out", help="write normalized CSV")
    _add_col_flags(sp)
    sp.set_defaults(func=_cmd_ingest)

    sp = sub.add_parser("reweight", help="density-ratio reweight source to target")
    sp.add_argument("--source", required=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--covariate", required=True)
    sp.add_argument("--bins", type=int, default=10)
    sp.add_argument("--bin-edges", help="comma-separated explicit edges")
    sp.add_argument("--out", required=True)
    _add_col_flags(sp)
    sp.set_defaults(func=_cmd_reweight)

    sp = sub.add_parser("estimate", help="shares, take-up, ITT, LATE")
    sp.add_argument("--input", required=True)
    sp.add_argument("--json", help="write EstimateReports as JSON")
    sp.add_argument("--floor", type=float, default=_est.DEFAULT_FLOOR)
    sp.add_argument("--warn-tol", type=float,
                    default=_est.DEFAULT_MONOTONICITY_TOL)
    _add_col_flags(sp)
    sp.set_defaults(func=_cmd_estimate)

    sp = sub.add_parser("bounds", help="trimming bounds on complier/substitutor effects")
    sp.add_argument("--input", required=True)
    sp.add_argument("--method", choices=("decomposition", "direct"),
                    default="decomposition")
    sp.add_argument("--intersect", action="store_true")
    sp.add_argument("--grid", type=int, default=50)
    sp.add_argument("--floor", type=float, default=_est.DEFAULT_FLOOR)
    sp.add_argument("--out-json", required=True)
    sp.add_argument("--out-line")
    sp.add_argument("--out-svg")
    _add_col_flags(sp)
    sp.set_defaults(func=_cmd_bounds)

    sp = sub.add_parser("bootstrap", help="cluster bootstrap CI for one statistic")
    sp.add_argument("--input", required=True)
    sp.add_argument("--stat", required=True, choices=sorted(_boot.STATISTICS))
    sp.add_argument("--reps", type=int, default=2000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--resample", choices=("cluster", "unit"), default="cluster")
    sp.add_argument("--trace", help="write replicate values as CSV")
    _add_col_flags(sp)
    sp.set_defaults(func=_cmd_bootstrap)

    sp = sub.add_parser("simulate", help="draw a synthetic sample with known truth")
    sp.add_argument("--preset", choices=sorted(_sim.PRESETS))
    sp.add_argument("--out", default="sample.csv")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--clusters", type=int)
    sp.add_argument("--cluster-size", type=int)
    sp.add_argument("--icc", type=float)
    sp.add_argument("--check", action="store_true",
                    help="run the oracle self-test instead of generating")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("report", help="full pipeline: tables, bounds, figure, manifest")
    sp.add_argument("--input")
    sp.add_argument("--preset", choices=sorted(_sim.PRESETS))
    sp.add_argument("--sample-a")
    sp.add_argument("--sample-b")
    sp.add_argument("--reweight-a-to-b", metavar="COVARIATE")
    sp.add_argument("--from-manifest", metavar="MANIFEST_JSON")
    sp.add_argument("--outdir", required=True)
    sp.add_argument("--reps", type=int, default=500)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--bins", type=int, default=10)
    sp.add_argument("--grid", type=int, default=50)
    sp.add_argument("--floor", type=float, default=_est.DEFAULT_FLOOR)
    sp.add_argument("--warn-tol", type=float,
                    default=_est.DEFAULT_MONOTONICITY_TOL)
    sp.add_argument("--clusters", type=int)
    sp.add_argument("--cluster-size", type=int)
    sp.add_argument("--icc", type=float)
    _add_col_flags(sp)
    sp.set_defaults(func=_cmd_report)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except VALIDATION_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ESTIMATION_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except INFERENCE_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    except StrataBoundsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
