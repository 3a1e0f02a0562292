"""Command-line interface: ``goursat-spde {solve,ensemble,sheet,exact,peaks,validate}``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .analysis import DEFAULT_PROMINENCE, count_peaks, threshold_indicator
from .config import ConfigError, RunConfig, emit_config, load_config, parse_bc_text, parse_source_text
from .ensemble import EnsembleSpec, run_ensemble
from .grid import ScalarField
from .io import read_field_csv, write_columns_csv, write_field_csv, write_json
from .noise import NoiseConfig, sample_increments
from .oracle import BreatherParams, KinkParams, LinearExactParams, breather, kink, linear_exact_field
from .solver import solve
from .validate import run_checks


def _pair(text, cast):
    parts = [cast(p) for p in text.split(",")]
    if len(parts) == 1:
        return parts[0], parts[0]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected one or two comma-separated values, got {text!r}")
    return parts[0], parts[1]


def _add_run_flags(p, ensemble=False):
    p.add_argument("--config", help="INI run configuration; flags override its keys")
    p.add_argument("--grid", help="cell counts N or NX,NT")
    p.add_argument("--domain", help="extent X or XF,TF")
    p.add_argument("--source", help="name[:k=v,...], e.g. affine:alpha=-1 or sine-gordon")
    p.add_argument("--sigma", type=float)
    p.add_argument("--bc", help="constant value, linear-exact:c1=..,c2=..,alpha=.., or table:FILE")
    p.add_argument("--seed", type=int)
    p.add_argument("--guard", type=float)
    p.add_argument("--out", help="output directory")
    if ensemble:
        p.add_argument("--trials", type=int)
        p.add_argument("--record", help="full | slices:t=40,x=4[;points=x:t;...] | points:x:t;...")
        p.add_argument("--threads", type=int)


def build_config(args, base: RunConfig | None = None) -> RunConfig:
    cfg = base or RunConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config, cfg)
    up = {}
    if args.grid:
        up["n_x"], up["n_t"] = _pair(args.grid, int)
    if args.domain:
        up["x_f"], up["t_f"] = _pair(args.domain, float)
    if args.source:
        up["source"], up["source_params"] = parse_source_text(args.source)
    if args.bc:
        up["bc_kind"], up["bc_params"] = parse_bc_text(args.bc)
    for key in ("sigma", "seed", "guard", "trials", "record", "threads"):
        value = getattr(args, key, None)
        if value is not None:
            up[key] = value
    if args.out:
        up["out"] = args.out
    return replace(cfg, **up).validate()


def _meta(cfg: RunConfig, for_csv: bool = False) -> dict:
    """Run metadata. CSV headers leave out the thread count and output directory,
    which do not affect the numbers, so equal runs write equal bytes."""
    config = cfg.as_dict()
    if for_csv:
        config.pop("threads")
        config.pop("out")
    return {
        "goursat_spde_version": __version__,
        "config": config,
        "seed": cfg.seed,
        "grid": cfg.grid().as_dict(),
    }


def _write_config_echo(cfg):
    path = os.path.join(cfg.out, "config.ini")
    os.makedirs(cfg.out, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(emit_config(cfg))


def _finite_or_none(v):
    return float(v) if np.isfinite(v) else None


def cmd_solve(cfg: RunConfig) -> dict:
    spec = cfg.grid()
    bc = cfg.boundary(spec)
    src = cfg.make_source()
    incr = sample_increments(spec, NoiseConfig(cfg.sigma, cfg.seed, 0)) if cfg.sigma > 0 else None
    t0 = time.perf_counter()
    res = solve(spec, bc, src, cfg.sigma, incr, cfg.guard)
    elapsed = time.perf_counter() - t0
    field = res.field
    write_field_csv(os.path.join(cfg.out, "field.csv"), field, _meta(cfg, for_csv=True))
    _write_config_echo(cfg)
    k = np.unravel_index(np.nanargmax(field.values), spec.shape)
    m = np.unravel_index(np.nanargmin(field.values), spec.shape)
    summary = {
        **_meta(cfg),
        "status": res.status,
        "singular_site": None if res.singular_site is None else {
            "index": list(res.singular_site), "x": spec.coord(*res.singular_site)[0], "t": spec.coord(*res.singular_site)[1],
        },
        "guard": res.guard,
        "max": {"value": float(field.values[k]), "x": spec.coord(*k)[0], "t": spec.coord(*k)[1]},
        "min": {"value": float(field.values[m]), "x": spec.coord(*m)[0], "t": spec.coord(*m)[1]},
        "value_at_corner": _finite_or_none(field.values[-1, -1]),
        "elapsed_seconds": elapsed,
    }
    write_json(os.path.join(cfg.out, "summary.json"), summary)
    return summary


def _ensemble_outputs(cfg: RunConfig, stats, extra: dict | None = None) -> dict:
    spec = cfg.grid()
    meta = _meta(cfg, for_csv=True)
    if stats.plan.record.mode == "full":
        write_field_csv(os.path.join(cfg.out, "mean.csv"), stats.mean, meta)
        write_field_csv(os.path.join(cfg.out, "sd.csv"), stats.sd, meta)
    for label, a, b in stats.plan.segments:
        if b - a > 1 and label != "full":
            seg = stats.segment(label)
            write_columns_csv(os.path.join(cfg.out, f"slice_{label.replace('=', '')}.csv"), seg, meta)
    points = [(x, t) for x, t in stats.plan.record.points]
    if stats.plan.record.mode == "full":
        points.append((spec.x_f, spec.t_f))
    summary = {
        **_meta(cfg),
        **stats.summary(),
        "points": [stats.at(x, t) for x, t in points],
        "snap_distances": dict(stats.plan.snap),
        **(extra or {}),
    }
    write_json(os.path.join(cfg.out, "summary.json"), summary)
    _write_config_echo(cfg)
    return summary


def cmd_ensemble(cfg: RunConfig, extra: dict | None = None) -> dict:
    spec = cfg.grid()
    es = EnsembleSpec(cfg.trials, cfg.seed, cfg.make_record(), cfg.guard)
    t0 = time.perf_counter()
    stats = run_ensemble(spec, cfg.boundary(spec), cfg.make_source(), cfg.sigma, es, threads=cfg.threads)
    return _ensemble_outputs(cfg, stats, {**(extra or {}), "elapsed_seconds": time.perf_counter() - t0})


def cmd_sheet(cfg: RunConfig) -> dict:
    cfg = replace(cfg, source="zero", source_params={}, bc_kind="constant", bc_params={"value": 0.0})
    spec = cfg.grid()
    exact_sd = cfg.sigma * float(np.sqrt(spec.x_f * spec.t_f))
    return cmd_ensemble(cfg, {"exact_sd_at_corner": exact_sd, "exact_mean": 0.0})


def cmd_exact(args) -> dict:
    nx, nt = _pair(args.grid, int)
    xf, tf = _pair(args.domain, float)
    from .grid import build_grid

    out = args.out or "out"
    if args.kind == "linear":
        spec = build_grid(xf, tf, nx, nt)
        p = LinearExactParams(args.c1, args.c2, args.alpha)
        field = linear_exact_field(spec, p)
        meta = {"goursat_spde_version": __version__, "kind": "linear", "params": vars(p), "grid": spec.as_dict()}
        write_field_csv(os.path.join(out, "exact.csv"), field, meta)
        summary = {**meta, "value_at_corner": float(field.values[-1, -1]), "max": field.nanmax()}
    else:
        x = args.x_min + np.arange(nx + 1) * (xf - args.x_min) / nx
        t = np.arange(nt + 1) * tf / nt
        X, T = np.meshgrid(x, t, indexing="ij")
        if args.kind == "kink":
            p = KinkParams(args.u, args.x0, args.sign)
            values = kink(p, X, T)
        else:
            p = BreatherParams(args.omega)
            values = breather(p, X, T)
        meta = {"goursat_spde_version": __version__, "kind": args.kind, "params": vars(p),
                "x_min": args.x_min, "x_max": xf, "t_max": tf, "n_x": nx, "n_t": nt}
        lines = [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in meta.items()]
        lines.append(",".join([""] + [format(v, ".17g") for v in t]))
        for i, xi in enumerate(x):
            lines.append(",".join([format(xi, ".17g")] + [format(v, ".17g") for v in values[i]]))
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "exact.csv"), "w") as fh:
            fh.write("\n".join(lines) + "\n")
        summary = {**meta, "max": float(values.max()), "min": float(values.min())}
    write_json(os.path.join(out, "exact.json"), summary)
    return summary


def cmd_peaks(args) -> dict:
    if args.field:
        field, _ = read_field_csv(args.field)
    else:
        cfg = build_config(args)
        spec = cfg.grid()
        incr = sample_increments(spec, NoiseConfig(cfg.sigma, cfg.seed, 0)) if cfg.sigma > 0 else None
        field = solve(spec, cfg.boundary(spec), cfg.make_source(), cfg.sigma, incr, cfg.guard).field
    spec = field.spec
    if args.x is not None:
        values, axis, at = field.t_slice(args.x), "t", spec.x_index(args.x) * spec.dx
    else:
        t = spec.t_f if args.t is None else args.t
        values, axis, at = field.x_slice(t), "x", spec.t_index(t) * spec.dt
    prominence = DEFAULT_PROMINENCE if args.prominence is None else args.prominence
    result = {
        "slice": f"{'t' if axis == 'x' else 'x'}={at:g}",
        "n_peaks": count_peaks(values, prominence, relative=not args.absolute),
        "prominence": prominence,
        "relative": not args.absolute,
    }
    if args.threshold is not None:
        mask = threshold_indicator(field, args.threshold)
        out = args.out or "out"
        write_field_csv(os.path.join(out, "indicator.csv"), ScalarField(spec, mask.astype(float)),
                        {"threshold": args.threshold})
        result["indicator_fraction"] = float(mask.mean())
    if args.out:
        write_json(os.path.join(args.out, "peaks.json"), result)
    return result


def cmd_validate(perturb=False) -> int:
    checks = run_checks(perturb=perturb)
    for c in checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="goursat-spde", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_flags(sub.add_parser("solve", help="single trial, full field CSV + JSON summary"))
    _add_run_flags(sub.add_parser("ensemble", help="Monte Carlo mean/SD over many trials"), ensemble=True)
    _add_run_flags(sub.add_parser("sheet", help="Brownian sheet ensemble (F=0, zero boundaries)"), ensemble=True)

    ex = sub.add_parser("exact", help="tabulate a closed-form solution")
    ex.add_argument("--kind", choices=("linear", "kink", "breather"), default="linear")
    ex.add_argument("--grid", default="100")
    ex.add_argument("--domain", default="1")
    ex.add_argument("--x-min", type=float, default=0.0, help="left x edge for kink/breather tables")
    ex.add_argument("--c1", type=float, default=1.0)
    ex.add_argument("--c2", type=float, default=0.0)
    ex.add_argument("--alpha", type=float, default=1.0)
    ex.add_argument("--u", type=float, default=0.0)
    ex.add_argument("--x0", type=float, default=0.0)
    ex.add_argument("--sign", type=int, default=1)
    ex.add_argument("--omega", type=float, default=0.5)
    ex.add_argument("--out")

    pk = sub.add_parser("peaks", help="count peaks along a slice of a field CSV or a fresh solve")
    _add_run_flags(pk)
    pk.add_argument("--field", help="field CSV written by solve/ensemble")
    pk.add_argument("--t", type=float, help="slice Y(., t); default t_f")
    pk.add_argument("--x", type=float, help="slice Y(x, .) instead")
    pk.add_argument("--prominence", type=float, help="fraction of slice range (default 0.1)")
    pk.add_argument("--absolute", action="store_true", help="treat --prominence as absolute")
    pk.add_argument("--threshold", type=float, help="also write the indicator mask field >= value")

    va = sub.add_parser("validate", help="run the built-in oracle checks")
    va.add_argument("--perturb", action="store_true", help="negative control: bias the solver")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args.perturb)
        if args.command == "exact":
            summary = cmd_exact(args)
        elif args.command == "peaks":
            summary = cmd_peaks(args)
        else:
            cfg = build_config(args)
            summary = {"solve": cmd_solve, "ensemble": cmd_ensemble, "sheet": cmd_sheet}[args.command](cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"goursat-spde: error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
