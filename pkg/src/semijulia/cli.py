"""Command-line front end.

Exit codes: 0 success, 2 mathematically indeterminate at this budget
(Undecided certificates, edge-touching components, figure regression),
1 errors.  Every JSON report echoes the fully resolved configuration and
its hash; wall time goes into a .meta.json sidecar so reports themselves
are byte-reproducible under fixed seeds.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import fiber as F
from . import julia as J
from . import randomdyn as RD
from . import render
from .errors import (ConfigError, IndeterminateError, OrderViolationError,
                     SemijuliaError)
from .regions import Annulus, Disk, Rect
from .semigroup import UNDECIDED, load_generator_config, postcritical_orbit

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INDETERMINATE = 2


def _parse_window(text):
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 4:
        raise ConfigError("window must be re_min,re_max,im_min,im_max")
    return tuple(parts)


def _parse_resolution(text):
    parts = [int(p) for p in str(text).split(",")]
    if len(parts) == 1:
        return (parts[0], parts[0])
    if len(parts) == 2:
        return tuple(parts)
    raise ConfigError("resolution must be N or NX,NY")


def _parse_seq(text):
    """Sequence spec from 'periodic:[pre;]a,b', 'prefix:a,b:tail',
    'growing:special,separator', 'random:w1,w2:seed', a JSON file path, or
    inline JSON."""
    text = text.strip()
    if text.startswith("{"):
        return F.sequence_from_json(json.loads(text))
    if os.path.exists(text):
        return F.sequence_from_json(json.loads(Path(text).read_text()))
    kind, _, rest = text.partition(":")
    if kind == "periodic":
        pre, _, per = rest.rpartition(";")
        period = tuple(int(x) for x in per.split(",") if x != "")
        prefix = tuple(int(x) for x in pre.split(",") if x != "") if pre else ()
        return F.EventuallyPeriodic(prefix, period)
    if kind == "prefix":
        word_text, _, tail = rest.rpartition(":")
        word = tuple(int(x) for x in word_text.split(",") if x != "")
        return F.ExplicitPrefix(word, int(tail))
    if kind == "growing":
        a, b = (int(x) for x in rest.split(","))
        return F.GrowingBlocks(a, b)
    if kind == "random":
        weights_text, _, seed = rest.rpartition(":")
        weights = tuple(float(x) for x in weights_text.split(","))
        return F.RandomStream(weights, int(seed))
    raise ConfigError(f"cannot parse sequence spec {text!r}")


def _parse_region(text):
    kind, _, rest = text.partition(":")
    vals = [float(x) for x in rest.split(",")]
    if kind == "annulus" and len(vals) == 4:
        return Annulus(complex(vals[0], vals[1]), vals[2], vals[3])
    if kind == "rect" and len(vals) == 4:
        return Rect(*vals)
    if kind == "disk" and len(vals) == 3:
        return Disk(complex(vals[0], vals[1]), vals[2])
    raise ConfigError("region must be annulus:cx,cy,rin,rout, "
                      "rect:a,b,c,d, or disk:cx,cy,r")


def _config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _emit(out_prefix: str, config: dict, results: dict, started: float,
          extra_writers=()) -> None:
    out = Path(out_prefix)
    out.parent.mkdir(parents=True, exist_ok=True)
    report = {
        "version": __version__,
        "palette_version": render.PALETTE_VERSION,
        "config": config,
        "config_hash": _config_hash(config),
        "results": results,
    }
    with open(f"{out}.json", "w") as f:
        json.dump(report, f, sort_keys=True, indent=2)
        f.write("\n")
    meta = {"wall_time_s": time.time() - started,
            "written_at": time.strftime("%Y-%m-%dT%H:%M:%S")}
    with open(f"{out}.meta.json", "w") as f:
        json.dump(meta, f, indent=2)
        f.write("\n")
    for writer in extra_writers:
        writer(out)


def _bundled_config_path() -> Path:
    return resources.files("semijulia.data") / "disconnected_pair.json"


def _load_gens(args):
    path = args.gens
    if path == "bundled:disconnected-pair":
        path = _bundled_config_path()
    return load_generator_config(path)


# ---------------------------------------------------------------------------
# commands


def cmd_postcritical(args):
    started = time.time()
    gs, _ = _load_gens(args)
    rep = postcritical_orbit(gs, depth=args.depth, point_cap=args.point_cap)
    config = {"command": "postcritical", "gens": str(args.gens),
              "depth": args.depth, "point_cap": args.point_cap}
    results = rep.to_json()
    results["escape_radius"] = gs.escape_radius
    results["labels"] = list(gs.labels)

    def write_cloud(out):
        J.PointCloud(rep.explored_points, "POSTCRITICAL").to_csv(f"{out}_cloud.csv")

    _emit(args.out, config, results, started, [write_cloud])
    return EXIT_INDETERMINATE if rep.status == UNDECIDED else EXIT_OK


def cmd_julia(args):
    started = time.time()
    gs, _ = _load_gens(args)
    window = _parse_window(args.window)
    resolution = _parse_resolution(args.res)
    region, cloud = J.julia_grid(gs, window, resolution, depth=args.depth,
                                 budget=args.budget,
                                 chaos_points=args.chaos_points,
                                 seed=args.seed)
    comps = J.julia_components(region)
    results = {
        "window": list(region.window),
        "resolution": list(region.resolution),
        "depth": region.depth,
        "escape_radius": gs.escape_radius,
        "label_histogram": region.label_histogram(),
        "component_count": len(comps),
    }
    exit_code = EXIT_OK
    try:
        matrix = J.compute_order_relations(comps)
        results["order_matrix"] = {f"{a},{b}": v for (a, b), v in sorted(matrix.items())}
        mn, mx = J.identify_extremes(comps)
        results["min_component"] = mn
        results["max_component"] = mx
        results["gamma_min"] = [gs.labels[i]
                                for i in J.gamma_min(gs, comps, mn, region)]
    except (IndeterminateError, OrderViolationError) as exc:
        results["order_matrix"] = None
        results["order_error"] = str(exc)
        exit_code = EXIT_INDETERMINATE

    config = {"command": "julia", "gens": str(args.gens),
              "window": list(window), "resolution": list(resolution),
              "depth": args.depth, "budget": args.budget,
              "chaos_points": args.chaos_points, "seed": args.seed}

    def write_images(out):
        rgb = render.region_rgb(region)
        render.write_ppm(f"{out}.ppm", rgb)
        if args.png:
            render.write_png(f"{out}.png", rgb)
        cloud.to_csv(f"{out}_cloud.csv")

    _emit(args.out, config, results, started, [write_images])
    return exit_code


def cmd_fiber(args):
    started = time.time()
    gs, _ = _load_gens(args)
    window = _parse_window(args.window)
    resolution = _parse_resolution(args.res)
    spec = _parse_seq(args.seq)
    if isinstance(spec, F.RandomStream):
        spec = spec.realize(args.max_iter)
    fg = F.fiber_grid(gs, spec, window, resolution, max_iter=args.max_iter)
    results = F.fiber_diagnostics(fg, seed=args.seed)
    results["sequence"] = spec.to_json()
    config = {"command": "fiber", "gens": str(args.gens), "seq": args.seq,
              "window": list(window), "resolution": list(resolution),
              "max_iter": args.max_iter, "seed": args.seed}

    def write_images(out):
        rgb = render.fiber_rgb(fg)
        render.write_ppm(f"{out}.ppm", rgb)
        if args.png:
            render.write_png(f"{out}.png", rgb)

    _emit(args.out, config, results, started, [write_images])
    return EXIT_INDETERMINATE if results.get("indeterminate") else EXIT_OK


def cmd_classify(args):
    started = time.time()
    gs, _ = _load_gens(args)
    spec = _parse_seq(args.seq)
    case = F.tghyp_classify(gs, spec, args.j)
    results = {"case": case, "j": args.j, "sequence": spec.to_json()}
    config = {"command": "classify", "gens": str(args.gens), "seq": args.seq,
              "j": args.j}
    _emit(args.out, config, results, started)
    return EXIT_OK


def cmd_random_stats(args):
    started = time.time()
    gs, weights = _load_gens(args)
    if args.weights:
        weights = [float(x) for x in args.weights.split(",")]
    if weights is None:
        raise ConfigError("no weights in config; pass --weights")
    model = RD.IidModel(tuple(weights), args.seed)
    window = _parse_window(args.window)
    stats = RD.monte_carlo_fiber_stats(
        model, gs, trials=args.trials, window=window, resolution=args.res,
        length=args.length, workers=args.workers)
    if args.ladder:
        resolutions = [int(x) for x in args.ladder.split(",")]
        areas = RD.area_resolution_ladder(model, gs, 0, resolutions,
                                          window=window, length=args.length)
        stats.area_ratio_by_resolution = [b / a for a, b in zip(areas, areas[1:])]
    config = {"command": "random-stats", "gens": str(args.gens),
              "weights": list(model.weights), "seed": args.seed,
              "trials": args.trials, "resolution": args.res,
              "length": args.length, "window": list(window),
              "ladder": args.ladder}
    _emit(args.out, config, stats.to_json(), started)
    return EXIT_OK


def cmd_cantor_verify(args):
    started = time.time()
    gs, _ = _load_gens(args)
    region = _parse_region(args.region)
    rep = J.cantor_family_verify(gs, region)
    config = {"command": "cantor-verify", "gens": str(args.gens),
              "region": args.region}
    _emit(args.out, config, rep, started)
    return EXIT_OK


def cmd_reproduce_figure(args):
    started = time.time()
    if args.name != "dcgraph":
        raise ConfigError(f"unknown figure {args.name!r}; available: dcgraph")
    gens_path = _bundled_config_path()
    gs, _ = load_generator_config(gens_path)
    res = _parse_resolution(args.res)
    window = (-4.5, 4.5, -4.5, 4.5)
    depth = 24
    region, cloud = J.julia_grid(gs, window, res, depth=depth, seed=args.seed,
                                 chaos_points=args.chaos_points)
    comps = J.julia_components(region)
    assertions = [{"name": "julia_components_at_least_2",
                   "value": len(comps), "passed": len(comps) >= 2}]
    try:
        J.compute_order_relations(comps)
        mn, _mx = J.identify_extremes(comps)
        gmin = [gs.labels[i] for i in J.gamma_min(gs, comps, mn, region)]
        assertions.append({"name": "gamma_min_is_inner_generator",
                           "value": gmin, "passed": gmin == ["basilica2"]})
    except (IndeterminateError, OrderViolationError) as exc:
        assertions.append({"name": "gamma_min_is_inner_generator",
                           "value": str(exc), "passed": False})
    passed = all(a["passed"] for a in assertions)
    config = {"command": "reproduce-figure", "name": args.name,
              "resolution": list(res), "depth": depth, "seed": args.seed,
              "chaos_points": args.chaos_points, "window": list(window)}
    results = {"assertions": assertions, "passed": passed,
               "component_count": len(comps)}

    def write_images(out):
        rgb = render.region_rgb(region)
        render.write_ppm(f"{out}.ppm", rgb)
        if args.png:
            render.write_png(f"{out}.png", rgb)

    _emit(args.out, config, results, started, [write_images])
    return EXIT_OK if passed else EXIT_INDETERMINATE


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="semijulia",
        description="Julia sets of polynomial semigroups: renderers, "
                    "certificates, and curve diagnostics")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, gens=True):
        if gens:
            sp.add_argument("--gens", required=True,
                            help="generator config JSON (or bundled:disconnected-pair)")
        sp.add_argument("--out", default=None, help="output path prefix")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--png", action="store_true", help="also write PNG")
        sp.add_argument("--workers", type=int,
                        default=max(1, os.cpu_count() or 1))

    sp = sub.add_parser("postcritical", help="postcritical boundedness certificate")
    common(sp)
    sp.add_argument("--depth", type=int, default=24)
    sp.add_argument("--point-cap", type=int, default=200_000)
    sp.set_defaults(func=cmd_postcritical)

    sp = sub.add_parser("julia", help="global Julia set grid and components")
    common(sp)
    sp.add_argument("--window", default="-4.5,4.5,-4.5,4.5")
    sp.add_argument("--res", default="512")
    sp.add_argument("--depth", type=int, default=24)
    sp.add_argument("--budget", type=int, default=1_000_000)
    sp.add_argument("--chaos-points", type=int, default=400_000)
    sp.set_defaults(func=cmd_julia)

    sp = sub.add_parser("fiber", help="sequence-wise escape grid and diagnostics")
    common(sp)
    sp.add_argument("--seq", required=True)
    sp.add_argument("--window", default="-4.5,4.5,-4.5,4.5")
    sp.add_argument("--res", default="512")
    sp.add_argument("--max-iter", type=int, default=512)
    sp.set_defaults(func=cmd_fiber)

    sp = sub.add_parser("classify", help="syntactic sequence trichotomy")
    common(sp)
    sp.add_argument("--seq", required=True)
    sp.add_argument("--j", type=int, required=True,
                    help="index of the generator with non-Jordan Julia set")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("random-stats", help="Monte Carlo fiber statistics")
    common(sp)
    sp.add_argument("--weights", default=None)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--length", type=int, default=256)
    sp.add_argument("--res", type=int, default=512)
    sp.add_argument("--window", default="-4.5,4.5,-4.5,4.5")
    sp.add_argument("--ladder", default=None,
                    help="comma-separated doubling resolutions for area ratios")
    sp.set_defaults(func=cmd_random_stats)

    sp = sub.add_parser("cantor-verify", help="two-generator preimage separation")
    common(sp)
    sp.add_argument("--region", required=True)
    sp.set_defaults(func=cmd_cantor_verify)

    sp = sub.add_parser("reproduce-figure", help="pinned example reproduction")
    common(sp, gens=False)
    sp.add_argument("name", help="figure name (dcgraph)")
    sp.add_argument("--res", default="1024")
    sp.add_argument("--chaos-points", type=int, default=1_500_000)
    sp.set_defaults(func=cmd_reproduce_figure)

    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.out is None:
        args.out = f"out/{args.command.replace('-', '_')}"
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except IndeterminateError as exc:
        print(f"indeterminate: {exc}", file=sys.stderr)
        return EXIT_INDETERMINATE
    except SemijuliaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
