"""Command-line entry point.

Exit codes: 0 ok, 1 usage error, 2 validation failure (oracle mismatch),
3 data error (unreadable or inconsistent input).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .criterion import StumpConfig
from .experiments import (
    EstimateConfig,
    RateStudySpec,
    estimate_report,
    oracle_check,
    rate_study,
    render_svg,
)
from .geometry import ConvexPolygon, convex_hull
from .io import (
    DataFormatError,
    read_config,
    read_data,
    read_polygon,
    read_scene,
    write_dose_response,
    write_grid,
)
from .smoothing import KernelSpec
from .synth import GroundTruthScene, SceneFormatError, sample_dose_response, sample_grid
from .tau import search_options, tau_iterate, weighted_sample

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_DATA = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _globals(p: argparse.ArgumentParser) -> None:
    # accepted before or after the subcommand
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (default 0)")
    p.add_argument("--config", type=Path, default=argparse.SUPPRESS,
                   help="flat key = value file with estimator settings")
    p.add_argument("--out-dir", type=Path, default=argparse.SUPPRESS,
                   help="where outputs go (default: current directory)")
    p.add_argument("--workers", type=int, default=argparse.SUPPRESS,
                   help="worker processes for studies (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="baselinezone", description="Convex baseline-zone estimation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _globals(parser)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="draw a synthetic data set")
    _globals(s)
    s.add_argument("--scene", type=Path, help="scene file (default: centred disc, r=0.25)")
    s.add_argument("--setting", choices=["dose_response", "regression"], default="dose_response")
    s.add_argument("--n", type=int, default=100, help="design points (dose response)")
    s.add_argument("--m", type=int, default=10, help="replicates (dose response) or grid side")
    s.add_argument("--output", type=Path, help="data file (default OUT_DIR/data.csv)")

    e = sub.add_parser("estimate", help="estimate the baseline zone of a data file")
    _globals(e)
    e.add_argument("data", type=Path)
    e.add_argument("--scene", type=Path, help="true scene, enables the metrics block")
    e.add_argument("--tau-mode", choices=["known", "init", "iterative"])
    e.add_argument("--tau", type=float)
    e.add_argument("--svg", action="store_true", help="also write estimate.svg")
    e.add_argument("--output", type=Path, help="report file (default OUT_DIR/report.json)")

    o = sub.add_parser("oracle-check", help="compare the optimizer with brute force")
    _globals(o)
    o.add_argument("--count", type=int, default=200)
    o.add_argument("--n-min", type=int, default=4)
    o.add_argument("--n-max", type=int, default=12)

    r = sub.add_parser("rate-study", help="median error against sample size")
    _globals(r)
    r.add_argument("--setting", choices=["dose_response", "regression"], default="dose_response")
    r.add_argument("--budgets", type=lambda t: [int(v) for v in t.split(",")],
                   help="comma list: n for dose response, m for regression")
    r.add_argument("--replications", type=int)
    r.add_argument("--p", type=float)
    r.add_argument("--tau-mode", choices=["known", "init", "iterative"])
    r.add_argument("--scene", type=Path)
    r.add_argument("--noiseless", action="store_true", help="add a sigma0 = 0 column")

    t = sub.add_parser("tau-fit", help="iterative baseline-level fit")
    _globals(t)
    t.add_argument("data", type=Path)
    t.add_argument("--max-iters", type=int)

    d = sub.add_parser("render", help="SVG of data, estimate and true zone")
    _globals(d)
    d.add_argument("data", type=Path)
    d.add_argument("--report", type=Path, help="estimate report JSON")
    d.add_argument("--polygon", type=Path, help="polygon JSON")
    d.add_argument("--scene", type=Path)
    d.add_argument("--output", type=Path, help="default OUT_DIR/render.svg")
    return parser


def _settings(args) -> dict:
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    return cfg


def _estimate_config(args, cfg: dict) -> EstimateConfig:
    base = EstimateConfig.from_config(cfg)
    if getattr(args, "tau_mode", None):
        base.tau_mode = args.tau_mode
    if getattr(args, "tau", None) is not None:
        base.tau = args.tau
    return EstimateConfig(**vars(base))


def _scene(path: Optional[Path]) -> Optional[GroundTruthScene]:
    return read_scene(path) if path is not None else None


def _out(args, default_name: str, explicit: Optional[Path] = None) -> Path:
    if explicit is not None:
        explicit.parent.mkdir(parents=True, exist_ok=True)
        return explicit
    out_dir = getattr(args, "out_dir", Path("."))
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / default_name


def cmd_simulate(args, cfg) -> int:
    scene = _scene(args.scene) or GroundTruthScene()
    seed = getattr(args, "seed", 0)
    path = _out(args, "data.csv", args.output)
    if args.setting == "dose_response":
        write_dose_response(path, sample_dose_response(scene, args.m, args.n, seed))
    else:
        write_grid(path, sample_grid(scene, args.m, seed))
    print(path)
    return EXIT_OK


def cmd_estimate(args, cfg) -> int:
    data = read_data(args.data)
    scene = _scene(args.scene)
    ec = _estimate_config(args, cfg)
    if scene is not None and getattr(args, "tau", None) is None and "tau" not in cfg:
        ec.tau = scene.tau0
    report = estimate_report(data, ec, scene, seed=getattr(args, "seed", 0))
    path = _out(args, "report.json", args.output)
    path.write_text(json.dumps(report, indent=2) + "\n")
    if args.svg:
        poly = convex_hull(report["optimizer"]["vertices"])
        kernel, policy = KernelSpec(ec.kernel), ec.policy()
        sample = weighted_sample(data, StumpConfig(report["tau_hat"], ec.gamma), kernel, policy)
        path.with_name("estimate.svg").write_text(render_svg(sample, poly, scene))
    opt = report["optimizer"]
    print(f"{path}: criterion={opt['criterion']:.6g} vertices={len(opt['vertices'])} "
          f"included={opt['included_count']}")
    return EXIT_OK


def cmd_oracle_check(args, cfg) -> int:
    res = oracle_check(args.count, args.n_min, args.n_max, getattr(args, "seed", 0))
    for row in res["rows"]:
        if not row["ok"]:
            print(f"MISMATCH instance={row['instance']} n={row['n']} dp={row['dp']:.15g} "
                  f"brute={row['brute']:.15g} bookkeeping={row['bookkeeping_diff']:.3g}")
    print(f"oracle-check: {res['passed']}/{res['count']} passed in {res['elapsed_s']:.1f}s")
    return EXIT_OK if res["all_ok"] else EXIT_VALIDATION


def cmd_rate_study(args, cfg) -> int:
    kw = {"setting": args.setting, "seed": getattr(args, "seed", 0)}
    for key, conv in (("p", float), ("replications", int), ("m0", float), ("beta", float),
                      ("h0", float), ("delta_thin", float), ("max_iters", int),
                      ("tau_mode", str)):
        if key in cfg:
            kw[key] = conv(cfg[key])
    for key in ("p", "replications", "tau_mode", "budgets"):
        if getattr(args, key, None) is not None:
            kw[key] = getattr(args, key)
    if "budgets" not in kw and args.setting == "regression":
        kw["budgets"] = (50, 80, 120, 180)
    if "replications" not in kw and args.setting == "regression":
        kw["replications"] = 30
    if args.scene:
        kw["scene"] = read_scene(args.scene)
    kw["noiseless"] = args.noiseless
    spec = RateStudySpec(**kw)
    res = rate_study(spec, workers=getattr(args, "workers", 1))
    path = _out(args, f"rate_study_{spec.setting}.csv")
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(res["rows"][0]), lineterminator="\n")
        w.writeheader()
        w.writerows(res["rows"])
    summary = {k: res[k] for k in ("setting", "x", "slope", "slope_ci95", "rows")}
    if "noiseless_rows" in res:
        summary["noiseless_rows"] = res["noiseless_rows"]
    path.with_suffix(".json").write_text(json.dumps(summary, indent=2) + "\n")
    for row in res["rows"]:
        print(f"budget={row['budget']} median_d={row['median_d']:.5f} iqr={row['iqr_d']:.5f}")
    lo, hi = res["slope_ci95"]
    print(f"slope={res['slope']:.3f} (95% bootstrap CI {lo:.3f}..{hi:.3f}) -> {path}")
    return EXIT_OK


def cmd_tau_fit(args, cfg) -> int:
    data = read_data(args.data)
    ec = _estimate_config(args, cfg)
    kernel, policy = KernelSpec(ec.kernel), ec.policy()
    opts = search_options(data, policy, ec.vertex_stride, ec.max_candidates)
    fit, _ = tau_iterate(data, StumpConfig(0.0, ec.gamma), args.max_iters or ec.max_iters,
                         ec.delta_thin, kernel=kernel, policy=policy, **opts)
    path = _out(args, "tau_fit.json")
    path.write_text(json.dumps(fit.to_dict(), indent=2) + "\n")
    print(f"{path}: tau_init={fit.tau_init:.6g} tau_refined={fit.tau_refined:.6g} "
          f"iterations={fit.iterations} converged={fit.converged}")
    return EXIT_OK


def cmd_render(args, cfg) -> int:
    data = read_data(args.data)
    ec = _estimate_config(args, cfg)
    poly: Optional[ConvexPolygon] = None
    tau = ec.tau
    if args.report:
        report = json.loads(args.report.read_text())
        poly = convex_hull(report["optimizer"]["vertices"])
        tau = report.get("tau_hat", tau)
    if args.polygon:
        poly = read_polygon(args.polygon)
    sample = weighted_sample(data, StumpConfig(tau, ec.gamma), KernelSpec(ec.kernel), ec.policy())
    path = _out(args, "render.svg", args.output)
    path.write_text(render_svg(sample, poly, _scene(args.scene)))
    print(path)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "oracle-check": cmd_oracle_check,
    "rate-study": cmd_rate_study,
    "tau-fit": cmd_tau_fit,
    "render": cmd_render,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be at least 1")
    try:
        cfg = _settings(args)
        return COMMANDS[args.command](args, cfg)
    except (DataFormatError, SceneFormatError, json.JSONDecodeError, OSError) as exc:
        print(f"baselinezone: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"baselinezone: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
