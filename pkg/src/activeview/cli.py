"""Command line entry points: ``simulate``, ``fit`` and ``inspect``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .harness import export_csv, export_svg, run_batch
from .identify import fit_least_squares, load_dataset, prune_basis, write_report
from .reward import Basis
from .scenario import describe, load_scenario


def _simulate(args) -> int:
    sc = load_scenario(args.scenario)
    changes = {}
    if args.max_steps is not None:
        changes["max_steps"] = args.max_steps
    if args.particles is not None:
        changes["n_particles"] = args.particles
    if args.stop_rule is not None:
        changes["stop_rule"] = args.stop_rule
    if changes:
        sc = sc.with_(**changes)
    kinds = [sc.planner(name) for name in args.planners.split(",") if name.strip()]
    if not kinds:
        raise SystemExit("no planners given")

    def progress(done, total):
        if done % 10 == 0 or done == total:
            print(f"\r{done}/{total} episodes", end="", file=sys.stderr, flush=True)

    report = run_batch(sc, kinds, args.runs, args.seed, workers=args.workers,
                       progress=None if args.quiet else progress)
    if not args.quiet:
        print(file=sys.stderr)
    files = export_csv(report, args.out)
    if not args.no_svg:
        files += export_svg(report, args.out)
    for name, s in report.planners.items():
        print(f"{name:8s} median steps {s.median_steps:>6}  reached {s.n_reached}/{len(s.runs)}")
    for f in files:
        print(f"wrote {f}")
    return 0


def _fit(args) -> int:
    basis = Basis.from_dim(args.basis)
    ds = load_dataset(args.dataset, min_rows=basis.dim)
    report = fit_least_squares(ds, basis, allow_rank_deficient=args.allow_rank_deficient)
    prune = None
    if args.prune_floor is not None:
        if basis is not Basis.FULL20:
            raise SystemExit("--prune-floor needs --basis 20")
        prune = prune_basis(report, args.prune_floor)
    if args.out:
        write_report(args.out, report, prune)
        print(f"wrote {args.out}")
    else:
        out = report.to_dict()
        if prune is not None:
            out["prune"] = prune.to_dict()
        print(json.dumps(out, indent=2))
    return 0


def _inspect(args) -> int:
    print(json.dumps(describe(load_scenario(args.scenario)), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="activeview", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a paired batch of episodes and export CSV/SVG")
    p.add_argument("--scenario", required=True, help="scenario JSON file or fixture name (s1, s2, s3)")
    p.add_argument("--planners", default="dcee,mpc,entropy")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--particles", type=int)
    p.add_argument("--stop-rule", choices=["measurement", "field"])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-svg", action="store_true")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_simulate)

    p = sub.add_parser("fit", help="least-squares fit of field coefficients to a dataset CSV")
    p.add_argument("--dataset", required=True, type=Path)
    p.add_argument("--basis", choices=["6", "20"], default="6")
    p.add_argument("--prune-floor", type=float)
    p.add_argument("--allow-rank-deficient", action="store_true",
                   help="return the minimum-norm solution instead of failing on collinear regressors")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=_fit)

    p = sub.add_parser("inspect", help="print grid optimum, snapped positions and curvature diagnostic")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
