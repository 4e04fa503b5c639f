"""Paired DCEE / MPC / Entropy batch on a scenario under both stop rules.

    python3 scripts/run_s1_comparison.py --runs 100 --out results/s1

Writes one sub-directory per stop rule with the usual CSV and SVG exports and
prints a median/reach table.
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from activeview.harness import export_csv, export_svg, run_batch
from activeview.scenario import STOP_RULES, load_scenario


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="s1")
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--max-steps", type=int)
    ap.add_argument("--rules", default=",".join(STOP_RULES))
    ap.add_argument("--out", type=Path, default=Path("results/s1"))
    args = ap.parse_args()

    base = load_scenario(args.scenario)
    if args.max_steps is not None:
        base = base.with_(max_steps=args.max_steps)
    for rule in args.rules.split(","):
        sc = base.with_(stop_rule=rule)
        kinds = [sc.planner(n) for n in ("dcee", "mpc", "entropy")]
        t0 = time.perf_counter()
        rep = run_batch(sc, kinds, args.runs, args.seed, workers=args.workers)
        dt = time.perf_counter() - t0
        out = args.out / rule
        export_csv(rep, out)
        export_svg(rep, out)
        print(f"stop rule {rule!r}: {args.runs} paired seeds, {dt:.1f}s")
        for name, s in rep.planners.items():
            p20 = s.series_at("P", 20).mean()
            print(f"  {name:8s} median {s.median_steps:>6}  reached {s.n_reached:3d}/{len(s.runs)}  mean P@20 {p20:.3f}")


if __name__ == "__main__":
    main()
