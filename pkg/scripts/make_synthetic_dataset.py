"""Sample a scenario's field on a grid and write a ``fit``-ready CSV.

    python3 scripts/make_synthetic_dataset.py --scenario s1 --noise-std 0.05 --out data/s1.csv
    activeview fit --dataset data/s1.csv --basis 6
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from activeview.domain import build_grid
from activeview.identify import synthesize_dataset
from activeview.scenario import load_scenario


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="s1")
    ap.add_argument("--n-elev", type=int, default=11)
    ap.add_argument("--n-azim", type=int, default=21)
    ap.add_argument("--noise-std", type=float, default=0.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, required=True)
    args = ap.parse_args()

    sc = load_scenario(args.scenario)
    grid = build_grid(sc.grid.radius, args.n_elev, args.n_azim)
    ds = synthesize_dataset(sc.model, grid, args.noise_std, np.random.default_rng(args.seed))
    args.out.parent.mkdir(parents=True, exist_ok=True)
    ds.to_csv(args.out)
    print(f"wrote {len(ds.confidences)} rows to {args.out}")


if __name__ == "__main__":
    main()
