"""Least-squares identification of field coefficients from logged confidences."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .domain import GridDomain
from .reward import REDUCED6_IN_FULL20, Basis, RewardModel, eval_basis, reward
from .sensor import read_records

COND_LIMIT = 1e12


class RankDeficientError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


@dataclass
class Dataset:
    positions: np.ndarray  # (M, 3)
    confidences: np.ndarray  # (M,)
    source: str = "synthetic"

    def __len__(self) -> int:
        return self.confidences.size

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["px", "py", "pz", "confidence"])
            for p, c in zip(self.positions, self.confidences):
                w.writerow([repr(float(v)) for v in p] + [repr(float(c))])


@dataclass
class FitReport:
    theta: np.ndarray
    basis: Basis
    mean_error: float
    residuals: np.ndarray
    condition: float = float("nan")
    n_samples: int = 0

    def to_dict(self) -> dict:
        return {
            "basis": self.basis.value,
            "regressors": self.basis.names,
            "theta": [float(v) for v in self.theta],
            "mean_error": self.mean_error,
            "condition_number": self.condition,
            "n_samples": self.n_samples,
        }


@dataclass
class PruneResult:
    kept: list[int]
    kept_names: list[str]
    reduced_theta: np.ndarray
    matches_reduced6: bool
    reduced6_indices: tuple[int, ...] = field(default=REDUCED6_IN_FULL20)

    def to_dict(self) -> dict:
        return {
            "magnitude_kept": self.kept,
            "magnitude_kept_names": self.kept_names,
            "reduced6_indices": list(self.reduced6_indices),
            "reduced6_theta": [float(v) for v in self.reduced_theta],
            "matches_reduced6": self.matches_reduced6,
        }


def load_dataset(path: str | Path, min_rows: int = 1) -> Dataset:
    """Read a dataset CSV; rows flagged ``detected=0`` are dropped."""
    records = read_records(path)
    rows = [(p, c) for p, c, detected in records if detected]
    if len(rows) < min_rows:
        raise InsufficientDataError(f"{path}: {len(rows)} usable rows, need at least {min_rows}")
    pos = np.array([p for p, _ in rows], dtype=float).reshape(-1, 3)
    conf = np.array([c for _, c in rows], dtype=float)
    return Dataset(pos, conf, str(path))


def synthesize_dataset(
    model: RewardModel,
    grid: GridDomain,
    noise_std: float = 0.0,
    rng: np.random.Generator | None = None,
) -> Dataset:
    """Field values at every grid node, optionally with Gaussian noise."""
    conf = np.asarray(reward(model, grid.positions), dtype=float)
    if noise_std > 0:
        rng = rng if rng is not None else np.random.default_rng()
        conf = conf + rng.normal(0.0, noise_std, conf.size)
    return Dataset(np.array(grid.positions), conf, "synthetic")


def fit_least_squares(ds: Dataset, basis: Basis, allow_rank_deficient: bool = False) -> FitReport:
    """Ordinary least squares via SVD.

    Note that on a sphere the Full20 basis is exactly collinear
    (x^2 + y^2 + z^2 = r^2 and its multiples by x, y, z), so fitting it to
    hemisphere data raises unless ``allow_rank_deficient`` is set, in which
    case the minimum-norm solution is returned.
    """
    if len(ds) < basis.dim:
        raise InsufficientDataError(f"{len(ds)} samples cannot determine {basis.dim} coefficients")
    X = eval_basis(basis, ds.positions)
    s = np.linalg.svd(X, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    if cond > COND_LIMIT and not allow_rank_deficient:
        raise RankDeficientError(
            f"design matrix condition number {cond:.3g} exceeds {COND_LIMIT:.0e}; "
            "sample positions do not separate the regressors (degenerate grid?)"
        )
    theta, *_ = np.linalg.lstsq(X, ds.confidences, rcond=None)
    residuals = X @ theta - ds.confidences
    return FitReport(
        theta=theta,
        basis=basis,
        mean_error=float(np.mean(np.abs(residuals))),
        residuals=residuals,
        condition=cond,
        n_samples=len(ds),
    )


def prune_basis(report: FitReport, magnitude_floor: float) -> PruneResult:
    """Indices of Full20 coefficients with ``|theta| >= magnitude_floor``.

    The automatic kept set is reported next to the fixed six-term set; the
    six-term coefficients are read off at their Full20 positions.
    """
    if report.basis is not Basis.FULL20:
        raise ValueError("pruning starts from a Full20 fit")
    theta = np.asarray(report.theta)
    kept = [int(i) for i in np.flatnonzero(np.abs(theta) >= magnitude_floor)]
    names = Basis.FULL20.names
    return PruneResult(
        kept=kept,
        kept_names=[names[i] for i in kept],
        reduced_theta=theta[list(REDUCED6_IN_FULL20)].copy(),
        matches_reduced6=sorted(kept) == sorted(REDUCED6_IN_FULL20),
    )


def write_report(path: str | Path, report: FitReport, prune: PruneResult | None = None) -> None:
    out = report.to_dict()
    if prune is not None:
        out["prune"] = prune.to_dict()
    Path(path).write_text(json.dumps(out, indent=2) + "\n")
