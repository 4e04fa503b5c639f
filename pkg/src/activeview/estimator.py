"""Particle approximation of the posterior over field coefficients."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .reward import Basis, eval_basis
from .sensor import Measurement


@dataclass(frozen=True)
class LikelihoodSpec:
    sigma: float

    def __post_init__(self) -> None:
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"likelihood sigma must be positive and finite, got {self.sigma}")


@dataclass(frozen=True, eq=False)
class PriorSpec:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        lo = np.asarray(self.lo, dtype=float).reshape(-1)
        hi = np.asarray(self.hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("prior bounds differ in length")
        if not np.all(lo < hi):
            raise ValueError(f"invalid prior bounds: need lo < hi componentwise, got {lo} / {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def box(cls, lo: float, hi: float, dim: int) -> PriorSpec:
        return cls(np.full(dim, lo), np.full(dim, hi))

    @classmethod
    def around(cls, theta, factor: float = 2.0) -> PriorSpec:
        """Per-coefficient bounds between ``theta / factor`` and ``theta * factor``."""
        t = np.asarray(theta, dtype=float)
        a, b = t / factor, t * factor
        return cls(np.minimum(a, b), np.maximum(a, b))

    @property
    def dim(self) -> int:
        return self.lo.size


@dataclass(eq=False)
class ParticleEnsemble:
    particles: np.ndarray  # (N, d)
    weights: np.ndarray  # (N,)
    degenerate: bool = False

    @property
    def n(self) -> int:
        return self.weights.size

    @property
    def dim(self) -> int:
        return self.particles.shape[1]

    def predictions(self, basis: Basis, p) -> np.ndarray:
        """Each particle's field value at ``p``."""
        return self.particles @ eval_basis(basis, p)

    def to_csv(self, path: str | Path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"theta{i + 1}" for i in range(self.dim)] + ["weight"])
            for row, wt in zip(self.particles, self.weights):
                w.writerow([repr(float(v)) for v in row] + [repr(float(wt))])


def init_ensemble(prior: PriorSpec, n: int, rng: np.random.Generator) -> ParticleEnsemble:
    if n < 1:
        raise ValueError(f"particle count must be >= 1, got {n}")
    particles = rng.uniform(prior.lo, prior.hi, size=(n, prior.dim))
    return ParticleEnsemble(particles, np.full(n, 1.0 / n))


def _normalise_log(logw: np.ndarray) -> tuple[np.ndarray, bool]:
    top = np.max(logw)
    if not np.isfinite(top):
        n = logw.size
        return np.full(n, 1.0 / n), True
    w = np.exp(logw - top)
    return w / w.sum(), False


def reweight(weights: np.ndarray, predictions: np.ndarray, value: float, sigma: float) -> tuple[np.ndarray, bool]:
    """Multiply weights by a Gaussian likelihood in log space and renormalise."""
    with np.errstate(divide="ignore"):
        logw = np.log(weights)
    logw = logw - 0.5 * ((value - predictions) / sigma) ** 2
    return _normalise_log(logw)


def bayes_update(
    ens: ParticleEnsemble, basis: Basis, m: Measurement, lik: LikelihoodSpec
) -> ParticleEnsemble:
    """Reweight by the measurement likelihood; particles are untouched.

    A missed detection is pure noise whose likelihood does not depend on the
    coefficients, so the weights stay as they are.
    """
    if not m.detected:
        return ParticleEnsemble(ens.particles, ens.weights.copy())
    preds = ens.predictions(basis, m.position)
    weights, degenerate = reweight(ens.weights, preds, m.value, lik.sigma)
    return ParticleEnsemble(ens.particles, weights, degenerate)


def effective_sample_size(ens: ParticleEnsemble) -> float:
    return float(1.0 / np.sum(ens.weights ** 2))


def systematic_indices(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = weights.size
    positions = (rng.random() + np.arange(n)) / n
    cumsum = np.cumsum(weights)
    cumsum[-1] = 1.0
    return np.searchsorted(cumsum, positions, side="right")


def resample(
    ens: ParticleEnsemble, rng: np.random.Generator, roughening_scale: float = 0.0
) -> ParticleEnsemble:
    """Systematic resampling, then optional Gaussian roughening scaled by the
    per-coordinate spread of the resampled set."""
    if roughening_scale < 0:
        raise ValueError("roughening_scale must be >= 0")
    idx = systematic_indices(ens.weights, rng)
    particles = ens.particles[idx]
    if roughening_scale > 0:
        scale = roughening_scale * particles.std(axis=0)
        particles = particles + rng.normal(size=particles.shape) * scale
    return ParticleEnsemble(particles, np.full(ens.n, 1.0 / ens.n))


def posterior_mean(ens: ParticleEnsemble) -> np.ndarray:
    return ens.weights @ ens.particles


def posterior_cov(ens: ParticleEnsemble) -> np.ndarray:
    d = ens.particles - posterior_mean(ens)
    return (d * ens.weights[:, None]).T @ d


def posterior_trace(ens: ParticleEnsemble) -> float:
    d = ens.particles - posterior_mean(ens)
    return float(ens.weights @ np.sum(d * d, axis=1))
