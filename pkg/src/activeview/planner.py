"""One-step viewpoint scoring: dual-control (DCEE), MPC and viewpoint entropy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Action, GridDomain, Viewpoint, reachable_set
from .estimator import LikelihoodSpec, ParticleEnsemble, reweight
from .reward import Basis

TIE_TOL = 1e-12


@dataclass(frozen=True)
class DCEE:
    m_samples: int = 5
    hypothetical: bool = True
    name: str = "dcee"

    def __post_init__(self) -> None:
        if self.m_samples < 1:
            raise ValueError("m_samples must be >= 1")


@dataclass(frozen=True)
class MPC:
    name: str = "mpc"


@dataclass(frozen=True)
class Entropy:
    n_bins: int = 32
    value_range: tuple[float, float] | None = None  # None: filled in from the scenario
    hypothetical: bool = False
    m_samples: int = 5
    name: str = "entropy"

    def __post_init__(self) -> None:
        if self.n_bins < 2:
            raise ValueError("n_bins must be >= 2")
        if self.value_range is not None and not self.value_range[0] < self.value_range[1]:
            raise ValueError(f"empty entropy value range {self.value_range}")


PlannerKind = DCEE | MPC | Entropy


@dataclass(frozen=True)
class ScoredAction:
    action: Action
    successor: Viewpoint
    score: float


def _moments(weights: np.ndarray, preds: np.ndarray) -> tuple[float, float]:
    mean = float(weights @ preds)
    var = float(weights @ (preds - mean) ** 2)
    return mean, var


def predictive_moments(ens: ParticleEnsemble, basis: Basis, p) -> tuple[float, float]:
    """Mean and parameter-induced variance of the predicted field value at ``p``."""
    return _moments(ens.weights, ens.predictions(basis, p))


def mpc_score(ens: ParticleEnsemble, basis: Basis, p) -> float:
    mean, var = predictive_moments(ens, basis, p)
    return mean * mean + var


def _sample_measurements(weights, preds, sigma, m, rng) -> np.ndarray:
    idx = rng.choice(preds.size, size=m, p=weights)
    return preds[idx] + sigma * rng.standard_normal(m)


def hypothetical_moments(
    ens: ParticleEnsemble,
    basis: Basis,
    p,
    lik: LikelihoodSpec,
    m_samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Predictive (mean, var) at ``p`` after a hypothetical update with each of
    ``m_samples`` simulated measurements there. Returns shape ``(m_samples, 2)``."""
    preds = ens.predictions(basis, p)
    c_hat = _sample_measurements(ens.weights, preds, lik.sigma, m_samples, rng)
    out = np.empty((m_samples, 2))
    for s, c in enumerate(c_hat):
        w, _ = reweight(ens.weights, preds, c, lik.sigma)
        out[s] = _moments(w, preds)
    return out


def dcee_score(
    ens: ParticleEnsemble,
    basis: Basis,
    p,
    lik: LikelihoodSpec,
    m_samples: int,
    rng: np.random.Generator,
    hypothetical: bool = True,
) -> float:
    """Monte Carlo mean over predicted measurements of hypothetical mean^2 + var."""
    if not hypothetical:
        return mpc_score(ens, basis, p)
    mv = hypothetical_moments(ens, basis, p, lik, m_samples, rng)
    return float(np.mean(mv[:, 0] ** 2 + mv[:, 1]))


def _histogram_entropy(samples: np.ndarray, n_bins: int, value_range) -> float:
    lo, hi = value_range
    width = (hi - lo) / n_bins
    bins = np.clip(np.floor((samples - lo) / width).astype(np.int64), 0, n_bins - 1)
    counts = np.bincount(bins, minlength=n_bins)
    prob = counts[counts > 0] / samples.size
    return float(-np.sum(prob * np.log(prob)))


def entropy_score(
    ens: ParticleEnsemble,
    basis: Basis,
    p,
    lik: LikelihoodSpec,
    n_bins: int,
    value_range: tuple[float, float],
    rng: np.random.Generator,
    hypothetical: bool = False,
    m_samples: int = 5,
) -> float:
    """Shannon entropy (nats) of the binned predictive measurement at ``p``.

    Samples falling outside ``value_range`` are counted in the edge bins.
    """
    preds = ens.predictions(basis, p)
    n_draws = max(ens.n, 4096)
    if not hypothetical:
        draws = _sample_measurements(ens.weights, preds, lik.sigma, n_draws, rng)
        return _histogram_entropy(draws, n_bins, value_range)
    total = 0.0
    for c in _sample_measurements(ens.weights, preds, lik.sigma, m_samples, rng):
        w, _ = reweight(ens.weights, preds, c, lik.sigma)
        draws = _sample_measurements(w, preds, lik.sigma, n_draws, rng)
        total += _histogram_entropy(draws, n_bins, value_range)
    return total / m_samples


def score(kind: PlannerKind, ens, basis, p, lik, rng, value_range=None) -> float:
    if isinstance(kind, MPC):
        return mpc_score(ens, basis, p)
    if isinstance(kind, DCEE):
        return dcee_score(ens, basis, p, lik, kind.m_samples, rng, kind.hypothetical)
    if isinstance(kind, Entropy):
        vr = kind.value_range or value_range
        if vr is None:
            raise ValueError("entropy planner needs a value_range")
        return entropy_score(ens, basis, p, lik, kind.n_bins, vr, rng, kind.hypothetical, kind.m_samples)
    raise TypeError(f"unknown planner {kind!r}")


def argmax_random_tie(scores: np.ndarray, rng: np.random.Generator) -> int:
    best = np.max(scores)
    ties = np.flatnonzero(scores >= best - TIE_TOL)
    if ties.size == 1:
        return int(ties[0])
    return int(ties[rng.integers(ties.size)])


def select_action(
    kind: PlannerKind,
    grid: GridDomain,
    current: Viewpoint,
    ens: ParticleEnsemble,
    basis: Basis,
    lik: LikelihoodSpec,
    rng: np.random.Generator,
    value_range: tuple[float, float] | None = None,
) -> ScoredAction:
    """Score all five successors and return a best one.

    Every candidate gets its own generator seeded from ``rng`` so the result
    does not depend on the order in which candidates are scored.
    """
    options = reachable_set(grid, current)
    seeds = rng.integers(0, 2**63, size=len(options))
    scores = np.array([
        score(kind, ens, basis, succ.p, lik, np.random.default_rng(int(s)), value_range)
        for (_, succ), s in zip(options, seeds)
    ])
    k = argmax_random_tie(scores, rng)
    action, succ = options[k]
    return ScoredAction(action, succ, float(scores[k]))

