"""Scenario configuration and the shipped fixtures."""

from __future__ import annotations

import json
import logging

from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .domain import GridDomain, Viewpoint, build_grid
from .estimator import LikelihoodSpec, PriorSpec
from .planner import DCEE, MPC, Entropy, PlannerKind
from .reward import Basis, RewardModel, constrained_optimum, reward
from .sensor import NoiseKind, NoiseModel, OcclusionKind, OcclusionModel

log = logging.getLogger(__name__)

FIXTURES = ("s1", "s2", "s3")
# "measurement": the noisy reading crosses the threshold (default).
# "field": the noise-free confidence at the current node does.
STOP_RULES = ("measurement", "field")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ResampleConfig:
    ess_fraction: float = 0.5
    roughening: float = 0.01


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    grid: GridDomain
    model: RewardModel
    noise: NoiseModel
    occlusion: OcclusionModel
    prior: PriorSpec
    n_particles: int
    likelihood: LikelihoodSpec
    start: Viewpoint
    target: Viewpoint
    threshold: float
    max_steps: int = 200
    resampling: ResampleConfig = field(default_factory=ResampleConfig)
    dcee: DCEE = field(default_factory=DCEE)
    entropy: Entropy = field(default_factory=Entropy)
    stop_rule: str = "measurement"
    start_snap: float = 0.0
    target_snap: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ScenarioError(f"threshold must lie in [0, 1], got {self.threshold}")
        if self.max_steps < 1:
            raise ScenarioError("max_steps must be >= 1")
        if self.stop_rule not in STOP_RULES:
            raise ScenarioError(f"stop_rule must be one of {STOP_RULES}, got {self.stop_rule!r}")
        if self.n_particles < 1:
            raise ScenarioError("particle count must be >= 1")
        if self.prior.dim != self.model.basis.dim:
            raise ScenarioError(f"prior has {self.prior.dim} bounds, basis needs {self.model.basis.dim}")
        for label, v in (("start", self.start), ("target", self.target)):
            if not self.grid.contains(v):
                raise ScenarioError(f"{label} viewpoint is not on the grid")

    @property
    def basis(self) -> Basis:
        return self.model.basis

    @property
    def field_max(self) -> float:
        return float(np.max(reward(self.model, self.grid.positions)))

    @property
    def entropy_range(self) -> tuple[float, float]:
        if self.entropy.value_range is not None:
            return self.entropy.value_range
        s = self.likelihood.sigma
        return (-3 * s, self.field_max + 3 * s)

    def planner(self, name: str) -> PlannerKind:
        name = name.strip().lower()
        if name == "dcee":
            return self.dcee
        if name == "mpc":
            return MPC()
        if name == "entropy":
            return self.entropy
        raise ScenarioError(f"unknown planner {name!r}; expected dcee, mpc or entropy")

    def with_(self, **changes) -> Scenario:
        return replace(self, **changes)


def _fixture_path(name: str) -> Path:
    return Path(str(resources.files("activeview") / "scenarios" / name))


def load_theta(spec) -> tuple[Basis, np.ndarray]:
    """Accepts an inline list, a ``{"basis", "theta"}`` mapping, or a file name."""
    if isinstance(spec, str):
        path = Path(spec)
        if not path.exists():
            path = _fixture_path(spec if spec.endswith(".json") else spec + ".json")
        spec = json.loads(path.read_text())
    if isinstance(spec, dict):
        theta = np.asarray(spec["theta"], dtype=float)
        basis = Basis.from_dim(spec.get("basis", theta.size))
        return basis, theta
    theta = np.asarray(spec, dtype=float)
    return Basis.from_dim(theta.size), theta


def _snap(grid: GridDomain, p, label: str, scenario: str) -> tuple[Viewpoint, float]:
    v, dist = grid.nearest(p)
    if dist > 1e-6:
        log.info("%s: %s %s snapped to grid node (%d, %d), distance %.4f",
                 scenario, label, list(p), v.elev_idx, v.azim_idx, dist)
    return v, dist


def scenario_from_dict(cfg: dict, base_dir: Path | None = None) -> Scenario:
    try:
        name = cfg.get("name", "scenario")
        g = cfg["grid"]
        grid = build_grid(g["radius"], g["n_elev"], g["n_azim"])

        theta_spec = cfg["theta"]
        if isinstance(theta_spec, str) and base_dir is not None and (base_dir / theta_spec).exists():
            theta_spec = str(base_dir / theta_spec)
        basis, theta = load_theta(theta_spec)
        model = RewardModel(basis, theta)

        nz = cfg.get("noise", {})
        noise = NoiseModel(float(nz.get("variance", 0.5)), NoiseKind(nz.get("kind", "gaussian")))
        oc = cfg.get("occlusion", {})
        occlusion = OcclusionModel(
            OcclusionKind(oc.get("kind", "always")),
            float(oc.get("c_min", 0.0)),
            float(oc.get("p_miss", 0.0)),
        )

        pr = cfg.get("prior", {"lo": -3.0, "hi": 3.0})
        if "around_truth" in pr:
            prior = PriorSpec.around(theta, float(pr["around_truth"]))
        else:
            lo = np.broadcast_to(np.asarray(pr["lo"], dtype=float), (basis.dim,))
            hi = np.broadcast_to(np.asarray(pr["hi"], dtype=float), (basis.dim,))
            prior = PriorSpec(lo.copy(), hi.copy())

        sigma = cfg.get("likelihood_sigma")
        if sigma is None:
            sigma = noise.std
        likelihood = LikelihoodSpec(float(sigma))

        start, start_snap = _snap(grid, cfg["start"], "start", name)
        if cfg.get("target") is None:
            target, target_snap = constrained_optimum(model, grid)[0], 0.0
        else:
            target, target_snap = _snap(grid, cfg["target"], "target", name)

        rs = cfg.get("resample", {})
        resampling = ResampleConfig(float(rs.get("ess_fraction", 0.5)), float(rs.get("roughening", 0.01)))

        pl = cfg.get("planner", {})
        d = pl.get("dcee", {})
        dcee = DCEE(int(d.get("m_samples", 5)), bool(d.get("hypothetical", True)))
        e = pl.get("entropy", {})
        rng_cfg = e.get("range")
        entropy = Entropy(
            int(e.get("bins", 32)),
            tuple(float(v) for v in rng_cfg) if rng_cfg is not None else None,
            bool(e.get("hypothetical", False)),
            int(e.get("m_samples", 5)),
        )
        return Scenario(
            name=name,
            grid=grid,
            model=model,
            noise=noise,
            occlusion=occlusion,
            prior=prior,
            n_particles=int(cfg.get("particles", 10000)),
            likelihood=likelihood,
            start=start,
            target=target,
            threshold=float(cfg.get("threshold", 0.95)),
            max_steps=int(cfg.get("max_steps", 200)),
            stop_rule=str(cfg.get("stop_rule", "measurement")),
            resampling=resampling,
            dcee=dcee,
            entropy=entropy,
            start_snap=start_snap,
            target_snap=target_snap,
        )
    except KeyError as exc:
        raise ScenarioError(f"scenario is missing required key {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc)) from exc


def load_scenario(path_or_name: str | Path) -> Scenario:
    """Load a scenario file, or a shipped fixture by name (``s1``, ``s2``, ``s3``)."""
    path = Path(path_or_name)
    if not path.exists():
        candidate = str(path_or_name)
        path = _fixture_path(candidate if candidate.endswith(".json") else candidate + ".json")
        if not path.exists():
            raise ScenarioError(f"no scenario file or fixture named {path_or_name!r}")
    cfg = json.loads(path.read_text())
    return scenario_from_dict(cfg, base_dir=path.parent)


def describe(sc: Scenario) -> dict:
    """Grid optimum, snapped start/target and a concavity diagnostic."""
    from .reward import concavity_report, unconstrained_optimum

    best, value = constrained_optimum(sc.model, sc.grid)
    out = {
        "name": sc.name,
        "grid": f"{sc.grid.n_elev}x{sc.grid.n_azim}, radius {sc.grid.radius}",
        "grid_optimum": {"index": [best.elev_idx, best.azim_idx], "position": list(best.position), "value": value},
        "start": {"index": [sc.start.elev_idx, sc.start.azim_idx], "position": list(sc.start.position),
                  "snap_distance": sc.start_snap, "value": float(reward(sc.model, sc.start.position))},
        "target": {"index": [sc.target.elev_idx, sc.target.azim_idx], "position": list(sc.target.position),
                   "snap_distance": sc.target_snap},
        "field_max": sc.field_max,
        "threshold": sc.threshold,
    }
    if sc.basis is Basis.REDUCED6:
        try:
            g = unconstrained_optimum(sc.model.theta)
        except ValueError as exc:
            out["closed_form_optimum"] = str(exc)
        else:
            rep = concavity_report(sc.model, g)
            out["closed_form_optimum"] = {
                "position": g.tolist(),
                "hessian_eigenvalues": rep["eigenvalues"].tolist(),
                "negative_definite": rep["negative_definite"],
            }
    best_rep = concavity_report(sc.model, best.position)
    out["grid_optimum"]["hessian_eigenvalues"] = best_rep["eigenvalues"].tolist()
    out["grid_optimum"]["negative_definite"] = best_rep["negative_definite"]
    return out


