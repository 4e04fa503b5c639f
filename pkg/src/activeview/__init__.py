"""Viewpoint planning for active object detection on a hemispherical grid.

A camera moves over a discretised hemisphere, measures a noisy confidence
score, keeps a particle posterior over a polynomial confidence field and picks
its next move with a dual-control (DCEE), MPC or viewpoint-entropy objective.
"""

from .domain import ACTIONS, Action, GridDomain, Viewpoint, apply_action, build_grid, reachable_set, to_cartesian
from .estimator import (
    LikelihoodSpec,
    ParticleEnsemble,
    PriorSpec,
    bayes_update,
    effective_sample_size,
    init_ensemble,
    posterior_cov,
    posterior_mean,
    posterior_trace,
    resample,
)
from .harness import BatchReport, RunMetrics, export_csv, export_svg, run_batch, run_episode
from .identify import Dataset, FitReport, fit_least_squares, load_dataset, prune_basis
from .planner import DCEE, MPC, Entropy, dcee_score, entropy_score, mpc_score, predictive_moments, select_action
from .reward import (
    Basis,
    RewardModel,
    constrained_optimum,
    eval_basis,
    reward,
    reward_gradient,
    stationary_points,
    unconstrained_optimum,
)
from .scenario import Scenario, load_scenario
from .sensor import Measurement, NoiseModel, OcclusionModel, measure, replay_source

__version__ = "0.1.0"
