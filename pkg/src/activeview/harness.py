"""Episode loop (sense, estimate, plan, move), batches, and report export."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .domain import apply_action
from .estimator import bayes_update, effective_sample_size, init_ensemble, posterior_trace, resample
from .planner import PlannerKind, select_action
from .reward import reward
from .scenario import Scenario
from .sensor import measure


@dataclass(frozen=True)
class StepRecord:
    step: int
    position: tuple[float, float, float]
    action: str  # move taken after this step's measurement; "" on the last step
    value: float
    detected: bool
    distance: float
    variance: float
    ess: float
    resampled: bool


@dataclass
class RunMetrics:
    planner: str
    seed: int
    records: list[StepRecord] = field(default_factory=list)
    reason: str = ""

    @property
    def steps_to_threshold(self) -> int | None:
        return self.records[-1].step if self.reason == "threshold" else None

    @property
    def distances(self) -> np.ndarray:
        return np.array([r.distance for r in self.records])

    @property
    def variances(self) -> np.ndarray:
        return np.array([r.variance for r in self.records])

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "px", "py", "pz", "action", "value", "detected", "D", "P", "ess", "resampled"])
        for r in self.records:
            w.writerow([r.step, *map(repr, r.position), r.action, repr(r.value), int(r.detected),
                        repr(r.distance), repr(r.variance), repr(r.ess), int(r.resampled)])
        return buf.getvalue()


def episode_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """Independent sensor, estimator and planner generators for one seed.

    Separate streams keep the sensor noise sequence identical across planners
    that share a seed.
    """
    children = np.random.SeedSequence(int(seed)).spawn(3)
    return tuple(np.random.default_rng(c) for c in children)


def _reached(sc: Scenario, m) -> bool:
    if not m.detected:
        return False
    if sc.stop_rule == "field":
        return float(reward(sc.model, m.position)) >= sc.threshold
    return m.value >= sc.threshold


def run_episode(sc: Scenario, kind: PlannerKind, seed: int) -> RunMetrics:
    sensor_rng, est_rng, plan_rng = episode_streams(seed)
    grid = sc.grid
    target = sc.target.p
    ens = init_ensemble(sc.prior, sc.n_particles, est_rng)
    v = sc.start
    run = RunMetrics(getattr(kind, "name", type(kind).__name__.lower()), int(seed))
    value_range = sc.entropy_range

    for k in range(sc.max_steps + 1):
        m = measure(sc.model, v.position, sc.noise, sc.occlusion, sensor_rng, step=k)
        ens = bayes_update(ens, sc.basis, m, sc.likelihood)
        ess = effective_sample_size(ens)
        resampled = ess < sc.resampling.ess_fraction * ens.n
        if resampled:
            ens = resample(ens, est_rng, sc.resampling.roughening)
        rec = dict(
            step=k,
            position=v.position,
            value=m.value,
            detected=m.detected,
            distance=float(np.linalg.norm(v.p - target)),
            variance=posterior_trace(ens),
            ess=ess,
            resampled=resampled,
        )
        if _reached(sc, m):
            run.records.append(StepRecord(action="", **rec))
            run.reason = "threshold"
            break
        if k == sc.max_steps:
            run.records.append(StepRecord(action="", **rec))
            run.reason = "max_steps"
            break
        choice = select_action(kind, grid, v, ens, sc.basis, sc.likelihood, plan_rng, value_range)
        run.records.append(StepRecord(action=choice.action.value, **rec))
        v = apply_action(grid, v, choice.action)
    return run


@dataclass
class PlannerSummary:
    name: str
    runs: list[RunMetrics]
    mean_D: np.ndarray
    std_D: np.ndarray
    mean_P: np.ndarray
    std_P: np.ndarray

    @property
    def steps(self) -> list[int | None]:
        return [r.steps_to_threshold for r in self.runs]

    @property
    def n_reached(self) -> int:
        return sum(s is not None for s in self.steps)

    @property
    def median_steps(self) -> float:
        """Median steps to threshold; runs that never reach it count as infinite."""
        vals = [math.inf if s is None else float(s) for s in self.steps]
        vals.sort()
        n = len(vals)
        mid = n // 2
        if n % 2:
            return vals[mid]
        a, b = vals[mid - 1], vals[mid]
        return math.inf if math.isinf(b) else (a + b) / 2

    def series_at(self, what: str, step: int) -> np.ndarray:
        """Per-run values of D or P at ``step`` with last-value carry-forward."""
        rows = [r.distances if what == "D" else r.variances for r in self.runs]
        return np.array([x[min(step, x.size - 1)] for x in rows])


@dataclass
class BatchReport:
    scenario: str
    seeds: list[int]
    planners: dict[str, PlannerSummary]
    padding: str = "runs shorter than the longest are padded by carrying their last value forward"


def _pad(series: list[np.ndarray]) -> np.ndarray:
    length = max(s.size for s in series)
    return np.array([np.concatenate([s, np.full(length - s.size, s[-1])]) for s in series])


def summarize(name: str, runs: list[RunMetrics]) -> PlannerSummary:
    D = _pad([r.distances for r in runs])
    P = _pad([r.variances for r in runs])
    return PlannerSummary(name, runs, D.mean(axis=0), D.std(axis=0), P.mean(axis=0), P.std(axis=0))


def _episode_job(args):
    sc, kind, seed = args
    return run_episode(sc, kind, seed)


def run_batch(
    sc: Scenario,
    kinds: list[PlannerKind],
    n_runs: int,
    base_seed: int = 0,
    workers: int = 1,
    progress=None,
) -> BatchReport:
    """Run every planner on the same seed list so noise realisations pair up."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    if not kinds:
        raise ValueError("at least one planner is required")
    names = [k.name for k in kinds]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate planner names {names}")
    seeds = [base_seed + j for j in range(n_runs)]
    jobs = [(sc, kind, s) for kind in kinds for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_episode_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = []
        for job in jobs:
            results.append(_episode_job(job))
            if progress is not None:
                progress(len(results), len(jobs))
    planners = {}
    for i, kind in enumerate(kinds):
        runs = results[i * n_runs:(i + 1) * n_runs]
        planners[kind.name] = summarize(kind.name, runs)
    return BatchReport(sc.name, seeds, planners)


def export_csv(report: BatchReport, out_dir: str | Path) -> list[Path]:
    if not report.planners:
        raise ValueError("report has no planners")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out}: {exc}") from exc
    written = []
    for name, s in report.planners.items():
        path = out / f"metrics_{name}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "mean_D", "std_D", "mean_P", "std_P"])
            for k in range(s.mean_D.size):
                w.writerow([k, repr(float(s.mean_D[k])), repr(float(s.std_D[k])),
                            repr(float(s.mean_P[k])), repr(float(s.std_P[k]))])
        written.append(path)
    path = out / "summary.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["planner", "median_steps", "n_reached", "n_runs", "first_seed", "last_seed"])
        for name, s in report.planners.items():
            w.writerow([name, s.median_steps, s.n_reached, len(s.runs), report.seeds[0], report.seeds[-1]])
    written.append(path)
    return written


def export_svg(report: BatchReport, out_dir: str | Path) -> list[Path]:
    if not report.planners:
        raise ValueError("report has no planners")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for key, label, fname in (("D", "mean convergence distance D", "distance.svg"),
                              ("P", "mean parameter variance P (trace)", "variance.svg")):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        for name, s in report.planners.items():
            y = s.mean_D if key == "D" else s.mean_P
            ax.plot(np.arange(y.size), y, label=name)
        if key == "P":
            ax.set_yscale("log")
        ax.set_xlabel("step")
        ax.set_ylabel(label)
        ax.set_title(f"{report.scenario}: {len(report.seeds)} runs per planner")
        ax.legend()
        fig.tight_layout()
        path = out / fname
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    return written
