import numpy as np
import pytest

from activeview.domain import reachable_set
from activeview.harness import episode_streams, export_csv, export_svg, run_batch, run_episode
from activeview.planner import DCEE, MPC, Entropy
from activeview.scenario import load_scenario
from activeview.sensor import NoiseModel

KINDS = [DCEE(m_samples=3), MPC(), Entropy()]


@pytest.fixture(scope="module")
def small():
    return load_scenario("s1").with_(n_particles=300, max_steps=8)


def test_zero_threshold_noiseless_stops_at_step_zero(small):
    sc = small.with_(threshold=0.0, noise=NoiseModel(0.0))
    for kind in KINDS:
        run = run_episode(sc, kind, 0)
        assert run.steps_to_threshold == 0
        assert len(run.records) == 1 and run.records[0].action == ""


def test_unreachable_threshold_runs_to_max_steps(small):
    sc = small.with_(threshold=1.0, noise=NoiseModel(0.0))
    run = run_episode(sc, MPC(), 3)
    assert run.reason == "max_steps" and run.steps_to_threshold is None
    assert len(run.records) == sc.max_steps + 1


def test_moves_stay_on_grid_and_are_single_actions(small):
    sc = small.with_(threshold=1.0)
    for kind in KINDS:
        run = run_episode(sc, kind, 11)
        for a, b in zip(run.records, run.records[1:]):
            v = sc.grid.nearest(a.position)[0]
            succ = dict(reachable_set(sc.grid, v))
            assert b.position == succ[next(x for x in succ if x.value == a.action)].position
            assert sc.grid.nearest(b.position)[1] < 1e-12


def test_episode_is_seed_deterministic(small):
    for kind in KINDS:
        assert run_episode(small, kind, 5).to_csv_text() == run_episode(small, kind, 5).to_csv_text()


def test_streams_are_independent_and_reproducible():
    a = [g.random(4) for g in episode_streams(1)]
    b = [g.random(4) for g in episode_streams(1)]
    for x, y in zip(a, b):
        assert np.array_equal(x, y)
    assert not np.allclose(a[0], a[1])


def test_paired_seeds_share_first_measurement(small):
    rep = run_batch(small, KINDS, 4, base_seed=20)
    assert rep.seeds == [20, 21, 22, 23]
    firsts = [[r.records[0].value for r in s.runs] for s in rep.planners.values()]
    assert firsts[0] == firsts[1] == firsts[2]


def test_single_run_batch(small):
    rep = run_batch(small, [MPC()], 1, base_seed=3)
    s = rep.planners["mpc"]
    assert np.array_equal(s.mean_D, s.runs[0].distances)
    assert np.all(s.std_D == 0) and np.all(s.std_P == 0)


def test_padding_carries_last_value_forward(small):
    rep = run_batch(small.with_(threshold=0.5), [MPC()], 6, base_seed=0)
    s = rep.planners["mpc"]
    longest = max(len(r.records) for r in s.runs)
    assert s.mean_D.size == longest
    for k in range(longest):
        assert s.mean_D[k] == pytest.approx(s.series_at("D", k).mean())


def test_batch_validation(small):
    with pytest.raises(ValueError):
        run_batch(small, [], 2)
    with pytest.raises(ValueError):
        run_batch(small, [MPC()], 0)
    with pytest.raises(ValueError):
        run_batch(small, [MPC(), MPC()], 1)


def test_export_files(small, tmp_path):
    rep = run_batch(small, KINDS, 3, base_seed=1)
    csvs = export_csv(rep, tmp_path)
    svgs = export_svg(rep, tmp_path)
    assert sorted(p.name for p in csvs) == ["metrics_dcee.csv", "metrics_entropy.csv", "metrics_mpc.csv", "summary.csv"]
    assert sorted(p.name for p in svgs) == ["distance.svg", "variance.svg"]
    for name, s in rep.planners.items():
        lines = (tmp_path / f"metrics_{name}.csv").read_text().splitlines()
        assert len(lines) == s.mean_D.size + 1
    assert len((tmp_path / "summary.csv").read_text().splitlines()) == 4


def test_parallel_matches_serial(small, tmp_path):
    a = run_batch(small, [MPC()], 3, base_seed=7)
    b = run_batch(small, [MPC()], 3, base_seed=7, workers=2)
    assert [r.to_csv_text() for r in a.planners["mpc"].runs] == [r.to_csv_text() for r in b.planners["mpc"].runs]
