import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from activeview.estimator import (
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
    systematic_indices,
)
from activeview.reward import Basis, eval_basis
from activeview.sensor import Measurement

from .oracles import conjugate_posterior, gaussian_particles, random_hemisphere, self_normalised_se

SIG = LikelihoodSpec(math.sqrt(0.5))


def meas(value, p=(0.5, 0.5, 0.7), detected=True):
    return Measurement(float(value), detected, 0, tuple(float(c) for c in p))


def ens_of(particles, weights=None):
    particles = np.asarray(particles, dtype=float)
    n = len(particles)
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
    return ParticleEnsemble(particles, w)


def test_init_single_particle(rng):
    e = init_ensemble(PriorSpec.box(-3, 3, 6), 1, rng)
    assert e.particles.shape == (1, 6) and e.weights.tolist() == [1.0]


def test_init_uniform_moments(rng):
    n = 10_000
    e = init_ensemble(PriorSpec.box(-3, 3, 6), n, rng)
    assert np.all(np.abs(e.particles.mean(axis=0)) <= 3 * (6 / math.sqrt(12)) / math.sqrt(n))
    assert np.all((e.particles >= -3) & (e.particles <= 3))
    np.testing.assert_allclose(e.weights, 1 / n)


def test_init_rejects_bad_bounds(rng):
    with pytest.raises(ValueError):
        PriorSpec.box(2, 2, 6)
    with pytest.raises(ValueError):
        init_ensemble(PriorSpec.box(-1, 1, 6), 0, rng)


def test_prior_around_truth_handles_signs():
    pr = PriorSpec.around([26.447, -3.6871], 2.0)
    np.testing.assert_allclose(pr.lo, [13.2235, -7.3742])
    np.testing.assert_allclose(pr.hi, [52.894, -1.84355])


def test_two_particle_weight_ratio():
    p = np.array([0.5, 0.5, 0.7])
    phi = eval_basis(Basis.REDUCED6, p)
    a = np.zeros(6)
    b = np.zeros(6)
    b[3] = 0.8  # residual r = 0.8 * phi[3]
    r = b @ phi
    e = bayes_update(ens_of([a, b]), Basis.REDUCED6, meas(0.0, p), SIG)
    assert e.weights[0] / e.weights[1] == pytest.approx(math.exp(r**2 / (2 * SIG.sigma**2)))


def test_constant_likelihood_leaves_weights():
    theta = np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    e0 = ens_of([theta, theta, theta], [0.2, 0.3, 0.5])
    p = (0.3, -0.4, 0.8)
    e = bayes_update(e0, Basis.REDUCED6, meas(eval_basis(Basis.REDUCED6, p) @ theta, p), SIG)
    np.testing.assert_allclose(e.weights, e0.weights, rtol=1e-14)


def test_missed_detection_keeps_weights(rng):
    e0 = init_ensemble(PriorSpec.box(-3, 3, 6), 100, rng)
    e = bayes_update(e0, Basis.REDUCED6, meas(5.0, detected=False), SIG)
    np.testing.assert_array_equal(e.weights, e0.weights)


def test_log_space_update_survives_extreme_residuals():
    e = ens_of([np.zeros(6), np.full(6, 1.0)])
    out = bayes_update(e, Basis.REDUCED6, meas(1e4, (1.0, 1.0, 1.0)), LikelihoodSpec(0.01))
    assert not out.degenerate
    assert out.weights.sum() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(out.weights, [0.0, 1.0])


def test_degenerate_update_resets_to_uniform():
    e = ens_of(np.zeros((3, 6)), [1.0, 0.0, 0.0])
    e.particles[0, 0] = np.inf
    out = bayes_update(e, Basis.REDUCED6, meas(0.3, (1.0, 0.5, 0.2)), SIG)
    assert out.degenerate
    np.testing.assert_allclose(out.weights, 1 / 3)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_update_order_commutes(seed):
    r = np.random.default_rng(seed)
    e = ens_of(r.uniform(-3, 3, (200, 6)), r.dirichlet(np.ones(200)))
    m1 = meas(r.normal(), random_hemisphere(r, 1)[0])
    m2 = meas(r.normal(), random_hemisphere(r, 1)[0])
    a = bayes_update(bayes_update(e, Basis.REDUCED6, m1, SIG), Basis.REDUCED6, m2, SIG)
    b = bayes_update(bayes_update(e, Basis.REDUCED6, m2, SIG), Basis.REDUCED6, m1, SIG)
    np.testing.assert_allclose(a.weights, b.weights, atol=1e-10)
    assert a.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_ess_values():
    assert effective_sample_size(ens_of(np.zeros((7, 2)))) == pytest.approx(7)
    assert effective_sample_size(ens_of(np.zeros((4, 2)), [1, 0, 0, 0])) == pytest.approx(1)
    assert effective_sample_size(ens_of(np.zeros((3, 2)), [0.5, 0.25, 0.25])) == pytest.approx(2.667, abs=1e-3)


def test_resample_uniform_and_point_mass(rng):
    parts = rng.normal(size=(50, 6))
    out = resample(ens_of(parts), rng)
    rows = {tuple(p) for p in parts}
    assert all(tuple(p) in rows for p in out.particles)
    np.testing.assert_allclose(out.weights, 1 / 50)
    w = np.zeros(50)
    w[0] = 1
    out = resample(ens_of(parts, w), rng)
    assert np.all(out.particles == parts[0])


def _counts_for_u(w, u):
    n = w.size
    cumsum = np.cumsum(w)
    cumsum[-1] = 1.0
    return np.bincount(np.searchsorted(cumsum, (u + np.arange(n)) / n, side="right"), minlength=n)


def test_systematic_counts_are_unbiased_exactly():
    # integrate the offset u over a fine midpoint grid instead of sampling it
    w = np.random.default_rng(8).dirichlet(np.full(20, 0.5))
    us = (np.arange(100_000) + 0.5) / 100_000
    mean = np.mean([_counts_for_u(w, u) for u in us], axis=0)
    np.testing.assert_allclose(mean, 20 * w, atol=2e-4)


def test_systematic_offspring_counts():
    r = np.random.default_rng(0)
    n = 20
    w = r.dirichlet(np.full(n, 0.5))
    reps = 10_000
    counts = np.array([np.bincount(systematic_indices(w, r), minlength=n) for _ in range(reps)])
    assert np.all(counts.sum(axis=1) == n)
    # each count is floor or ceil of N * w
    assert np.all(np.abs(counts - n * w) < 1 + 1e-12)
    sigma = np.sqrt(n * w * (1 - w))
    assert np.all(np.abs(counts.mean(axis=0) - n * w) <= 3 * sigma / np.sqrt(reps))


def test_resample_preserves_mean(rng):
    n = 10_000
    e = ens_of(rng.uniform(-3, 3, (n, 6)), rng.dirichlet(np.ones(n)))
    out = resample(e, rng, roughening_scale=0.01)
    bound = 3 * math.sqrt(posterior_trace(e) / n)
    assert np.linalg.norm(posterior_mean(out) - posterior_mean(e)) <= bound


def test_roughening_spread(rng):
    parts = np.tile(rng.normal(size=(1, 3)), (1000, 1))
    parts[:500] += 1.0
    out = resample(ens_of(parts), rng, roughening_scale=0.1)
    assert len({tuple(p) for p in out.particles}) == 1000
    with pytest.raises(ValueError):
        resample(ens_of(parts), rng, roughening_scale=-1)


def test_posterior_summaries():
    v = np.array([1.0, -2.0, 0.5])
    single = ens_of([v])
    np.testing.assert_allclose(posterior_mean(single), v)
    np.testing.assert_allclose(posterior_cov(single), 0)
    pair = ens_of([v, -v])
    np.testing.assert_allclose(posterior_mean(pair), 0, atol=1e-15)
    np.testing.assert_allclose(posterior_cov(pair), np.outer(v, v))
    assert posterior_trace(pair) == pytest.approx(v @ v)


def test_uniform_prior_trace():
    e = init_ensemble(PriorSpec.box(-3, 3, 6), 100_000, np.random.default_rng(4))
    assert posterior_trace(e) == pytest.approx(18.0, rel=0.05)


def test_filter_tracks_conjugate_oracle():
    """50 noiseless readings: predicted field at the visited points agrees with
    the Gaussian-conjugate posterior."""
    r = np.random.default_rng(31)
    prior_std, n, steps = 0.5, 10_000, 50
    theta = r.normal(0, prior_std, 6)
    pts = random_hemisphere(r, steps)
    X = eval_basis(Basis.REDUCED6, pts)
    y = X @ theta
    e = gaussian_particles(r, n, 6, prior_std)
    for p, v in zip(pts, y):
        e = bayes_update(e, Basis.REDUCED6, meas(v, p), SIG)
    m_n, _ = conjugate_posterior(X, y, np.zeros(6), prior_std**2 * np.eye(6), SIG.sigma**2)
    pred_pf = X @ posterior_mean(e)
    assert np.max(np.abs(pred_pf - X @ m_n)) <= 0.05
    assert np.max(np.abs(X @ m_n - y)) <= 0.5  # the oracle itself fits the data


def test_particle_mean_matches_conjugate_within_mc_error():
    r = np.random.default_rng(5)
    prior_std, n = 0.5, 100_000
    theta = r.normal(0, prior_std, 6)
    pts = random_hemisphere(r, 30)
    X = eval_basis(Basis.REDUCED6, pts)
    y = X @ theta + r.normal(0, SIG.sigma, 30)
    e = gaussian_particles(r, n, 6, prior_std)
    for p, v in zip(pts, y):
        e = bayes_update(e, Basis.REDUCED6, meas(v, p), SIG)
    m_n, _ = conjugate_posterior(X, y, np.zeros(6), prior_std**2 * np.eye(6), SIG.sigma**2)
    mu = posterior_mean(e)
    se = self_normalised_se(e.particles, e.weights, mu)
    assert np.all(np.abs(mu - m_n) <= 3 * se)


def test_snapshot_csv(tmp_path, rng):
    e = init_ensemble(PriorSpec.box(-1, 1, 3), 5, rng)
    path = tmp_path / "ens.csv"
    e.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, :3], e.particles)
    np.testing.assert_array_equal(data[:, 3], e.weights)
