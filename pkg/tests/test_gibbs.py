from __future__ import annotations

import numpy as np
import pytest

from hsfdr import oracles
from hsfdr.errors import ConfigError, DimensionError
from hsfdr.gibbs import (
    GibbsConfig,
    PosteriorSummary,
    gibbs_run,
    hs_decision,
    log_marginal_matrix,
    mmle_grid,
    mmle_xi,
)
from hsfdr.model import ObservationVector


def _fixed(xi, burn_in=1000, samples=5000, seed=3):
    return GibbsConfig(burn_in=burn_in, samples=samples, seed=seed, xi_mode="fixed", xi_value=xi, sigma_mode="fixed")


def _summary(beta):
    beta = np.asarray(beta, float)
    return PosteriorSummary(beta_mean=beta, kappa_mean=np.zeros_like(beta), xi_mean=1.0, sigma_sq_mean=1.0)


def test_config_validation():
    with pytest.raises(ConfigError):
        GibbsConfig(xi_mode="fixed")
    with pytest.raises(ConfigError):
        GibbsConfig(samples=0)
    with pytest.raises(ConfigError):
        GibbsConfig(sigma_mode="other")


def test_zero_data_posterior_mean_near_zero():
    s = gibbs_run(np.zeros(50), _fixed(0.05, samples=10000))
    assert np.max(np.abs(s.beta_mean)) <= 0.02


def test_large_observation_preserved():
    s = gibbs_run(np.full(50, 10.0), _fixed(0.05))
    assert np.all(s.beta_mean >= 9.0)


def test_unit_observation_matches_quadrature():
    s = gibbs_run(np.ones(200), _fixed(0.05))
    assert s.beta_mean.mean() == pytest.approx(oracles.horseshoe_posterior_mean(1.0, 0.05), abs=0.05)


def test_quadrature_oracle_limits():
    assert oracles.horseshoe_posterior_mean(0.0, 0.1) == 0.0
    assert oracles.horseshoe_posterior_mean(30.0, 0.1) == pytest.approx(30.0, abs=0.2)
    assert oracles.horseshoe_posterior_mean(-2.0, 0.3) == pytest.approx(-oracles.horseshoe_posterior_mean(2.0, 0.3))


def test_shrinkage_sign_and_kappa_order():
    y = np.repeat([-6.0, -3.0, -1.5, 0.5, 1.5, 3.0, 6.0], 40)
    s = gibbs_run(y, _fixed(0.1, burn_in=500, samples=3000))
    assert np.all(np.abs(s.beta_mean) <= np.abs(y) + 0.05)
    big = np.abs(y) > 1
    assert np.all(np.sign(s.beta_mean[big]) == np.sign(y[big]))
    ys = np.array([0.5, 1.5, 3.0, 6.0])
    kap = np.array([s.kappa_mean[y == v].mean() for v in ys])
    assert np.all(np.diff(kap) < 0)


def test_deterministic_for_same_seed():
    y = np.random.default_rng(0).normal(size=100)
    cfg = GibbsConfig(burn_in=50, samples=100, seed=9)
    a, b = gibbs_run(y, cfg), gibbs_run(y, cfg)
    assert np.array_equal(a.beta_mean, b.beta_mean)
    assert a.xi_mean == b.xi_mean and a.sigma_sq_mean == b.sigma_sq_mean
    c = gibbs_run(y, GibbsConfig(burn_in=50, samples=100, seed=10))
    assert not np.array_equal(a.beta_mean, c.beta_mean)


def test_full_bayes_and_jeffreys_run():
    y = np.r_[np.zeros(180), np.full(20, 6.0)] + np.random.default_rng(2).standard_normal(200)
    s = gibbs_run(y, GibbsConfig(burn_in=300, samples=700, seed=1))
    assert 0 < s.xi_mean < 1
    assert 0.5 < s.sigma_sq_mean < 2.0


def test_unscaled_prior_matches_when_sigma_fixed():
    y = np.linspace(-3, 3, 30)
    a = gibbs_run(y, _fixed(0.2, 50, 100))
    b = gibbs_run(y, GibbsConfig(burn_in=50, samples=100, seed=3, xi_mode="fixed", xi_value=0.2,
                                 sigma_mode="fixed", scale_prior_by_sigma=False))
    np.testing.assert_allclose(a.beta_mean, b.beta_mean)


def test_non_finite_input():
    with pytest.raises(ConfigError):
        gibbs_run(np.array([1.0, np.nan]), GibbsConfig(burn_in=1, samples=1))


def test_marginal_matches_quadrature_in_theta():
    from scipy import integrate, stats

    y = np.array([0.0, 1.0, 4.0])
    for xi in (0.01, 0.3):
        got = np.exp(log_marginal_matrix(y, xi))
        for yj, g in zip(y, got):
            ref = integrate.quad(
                lambda th: stats.norm.pdf(yj, scale=np.sqrt(1 + (xi * np.tan(th)) ** 2)) * 2 / np.pi,
                0, np.pi / 2, limit=400, epsrel=1e-10,
            )[0]
            assert g == pytest.approx(ref, rel=1e-5)


def test_mmle_zero_vector_hits_floor():
    assert mmle_xi(np.zeros(100)) == pytest.approx(1 / 100)


def test_mmle_refinement_consistency():
    y = np.r_[np.zeros(450), np.full(50, 5.0)]
    coarse = mmle_grid(500, 100)
    fine = mmle_grid(500, 199)
    a, b = mmle_xi(y, coarse), mmle_xi(y, fine)
    step = coarse[1] / coarse[0]
    assert abs(np.log(a) - np.log(b)) <= np.log(step) + 1e-12


def test_mmle_tracks_signal():
    rng = np.random.default_rng(4)
    y = rng.standard_normal(1000)
    y[:100] = rng.choice([-8.0, 8.0], 100) + rng.standard_normal(100)
    xi = mmle_xi(ObservationVector(y))
    assert 0.01 <= xi <= 1
    fine = mmle_grid(1000, 800)
    brute = fine[np.argmax([log_marginal_matrix(y, x).sum() for x in fine])]
    assert abs(np.log(xi / brute)) <= np.log(1000) / 199 + 1e-9


def test_decision_rule():
    y = np.array([1.0, -2.0, 0.0])
    assert hs_decision(_summary(y), y).reject.tolist() == [True, True, False]
    assert hs_decision(_summary(np.zeros(3)), y).R == 0
    assert hs_decision(_summary([2.6]), np.array([5.0])).reject.tolist() == [True]
    assert hs_decision(_summary([2.5]), np.array([5.0])).reject.tolist() == [False]


def test_decision_length_mismatch():
    with pytest.raises(DimensionError):
        hs_decision(_summary([1.0]), np.array([1.0, 2.0]))
