from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from hsfdr.errors import ConfigError, DomainError
from hsfdr.fahs import xi_mfahs
from hsfdr.pdc import (
    draw_local_scales,
    pdc_check,
    pdc_tail_probability,
    prior_predictive_variance,
)
from hsfdr.pvalues import bh_procedure, two_sided_p


def test_variance_examples():
    assert prior_predictive_variance(0.0, np.ones(7), 1.0, 0.0, 7) == pytest.approx(1 / 7)
    assert prior_predictive_variance(0.0, np.ones(10000), 1.0, 0.3, 10000) == pytest.approx((1 + 9999 * 0.09) / 10000)
    assert prior_predictive_variance(1.0, np.ones(1), 1.0, 0.7, 1) == pytest.approx(2.0)


def test_variance_length_check():
    with pytest.raises(DomainError):
        prior_predictive_variance(0.1, np.ones(3), 1.0, 0.0, 4)


def test_tail_examples():
    assert pdc_tail_probability(0.0, 0.3) == 1.0
    assert pdc_tail_probability(1.959964 * 0.3, 0.3) == pytest.approx(0.05, abs=1e-6)
    assert pdc_tail_probability(1e6, 0.3) == 0.0


@given(st.floats(0, 50), st.floats(0, 50), st.floats(0.01, 10))
def test_tail_monotone(a, b, sd):
    lo, hi = sorted((a, b))
    assert pdc_tail_probability(hi, sd) <= pdc_tail_probability(lo, sd)


def test_pure_noise_rarely_conflicts():
    hits = 0
    for seed in range(100):
        y = np.random.default_rng(seed).standard_normal(1000)
        xi = xi_mfahs(bh_procedure(two_sided_p(y), 0.1).R, y.size)
        hits += pdc_check(y, xi, seed=seed).conflict
    assert hits <= 5


def test_offset_conflicts():
    y = np.random.default_rng(1).standard_normal(1000) + 10 / np.sqrt(1000) * 3
    assert pdc_check(y, 1e-3).conflict


def test_zero_threshold_never_conflicts():
    y = np.full(100, 50.0)
    assert not pdc_check(y, 1e-3, threshold=0.0).conflict


def test_threshold_validation():
    with pytest.raises(ConfigError):
        pdc_check(np.zeros(5), 0.1, threshold=1.0)


def test_averaged_mode():
    y = np.random.default_rng(2).standard_normal(200)
    res = pdc_check(y, 0.05, averaged=True, seed=3)
    assert res.averaged and 0 <= res.tail_probability <= 1
    assert res.to_dict()["averaged"] is True


def _prior_predictive_ybar(rng, xi, eta, rho, n):
    m = eta.size
    beta = xi * eta * rng.standard_normal((n, m))
    eps = np.sqrt(rho) * rng.standard_normal((n, 1)) + np.sqrt(1 - rho) * rng.standard_normal((n, m))
    return (beta + eps).mean(axis=1)


@pytest.mark.parametrize("rho", [0.0, 0.3])
def test_uniform_under_prior_predictive(rho):
    m, xi = 200, 0.2
    eta = draw_local_scales(m, seed=7)
    sd = np.sqrt(prior_predictive_variance(xi, eta, 1.0, np.sqrt(rho), m))
    ybar = _prior_predictive_ybar(np.random.default_rng(8), xi, eta, rho, 1000)
    tails = [pdc_tail_probability(v, sd) for v in ybar]
    assert stats.kstest(tails, "uniform").pvalue > 0.01


def test_closed_form_matches_monte_carlo():
    m, xi, rho = 200, 0.2, 0.1
    eta = draw_local_scales(m, seed=9)
    sd = np.sqrt(prior_predictive_variance(xi, eta, 1.0, np.sqrt(rho), m))
    draws = _prior_predictive_ybar(np.random.default_rng(10), xi, eta, rho, 100000)
    for obs in (0.0, 0.5 * sd, 2.0 * sd):
        mc = float(np.mean(np.abs(draws) >= abs(obs)))
        assert pdc_tail_probability(obs, sd) == pytest.approx(mc, abs=0.01)
