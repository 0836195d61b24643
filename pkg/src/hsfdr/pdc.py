"""Prior-data conflict check for the horseshoe under equicorrelated noise.

The check compares the observed mean of y with its prior predictive law. Local
scales are drawn once from the standard half-Cauchy for the given seed, so the
tail probability is conditional on that draw; ``averaged=True`` instead reports
the mean tail probability over ``draws`` independent local-scale draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from hsfdr.errors import ConfigError, DomainError
from hsfdr.gibbs import make_rng
from hsfdr.model import ObservationVector

DEFAULT_THRESHOLD = 0.05
AVERAGE_DRAWS = 100


@dataclass(frozen=True)
class PdcResult:
    ybar: float
    predictive_sd: float
    tail_probability: float
    conflict: bool
    threshold: float
    averaged: bool = False

    def to_dict(self) -> dict:
        return {
            "ybar": self.ybar,
            "predictive_sd": self.predictive_sd,
            "tail_probability": self.tail_probability,
            "conflict": self.conflict,
            "threshold": self.threshold,
            "averaged": self.averaged,
        }


def draw_local_scales(m: int, seed: int) -> np.ndarray:
    return np.abs(make_rng(seed).standard_cauchy(m))


def prior_predictive_variance(xi: float, eta, sigma_diag: float, sigma_offdiag: float, m: int) -> float:
    """Variance of the mean of y under the prior predictive.

    ``sigma_diag**2 * xi**2 * sum(eta**2) / m**2 + (sigma_diag**2 + (m-1) * sigma_offdiag**2) / m``.
    With unit noise variance and equicorrelation ``rho``, pass ``sigma_offdiag = sqrt(rho)``.
    """
    eta = np.asarray(eta, dtype=float).reshape(-1)
    if eta.size != m:
        raise DomainError(f"eta has length {eta.size}, expected {m}")
    var = sigma_diag**2 * xi**2 * float(np.sum(eta**2)) / m**2 + (sigma_diag**2 + (m - 1) * sigma_offdiag**2) / m
    if not (np.isfinite(var) and var > 0):
        raise DomainError(f"prior predictive variance must be positive, got {var}")
    return float(var)


def pdc_tail_probability(ybar: float, predictive_sd: float) -> float:
    """``P(|Ybar| >= |ybar|) = 2 (1 - Phi(|ybar| / sd))``."""
    if not predictive_sd > 0:
        raise DomainError("predictive_sd must be positive")
    return float(min(2.0 * stats.norm.sf(abs(ybar) / predictive_sd), 1.0))


def pdc_check(
    y,
    xi: float,
    sigma_diag: float = 1.0,
    sigma_offdiag: float = 0.0,
    threshold: float = DEFAULT_THRESHOLD,
    seed: int = 0,
    averaged: bool = False,
    draws: int = AVERAGE_DRAWS,
) -> PdcResult:
    if not (0.0 <= threshold < 1.0):
        raise ConfigError(f"threshold must lie in [0, 1), got {threshold}")
    values = y.values if isinstance(y, ObservationVector) else np.asarray(y, dtype=float).reshape(-1)
    m = values.size
    ybar = float(values.mean())
    if averaged:
        rng = make_rng(seed)
        tails, sds = [], []
        for _ in range(draws):
            eta = np.abs(rng.standard_cauchy(m))
            sd = np.sqrt(prior_predictive_variance(xi, eta, sigma_diag, sigma_offdiag, m))
            sds.append(sd)
            tails.append(pdc_tail_probability(ybar, sd))
        tail = float(np.mean(tails))
        sd = float(np.mean(sds))
    else:
        eta = draw_local_scales(m, seed)
        sd = float(np.sqrt(prior_predictive_variance(xi, eta, sigma_diag, sigma_offdiag, m)))
        tail = pdc_tail_probability(ybar, sd)
    return PdcResult(
        ybar=ybar,
        predictive_sd=sd,
        tail_probability=tail,
        conflict=bool(tail < threshold),
        threshold=threshold,
        averaged=averaged,
    )
