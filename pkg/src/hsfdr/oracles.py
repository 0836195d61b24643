"""Closed-form and quadrature references that do not share code with the estimators."""

from __future__ import annotations

import numpy as np
from scipy import integrate, stats

MIXTURE_NULL_WEIGHT = 0.9
MIXTURE_ALT_VAR = 26.0


def horseshoe_posterior_mean(y: float, xi: float) -> float:
    """E(beta | y, xi) = (1 - E(kappa | y, xi)) y for unit noise, by 1-D quadrature.

    The half-Cauchy local scale is written as eta = tan(theta) with theta
    uniform on (0, pi/2), which turns both integrals into bounded ones.
    """

    def weight(theta, power):
        v = 1.0 + (xi * np.tan(theta)) ** 2
        return stats.norm.pdf(y, scale=np.sqrt(v)) * v ** (-power)

    pts = sorted({float(np.arctan(1.0 / xi)), float(np.arctan(max(abs(y), 1.0) / xi))})
    num = integrate.quad(weight, 0.0, np.pi / 2, args=(1,), points=pts, limit=500, epsabs=0, epsrel=1e-11)[0]
    den = integrate.quad(weight, 0.0, np.pi / 2, args=(0,), points=pts, limit=500, epsabs=0, epsrel=1e-11)[0]
    return float((1.0 - num / den) * y)


def mixture_density(z, null_weight: float = MIXTURE_NULL_WEIGHT, alt_var: float = MIXTURE_ALT_VAR):
    return null_weight * stats.norm.pdf(z) + (1 - null_weight) * stats.norm.pdf(z, scale=np.sqrt(alt_var))


def mixture_locfdr(z, null_weight: float = MIXTURE_NULL_WEIGHT, alt_var: float = MIXTURE_ALT_VAR):
    return null_weight * stats.norm.pdf(z) / mixture_density(z, null_weight, alt_var)


def sample_mixture(rng: np.random.Generator, m: int, null_weight=MIXTURE_NULL_WEIGHT, alt_var=MIXTURE_ALT_VAR):
    null = rng.random(m) < null_weight
    z = np.where(null, rng.standard_normal(m), rng.normal(0.0, np.sqrt(alt_var), m))
    return z, ~null
