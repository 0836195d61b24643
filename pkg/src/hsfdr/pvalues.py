"""p-values, Benjamini-Hochberg step-up and Storey q-values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from hsfdr.errors import ConfigError, DomainError
from hsfdr.model import DecisionVector

PI0_FLOOR = 1e-8
DEFAULT_LAMBDAS = np.round(np.arange(0.05, 0.951, 0.05), 2)


@dataclass(frozen=True)
class QValueResult:
    q: np.ndarray
    pi0_hat: float


def check_level(gamma: float) -> float:
    if not (0.0 < gamma < 1.0):
        raise ConfigError(f"gamma must lie in (0, 1), got {gamma}")
    return float(gamma)


def _as_pvalues(p) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size and (np.any(~np.isfinite(p)) or p.min() < 0 or p.max() > 1):
        raise DomainError("p-values must lie in [0, 1]")
    return p


def two_sided_p(z):
    """Two-sided normal p-value ``2 * (1 - Phi(|z|))``; accepts scalars or arrays.

    Infinite z maps to 0."""
    z = np.asarray(z, dtype=float)
    if np.any(np.isnan(z)):
        raise DomainError("z must not be NaN")
    # sf keeps precision far into the tail where 1 - cdf would round to 0
    p = np.minimum(2.0 * stats.norm.sf(np.abs(z)), 1.0)
    return float(p) if p.ndim == 0 else p


def bh_procedure(p, gamma: float) -> DecisionVector:
    """Benjamini-Hochberg step-up at level ``gamma``.

    Rejects every hypothesis with ``p_j <= p_(k*)`` where ``k*`` is the largest
    ``k`` with ``p_(k) <= gamma * k / m``. Ties at the cutoff are rejected together.
    """
    gamma = check_level(gamma)
    p = _as_pvalues(p)
    m = p.size
    if m == 0:
        return DecisionVector.none(0)
    p_sorted = np.sort(p)
    below = np.nonzero(p_sorted <= gamma * np.arange(1, m + 1) / m)[0]
    if below.size == 0:
        return DecisionVector.none(m)
    cutoff = p_sorted[below[-1]]
    return DecisionVector(p <= cutoff)


def estimate_pi0(p, lambdas=None, floor: float = PI0_FLOOR) -> float:
    """Storey's tail-count estimate of the null proportion.

    With a single ``lambda`` this is ``#{p > lambda} / (m (1 - lambda))``. On a
    grid, the raw estimates are smoothed by a least-squares cubic in lambda and
    the smooth is read off at the largest lambda. The result is clamped to
    ``[floor, 1]``.
    """
    p = _as_pvalues(p)
    m = p.size
    if m == 0:
        raise DomainError("need at least one p-value")
    lam = DEFAULT_LAMBDAS if lambdas is None else np.atleast_1d(np.asarray(lambdas, float))
    if np.any((lam < 0) | (lam >= 1)):
        raise ConfigError("lambda values must lie in [0, 1)")
    raw = np.array([np.sum(p > l) / (m * (1.0 - l)) for l in lam])
    if lam.size == 1:
        est = raw[0]
    else:
        deg = min(3, lam.size - 1)
        coef = np.polyfit(lam, raw, deg)
        est = np.polyval(coef, lam.max())
    return float(np.clip(est, floor, 1.0))


def qvalues(p, pi0_hat: float) -> QValueResult:
    """q-values by the backward recursion ``q_(j) = min(pi0 m p_(j) / j, q_(j+1))``."""
    if not (0.0 < pi0_hat <= 1.0):
        raise ConfigError(f"pi0_hat must lie in (0, 1], got {pi0_hat}")
    p = _as_pvalues(p)
    m = p.size
    order = np.argsort(p, kind="stable")
    ranks = np.arange(1, m + 1)
    raw = pi0_hat * m * p[order] / ranks
    # q_(m) = pi0 * p_(m) falls out of raw[-1] since rank m cancels m
    q_sorted = np.minimum.accumulate(raw[::-1])[::-1]
    q_sorted = np.minimum(q_sorted, 1.0)
    q = np.empty(m)
    q[order] = q_sorted
    return QValueResult(q=q, pi0_hat=float(pi0_hat))


def qvalue_procedure(p, gamma: float, pi0_hat: float | None = None) -> tuple[DecisionVector, QValueResult]:
    gamma = check_level(gamma)
    if pi0_hat is None:
        pi0_hat = estimate_pi0(p)
    res = qvalues(p, pi0_hat)
    return DecisionVector(res.q <= gamma), res
