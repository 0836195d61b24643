"""Frequentist-assisted horseshoe: BH rejection count sets the global scale."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

from hsfdr.errors import ConfigError, DomainError
from hsfdr.gibbs import GibbsConfig, PosteriorSummary, gibbs_run, hs_decision
from hsfdr.model import DecisionVector, ObservationVector
from hsfdr.pvalues import bh_procedure, check_level, two_sided_p

EFAHS_CAP = 10.0


@dataclass(frozen=True)
class FahsResult:
    decisions: DecisionVector
    xi_hat: float
    m1_hat: int
    summary: PosteriorSummary


@dataclass(frozen=True)
class Theorem1Report:
    lower_bound: float
    upper_bound: float
    alpha: float
    omega: float
    c: float
    xi: float
    slack: float
    satisfied_lower: bool
    satisfied_upper: bool
    c_regime: str


def _check_counts(R: int, m: int) -> None:
    if m < 1:
        raise DomainError("m must be >= 1")
    if not (0 <= R <= m):
        raise DomainError(f"R must lie in [0, m], got R={R}, m={m}")


def xi_mfahs(R: int, m: int) -> float:
    """``R / m``, floored at ``1 / m`` when BH rejects nothing."""
    _check_counts(R, m)
    return max(R, 1) / m


def xi_efahs(R: int, m: int, sigma: float = 1.0, cap: float = EFAHS_CAP) -> float:
    """``sigma R / (m - R)``, floored at ``1 / m`` and capped at ``cap``."""
    _check_counts(R, m)
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    if R == 0:
        return 1.0 / m
    if R == m:
        return float(cap)
    return min(sigma * R / (m - R), float(cap))


def run_fahs(
    y,
    gamma: float,
    variant: Literal["mfahs", "efahs"] = "mfahs",
    config: GibbsConfig | None = None,
    trace: list | None = None,
) -> FahsResult:
    """Four-step FAHS pipeline.

    1. BH at level ``gamma`` on two-sided p-values gives ``R``.
    2. ``xi_hat`` from ``R`` by variant (m-FAHS ``R/m``, e-FAHS ``R/(m-R)``).
    3. Gibbs run with the global scale fixed at ``xi_hat``; the noise variance
       gets a Jeffreys prior for m-FAHS and is fixed at 1 for e-FAHS.
    4. Reject where ``|beta_hat_j| > |y_j| / 2``.

    Only ``burn_in``, ``samples`` and ``seed`` are read from ``config``.
    """
    gamma = check_level(gamma)
    if variant not in ("mfahs", "efahs"):
        raise ConfigError(f"unknown FAHS variant {variant!r}")
    obs = y if isinstance(y, ObservationVector) else ObservationVector(y)
    config = config or GibbsConfig()
    log = trace if trace is not None else []

    R = bh_procedure(two_sided_p(obs.values), gamma).R
    log.append(("bh", R))

    xi_hat = xi_mfahs(R, obs.m) if variant == "mfahs" else xi_efahs(R, obs.m, sigma=1.0)
    log.append(("xi", xi_hat))

    run_cfg = replace(
        config,
        xi_mode="fixed",
        xi_value=xi_hat,
        sigma_mode="jeffreys" if variant == "mfahs" else "fixed",
        sigma_sq=1.0,
    )
    summary = gibbs_run(obs, run_cfg)
    log.append(("gibbs", run_cfg.seed))

    decisions = hs_decision(summary, obs)
    log.append(("decide", decisions.R))
    return FahsResult(decisions=decisions, xi_hat=xi_hat, m1_hat=R, summary=summary)


def theorem1_report(
    xi: float,
    m: int,
    m1: int,
    alpha: float = 2.0,
    omega: float = 2.0,
    c: float = 1.5,
    slack: float = 1.0,
) -> Theorem1Report:
    """Compare ``xi`` with the contraction-rate interval for the global scale.

    ``lower_bound = ((m1/m)^c sqrt(log(m/m1)))^(1/(alpha-1))`` and
    ``upper_bound = ((m1/m) log(m/m1))^(alpha/(alpha-1))``. The upper condition
    is asymptotic, so it is reported against ``slack * upper_bound`` and never
    treated as a hard gate. ``c_regime`` is ``"narrow"`` for ``0 < c < 1``,
    ``"wide"`` for ``1 <= c < 1 + omega/2`` and ``"outside"`` otherwise.
    """
    if not (0 < m1 < m):
        raise DomainError(f"need 0 < m1 < m, got m1={m1}, m={m}")
    if alpha <= 1:
        raise DomainError("alpha must exceed 1")
    if omega <= 0:
        raise DomainError("omega must be positive")
    frac = m1 / m
    log_ratio = math.log(m / m1)
    power = 1.0 / (alpha - 1.0)
    lower = (frac**c * math.sqrt(log_ratio)) ** power
    upper = (frac * log_ratio) ** (alpha * power)
    if 0 < c < 1:
        regime = "narrow"
    elif 0 < c < 1 + omega / 2:
        regime = "wide"
    else:
        regime = "outside"
    return Theorem1Report(
        lower_bound=lower,
        upper_bound=upper,
        alpha=alpha,
        omega=omega,
        c=c,
        xi=float(xi),
        slack=slack,
        satisfied_lower=bool(xi >= lower),
        satisfied_upper=bool(xi <= slack * upper),
        c_regime=regime,
    )
