"""Two-groups empirical Bayes: Lindsey density fit, null estimation, local fdr, step-up."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Literal

import numpy as np
from scipy import stats

from hsfdr.errors import FitError
from hsfdr.model import DecisionVector, ObservationVector
from hsfdr.pvalues import check_level

logger = logging.getLogger(__name__)

DEFAULT_BINS = 120
DEFAULT_DF = 7
IRLS_MAX_ITER = 50
IRLS_TOL = 1e-8
CENTRAL_HALF_WIDTH = 1.0
MIN_CENTRAL_BINS = 10


def natural_spline_basis(x, knots) -> np.ndarray:
    """Natural cubic spline basis (constant, linear and K-2 curvature columns).

    Uses the truncated-power construction with the natural boundary constraints,
    so the fitted function is linear outside ``[knots[0], knots[-1]]``.
    """
    x = np.asarray(x, dtype=float)
    knots = np.asarray(knots, dtype=float)
    lo, hi = knots[0], knots[-1]
    scale = hi - lo
    u = (x - lo) / scale
    k = (knots - lo) / scale
    K = k.size

    def d(j):
        return (np.clip(u - k[j], 0, None) ** 3 - np.clip(u - k[-1], 0, None) ** 3) / (k[-1] - k[j])

    cols = [np.ones_like(u), u]
    d_last = d(K - 2)
    for j in range(K - 2):
        cols.append(d(j) - d_last)
    return np.column_stack(cols)


@dataclass(frozen=True)
class LindseyDensity:
    """Density fitted to histogram counts by Poisson regression on a spline basis."""

    knots: np.ndarray
    coef: np.ndarray
    m: int
    bin_width: float
    centers: np.ndarray
    counts: np.ndarray
    iterations: int
    deviance: float

    def log_density(self, z) -> np.ndarray:
        eta = natural_spline_basis(np.atleast_1d(z), self.knots) @ self.coef
        return eta - np.log(self.m * self.bin_width)

    def __call__(self, z):
        out = np.exp(self.log_density(z))
        return float(out[0]) if np.ndim(z) == 0 else out


@dataclass(frozen=True)
class TwoGroupsFit:
    f_hat: Callable
    pi0_hat: float = 1.0
    null_mean: float = 0.0
    null_sd: float = 1.0

    def null_density(self, z):
        return stats.norm.pdf(z, loc=self.null_mean, scale=self.null_sd)


def _irls_poisson(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, int, float]:
    mu = y + 0.1
    eta = np.log(mu)
    dev_old = np.inf
    for it in range(1, IRLS_MAX_ITER + 1):
        w = mu
        zwork = eta + (y - mu) / mu
        sw = np.sqrt(w)
        coef, *_ = np.linalg.lstsq(X * sw[:, None], zwork * sw, rcond=None)
        eta = X @ coef
        mu = np.exp(eta)
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.where(y > 0, y * np.log(y / mu), 0.0)
        dev = 2.0 * np.sum(term - (y - mu))
        if not np.isfinite(dev):
            break
        if abs(dev - dev_old) <= IRLS_TOL * (abs(dev) + 0.1):
            return coef, it, float(dev)
        dev_old = dev
    raise FitError(
        "Poisson IRLS did not converge",
        {"iterations": it, "deviance": float(dev), "previous_deviance": float(dev_old)},
    )


def fit_marginal_density(z, bins: int = DEFAULT_BINS, df: int = DEFAULT_DF) -> TwoGroupsFit:
    """Lindsey's method: histogram the z-scores and fit log counts by a natural spline.

    Returns a fit carrying the theoretical N(0, 1) null and ``pi0_hat = 1``;
    use :func:`estimate_null` / :func:`fit_two_groups` to fill those in.
    """
    values = z.values if isinstance(z, ObservationVector) else np.asarray(z, float)
    m = values.size
    if bins < 10:
        raise FitError("need at least 10 bins", {"bins": bins})
    if m < bins:
        raise FitError("fewer observations than bins", {"m": m, "bins": bins})
    if df < 2:
        raise FitError("spline df must be at least 2", {"df": df})
    lo, hi = float(values.min()), float(values.max())
    if not hi > lo:
        raise FitError("degenerate z range; all observations equal", {"min": lo, "max": hi})
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(values, bins=edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    width = edges[1] - edges[0]
    # df-1 interior knots at quantiles of the data; boundary knots at the range ends
    knots = np.r_[lo, np.quantile(values, np.arange(1, df) / df), hi]
    X = natural_spline_basis(centers, knots)
    coef, iters, dev = _irls_poisson(X, counts.astype(float))
    dens = LindseyDensity(
        knots=knots,
        coef=coef,
        m=m,
        bin_width=width,
        centers=centers,
        counts=counts,
        iterations=iters,
        deviance=dev,
    )
    return TwoGroupsFit(f_hat=dens)


def _central_window(fit: TwoGroupsFit, center: float, half_width: float):
    dens = fit.f_hat
    x = dens.centers[np.abs(dens.centers - center) <= half_width]
    if x.size < MIN_CENTRAL_BINS:
        raise FitError(
            "central matching window holds too few bins",
            {"bins_in_window": int(x.size), "center": center, "half_width": half_width},
        )
    return x, dens.log_density(x)


def estimate_null(
    z,
    fit: TwoGroupsFit,
    mode: Literal["theoretical", "empirical"] = "theoretical",
    half_width: float = CENTRAL_HALF_WIDTH,
) -> tuple[float, float, float]:
    """Null parameters and null proportion by central matching.

    Theoretical mode keeps N(0, 1) and matches ``log f_hat - log phi`` by least
    squares on ``|z| <= 1``. Empirical mode fits a quadratic to ``log f_hat``
    within one unit of the fitted mode.
    """
    if not isinstance(fit.f_hat, LindseyDensity):
        raise FitError("null estimation needs a fitted Lindsey density")
    if mode == "theoretical":
        x, logf = _central_window(fit, 0.0, half_width)
        log_pi0 = np.mean(logf - stats.norm.logpdf(x))
        return 0.0, 1.0, float(min(np.exp(log_pi0), 1.0))
    if mode == "empirical":
        dens = fit.f_hat
        peak = float(dens.centers[np.argmax(dens.log_density(dens.centers))])
        x, logf = _central_window(fit, peak, half_width)
        c2, c1, c0 = np.polyfit(x, logf, 2)
        if c2 >= 0:
            raise FitError("central log density is not concave", {"quadratic_coef": float(c2)})
        sd = float(np.sqrt(-1.0 / (2.0 * c2)))
        mean = float(c1 * sd**2)
        log_pi0 = c0 + mean**2 / (2 * sd**2) + 0.5 * np.log(2 * np.pi) + np.log(sd)
        return mean, sd, float(min(np.exp(log_pi0), 1.0))
    raise ValueError(f"unknown null mode {mode!r}")


def fit_two_groups(
    z,
    mode: Literal["theoretical", "empirical"] = "theoretical",
    bins: int = DEFAULT_BINS,
    df: int = DEFAULT_DF,
) -> TwoGroupsFit:
    """Full two-groups fit.

    When the z range is so wide that fewer than ten bins fall within one unit
    of the center, the matching window is widened to the ten nearest bins.
    """
    fit = fit_marginal_density(z, bins=bins, df=df)
    try:
        mean, sd, pi0 = estimate_null(z, fit, mode)
    except FitError as exc:
        if "bins_in_window" not in exc.diagnostics:
            raise
        widened = (MIN_CENTRAL_BINS / 2 + 0.01) * fit.f_hat.bin_width
        logger.warning("widening central matching window to +/-%.3f", widened)
        mean, sd, pi0 = estimate_null(z, fit, mode, half_width=widened)
    return replace(fit, pi0_hat=pi0, null_mean=mean, null_sd=sd)


def locfdr_values(z, fit: TwoGroupsFit) -> np.ndarray:
    """Estimated local false discovery rates, clipped into [0, 1]."""
    values = z.values if isinstance(z, ObservationVector) else np.asarray(z, float)
    f = np.asarray(fit.f_hat(values), dtype=float).reshape(values.shape)
    f0 = fit.pi0_hat * fit.null_density(values)
    with np.errstate(divide="ignore", invalid="ignore"):
        lfdr = np.where(f > 0, f0 / f, 1.0)
    return np.clip(np.nan_to_num(lfdr, nan=1.0), 0.0, 1.0)


def eb_stepup(locfdr, gamma: float) -> DecisionVector:
    """Reject the k smallest local fdrs, k the largest index with running mean <= gamma."""
    gamma = check_level(gamma)
    lf = np.asarray(locfdr, dtype=float).reshape(-1)
    order = np.argsort(lf, kind="stable")
    running = np.cumsum(lf[order]) / np.arange(1, lf.size + 1)
    ok = np.nonzero(running <= gamma)[0]
    reject = np.zeros(lf.size, dtype=bool)
    if ok.size:
        reject[order[: ok[-1] + 1]] = True
    return DecisionVector(reject)
