"""Uniform front end over every multiple-testing procedure in the package."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from hsfdr.errors import ConfigError
from hsfdr.fahs import run_fahs
from hsfdr.gibbs import GibbsConfig, gibbs_run, hs_decision, mmle_xi
from hsfdr.model import DecisionVector, GroundTruth, ObservationVector
from hsfdr.pdc import pdc_check
from hsfdr.pvalues import bh_procedure, check_level, qvalue_procedure, two_sided_p
from hsfdr.twogroups import eb_stepup, fit_two_groups, locfdr_values

# Order is part of the seeding contract: a procedure's substream is keyed by its index here.
PROCEDURES = ("bh", "qvalue", "locfdr", "ebhs", "fbhs", "mfahs", "efahs", "oracle")
HORSESHOE = frozenset({"ebhs", "fbhs", "mfahs", "efahs"})


@dataclass(frozen=True)
class ProcedureOutcome:
    """Decisions plus the per-hypothesis statistic used to rank discoveries.

    ``ascending`` tells whether small statistics are the most significant.
    """

    procedure: str
    decisions: DecisionVector
    statistic: np.ndarray
    ascending: bool
    xi_hat: float | None = None
    pdc_tail: float | None = None


def parse_procedures(spec) -> tuple[str, ...]:
    names = spec.split(",") if isinstance(spec, str) else list(spec)
    names = [n.strip().lower() for n in names if n.strip()]
    unknown = sorted(set(names) - set(PROCEDURES))
    if unknown:
        raise ConfigError(f"unknown procedures: {', '.join(unknown)}; choose from {', '.join(PROCEDURES)}")
    if not names:
        raise ConfigError("no procedures selected")
    return tuple(dict.fromkeys(names))


def run_procedure(
    name: str,
    y: ObservationVector,
    gamma: float,
    seed: int = 0,
    gibbs: GibbsConfig | None = None,
    truth: GroundTruth | None = None,
    null_mode: str = "theoretical",
    with_pdc: bool = True,
) -> ProcedureOutcome:
    """Run one procedure at level ``gamma``.

    ``gibbs`` supplies run lengths for the horseshoe variants; its seed is
    replaced by ``seed``. The prior-data conflict tail probability is attached
    to FAHS outcomes, using the known equicorrelation of ``y`` (0 if absent).
    """
    gamma = check_level(gamma)
    base = replace(gibbs or GibbsConfig(), seed=seed)

    if name == "bh":
        p = two_sided_p(y.values)
        return ProcedureOutcome(name, bh_procedure(p, gamma), np.atleast_1d(p), True)
    if name == "qvalue":
        p = np.atleast_1d(two_sided_p(y.values))
        dec, res = qvalue_procedure(p, gamma)
        return ProcedureOutcome(name, dec, res.q, True)
    if name == "locfdr":
        fit = fit_two_groups(y, mode=null_mode)
        lf = locfdr_values(y, fit)
        return ProcedureOutcome(name, eb_stepup(lf, gamma), lf, True)
    if name in ("mfahs", "efahs"):
        res = run_fahs(y, gamma, variant=name, config=base)
        tail = None
        if with_pdc:
            rho = y.rho or 0.0
            tail = pdc_check(y, res.xi_hat, 1.0, float(np.sqrt(rho)), seed=seed).tail_probability
        return ProcedureOutcome(name, res.decisions, np.abs(res.summary.beta_mean), False, res.xi_hat, tail)
    if name in ("ebhs", "fbhs"):
        if name == "ebhs":
            cfg = replace(base, xi_mode="fixed", xi_value=mmle_xi(y), sigma_mode="jeffreys")
        else:
            cfg = replace(base, xi_mode="full_bayes", xi_value=None, sigma_mode="jeffreys")
        summary = gibbs_run(y, cfg)
        xi_hat = cfg.xi_value if name == "ebhs" else summary.xi_mean
        return ProcedureOutcome(name, hs_decision(summary, y), np.abs(summary.beta_mean), False, xi_hat)
    if name == "oracle":
        if truth is None:
            raise ConfigError("the oracle procedure needs ground truth")
        return ProcedureOutcome(name, DecisionVector(truth.signal), truth.signal.astype(float), False)
    raise ConfigError(f"unknown procedure {name!r}")
