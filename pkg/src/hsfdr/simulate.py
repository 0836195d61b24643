"""Simulation harness: data generation, replication grid and FDR aggregation.

Seeding: every (setting index, replication) pair gets a 64-bit child seed from
``SeedSequence([base_seed, setting_index, replication])``. Data generation uses
substream 0 of the child seed and procedure ``k`` of ``PROCEDURES`` uses
substream ``k + 1``, so a record does not depend on which other procedures ran
or on how the grid was split across workers.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np

from hsfdr.errors import ConfigError
from hsfdr.gibbs import GibbsConfig, make_rng
from hsfdr.model import GroundTruth, ObservationVector, confusion, fdp_and_power
from hsfdr.procedures import PROCEDURES, parse_procedures, run_procedure

logger = logging.getLogger(__name__)

PAPER_S = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5)
PAPER_GAMMA = (0.1, 0.12, 0.14, 0.16, 0.18, 0.2)
PAPER_RHO = (0.0, 0.1, 0.2, 0.3)
DESK_S = (0.05, 0.2, 0.5)
DESK_GAMMA = (0.1, 0.2)


@dataclass(frozen=True)
class SimulationSetting:
    m: int = 2000
    s: float = 0.1
    psi: float = 5.0
    snr: float = 3.0
    rho: float = 0.0
    gamma: float = 0.1
    replications: int = 30
    base_seed: int = 0
    procedures: tuple[str, ...] = ("bh", "mfahs", "efahs")
    standardize: Literal["all", "nonzero"] = "all"
    burn_in: int = 1000
    samples: int = 5000

    def __post_init__(self):
        if self.m < 1:
            raise ConfigError("m must be >= 1")
        if not (0 < self.s <= 1):
            raise ConfigError(f"s must lie in (0, 1], got {self.s}")
        if self.psi <= 0 or self.snr <= 0:
            raise ConfigError("psi and snr must be positive")
        if not (0 <= self.rho < 1):
            raise ConfigError(f"rho must lie in [0, 1), got {self.rho}")
        if not (0 < self.gamma < 1):
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.standardize not in ("all", "nonzero"):
            raise ConfigError(f"standardize must be 'all' or 'nonzero', got {self.standardize!r}")
        object.__setattr__(self, "procedures", parse_procedures(self.procedures))

    @property
    def setting_id(self) -> str:
        return f"m{self.m}_s{self.s:g}_g{self.gamma:g}_r{self.rho:g}"

    @property
    def gibbs(self) -> GibbsConfig:
        return GibbsConfig(burn_in=self.burn_in, samples=self.samples)


@dataclass(frozen=True)
class ReplicationRecord:
    setting_id: str
    replication: int
    seed: int
    procedure: str
    s: float
    gamma: float
    rho: float
    m: int
    R: int | None
    FD: int | None
    TD: int | None
    fdp: float | None
    power: float | None
    xi_hat: float | None = None
    pdc_tail: float | None = None
    wall_ms: float = 0.0
    error: str | None = None


@dataclass(frozen=True)
class CellSummary:
    setting_id: str
    procedure: str
    s: float
    gamma: float
    rho: float
    m: int
    n: int
    fdr: float
    fdr_se: float
    fdp_min: float
    fdp_q1: float
    fdp_median: float
    fdp_q3: float
    fdp_max: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...] = field(default_factory=tuple)
    mean_power: float = 0.0
    mean_xi_hat: float | None = None


def child_seed(base_seed: int, setting_index: int, replication: int) -> int:
    ss = np.random.SeedSequence([int(base_seed), int(setting_index), int(replication)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def substream_seed(seed: int, key: int) -> int:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(key),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _draw_beta(setting: SimulationSetting, rng: np.random.Generator) -> np.ndarray:
    theta = rng.random(setting.m) < setting.s
    beta = np.where(theta, rng.normal(0.0, setting.psi, setting.m), 0.0)
    if not theta.any():
        # nothing to standardize; the truth is the zero vector
        return beta
    ref = beta if setting.standardize == "all" else beta[theta]
    sd = ref.std(ddof=1) if ref.size > 1 else abs(ref[0])
    while not sd > 0:
        beta = np.where(theta, rng.normal(0.0, setting.psi, setting.m), 0.0)
        ref = beta if setting.standardize == "all" else beta[theta]
        sd = ref.std(ddof=1) if ref.size > 1 else abs(ref[0])
    return beta / sd * setting.snr


def generate_equicorrelated(setting: SimulationSetting, seed: int) -> tuple[ObservationVector, GroundTruth]:
    """Sparse means plus unit-variance noise with common pairwise correlation ``rho``.

    Noise is ``sqrt(rho) * z0 + sqrt(1 - rho) * z_j``. The shared factor is drawn
    after the idiosyncratic terms, so ``rho = 0`` reproduces
    :func:`generate_independent` exactly.
    """
    rng = make_rng(seed)
    beta = _draw_beta(setting, rng)
    z = rng.standard_normal(setting.m)
    z0 = rng.standard_normal()
    rho = setting.rho
    noise = z if rho == 0 else np.sqrt(rho) * z0 + np.sqrt(1.0 - rho) * z
    return ObservationVector(beta + noise, rho=rho), GroundTruth.from_beta(beta)


def generate_independent(setting: SimulationSetting, seed: int) -> tuple[ObservationVector, GroundTruth]:
    if setting.rho != 0:
        raise ConfigError("generate_independent needs rho = 0")
    return generate_equicorrelated(setting, seed)


def generate(setting: SimulationSetting, seed: int):
    return generate_equicorrelated(setting, seed)


def run_replication(setting: SimulationSetting, setting_index: int, replication: int) -> list[ReplicationRecord]:
    seed = child_seed(setting.base_seed, setting_index, replication)
    y, truth = generate(setting, substream_seed(seed, 0))
    records = []
    for name in setting.procedures:
        proc_seed = substream_seed(seed, PROCEDURES.index(name) + 1)
        common = dict(
            setting_id=setting.setting_id,
            replication=replication,
            seed=seed,
            procedure=name,
            s=setting.s,
            gamma=setting.gamma,
            rho=setting.rho,
            m=setting.m,
        )
        start = time.perf_counter()
        try:
            out = run_procedure(name, y, setting.gamma, seed=proc_seed, gibbs=setting.gibbs, truth=truth)
        except Exception as exc:
            logger.warning("%s replication %d %s failed: %s", setting.setting_id, replication, name, exc)
            records.append(
                ReplicationRecord(
                    **common, R=None, FD=None, TD=None, fdp=None, power=None,
                    wall_ms=(time.perf_counter() - start) * 1e3, error=f"{type(exc).__name__}: {exc}",
                )
            )
            continue
        table = confusion(out.decisions, truth)
        summ = fdp_and_power(table)
        records.append(
            ReplicationRecord(
                **common,
                R=table.R,
                FD=table.FD,
                TD=table.TD,
                fdp=summ.fdp,
                power=summ.power,
                xi_hat=out.xi_hat,
                pdc_tail=out.pdc_tail,
                wall_ms=(time.perf_counter() - start) * 1e3,
            )
        )
    return records


def _run_task(args):
    setting, index, rep = args
    return run_replication(setting, index, rep)


def run_grid(settings: Iterable[SimulationSetting], threads: int = 1) -> list[ReplicationRecord]:
    """Run every replication of every setting; output order is fixed by (setting, replication)."""
    settings = list(settings)
    tasks = [(st, i, r) for i, st in enumerate(settings) for r in range(st.replications)]
    if threads <= 1 or len(tasks) <= 1:
        chunks = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_run_task, tasks))
    return [rec for chunk in chunks for rec in chunk]


def boxplot_stats(values) -> dict:
    """Quartiles (linear interpolation) with Tukey 1.5 IQR whiskers."""
    x = np.sort(np.asarray(values, dtype=float))
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    return {
        "min": float(x[0]),
        "q1": float(q1),
        "median": float(med),
        "q3": float(q3),
        "max": float(x[-1]),
        "whisker_low": float(inside.min()),
        "whisker_high": float(inside.max()),
        "outliers": tuple(float(v) for v in x[(x < lo_fence) | (x > hi_fence)]),
    }


def aggregate(records: Iterable[ReplicationRecord]) -> list[CellSummary]:
    """Fold records into per-(setting, procedure) FDR and FDP boxplot summaries.

    Failed records are excluded; a cell with no successful records is dropped
    with a warning.
    """
    cells: dict[tuple[str, str], list[ReplicationRecord]] = {}
    for rec in records:
        cells.setdefault((rec.setting_id, rec.procedure), []).append(rec)
    out = []
    for (sid, proc), recs in cells.items():
        ok = [r for r in recs if r.error is None]
        if not ok:
            logger.warning("no successful records for %s / %s; cell omitted", sid, proc)
            continue
        fdp = np.array([r.fdp for r in ok])
        box = boxplot_stats(fdp)
        xis = [r.xi_hat for r in ok if r.xi_hat is not None]
        se = float(fdp.std(ddof=1) / np.sqrt(fdp.size)) if fdp.size > 1 else 0.0
        first = ok[0]
        out.append(
            CellSummary(
                setting_id=sid,
                procedure=proc,
                s=first.s,
                gamma=first.gamma,
                rho=first.rho,
                m=first.m,
                n=len(ok),
                fdr=float(fdp.mean()),
                fdr_se=se,
                fdp_min=box["min"],
                fdp_q1=box["q1"],
                fdp_median=box["median"],
                fdp_q3=box["q3"],
                fdp_max=box["max"],
                whisker_low=box["whisker_low"],
                whisker_high=box["whisker_high"],
                outliers=box["outliers"],
                mean_power=float(np.mean([r.power for r in ok])),
                mean_xi_hat=float(np.mean(xis)) if xis else None,
            )
        )
    return out


def preset_settings(
    preset: Literal["desk", "paper"],
    procedures=("bh", "mfahs", "efahs"),
    base_seed: int = 0,
    **overrides,
) -> list[SimulationSetting]:
    """Setting grids: ``desk`` (m=2000, 30 reps) or ``paper`` (m=10000, 100 reps)."""
    if preset == "desk":
        m, reps, s_grid, g_grid, r_grid = 2000, 30, DESK_S, DESK_GAMMA, (0.0,)
    elif preset == "paper":
        m, reps, s_grid, g_grid, r_grid = 10000, 100, PAPER_S, PAPER_GAMMA, PAPER_RHO
    else:
        raise ConfigError(f"unknown preset {preset!r}")
    base = dict(m=m, replications=reps, base_seed=base_seed, procedures=tuple(parse_procedures(procedures)))
    base.update(overrides)
    return [
        SimulationSetting(s=s, gamma=g, rho=r, **base)
        for r in r_grid
        for s in s_grid
        for g in g_grid
    ]
