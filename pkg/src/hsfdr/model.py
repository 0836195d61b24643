"""Observation, ground-truth and decision containers plus FDP/power accounting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hsfdr.errors import DimensionError, DomainError

__all__ = [
    "ObservationVector",
    "GroundTruth",
    "DecisionVector",
    "ConfusionTable",
    "FdpSummary",
    "DimensionError",
    "confusion",
    "fdp_and_power",
]


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ObservationVector:
    """z-scores on the unit-noise scale, optionally with known equicorrelation ``rho``."""

    values: np.ndarray
    rho: float | None = None

    def __post_init__(self):
        vals = _frozen_array(self.values, float)
        if vals.size < 1:
            raise DomainError("need at least one observation")
        if not np.all(np.isfinite(vals)):
            raise DomainError("observations must be finite")
        if self.rho is not None and not (0.0 <= self.rho < 1.0):
            raise DomainError(f"rho must lie in [0, 1), got {self.rho}")
        object.__setattr__(self, "values", vals)

    @property
    def m(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.m


@dataclass(frozen=True)
class GroundTruth:
    beta: np.ndarray
    signal: np.ndarray

    def __post_init__(self):
        beta = _frozen_array(self.beta, float)
        signal = _frozen_array(self.signal, bool)
        if beta.shape != signal.shape:
            raise DimensionError("beta and signal lengths differ")
        if not np.array_equal(signal, beta != 0):
            raise DomainError("signal must equal (beta != 0) exactly")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "signal", signal)

    @classmethod
    def from_beta(cls, beta) -> GroundTruth:
        beta = np.asarray(beta, dtype=float)
        return cls(beta=beta, signal=beta != 0)

    @property
    def m1(self) -> int:
        return int(self.signal.sum())

    @property
    def m0(self) -> int:
        return int(self.signal.size - self.signal.sum())


@dataclass(frozen=True)
class DecisionVector:
    reject: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "reject", _frozen_array(self.reject, bool))

    @property
    def R(self) -> int:
        return int(self.reject.sum())

    @property
    def m(self) -> int:
        return int(self.reject.size)

    @classmethod
    def none(cls, m: int) -> DecisionVector:
        return cls(np.zeros(m, dtype=bool))


@dataclass(frozen=True)
class ConfusionTable:
    TN: int
    FD: int
    FN: int
    TD: int

    def __post_init__(self):
        for name in ("TN", "FD", "FN", "TD"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be nonnegative")

    @property
    def R(self) -> int:
        return self.FD + self.TD

    @property
    def m0(self) -> int:
        return self.TN + self.FD

    @property
    def m1(self) -> int:
        return self.FN + self.TD

    @property
    def m(self) -> int:
        return self.TN + self.FD + self.FN + self.TD


@dataclass(frozen=True)
class FdpSummary:
    fdp: float
    power: float


def confusion(decisions: DecisionVector, truth: GroundTruth) -> ConfusionTable:
    """Cross-tabulate decisions against the true signal indicator."""
    rej = decisions.reject
    sig = truth.signal
    if rej.shape != sig.shape:
        raise DimensionError(f"decisions have length {rej.size}, truth has {sig.size}")
    return ConfusionTable(
        TN=int(np.sum(~rej & ~sig)),
        FD=int(np.sum(rej & ~sig)),
        FN=int(np.sum(~rej & sig)),
        TD=int(np.sum(rej & sig)),
    )


def fdp_and_power(table: ConfusionTable) -> FdpSummary:
    # 0/0 is defined as 0 for both ratios
    fdp = table.FD / table.R if table.R > 0 else 0.0
    power = table.TD / table.m1 if table.m1 > 0 else 0.0
    return FdpSummary(fdp=float(fdp), power=float(power))
