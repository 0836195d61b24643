"""Expression matrix to pooled t-statistics to z-scores to ranked discoveries."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from hsfdr.errors import DomainError, HsfdrError
from hsfdr.gibbs import GibbsConfig
from hsfdr.model import ObservationVector
from hsfdr.procedures import parse_procedures, run_procedure

logger = logging.getLogger(__name__)


class InputFormatError(HsfdrError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


@dataclass(frozen=True)
class ExpressionMatrix:
    """Genes in rows; the first ``group_split`` columns are controls, the rest cases."""

    values: np.ndarray
    group_split: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] < 1:
            raise DomainError("expression matrix must be 2-D with at least one gene")
        n1, n2 = self.group_split, vals.shape[1] - self.group_split
        if n1 < 2 or n2 < 2:
            raise DomainError(f"each group needs at least 2 subjects, got {n1} and {n2}")
        object.__setattr__(self, "values", vals)

    @property
    def df(self) -> int:
        return self.values.shape[1] - 2


@dataclass(frozen=True)
class RankedGene:
    gene: int  # 1-based row index
    z: float
    statistic: float


@dataclass
class GeneRanking:
    gamma: float
    tables: dict[str, list[RankedGene]] = field(default_factory=dict)
    rejections: dict[str, int] = field(default_factory=dict)

    def top(self, procedure: str, k: int = 10) -> list[int]:
        return [g.gene for g in self.tables[procedure][:k]]


def t_statistics(matrix: ExpressionMatrix) -> np.ndarray:
    """Two-sample pooled-variance t (cases minus controls) for every gene."""
    x = matrix.values
    n1 = matrix.group_split
    n2 = x.shape[1] - n1
    a, b = x[:, :n1], x[:, n1:]
    ma, mb = a.mean(axis=1), b.mean(axis=1)
    ss = ((a - ma[:, None]) ** 2).sum(axis=1) + ((b - mb[:, None]) ** 2).sum(axis=1)
    s2 = (1.0 / n1 + 1.0 / n2) * ss / (n1 + n2 - 2)
    t = np.zeros_like(ma)
    ok = s2 > 0
    if not ok.all():
        logger.warning("%d constant gene(s); t set to 0", int((~ok).sum()))
    t[ok] = (mb[ok] - ma[ok]) / np.sqrt(s2[ok])
    return t


def z_transform(t, df: float) -> ObservationVector:
    """``Phi^{-1}(F_t(t; df))`` evaluated through the lower tail on each side.

    Using ``sf``/``isf`` for positive t avoids the cdf rounding to 1, so the map
    stays exact and antisymmetric far into both tails.
    """
    if not df > 0:
        raise DomainError(f"df must be positive, got {df}")
    t = np.asarray(t, dtype=float).reshape(-1)
    if math.isinf(df):
        return ObservationVector(t.copy())
    neg = -np.abs(t)
    lower = stats.norm.ppf(stats.t.cdf(neg, df))
    z = np.where(t > 0, -lower, lower)
    z[t == 0] = 0.0
    return ObservationVector(z)


def rank_genes(
    z: ObservationVector,
    procedures,
    gamma: float = 0.1,
    gibbs: GibbsConfig | None = None,
    seed: int = 0,
    null_mode: str = "theoretical",
) -> GeneRanking:
    """Run each procedure and order its discoveries by that procedure's statistic.

    p-values (BH), q-values and local fdr ascending; ``|beta_hat|`` descending for
    horseshoe variants. Ties break by gene index.
    """
    ranking = GeneRanking(gamma=gamma)
    for name in parse_procedures(procedures):
        if name == "oracle":
            raise DomainError("the oracle procedure needs ground truth; not available for real data")
        out = run_procedure(name, z, gamma, seed=seed, gibbs=gibbs, null_mode=null_mode, with_pdc=False)
        idx = np.nonzero(out.decisions.reject)[0]
        key = out.statistic[idx] if out.ascending else -out.statistic[idx]
        order = idx[np.lexsort((idx, key))]
        ranking.tables[name] = [
            RankedGene(gene=int(i) + 1, z=float(z.values[i]), statistic=float(out.statistic[i])) for i in order
        ]
        ranking.rejections[name] = int(idx.size)
    return ranking


def _rows(path: Path):
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if row and any(cell.strip() for cell in row):
                yield lineno, [cell.strip() for cell in row]


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_input(path) -> tuple[ObservationVector, ExpressionMatrix | None]:
    """Read a z-score column or a labelled expression matrix.

    A single-column file is taken as z-scores (an optional non-numeric header
    is skipped). Otherwise the first row carries one group label per subject
    column; the controls are the leading run of the first label.
    """
    rows = list(_rows(Path(path)))
    if not rows:
        raise InputFormatError(f"{path} is empty")
    width = len(rows[0][1])
    if width == 1:
        body = rows[1:] if not _is_number(rows[0][1][0]) else rows
        vals = []
        for lineno, row in body:
            if len(row) != 1 or not _is_number(row[0]):
                raise InputFormatError(f"expected one numeric z-score, got {row!r}", lineno)
            vals.append(float(row[0]))
        if not vals:
            raise InputFormatError("no z-scores found")
        arr = np.array(vals)
        if not np.all(np.isfinite(arr)):
            raise InputFormatError("z-scores must be finite")
        return ObservationVector(arr), None

    header_line, labels = rows[0]
    if all(_is_number(c) for c in labels):
        raise InputFormatError("matrix input needs a header row of group labels", header_line)
    first = labels[0]
    n1 = 0
    while n1 < len(labels) and labels[n1] == first:
        n1 += 1
    rest = set(labels[n1:])
    if len(rest) != 1 or first in rest:
        raise InputFormatError("header must hold two contiguous groups of labels", header_line)
    data = []
    for lineno, row in rows[1:]:
        if len(row) != width:
            raise InputFormatError(f"expected {width} columns, got {len(row)}", lineno)
        try:
            data.append([float(c) for c in row])
        except ValueError:
            raise InputFormatError("non-numeric expression value", lineno) from None
    if not data:
        raise InputFormatError("matrix has no gene rows")
    matrix = ExpressionMatrix(np.array(data), group_split=n1)
    return z_transform(t_statistics(matrix), matrix.df), matrix
