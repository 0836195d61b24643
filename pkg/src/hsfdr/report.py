"""CSV and SVG writers for simulation and real-data outputs."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

from hsfdr.realdata import GeneRanking
from hsfdr.simulate import CellSummary, ReplicationRecord

RECORD_COLUMNS = (
    "setting_id", "replication", "seed", "procedure", "s", "gamma", "rho", "m",
    "R", "FD", "TD", "fdp", "power", "xi_hat", "pdc_tail", "wall_ms",
)
SUMMARY_COLUMNS = (
    "setting_id", "procedure", "s", "gamma", "rho", "m", "n", "fdr", "fdr_se",
    "fdp_min", "fdp_q1", "fdp_median", "fdp_q3", "fdp_max", "whisker_low", "whisker_high",
    "n_outliers", "mean_power", "mean_xi_hat",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ""
    return str(value)


def write_records(path, records: Iterable[ReplicationRecord], timing: bool = False) -> int:
    """Write one row per record. ``wall_ms`` is left blank unless ``timing`` is set,
    which keeps reruns byte-identical."""
    n = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for r in records:
            row = [getattr(r, c) for c in RECORD_COLUMNS]
            row[-1] = round(r.wall_ms, 3) if timing else None
            w.writerow([_fmt(v) for v in row])
            n += 1
    return n


def write_errors(path, records: Iterable[ReplicationRecord]) -> int:
    failed = [r for r in records if r.error is not None]
    if not failed:
        return 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("setting_id", "replication", "procedure", "error"))
        for r in failed:
            w.writerow((r.setting_id, r.replication, r.procedure, r.error))
    return len(failed)


def write_summary(path, cells: Iterable[CellSummary]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for c in cells:
            row = []
            for col in SUMMARY_COLUMNS:
                row.append(len(c.outliers) if col == "n_outliers" else getattr(c, col))
            w.writerow([_fmt(v) for v in row])


def write_boxplots_svg(path, cells: Sequence[CellSummary]) -> None:
    """FDP boxplots per procedure, one panel per setting, FDR as black crosses,
    nominal level as a dashed line."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "hsfdr"
    settings: dict[str, list[CellSummary]] = {}
    for c in cells:
        settings.setdefault(c.setting_id, []).append(c)
    n = len(settings)
    cols = min(n, 3) or 1
    rows = max(1, math.ceil(n / cols))
    fig, axes = plt.subplots(rows, cols, figsize=(4.2 * cols, 3.2 * rows), squeeze=False)
    for ax, (sid, group) in zip(axes.flat, settings.items()):
        stats = [
            {
                "label": c.procedure,
                "med": c.fdp_median,
                "q1": c.fdp_q1,
                "q3": c.fdp_q3,
                "whislo": c.whisker_low,
                "whishi": c.whisker_high,
                "fliers": list(c.outliers),
            }
            for c in group
        ]
        ax.bxp(stats, showfliers=True)
        ax.plot(range(1, len(group) + 1), [c.fdr for c in group], "kx", markersize=8)
        ax.axhline(group[0].gamma, color="k", linestyle="--", linewidth=1)
        ax.set_title(sid, fontsize=9)
        ax.set_ylabel("FDP")
        ax.tick_params(axis="x", labelrotation=45, labelsize=8)
    for ax in list(axes.flat)[n:]:
        ax.set_visible(False)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def write_discoveries(out_dir, ranking: GeneRanking) -> list[Path]:
    out_dir = Path(out_dir)
    paths = []
    for proc, table in ranking.tables.items():
        path = out_dir / f"discoveries_{proc}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("rank", "gene", "z", "statistic"))
            for i, g in enumerate(table, start=1):
                w.writerow((i, g.gene, _fmt(g.z), _fmt(g.statistic)))
        paths.append(path)
    return paths


def write_top_table(path, ranking: GeneRanking, k: int = 10) -> None:
    """Side-by-side top-k gene columns, one per procedure; short columns are padded blank."""
    procs = list(ranking.tables)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", *procs])
        for i in range(k):
            row = [i + 1]
            for p in procs:
                t = ranking.tables[p]
                row.append(t[i].gene if i < len(t) else "")
            w.writerow(row)
