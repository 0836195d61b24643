from __future__ import annotations

import csv

from hsfdr.model import ObservationVector
from hsfdr.realdata import GeneRanking, RankedGene
from hsfdr.report import (
    RECORD_COLUMNS,
    write_boxplots_svg,
    write_discoveries,
    write_errors,
    write_records,
    write_summary,
    write_top_table,
)
from hsfdr.simulate import ReplicationRecord, aggregate


def _records():
    base = dict(setting_id="m10_s0.1_g0.1_r0", seed=1, s=0.1, gamma=0.1, rho=0.0, m=10)
    return [
        ReplicationRecord(**base, replication=r, procedure="bh", R=2, FD=r % 2, TD=2 - r % 2,
                          fdp=(r % 2) / 2, power=0.5, wall_ms=12.5)
        for r in range(4)
    ] + [ReplicationRecord(**base, replication=0, procedure="mfahs", R=None, FD=None, TD=None,
                           fdp=None, power=None, error="SamplerError: x")]


def test_record_schema_and_blank_timing(tmp_path):
    p = tmp_path / "records.csv"
    assert write_records(p, _records()) == 5
    rows = list(csv.reader(p.open()))
    assert tuple(rows[0]) == RECORD_COLUMNS
    assert rows[0] == "setting_id,replication,seed,procedure,s,gamma,rho,m,R,FD,TD,fdp,power,xi_hat,pdc_tail,wall_ms".split(",")
    assert all(r[-1] == "" for r in rows[1:])
    write_records(p, _records(), timing=True)
    assert list(csv.reader(p.open()))[1][-1] == "12.5"


def test_errors_and_summary(tmp_path):
    assert write_errors(tmp_path / "errors.csv", _records()) == 1
    cells = aggregate(_records())
    write_summary(tmp_path / "summary.csv", cells)
    rows = list(csv.DictReader((tmp_path / "summary.csv").open()))
    assert len(rows) == 1 and float(rows[0]["fdr"]) == 0.25


def test_svg_is_reproducible(tmp_path):
    cells = aggregate(_records())
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    write_boxplots_svg(a, cells)
    write_boxplots_svg(b, cells)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().lstrip().startswith("<?xml")


def test_discovery_tables(tmp_path):
    r = GeneRanking(
        gamma=0.1,
        tables={"bh": [RankedGene(3, 4.0, 1e-4), RankedGene(1, -3.5, 2e-3)], "mfahs": [RankedGene(3, 4.0, 3.9)]},
        rejections={"bh": 2, "mfahs": 1},
    )
    paths = write_discoveries(tmp_path, r)
    assert [p.name for p in paths] == ["discoveries_bh.csv", "discoveries_mfahs.csv"]
    assert (tmp_path / "discoveries_bh.csv").read_text().splitlines()[1] == "1,3,4.0,0.0001"
    write_top_table(tmp_path / "top.csv", r, k=3)
    assert (tmp_path / "top.csv").read_text().splitlines() == ["rank,bh,mfahs", "1,3,3", "2,1,", "3,,"]
    assert ObservationVector([1.0]).m == 1
