from __future__ import annotations

import json

import numpy as np
import pytest

from hsfdr.cli import main

FAST = ["--burn-in", "50", "--samples", "100"]
SMALL = ["--m", "100", "--replications", "2", "--s", "0.1", "--gamma", "0.1", *FAST]


def _json(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_simulate_writes_outputs(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["simulate", *SMALL, "--out", str(out), "--svg", "--procedures", "bh,mfahs"]) == 0
    assert _json(capsys)["records"] == 4
    assert {p.name for p in out.iterdir()} == {"records.csv", "summary.csv", "boxplots.svg"}
    assert len((out / "records.csv").read_text().splitlines()) == 1 + 4


def test_simulate_rerun_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["simulate", *SMALL, "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a/records.csv").read_bytes() == (tmp_path / "b/records.csv").read_bytes()


def test_invalid_level_writes_nothing(tmp_path):
    out = tmp_path / "o"
    assert main(["simulate", "--gamma", "1.5", "--out", str(out)]) == 2
    assert not out.exists()


@pytest.mark.parametrize("bad", [["--procedures", "bh,zz"], ["--threads", "0"], ["--preset", "huge"], ["--rho", "a"]])
def test_simulate_config_errors(tmp_path, bad):
    assert main(["simulate", *bad, "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# desk run\nm = 100\nreplications = 3\ns = 0.1\ngamma = 0.1\nburn-in = 50\nsamples = 100\nprocedures = bh\n")
    assert main(["simulate", "--config", str(cfg), "--replications", "1", "--out", str(tmp_path / "o")]) == 0
    assert _json(capsys)["records"] == 1


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    cfg.write_text("not a pair\n")
    assert main(["simulate", "--config", str(cfg)]) == 2


def test_runtime_failure_keeps_partial_records(tmp_path, monkeypatch):
    import hsfdr.cli as cli

    calls = []

    def flaky(setting, index, threads):
        if calls:
            raise RuntimeError("disk full")
        calls.append(index)
        return real(setting, index, threads)

    real = cli._run_indexed
    monkeypatch.setattr(cli, "_run_indexed", flaky)
    out = tmp_path / "o"
    code = main(["simulate", "--m", "100", "--replications", "1", "--s", "0.1,0.2", "--gamma", "0.1",
                 "--procedures", "bh", "--out", str(out)])
    assert code == 3
    assert len((out / "records.csv").read_text().splitlines()) == 2


def _zfile(tmp_path, values, name="z.csv"):
    p = tmp_path / name
    np.savetxt(p, np.asarray(values, float))
    return p


def test_analyze(tmp_path, capsys):
    z = np.r_[[8.0, -6.5, 5.5], np.random.default_rng(0).standard_normal(400)]
    out = tmp_path / "a"
    assert main(["analyze", "--input", str(_zfile(tmp_path, z)), "--out", str(out), "--top-k", "3", *FAST]) == 0
    res = _json(capsys)
    assert res["top"]["bh"] == [1, 2, 3]
    assert (out / "top_k.csv").read_text().splitlines()[0] == "rank,bh,mfahs,efahs,locfdr"


def test_analyze_single_row(tmp_path, capsys):
    args = ["analyze", "--input", str(_zfile(tmp_path, [4.2])), "--procedures", "bh,mfahs", "--out", str(tmp_path / "a"), *FAST]
    assert main(args) == 0
    assert _json(capsys)["top"]["bh"] == [1]


def test_analyze_errors(tmp_path, capsys):
    assert main(["analyze", "--input", str(tmp_path / "missing.csv")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("z\n1.0\n2.0\noops\n")
    assert main(["analyze", "--input", str(bad), "--out", str(tmp_path / "a")]) == 2
    assert "line 4" in capsys.readouterr().err
    assert main(["analyze"]) == 2


def test_pdc_zero_mean(tmp_path, capsys):
    p = _zfile(tmp_path, [1.0, -1.0, 0.5, -0.5])
    assert main(["pdc", "--input", str(p), "--xi", "0.1", "--sigma-diag", "1", "--sigma-offdiag", "0"]) == 0
    res = _json(capsys)
    assert res["tail_probability"] == 1.0 and res["threshold"] == 0.05 and res["conflict"] is False


def test_pdc_conflict_is_exit_zero(tmp_path, capsys):
    p = _zfile(tmp_path, np.full(200, 3.0))
    assert main(["pdc", "--input", str(p), "--sigma-diag", "1", "--sigma-offdiag", "0"]) == 0
    assert _json(capsys)["conflict"] is True


def test_pdc_needs_sigma(tmp_path):
    p = _zfile(tmp_path, [0.0, 1.0])
    assert main(["pdc", "--input", str(p), "--xi", "0.1"]) == 2
    assert main(["pdc", "--input", str(p), "--xi", "0.1", "--sigma-diag", "1"]) == 2


def test_help_lists_config_keys(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    assert "config-file keys per subcommand" in capsys.readouterr().out


def test_oracle_check(capsys):
    assert main(["oracle-check"]) == 0
    lines = [json.loads(s) for s in capsys.readouterr().out.strip().splitlines()]
    assert [d["check"] for d in lines] == ["rate_bounds", "qvalue_bh_equivalence", "locfdr_oracle_bound", "sampler_quadrature"]
    assert all(d["pass"] for d in lines)
