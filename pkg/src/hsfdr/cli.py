"""Command-line entry point: ``hsfdr simulate | analyze | pdc | oracle-check``.

Every option can also be given in a flat ``key = value`` config file passed
with ``--config``; keys are the long option names (dashes or underscores).
Command-line flags override the file. Exit codes: 0 success, 2 configuration
or input error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from hsfdr.errors import HsfdrError
from hsfdr.fahs import theorem1_report, xi_efahs, xi_mfahs
from hsfdr.gibbs import GibbsConfig
from hsfdr.pdc import DEFAULT_THRESHOLD, pdc_check
from hsfdr.procedures import PROCEDURES, parse_procedures
from hsfdr.pvalues import bh_procedure, check_level, two_sided_p

logger = logging.getLogger("hsfdr")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value file supplying any option below")
    p.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging")


def _gibbs_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--burn-in", type=int, default=1000, help="Gibbs burn-in sweeps (default 1000)")
    p.add_argument("--samples", type=int, default=5000, help="retained Gibbs sweeps (default 5000)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hsfdr", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    procs = ",".join(PROCEDURES)

    sim = sub.add_parser("simulate", help="run the replication grid and write records/summary CSVs")
    _common(sim)
    _gibbs_opts(sim)
    sim.add_argument("--preset", choices=("desk", "paper"), default="desk",
                     help="desk: m=2000, 30 reps, s in {0.05,0.2,0.5}, gamma in {0.1,0.2}; "
                          "paper: m=10000, 100 reps, full grids")
    sim.add_argument("--procedures", default="bh,mfahs,efahs", help=f"comma list from {procs}")
    sim.add_argument("--threads", type=int, default=1, help="worker processes; output does not depend on it")
    sim.add_argument("--out", default="sim_out", help="output directory (default sim_out)")
    sim.add_argument("--m", type=int, help="override number of hypotheses")
    sim.add_argument("--replications", type=int, help="override replications per setting")
    sim.add_argument("--s", type=_float_list, help="override signal proportions, comma list")
    sim.add_argument("--gamma", type=_float_list, help="override nominal FDR levels, comma list")
    sim.add_argument("--rho", type=_float_list, help="override equicorrelations, comma list")
    sim.add_argument("--psi", type=float, default=5.0, help="slab sd before standardization (default 5)")
    sim.add_argument("--snr", type=float, default=3.0, help="signal-to-noise ratio (default 3)")
    sim.add_argument("--standardize", choices=("all", "nonzero"), default="all",
                     help="sd used to standardize beta: all m entries or nonzero only")
    sim.add_argument("--svg", action=argparse.BooleanOptionalAction, default=False,
                     help="also write boxplots.svg")
    sim.add_argument("--timing", action=argparse.BooleanOptionalAction, default=False,
                     help="fill wall_ms in records.csv (output is then no longer byte-reproducible)")

    ana = sub.add_parser("analyze", help="rank discoveries for a z-score or expression-matrix CSV")
    _common(ana)
    _gibbs_opts(ana)
    ana.add_argument("--input", help="z-score column CSV or labelled expression matrix CSV")
    ana.add_argument("--gamma", type=float, default=0.1, help="nominal FDR level (default 0.1)")
    ana.add_argument("--procedures", default="bh,mfahs,efahs,locfdr", help="comma list of procedures")
    ana.add_argument("--top-k", type=int, default=10, help="rows in the comparison table (default 10)")
    ana.add_argument("--null-mode", choices=("theoretical", "empirical"), default="theoretical",
                     help="null for the locfdr procedure")
    ana.add_argument("--out", default="analysis_out", help="output directory (default analysis_out)")

    pdc = sub.add_parser("pdc", help="prior-data conflict check; prints one JSON line")
    _common(pdc)
    pdc.add_argument("--input", help="single-column CSV of observations y")
    pdc.add_argument("--xi", type=float, help="global scale; if absent it is estimated by --variant")
    pdc.add_argument("--variant", choices=("mfahs", "efahs"), default="mfahs",
                     help="FAHS estimate of xi used when --xi is absent")
    pdc.add_argument("--gamma", type=float, default=0.1, help="BH level for the xi estimate")
    pdc.add_argument("--sigma-diag", type=float, help="diagonal entry of the noise covariance (required)")
    pdc.add_argument("--sigma-offdiag", type=float,
                     help="off-diagonal entry as it enters the variance formula squared (required)")
    pdc.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD, help="conflict threshold (default 0.05)")
    pdc.add_argument("--averaged", action=argparse.BooleanOptionalAction, default=False,
                     help="average the tail probability over 100 local-scale draws")

    orc = sub.add_parser("oracle-check", help="compare estimators with closed-form and quadrature oracles")
    _common(orc)
    orc.add_argument("--quick", action=argparse.BooleanOptionalAction, default=True,
                     help="average 400 chains per grid point instead of 1000 (default on)")

    keys = "\n".join(
        f"  {name}: " + ", ".join(sorted(a.dest for a in p._actions if a.dest not in ("help", "config")))
        for name, p in sub.choices.items()
    )
    parser.epilog = "config-file keys per subcommand:\n" + keys
    return parser


def parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        dests = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
        cfg = read_config(args.config)
        unknown = sorted(set(cfg) - set(dests))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        defaults = {}
        for key, text in cfg.items():
            action = dests[key]
            if isinstance(action, argparse.BooleanOptionalAction):
                if text.lower() not in ("true", "false", "yes", "no", "1", "0"):
                    raise UsageError(f"config key {key} expects a boolean")
                defaults[key] = text.lower() in ("true", "yes", "1")
            elif isinstance(action, argparse._CountAction):
                defaults[key] = int(text)
            else:
                try:
                    defaults[key] = action.type(text) if action.type else text
                except (ValueError, argparse.ArgumentTypeError) as exc:
                    raise UsageError(f"config key {key}: {exc}") from None
                if action.choices and defaults[key] not in action.choices:
                    raise UsageError(f"config key {key} must be one of {', '.join(action.choices)}")
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _settings_from_args(args):
    from hsfdr.simulate import DESK_GAMMA, DESK_S, PAPER_GAMMA, PAPER_RHO, PAPER_S, SimulationSetting

    if args.preset == "desk":
        m, reps, s_grid, g_grid, r_grid = 2000, 30, DESK_S, DESK_GAMMA, (0.0,)
    else:
        m, reps, s_grid, g_grid, r_grid = 10000, 100, PAPER_S, PAPER_GAMMA, PAPER_RHO
    m = args.m if args.m is not None else m
    reps = args.replications if args.replications is not None else reps
    s_grid = args.s or s_grid
    g_grid = args.gamma or g_grid
    r_grid = args.rho or r_grid
    return [
        SimulationSetting(
            m=m, s=s, gamma=g, rho=r, replications=reps, base_seed=args.seed,
            procedures=parse_procedures(args.procedures), psi=args.psi, snr=args.snr,
            standardize=args.standardize, burn_in=args.burn_in, samples=args.samples,
        )
        for r in r_grid
        for s in s_grid
        for g in g_grid
    ]


def cmd_simulate(args) -> int:
    from hsfdr.report import write_boxplots_svg, write_errors, write_records, write_summary
    from hsfdr.simulate import aggregate

    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    GibbsConfig(burn_in=args.burn_in, samples=args.samples)
    settings = _settings_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    try:
        for idx, st in enumerate(settings):
            logger.info("running %s (%d replications)", st.setting_id, st.replications)
            records.extend(_run_indexed(st, idx, args.threads))
    except Exception:
        logger.exception("simulation aborted; writing partial records")
        write_records(out / "records.csv", records, timing=args.timing)
        write_errors(out / "errors.csv", records)
        return EXIT_RUNTIME
    n = write_records(out / "records.csv", records, timing=args.timing)
    failed = write_errors(out / "errors.csv", records)
    cells = aggregate(records)
    write_summary(out / "summary.csv", cells)
    if args.svg:
        write_boxplots_svg(out / "boxplots.svg", cells)
    print(json.dumps({"records": n, "failed": failed, "cells": len(cells), "out": str(out)}))
    return EXIT_OK


def _run_indexed(setting, index: int, threads: int):
    from concurrent.futures import ProcessPoolExecutor

    from hsfdr.simulate import _run_task

    tasks = [(setting, index, r) for r in range(setting.replications)]
    if threads <= 1 or len(tasks) <= 1:
        chunks = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_run_task, tasks))
    return [rec for chunk in chunks for rec in chunk]


def cmd_analyze(args) -> int:
    from hsfdr.realdata import InputFormatError, load_input, rank_genes
    from hsfdr.report import write_discoveries, write_top_table

    if not args.input:
        raise UsageError("--input is required")
    check_level(args.gamma)
    procedures = parse_procedures(args.procedures)
    try:
        z, _ = load_input(args.input)
    except InputFormatError as exc:
        raise UsageError(str(exc)) from None
    gibbs = GibbsConfig(burn_in=args.burn_in, samples=args.samples)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ranking = rank_genes(z, procedures, args.gamma, gibbs=gibbs, seed=args.seed, null_mode=args.null_mode)
    write_discoveries(out, ranking)
    write_top_table(out / "top_k.csv", ranking, k=args.top_k)
    print(json.dumps({
        "m": z.m,
        "gamma": args.gamma,
        "rejections": ranking.rejections,
        "top": {p: ranking.top(p, args.top_k) for p in ranking.tables},
    }))
    return EXIT_OK


def cmd_pdc(args) -> int:
    from hsfdr.realdata import InputFormatError, load_input

    if args.sigma_diag is None or args.sigma_offdiag is None:
        raise UsageError("--sigma-diag and --sigma-offdiag are required")
    if not args.input:
        raise UsageError("--input is required")
    if not (0 <= args.threshold < 1):
        raise UsageError("--threshold must lie in [0, 1)")
    try:
        y, matrix = load_input(args.input)
    except InputFormatError as exc:
        raise UsageError(str(exc)) from None
    if matrix is not None:
        raise UsageError("pdc expects a single column of observations")
    if args.xi is not None:
        if args.xi <= 0:
            raise UsageError("--xi must be positive")
        xi = args.xi
    else:
        R = bh_procedure(two_sided_p(y.values), check_level(args.gamma)).R
        xi = xi_mfahs(R, y.m) if args.variant == "mfahs" else xi_efahs(R, y.m)
    res = pdc_check(y, xi, args.sigma_diag, args.sigma_offdiag, args.threshold, seed=args.seed, averaged=args.averaged)
    print(json.dumps({"xi": xi, **res.to_dict()}))
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    from hsfdr import oracles
    from hsfdr.gibbs import gibbs_run
    from hsfdr.pvalues import qvalues
    from hsfdr.twogroups import TwoGroupsFit, eb_stepup, locfdr_values

    results = []
    rep = theorem1_report(0.02, 10000, 500, alpha=2, c=1.5)
    results.append(("rate_bounds", abs(rep.lower_bound - 0.01935) < 1e-4 and abs(rep.upper_bound - 0.02244) < 1e-4,
                    {"lower": rep.lower_bound, "upper": rep.upper_bound}))

    rng = np.random.default_rng(args.seed)
    same = True
    for _ in range(200):
        p = rng.random(rng.integers(1, 200)) ** rng.uniform(1, 4)
        for g in (0.05, 0.1, 0.2):
            same &= np.array_equal(bh_procedure(p, g).reject, qvalues(p, 1.0).q <= g)
    results.append(("qvalue_bh_equivalence", bool(same), {"vectors": 200}))

    z, _ = oracles.sample_mixture(rng, 5000)
    fit = TwoGroupsFit(f_hat=oracles.mixture_density, pi0_hat=oracles.MIXTURE_NULL_WEIGHT)
    lf = locfdr_values(z, fit)
    bound_ok = True
    for g in (0.1, 0.2):
        d = eb_stepup(lf, g)
        bound_ok &= d.R == 0 or float(lf[d.reject].mean()) <= g
    results.append(("locfdr_oracle_bound", bool(bound_ok), {}))

    grid = np.array([0.0, 0.5, 1.0, 2.0, 4.0, 8.0])
    reps = 400 if args.quick else 1000
    worst = 0.0
    for xi in (0.01, 0.05, 0.5):
        cfg = GibbsConfig(burn_in=1000, samples=5000, seed=args.seed, xi_mode="fixed", xi_value=xi, sigma_mode="fixed")
        est = gibbs_run(np.repeat(grid, reps), cfg).beta_mean.reshape(grid.size, reps).mean(axis=1)
        ref = np.array([oracles.horseshoe_posterior_mean(v, xi) for v in grid])
        worst = max(worst, float(np.max(np.abs(est - ref))))
    results.append(("sampler_quadrature", worst <= 0.05, {"max_abs_error": worst}))

    for name, ok, info in results:
        print(json.dumps({"check": name, "pass": ok, **info}))
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_RUNTIME


COMMANDS = {
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "pdc": cmd_pdc,
    "oracle-check": cmd_oracle_check,
}


def main(argv=None) -> int:
    try:
        args = parse(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"hsfdr: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"hsfdr: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HsfdrError as exc:
        is_config = isinstance(exc, ValueError)
        print(f"hsfdr: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if is_config else EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
