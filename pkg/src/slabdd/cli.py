"""Command-line front end: ``slabdd --case pure1 --eps 1/32,1/64 --out results --plots``.

Exit status is 0 on success, 1 when any run fails and 2 on a bad configuration.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import plots
from .config import RunConfig, eps_label, load_config, parse_cases, parse_eps, validate
from .errors import ConfigError
from .experiments import (
    METRICS,
    ErrorEntry,
    ErrorReport,
    Profile,
    SolverParams,
    Solvers,
    coupled_problem,
    make_case,
    run_coupled_case,
    run_pure_case,
)
from .coupled import run_stability

log = logging.getLogger("slabdd")

SCHEMA_VERSION = 1


def fmt(value: float) -> str:
    return f"{value:.11e}"


@dataclass
class Outcome:
    case: str
    eps: str
    entry: ErrorEntry | None = None
    profile: Profile | None = None
    deviation: tuple[np.ndarray, np.ndarray] | None = None
    error: str | None = None


def execute(case_id: str, eps: str, params: SolverParams) -> Outcome:
    """One (case, epsilon) run; failures are captured rather than raised."""
    value = float(Fraction(eps))
    try:
        solvers = Solvers(params)
        case = make_case(case_id)
        if case.kind == "pure":
            entry, profile, _ = run_pure_case(case, value, solvers)
            return Outcome(case_id, eps, entry, profile)
        if case.kind == "coupled":
            res = run_coupled_case(case, value, solvers)
            return Outcome(case_id, eps, res.entry, res.profile)
        run = run_stability(coupled_problem(case, solvers), value, case.T)
        return Outcome(case_id, eps, deviation=(run.times, run.deviation))
    except Exception as exc:  # recorded per run; the exit status reports it
        log.exception("%s eps=%s failed", case_id, eps)
        return Outcome(case_id, eps, error=f"{type(exc).__name__}: {exc}")


def _write_csv(path: Path, schema: str, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# slabdd {schema} schema v{SCHEMA_VERSION}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_outputs(cfg: RunConfig, outcomes: list[Outcome]) -> list[Path]:
    out = cfg.out
    written = []
    ok = [o for o in outcomes if o.error is None]
    entries = [o for o in ok if o.entry is not None]
    if entries:
        path = out / "errors.csv"
        _write_csv(path, "errors", ("case", "epsilon") + METRICS,
                   [[o.case, fmt(o.entry.eps)] + [fmt(o.entry.metric(m)) for m in METRICS] for o in entries])
        written.append(path)
        report = ErrorReport([o.entry for o in entries])
        slopes = report.slopes()
        path = out / "slopes.csv"
        _write_csv(path, "slopes", ("case", "metric", "slope", "intercept"),
                   [[c, m, fmt(s), fmt(b)] for (c, m), (s, b) in sorted(slopes.items())])
        written.append(path)
        for o in entries:
            path = out / f"profiles_{o.case}_{eps_label(o.eps)}.csv"
            _write_csv(path, "profile", ("x", "theta", "mean_f"),
                       [[fmt(a), fmt(b), fmt(c)] for a, b, c in zip(o.profile.x, o.profile.theta, o.profile.mean_f)])
            written.append(path)
    stab = [o for o in ok if o.deviation is not None]
    if stab:
        path = out / "deviation_vs_time.csv"
        rows = [[fmt(float(Fraction(o.eps))), fmt(t), fmt(d)] for o in stab for t, d in zip(*o.deviation)]
        _write_csv(path, "deviation", ("epsilon", "t", "deviation"), rows)
        written.append(path)
    if cfg.plots:
        written += _write_plots(out, entries, stab)
    return written


def _write_plots(out: Path, entries: list[Outcome], stab: list[Outcome]) -> list[Path]:
    written = []
    by_case: dict[str, list[Outcome]] = {}
    for o in entries:
        by_case.setdefault(o.case, []).append(o)
    for case, runs in sorted(by_case.items()):
        runs = sorted(runs, key=lambda o: -o.entry.eps)
        eps = [o.entry.eps for o in runs]
        series = [(m, eps, [o.entry.metric(m) for o in runs]) for m in METRICS]
        written.append(plots.error_plot(series, out / f"errors_{case}.svg", title=case))
        prof = []
        for o in runs:
            prof.append((f"approx eps={o.eps}", o.profile.x, o.profile.theta))
            prof.append((f"ref eps={o.eps}", o.profile.x, o.profile.mean_f))
        written.append(plots.profile_plot(prof, out / f"profiles_{case}.svg", title=case))
    if stab:
        series = [(f"eps={o.eps}", o.deviation[0], o.deviation[1]) for o in stab]
        written.append(plots.line_plot(series, out / "deviation_vs_time.svg", title="stability", ylabel="L2 deviation"))
    return written


def run(cfg: RunConfig) -> int:
    plan = [(c, e) for c in sorted(cfg.cases) for e in sorted(cfg.eps, key=lambda s: -Fraction(s))]
    log.info("running %d jobs", len(plan))
    if cfg.threads > 1 and len(plan) > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = list(pool.map(execute, *zip(*plan), [cfg.params] * len(plan)))
    else:
        outcomes = [execute(c, e, cfg.params) for c, e in plan]
    write_outputs(cfg, outcomes)
    failed = [o for o in outcomes if o.error]
    for o in failed:
        print(f"run {o.case} eps={o.eps} failed: {o.error}", file=sys.stderr)
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slabdd", description="Kinetic/diffusion coupling experiments on a slab.")
    p.add_argument("--config", type=Path, help="INI file; flags given here override it")
    p.add_argument("--case", help="comma-separated case ids")
    p.add_argument("--eps", help="comma-separated epsilons, e.g. 1/32,1/64")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--plots", action="store_true", default=None, help="also write SVG charts")
    p.add_argument("--threads", type=int, help="worker processes for independent runs")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def parse_args(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config) if args.config else RunConfig()
    updates = {}
    if args.case:
        updates["cases"] = parse_cases(args.case)
    if args.eps:
        updates["eps"] = parse_eps(args.eps)
    if args.out:
        updates["out"] = args.out
    if args.plots:
        updates["plots"] = True
    if args.threads is not None:
        updates["threads"] = args.threads
    cfg = replace(cfg, **updates)
    validate(cfg)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return cfg


def main(argv=None) -> int:
    try:
        cfg = parse_args(argv)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
