"""Command-line entry point: ``tendersim run|sweep <scenario file>``."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence

from .harness import RunReport, Scenario, ScenarioError, run_scenario, sweep
from .scenario import apply_overrides, dump_report, dump_sweep, load_scenario

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tendersim", description="Simulate Byzantine consensus scenarios.")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help="scenario file")
    common.add_argument("--seed", type=int, action="append", help="seed to run (repeatable)")
    common.add_argument("--horizon", type=int, help="override the simulated time limit")
    common.add_argument("--variant", choices=("sync", "es"), help="override the protocol variant")
    common.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    common.add_argument("--report-out", help="write the report here instead of stdout")

    run = sub.add_parser("run", parents=[common], help="run one scenario per seed")
    run.add_argument("--trace-out", help="write traces here; '{seed}' is replaced by the seed")
    run.add_argument("--no-trace", action="store_true", help="omit the trace from all output")

    sw = sub.add_parser("sweep", parents=[common], help="run the scenario over several system sizes")
    sw.add_argument("--n", type=int, nargs="+", default=[4, 7, 10, 13], help="sizes (each 3f+1)")
    return p


def _trace_path(pattern: str, seed: int, batch: bool) -> str:
    if "{seed}" in pattern:
        return pattern.replace("{seed}", str(seed))
    if not batch:
        return pattern
    stem, ext = os.path.splitext(pattern)
    return f"{stem}.seed{seed}{ext}"


def _run_one(s: Scenario) -> RunReport:
    return run_scenario(s)


def _map(fn, items: Sequence, jobs: int) -> List:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        base = load_scenario(args.scenario)
        seeds = args.seed if args.seed is not None else [base.seed]
        scenarios = [apply_overrides(base, seed, args.horizon, args.variant) for seed in seeds]
        if args.command == "sweep":
            for n in args.n:
                base.with_size(n)
    except ScenarioError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "sweep":
        template = apply_overrides(base, None, args.horizon, args.variant)
        rows = sweep(template, args.n, seeds)
        _emit(dump_sweep(rows), args.report_out)
        return EXIT_OK if all(all(r.verdicts) for r in rows) else EXIT_FAIL

    reports = _map(_run_one, scenarios, args.jobs)
    batch = len(reports) > 1
    chunks = []
    for report in reports:
        embed = not args.no_trace and not args.trace_out
        if args.trace_out and not args.no_trace and report.trace is not None:
            with open(_trace_path(args.trace_out, report.seed, batch), "w", encoding="utf-8") as fh:
                fh.write(report.trace.dumps())
        chunks.append(dump_report(report, include_trace=embed))
    _emit("".join(chunks), args.report_out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
