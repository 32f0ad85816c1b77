"""Command-line entry point: ``lifiloc simulate | locate | table1``.

Exit codes: 0 success, 1 check failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from lifiloc.calibration import DEFAULT_FALLBACK_N
from lifiloc.evaluation import (
    PUBLISHED_TABLE1_N,
    TABLE1_TOL,
    distance_error_report,
    dominance_table,
    error_report_json,
    load_table1,
    replay_trace,
    reproduce_table1,
    write_error_report_csv,
    write_locate_csv,
)
from lifiloc.exceptions import LocalizationError
from lifiloc.model import load_floorplan
from lifiloc.simulator import load_scenario, read_trace, run, write_trace

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_USAGE = 2


def _err(msg: str) -> None:
    print(f"lifiloc: {msg}", file=sys.stderr)


def cmd_simulate(scenario_path, out_trace_path, seed: int | None = None) -> int:
    if not Path(scenario_path).is_file():
        _err(f"scenario not found: {scenario_path}")
        return EXIT_USAGE
    try:
        scenario = load_scenario(scenario_path, seed_override=seed)
        trace = run(scenario)
        write_trace(trace, out_trace_path)
    except (LocalizationError, OSError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    print(
        f"snapshots={len(trace.snapshots)} triggers={len(trace.triggers)}"
        f" truth={len(trace.ground_truth)} -> {out_trace_path}"
    )
    return EXIT_OK


def cmd_locate(
    trace_path,
    floorplan_path,
    fallback_n: float = DEFAULT_FALLBACK_N,
    no_calibration: bool = False,
    clamp: bool = False,
    out=None,
) -> int:
    for p, what in ((trace_path, "trace"), (floorplan_path, "floor plan")):
        if not Path(p).is_file():
            _err(f"{what} not found: {p}")
            return EXIT_USAGE
    try:
        plan = load_floorplan(floorplan_path)
        trace = read_trace(trace_path)
    except (LocalizationError, OSError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    if not fallback_n > 0:
        _err("--fallback-n must be > 0")
        return EXIT_USAGE
    rows = replay_trace(trace, plan, fallback_n=fallback_n, calibrate=not no_calibration, clamp=clamp)
    if out is None:
        write_locate_csv(rows, sys.stdout)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            write_locate_csv(rows, fh)
    failed = sum(not r.ok for r in rows)
    if failed:
        _err(f"{failed} of {len(rows)} snapshots could not be located")
    if rows and failed == len(rows):
        return EXIT_CHECK
    return EXIT_OK


def cmd_table1(fixtures=None, out_dir=None) -> int:
    if fixtures is not None and not Path(fixtures).is_file():
        _err(f"fixtures not found: {fixtures}")
        return EXIT_USAGE
    try:
        datasets = load_table1(fixtures)
    except (ValueError, OSError) as exc:
        _err(f"cannot read fixtures: {exc}")
        return EXIT_USAGE
    if len(datasets) != len(PUBLISHED_TABLE1_N):
        _err(f"expected {len(PUBLISHED_TABLE1_N)} locations, found {len(datasets)}")
        return EXIT_CHECK
    derived = reproduce_table1(datasets)
    table = dominance_table(datasets, derived)

    print(f"{'location':<12}{'derived_n':>12}{'published_n':>13}{'deviation':>12}  status")
    deviations = []
    for ds, n, pub in zip(datasets, derived, PUBLISHED_TABLE1_N):
        dev = n - pub
        ok = abs(dev) <= TABLE1_TOL
        if not ok:
            deviations.append(ds.label)
        print(f"{ds.label:<12}{n:>12.6f}{pub:>13.6f}{dev:>12.6f}  {'ok' if ok else 'MISMATCH'}")
    print()
    print("mean absolute distance error (m); row = location, column = exponent used")
    print(f"{'':<12}" + "".join(f"{'n_' + ds.label:>14}" for ds in datasets))
    for i, ds in enumerate(datasets):
        print(f"{ds.label:<12}" + "".join(f"{v:>14.6f}" for v in table[i]))

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for ds, n in zip(datasets, derived):
            rep = distance_error_report(ds, n)
            with open(out / f"{ds.label}.csv", "w", encoding="utf-8", newline="") as fh:
                write_error_report_csv(rep, fh, label=ds.label)
            (out / f"{ds.label}.json").write_text(error_report_json(rep, label=ds.label) + "\n")

    if deviations:
        _err("derived exponents deviate from published values: " + ", ".join(deviations))
        return EXIT_CHECK
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lifiloc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a walk and write a JSON Lines trace")
    p.add_argument("scenario")
    p.add_argument("out_trace")
    p.add_argument("--seed", type=int, default=None, help="override the scenario rng_seed")

    p = sub.add_parser("locate", help="replay a trace through calibration and trilateration")
    p.add_argument("trace")
    p.add_argument("floorplan")
    p.add_argument("--fallback-n", type=float, default=DEFAULT_FALLBACK_N)
    p.add_argument("--no-calibration", action="store_true", help="ignore lamp triggers")
    p.add_argument("--clamp", action="store_true", help="clamp estimates to the floor-plan bounds")
    p.add_argument("-o", "--out", default=None, help="CSV output path (default stdout)")

    p = sub.add_parser("table1", help="derive the survey-site exponents and error reports")
    p.add_argument("--fixtures", default=None, help="survey CSV (default: bundled copy)")
    p.add_argument("--out-dir", default=None, help="write per-location CSV/JSON reports here")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "simulate":
        return cmd_simulate(args.scenario, args.out_trace, seed=args.seed)
    if args.command == "locate":
        return cmd_locate(
            args.trace,
            args.floorplan,
            fallback_n=args.fallback_n,
            no_calibration=args.no_calibration,
            clamp=args.clamp,
            out=args.out,
        )
    return cmd_table1(fixtures=args.fixtures, out_dir=args.out_dir)


if __name__ == "__main__":
    sys.exit(main())
