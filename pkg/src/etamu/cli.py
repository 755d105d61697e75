"""Command-line front end: ``etamu run|validate|presets``."""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional

from .presets import PRESETS
from .scenario import (evaluate_cell, load_document, metric_columns, parse_scenario, render_csv,
                       sweep_grid, validate_document, validate_scenario)

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2

log = logging.getLogger("etamu")


def _eval(args):
    return evaluate_cell(*args)


def run_scenario(path, output_dir: Optional[str] = None, jobs: int = 1, stream=sys.stderr) -> int:
    """Run every metric of a scenario file and write one CSV per metric.

    Returns the process exit status.
    """
    path = Path(path)
    diags = validate_scenario(path)
    for d in diags:
        print(d, file=stream)
    if any(d.level == "error" for d in diags):
        return EXIT_INVALID
    scn = parse_scenario(load_document(path), default_name=path.stem)
    out_dir = Path(output_dir or scn.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = sweep_grid(scn)
    status = EXIT_OK
    for metric in scn.metrics:
        tasks = [(scn, metric, pt) for pt in grid]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(_eval, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
        else:
            rows = [_eval(t) for t in tasks]
        n_na = sum(cell.startswith("NA(") for row in rows for cell in row)
        target = out_dir / f"{scn.name}_{metric}.csv"
        with open(target, "w", encoding="utf-8", newline="") as fh:
            fh.write(render_csv(metric_columns(scn, metric), rows))
        print(f"wrote {target} ({len(rows)} rows, {n_na} NA cells)", file=stream)
        if n_na:
            status = EXIT_NUMERIC
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="etamu", description="MRC performance over extended eta-mu fading.")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a scenario and write CSV tables")
    run.add_argument("scenario")
    run.add_argument("-o", "--output-dir", default=None, help="overrides the scenario's output path")
    run.add_argument("-j", "--jobs", type=int, default=1, help="worker processes for the sweep")

    val = sub.add_parser("validate", help="report every problem in a scenario file")
    val.add_argument("scenario")

    pre = sub.add_parser("presets", help="print figure scenario templates")
    pre.add_argument("name", nargs="?", choices=sorted(PRESETS), help="print only this template")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run":
        if args.jobs < 1:
            print("error: --jobs must be >= 1", file=sys.stderr)
            return EXIT_INVALID
        return run_scenario(args.scenario, args.output_dir, args.jobs)
    if args.command == "validate":
        diags = validate_scenario(args.scenario)
        for d in diags:
            print(d)
        if not diags:
            print("ok")
        return EXIT_INVALID if any(d.level == "error" for d in diags) else EXIT_OK
    names = [args.name] if args.name else sorted(PRESETS)
    for i, name in enumerate(names):
        if len(names) > 1:
            print(f"--- # {name}")
        sys.stdout.write(PRESETS[name])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
