"""Command-line front end: ``fermispin run|batch|table|demo|validate``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .errors import ConfigError, FormatError, NumericalPreconditionError, SectorError
from .pipeline import PipelineConfig, RunRecord, demo_config, emit_table, run_batch, run_pipeline

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
THREADS_ENV = "FERMISPIN_THREADS"


def _summary(record: RunRecord) -> str:
    res = record.results
    lines = [f"{record.label}: n={res['n']} weight={res['weight']:.6g} purity={res['purity']:.12f}"]
    rep = record.report
    if rep.gme_concurrence is not None:
        cuts = ", ".join(str(b) for b in rep.argmin_bipartitions)
        lines.append(f"  C_GME = {rep.gme_concurrence:.6f}  argmin: {cuts}")
    best = rep.max_pair()
    if best is not None:
        (i, j), c = best
        lines.append(f"  max pair concurrence C = {c:.6f} at {{s{i + 1},s{j + 1}}}")
    return "\n".join(lines)


def _cmd_run(args) -> int:
    record = run_pipeline(PipelineConfig.from_file(args.config), seed=args.seed)
    if args.output:
        record.save(args.output)
    print(_summary(record))
    if args.json:
        sys.stdout.write(record.to_json())
    return EXIT_OK


def _cmd_batch(args) -> int:
    paths = sorted(Path(args.config_dir).glob("*.json"))
    if not paths:
        raise ConfigError(f"no *.json configs in {args.config_dir}")
    configs = [PipelineConfig.from_file(p) for p in paths]
    workers = int(os.environ.get(THREADS_ENV, "1"))
    records = run_batch(configs, workers=workers, seed=args.seed)
    if args.records_dir:
        out = Path(args.records_dir)
        out.mkdir(parents=True, exist_ok=True)
        for p, rec in zip(paths, records):
            rec.save(out / f"{p.stem}.record.json")
    sys.stdout.write(emit_table(records, "csv" if args.csv else "text"))
    return EXIT_OK


def _cmd_table(args) -> int:
    records = [RunRecord.load(p) for p in args.records]
    sys.stdout.write(emit_table(records, "csv" if args.csv else "text"))
    return EXIT_OK


def _cmd_demo(args) -> int:
    record = run_pipeline(demo_config(args.name), seed=args.seed)
    print(_summary(record))
    sys.stdout.write(emit_table([record]))
    if args.output:
        record.save(args.output)
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = PipelineConfig.from_file(args.config)
    M = config.validate()
    print(f"{args.config}: ok (basis size {M}, {config.extraction.n} extracted spins)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fermispin", description=__doc__)
    parser.add_argument("--seed", type=int, default=None, help="recorded in run records (pipelines are deterministic)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one pipeline config")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="write the run record here")
    p.add_argument("--json", action="store_true", help="print the full run record")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("batch", help=f"run every *.json config in a directory (workers from ${THREADS_ENV})")
    p.add_argument("config_dir")
    p.add_argument("--records-dir", help="save one run record per config")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=_cmd_batch)

    p = sub.add_parser("table", help="tabulate saved run records")
    p.add_argument("records", nargs="+")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=_cmd_table)

    p = sub.add_parser("demo", help="built-in pipelines")
    p.add_argument("name", choices=["ring4", "benzene6"])
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_demo)

    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (FormatError, SectorError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalPreconditionError as exc:
        print(f"numerical precondition failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
