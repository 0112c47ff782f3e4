"""
Command Line Interface
------------------------
Subcommands tying towns, benchmark runs, dataset annotation and scoring
together.

Usage:
    python main.py run --suite suites/langauto_tiny.json --seed 42
    python main.py annotate runs/langauto_tiny/*.jsonl --out records.jsonl
    python main.py resample records.jsonl --out balanced.jsonl
    python main.py score runs/langauto_tiny
    python main.py plot runs/langauto_tiny/t1-tiny-05.jsonl --out trace.svg
    python main.py gen-town 3 --out town3.json
    python main.py config show

Exit codes: 0 success, 2 usage or configuration error, 3 I/O error.
Outputs default to $HDB_OUTPUT_ROOT (or ./output).

Author: Mehmet Demir
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from src.config import ConfigError, config_hash, load_config, merge_config
from src.benchmark.runner import read_episode_log, run_suite, write_suite_logs
from src.benchmark.suites import filter_for_export, load_suite
from src.dataset.annotation import ShortLogError, annotate_episode
from src.dataset.records import SchemaError, read_records, write_records
from src.dataset.resampling import histogram, resample
from src.metrics.report import rate_table, score_table, write_csv, write_summary
from src.metrics.scores import EmptySuiteError, score_log
from src.simulation.town import generate_town
from src.visualization.trace_plot import plot_episode


logger = logging.getLogger(__name__)

OUTPUT_ROOT_ENV = "HDB_OUTPUT_ROOT"
EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


def output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "output"))


def _config(args):
    """Defaults, then the --config file, then flags."""
    cfg = load_config(getattr(args, "config", None))
    overrides = {}
    if getattr(args, "dt", None) is not None:
        overrides.setdefault("world", {})["dt"] = args.dt
    if getattr(args, "planner_cadence", None) is not None:
        overrides.setdefault("benchmark", {})["planner_cadence"] = args.planner_cadence
    if getattr(args, "workers", None) is not None:
        overrides.setdefault("benchmark", {})["workers"] = args.workers
    return merge_config(cfg, overrides) if overrides else cfg


def _log_paths(inputs: List[str]) -> List[Path]:
    paths = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.jsonl")))
        elif p.exists():
            paths.append(p)
        else:
            raise FileNotFoundError(f"no such file or directory: {p}")
    return paths


def _print_header(title: str):
    print("=" * 50)
    print(f"  {title}")
    print("=" * 50)


def cmd_run(args) -> int:
    cfg = _config(args)
    suite = load_suite(args.suite)
    out = Path(args.out) if args.out else output_root() / suite.name

    _print_header(f"Suite {suite.name}")
    print(f"Routes:  {len(suite.routes)}")
    print(f"Mode:    {suite.instruction_mode.value}")
    print(f"Config:  {config_hash(cfg)}")
    print()

    logs = run_suite(suite, cfg, planner=args.planner, controller=args.controller,
                     seed=args.seed, workers=cfg.benchmark.workers)
    write_suite_logs(logs, out)

    results = [score_log(log, cfg.metrics, cfg.benchmark.completion_threshold) for log in logs]
    write_summary(suite.name, results, out / "summary.json", config_hash(cfg))
    write_csv(results, out / "summary.csv", config_hash(cfg))
    print(score_table(suite.name, results))
    print()
    print(rate_table(suite.name, results))
    print(f"\nLogs written to {out}")
    return EXIT_OK


def cmd_annotate(args) -> int:
    cfg = _config(args)
    logs = [read_episode_log(p) for p in _log_paths(args.logs)]
    if args.holdout:
        before = len(logs)
        logs = filter_for_export(logs, args.holdout)
        print(f"Dropped {before - len(logs)} log(s) from held-out towns")

    records, hashes = [], set()
    for log in logs:
        try:
            annotated = annotate_episode(log, cfg.planner)
        except ShortLogError as e:
            logger.warning("skipping %s", e)
            continue
        records.extend(annotated)
        hashes.add(log.config_hash)

    out = Path(args.out) if args.out else output_root() / "records.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    source_hash = hashes.pop() if len(hashes) == 1 else config_hash(cfg)
    write_records(records, out, source_hash)
    print(f"Annotated {len(records)} frame(s) from {len(logs)} log(s) -> {out}")
    return EXIT_OK


def cmd_resample(args) -> int:
    cfg = _config(args)
    records = read_records(args.records)
    cap = args.cap_ratio if args.cap_ratio is not None else cfg.dataset.cap_ratio
    floor = args.floor if args.floor is not None else cfg.dataset.floor
    seed = args.seed if args.seed is not None else cfg.dataset.seed
    kept = resample(records, cap_ratio=cap, floor=floor, seed=seed)

    before, after = histogram(records), histogram(kept)
    width = max((len(k) for k in before), default=10)
    print(f"{'command'.ljust(width)}  {'before':>8}  {'after':>8}")
    for key, n in before.items():
        print(f"{key.ljust(width)}  {n:>8}  {after.get(key, 0):>8}")
    print(f"{'total'.ljust(width)}  {len(records):>8}  {len(kept):>8}")

    out = Path(args.out) if args.out else output_root() / "records.resampled.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_records(kept, out, config_hash(cfg))
    return EXIT_OK


def cmd_score(args) -> int:
    cfg = _config(args)
    paths = _log_paths(args.logs)
    paths = [p for p in paths if p.name not in ("summary.json", "summary.csv")]
    if not paths:
        raise EmptySuiteError("no episode logs found")
    logs = [read_episode_log(p) for p in paths]
    results = [score_log(log, cfg.metrics, cfg.benchmark.completion_threshold) for log in logs]
    name = args.name or logs[0].suite or "suite"
    print(score_table(name, results))
    print()
    print(rate_table(name, results))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_summary(name, results, out / "summary.json", logs[0].config_hash)
        write_csv(results, out / "summary.csv", logs[0].config_hash)
    return EXIT_OK


def cmd_plot(args) -> int:
    log = read_episode_log(args.log)
    out = Path(args.out) if args.out else output_root() / f"{log.route_id}.svg"
    out.parent.mkdir(parents=True, exist_ok=True)
    plot_episode(log, out, decisions_only=not args.all_waypoints)
    print(f"Trace written to {out}")
    return EXIT_OK


def cmd_gen_town(args) -> int:
    cfg = _config(args)
    try:
        town = generate_town(args.town, args.seed)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    text = town.to_json(config_hash(cfg))
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"Town {args.town}: {len(town.routes)} routes -> {args.out}")
    else:
        print(text)
    return EXIT_OK


def cmd_config_show(args) -> int:
    cfg = _config(args)
    print(json.dumps({"config_hash": config_hash(cfg), **cfg.to_dict()}, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Hierarchical driving benchmark: simulate, annotate, score"
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", "-c", type=str, default=None,
                       help="JSON file overriding config defaults")
        return p

    run = with_config(sub.add_parser("run", help="Run a benchmark suite"))
    run.add_argument("--suite", "-s", required=True, help="Suite JSON file")
    run.add_argument("--seed", type=int, default=None, help="Town seed override")
    run.add_argument("--planner-cadence", "-K", type=int, default=None,
                     help="Plan every K ticks")
    run.add_argument("--dt", type=float, default=None, help="Tick length in seconds")
    run.add_argument("--workers", "-w", type=int, default=None, help="Worker processes")
    run.add_argument("--out", "-o", type=str, default=None, help="Output directory")
    run.add_argument("--planner", default="reference", help="Planner name")
    run.add_argument("--controller", default="reference", help="Controller name")
    run.set_defaults(func=cmd_run)

    annotate = with_config(sub.add_parser("annotate", help="Label episode logs"))
    annotate.add_argument("logs", nargs="+", help="Episode log files or directories")
    annotate.add_argument("--out", "-o", type=str, default=None, help="Record file")
    annotate.add_argument("--holdout", type=int, nargs="*", default=[],
                          help="Towns excluded from export")
    annotate.set_defaults(func=cmd_annotate)

    res = with_config(sub.add_parser("resample", help="Balance command frequencies"))
    res.add_argument("records", help="Record file")
    res.add_argument("--out", "-o", type=str, default=None, help="Output record file")
    res.add_argument("--cap-ratio", type=float, default=None)
    res.add_argument("--floor", type=int, default=None)
    res.add_argument("--seed", type=int, default=None)
    res.set_defaults(func=cmd_resample)

    score = with_config(sub.add_parser("score", help="Score episode logs"))
    score.add_argument("logs", nargs="+", help="Episode log files or directories")
    score.add_argument("--name", type=str, default=None, help="Suite name in tables")
    score.add_argument("--out", "-o", type=str, default=None, help="Summary directory")
    score.set_defaults(func=cmd_score)

    plot = sub.add_parser("plot", help="Overhead SVG trace of an episode")
    plot.add_argument("log", help="Episode log file")
    plot.add_argument("--out", "-o", type=str, default=None, help="SVG file")
    plot.add_argument("--all-waypoints", action="store_true",
                      help="Draw waypoints on every tick")
    plot.set_defaults(func=cmd_plot)

    town = with_config(sub.add_parser("gen-town", help="Write a town's routes and scenarios"))
    town.add_argument("town", type=int, help="Town id 1..8")
    town.add_argument("--seed", type=int, default=42)
    town.add_argument("--out", "-o", type=str, default=None, help="JSON file")
    town.set_defaults(func=cmd_gen_town)

    config = sub.add_parser("config", help="Configuration")
    config_sub = config.add_subparsers(dest="config_command", required=True)
    show = with_config(config_sub.add_parser("show", help="Print effective config"))
    show.set_defaults(func=cmd_config_show)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, SchemaError, EmptySuiteError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
