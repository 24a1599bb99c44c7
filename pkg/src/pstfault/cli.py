"""Command-line entry point: ``pstfault <stage> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .pipeline import STAGES, ConfigError, RunConfig, run_pipeline

_COMMANDS = {"generate": "generate", "extract": "extract", "select": "select",
             "train": "train", "evaluate": "evaluate", "all": "evaluate"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pstfault",
        description="Synthetic PST internal-fault dataset, feature extraction and classification.")
    parser.add_argument("command", choices=list(_COMMANDS),
                        help="stage to run; earlier stages run first unless cached")
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--seed", type=int, help="global seed (overrides the config)")
    parser.add_argument("--jobs", type=int, help="worker count for extraction and tree fitting")
    parser.add_argument("--angle-step", type=int, help="inception angle step in degrees")
    parser.add_argument("--classifier", action="append", metavar="NAME",
                        help="restrict to a classifier (repeatable, or comma separated)")
    parser.add_argument("--work-dir", help="directory for all artifacts")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    data = {}
    if args.config:
        data = RunConfig.from_json(args.config).to_dict()
    overrides = {"seed": args.seed, "jobs": args.jobs, "angle_step": args.angle_step,
                 "work_dir": args.work_dir}
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.classifier:
        data["classifiers"] = [c for item in args.classifier for c in item.split(",") if c]
    return RunConfig.from_dict(data)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s")
    try:
        config = load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    status = run_pipeline(config, _COMMANDS[args.command])
    if status == 0:
        print(f"{args.command}: done ({config.work_dir}/run_report.json)")
    else:
        print(f"{args.command}: failed, see {config.work_dir}/run_report.json", file=sys.stderr)
    return status


assert set(_COMMANDS.values()) <= set(STAGES)

if __name__ == "__main__":
    sys.exit(main())
