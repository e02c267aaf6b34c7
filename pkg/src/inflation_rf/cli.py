"""Command line entry point: ``inflation-rf <command> [flags]``."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .experiments import STAGES, ExperimentConfig, ExperimentError, emit_report, load_config, run_experiment
from .panel_data import HORIZONS, WINDOWS, write_panel
from .synth import synth_panel

COMMAND_STAGES = {
    "ingest": ("ingest",),
    "run": STAGES,
    "table1": ("table1",),
    "horizons": ("horizons",),
    "decades": ("decades",),
    "core": ("core",),
    "importance": ("importance",),
    "partial": ("partial",),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inflation-rf", description="Random-forest inflation experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="file of 'key = value' lines; flags override it")
    common.add_argument("--seed", type=int, help="seed for forests, splits and the synthetic panel")
    common.add_argument("--out", help="output directory")
    common.add_argument("--input", help="panel CSV; a synthetic panel is used when omitted")
    common.add_argument("--trees", type=int, help="number of trees (replaces the n_trees grid)")
    common.add_argument("--min-parent", type=int, help="minimum parent size of the benchmark forest")
    common.add_argument("--horizon", type=int, choices=HORIZONS)
    common.add_argument("--window", type=int, choices=WINDOWS)
    common.add_argument("--threads", type=int, help="worker threads (results do not depend on it)")
    sub.add_parser("synth", parents=[common], help="write a synthetic panel CSV to <out>/panel.csv")
    for name in COMMAND_STAGES:
        sub.add_parser(name, parents=[common], help=f"run the {name} stage(s) and write the report")
    return parser


def config_from_args(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        if args.seed < 0:
            raise ValueError("--seed must be >= 0")
        cfg = replace(cfg, seed=args.seed, synth=replace(cfg.synth, seed=args.seed))
    updates = {
        "out": args.out,
        "input": args.input,
        "horizon": args.horizon,
        "window": args.window,
        "benchmark_p": args.min_parent,
        "threads": args.threads,
        "n_trees_grid": (args.trees,) if args.trees is not None else None,
    }
    cfg = replace(cfg, **{k: v for k, v in updates.items() if v is not None})
    if args.threads == 0:
        cfg = replace(cfg, threads=os.cpu_count() or 1)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (OSError, ValueError) as exc:
        print(f"error [config]: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg.out)
    if args.command == "synth":
        try:
            out.mkdir(parents=True, exist_ok=True)
            write_panel(synth_panel(cfg.synth), out / "panel.csv")
        except OSError as exc:
            print(f"error [synth]: {exc}", file=sys.stderr)
            return 1
        print(out / "panel.csv")
        return 0
    try:
        bundle = run_experiment(cfg, COMMAND_STAGES[args.command], out_dir=out)
        paths = emit_report(bundle, out)
    except ExperimentError as exc:
        print(f"error [{exc.stage}]: {exc.__cause__ or exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error [emit]: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(paths)} files to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
