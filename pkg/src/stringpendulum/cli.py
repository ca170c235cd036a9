"""Command line interface.

Subcommands: ``run`` a config file, expand and run a named ``preset``,
``validate`` a config, ``sweep`` a directory of configs (one process per run),
and ``report`` (render figures from a finished run directory).

Exit codes: 0 success, 1 configuration error, 2 solver failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import sys
import time
from dataclasses import replace
from pathlib import Path

from .config import (
    RunConfig,
    build_initial_state,
    dumps_config,
    load_config,
    write_config,
)
from .errors import ConfigError, IOFailure, StringPendulumError
from .integrator import simulate
from .output import write_outputs
from .presets import PRESET_NAMES, expand_preset

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_IO = 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="stringpendulum",
        description="Structure-preserving simulator for an elastic string "
                    "pendulum with a rigid end body and a reel mechanism.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a simulation from a config file")
    p_run.add_argument("config", help="path to a config file")
    p_run.add_argument("--out", help="override the output directory")
    p_run.add_argument("--dry-run", action="store_true",
                       help="validate and print the resolved config, write nothing")

    p_pre = sub.add_parser("preset", help="run one of the built-in scenarios")
    p_pre.add_argument("name",
                       help="preset name: " + ", ".join(PRESET_NAMES)
                       + " (or case1/case2/case3)")
    p_pre.add_argument("--out", help="output directory (default out_<name>)")
    p_pre.add_argument("--duration", type=float, help="override duration in s")
    p_pre.add_argument("--steps-per-output", type=int,
                       help="override the time-series output cadence")
    p_pre.add_argument("--write-config", metavar="PATH",
                       help="write the expanded config to PATH and exit")
    p_pre.add_argument("--dry-run", action="store_true",
                       help="print the resolved config, write nothing")

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config")

    p_sweep = sub.add_parser("sweep", help="run every config in a directory")
    p_sweep.add_argument("dir", help="directory containing *.cfg / *.ini files")
    p_sweep.add_argument("--jobs", type=int, default=2,
                         help="number of concurrent runs")

    p_rep = sub.add_parser("report",
                           help="render figures from a finished run directory")
    p_rep.add_argument("run_dir")
    return parser


def _execute(cfg: RunConfig, out_dir):
    g0, vel = build_initial_state(cfg)
    start = time.perf_counter()
    result = simulate(
        cfg.model, g0, vel, cfg.control, cfg.run.duration,
        settings=cfg.newton, fixed_length=cfg.run.fixed_length,
        record_every=cfg.run.output_every,
        snapshot_every=cfg.run.snapshot_every, init=cfg.run.init)
    wall = time.perf_counter() - start
    write_outputs(result, cfg, out_dir, wall)
    if result.status != "ok":
        print(f"solver failed at step {result.steps_completed + 1}: "
              f"{result.error}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"completed {result.steps_completed} steps in {wall:.1f} s; "
          f"output in {out_dir}")
    return EXIT_OK


def _run_command(args):
    cfg = load_config(args.config)
    if args.out:
        cfg = replace(cfg, output_dir=args.out)
    if args.dry_run:
        print(dumps_config(cfg), end="")
        return EXIT_OK
    return _execute(cfg, cfg.output_dir)


def _preset_command(args):
    cfg = expand_preset(args.name)
    if args.duration is not None:
        cfg = replace(cfg, run=replace(cfg.run, duration=args.duration))
    if args.steps_per_output is not None:
        cfg = replace(cfg, run=replace(cfg.run,
                                       output_every=args.steps_per_output))
    if args.out:
        cfg = replace(cfg, output_dir=args.out)
    if args.write_config:
        write_config(cfg, args.write_config)
        print(f"wrote {args.write_config}")
        return EXIT_OK
    if args.dry_run:
        print(dumps_config(cfg), end="")
        return EXIT_OK
    return _execute(cfg, cfg.output_dir)


def _sweep_worker(path):
    cfg = load_config(path)
    out = Path(path).with_suffix("") .name
    return str(path), _execute(cfg, Path(cfg.output_dir) / out)


def _sweep_command(args):
    root = Path(args.dir)
    paths = sorted(list(root.glob("*.cfg")) + list(root.glob("*.ini")))
    if not paths:
        print(f"no config files in {root}", file=sys.stderr)
        return EXIT_CONFIG
    worst = EXIT_OK
    with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
        for path, code in pool.map(_sweep_worker, [str(p) for p in paths]):
            print(f"{path}: exit {code}")
            worst = max(worst, code)
    return worst


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _run_command(args)
        if args.command == "preset":
            return _preset_command(args)
        if args.command == "validate":
            cfg = load_config(args.config)
            build_initial_state(cfg)
            print("config ok")
            return EXIT_OK
        if args.command == "sweep":
            return _sweep_command(args)
        if args.command == "report":
            from .report import render_report
            for path in render_report(args.run_dir):
                print(f"wrote {path}")
            return EXIT_OK
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IOFailure as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except StringPendulumError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
