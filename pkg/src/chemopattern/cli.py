"""Command-line interface.

    chemopattern <subcommand> --config <path> [--out <dir>] [--seed <u64>]
                 [--coefficient-convention paper|formula]

Subcommands mirror the experiment kinds: linear, reduce, ode, simulate,
simulate-full, sweep, verify-theorem1, verify-theorem2.  The subcommand must
match the ``kind`` in the configuration file; command-line flags override the
corresponding configuration values.  The exit code is nonzero iff a
verification suite reports an overall failure or the run crashes.
"""

from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENT_KINDS, ConfigError, parse_config, serialize_config
from .verify import (
    run_linear,
    run_ode,
    run_reduce,
    run_simulate,
    run_sweep,
    run_verify_theorem1,
    run_verify_theorem2,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chemopattern",
        description="Pattern-formation laboratory for a diffusion-chemotaxis model",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in EXPERIMENT_KINDS:
        sp = sub.add_parser(kind, help=f"run a '{kind}' experiment")
        sp.add_argument("--config", required=True, help="path to the configuration file")
        sp.add_argument("--out", default=None, help="output directory (overrides config)")
        sp.add_argument("--seed", type=int, default=None, help="seed (overrides config)")
        sp.add_argument("--coefficient-convention", choices=("formula", "paper"),
                        default=None, help="cubic coefficient convention (overrides config)")
        sp.add_argument("--dump-config", action="store_true",
                        help="print the resolved configuration and exit")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.kind != args.command:
        print(f"error: config kind {cfg.kind!r} does not match subcommand {args.command!r}",
              file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.set("experiment", "seed", args.seed)
    if args.coefficient_convention is not None:
        cfg.set("experiment", "coefficient_convention", args.coefficient_convention)
    if args.out is not None:
        cfg.set("experiment", "out", args.out)
    if args.dump_config:
        print(serialize_config(cfg), end="")
        return 0

    try:
        if cfg.kind == "linear":
            paths = run_linear(cfg)
        elif cfg.kind == "reduce":
            paths = run_reduce(cfg)
        elif cfg.kind == "ode":
            paths = run_ode(cfg)
        elif cfg.kind == "simulate":
            paths = run_simulate(cfg)
        elif cfg.kind == "simulate-full":
            paths = run_simulate(cfg, full_system=True)
        elif cfg.kind == "sweep":
            paths = run_sweep(cfg)
        elif cfg.kind == "verify-theorem1":
            rep = run_verify_theorem1(cfg)
            print(rep.to_table(), end="")
            return 0 if rep.overall else 1
        else:
            rep = run_verify_theorem2(cfg)
            print(rep.to_table(), end="")
            return 0 if rep.overall else 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for name, path in paths.items():
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
