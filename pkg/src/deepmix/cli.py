"""Batch CLI: deepmix <experiment> --config <path> [--out] [--seed] [--threads].

Flags override config fields. Exit codes: 0 success, 2 config error,
3 budget error. DEEPMIX_THREADS provides the default thread count.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import BudgetError, ConfigError, SolvabilityError
from .harness import EXPERIMENTS, ExperimentConfig, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deepmix",
        description="Run a projected-ensemble experiment from a JSON config.",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, help="path to a JSON config")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="master seed (overrides config)")
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker threads (overrides config and DEEPMIX_THREADS)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.from_file(args.config)
        if cfg.experiment != args.experiment:
            raise ConfigError(
                f"config declares experiment '{cfg.experiment}' but "
                f"'{args.experiment}' was requested"
            )
        if args.out is not None:
            cfg.output_dir = Path(args.out)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            cfg.master_seed = args.seed
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be positive")
            cfg.threads = args.threads
        elif os.environ.get("DEEPMIX_THREADS"):
            try:
                cfg.threads = max(1, int(os.environ["DEEPMIX_THREADS"]))
            except ValueError as exc:
                raise ConfigError(f"DEEPMIX_THREADS is not an integer: {exc}") from exc
        table = run_experiment(cfg)
    except (ConfigError, SolvabilityError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 3
    print(
        f"{cfg.experiment}: wrote {len(table.rows)} rows to "
        f"{cfg.output_dir / (table.name + '.csv')}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
