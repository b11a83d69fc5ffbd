"""Command-line entry point.

    astute train|explain|robustness|stablerank|verify|autoencoder
        --config <file> [--seed N] [--out DIR]

Exit codes: 0 success, 2 config error, 3 numeric failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys

from .harness import commands
from .harness.config import ConfigError, load_config
from .linalg import SingularSystemError
from .nn import DivergedTrainingError
from .robustness import NoEligiblePairsError
from .stablerank import InconsistentDistancePathsError

COMMANDS = {
    "train": commands.run_train,
    "explain": commands.run_explain,
    "robustness": commands.run_robustness,
    "stablerank": commands.run_stablerank,
    "verify": commands.run_verify,
    "autoencoder": commands.run_autoencoder,
}

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="astute",
        description="Explainer robustness experiments: astuteness curves, "
        "theorem checks, and stable-rank Lipschitz bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--config", required=True, help="TOML config file")
        p.add_argument("--seed", type=int, help="run a single seed instead of the configured list")
        p.add_argument("--out", help="override the configured output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seeds=(args.seed,))
        if args.out is not None:
            cfg = dataclasses.replace(cfg, out_dir=args.out)
        out = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (
        DivergedTrainingError,
        SingularSystemError,
        NoEligiblePairsError,
        InconsistentDistancePathsError,
        FloatingPointError,
    ) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"{args.command}: wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
