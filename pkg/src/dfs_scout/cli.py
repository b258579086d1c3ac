"""Command-line entry point.

    dfs-scout <command> --config <path> [--seed N] [--shots N|inf] [--out DIR]

Commands: identify, sweep-swap, purity-sweep, failure-scaling, discover.
Flags override the corresponding config keys.  Exit codes: 0 on success,
2 on a configuration error, 3 when the protocol reports failure.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import harness
from .config import ConfigError, load_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROTOCOL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfs-scout",
        description="Locate decoherence-free subspaces from simulated reversed-trial tomography.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--config", required=True, help="TOML experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--shots", default=None, help="override shots per setting (integer or 'inf')")
        p.add_argument("--out", default=None, help="override the output directory")

    common(sub.add_parser("identify", help="all-pairs 1D DFS identification"))
    p = sub.add_parser("sweep-swap", help="fidelity versus swap probability with confidence bands")
    common(p)
    p.add_argument("--p-list", default=None, help="comma-separated swap probabilities")
    p = sub.add_parser("purity-sweep", help="average DFS purity versus swap probability")
    common(p)
    p.add_argument("--p-list", default=None, help="comma-separated swap probabilities")
    p = sub.add_parser("failure-scaling", help="misidentification rate versus shots per setting")
    common(p)
    p.add_argument("--shot-list", default=None, help="comma-separated shot counts")
    common(sub.add_parser("discover", help="generalized subspace discovery"))
    return parser


def _parse_shots_flag(raw: str):
    if raw.lower() in ("inf", "infinite"):
        return None
    return int(raw)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.master_seed = args.seed
        if args.shots is not None:
            cfg.shots = _parse_shots_flag(args.shots)
        if args.out is not None:
            cfg.output_dir = args.out
        cfg.validate()

        if args.command == "identify":
            outcome = harness.cmd_identify(cfg)
        elif args.command == "sweep-swap":
            p_list = None
            if args.p_list is not None:
                p_list = [float(x) for x in args.p_list.split(",") if x]
            outcome = harness.cmd_sweep_swap(cfg, p_list)
        elif args.command == "purity-sweep":
            p_list = None
            if args.p_list is not None:
                p_list = [float(x) for x in args.p_list.split(",") if x]
            outcome = harness.cmd_purity_sweep(cfg, p_list)
        elif args.command == "failure-scaling":
            shot_list = None
            if args.shot_list is not None:
                shot_list = [int(x) for x in args.shot_list.split(",") if x]
            outcome = harness.cmd_failure_scaling(cfg, shot_list)
        elif args.command == "discover":
            outcome = harness.cmd_discover(cfg)
        else:  # pragma: no cover - argparse guards this
            raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    for name, path in outcome["files"].items():
        print(f"{name}: {path}")
    return outcome["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
