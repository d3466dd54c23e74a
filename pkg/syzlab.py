"""Command-line driver for the syzygy computations.

Usage:
    syzlab betti --kind rational_normal --r 3 --d 3 --gamma 7 --prime 101
    syzlab mrc --curve curve.json --gamma 12 --trials 3
    syzlab raynaud --kind elliptic --r 3 --d 5 --i 1 --i 2
    syzlab hk --kind rational_normal --r 3 --d 3 --prime 2 --e-max 1
    syzlab plan --g 10 --r 3 --d 12
    syzlab audit --r-max 12
    syzlab slope --g 2 --r 3 --d 6

Result documents go to stdout (or --out), logs to stderr. Exit codes:
0 success or confirmed, 2 violated, 1 inconclusive or failed, 64 usage.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, NoReturn, Optional, Sequence

from pydantic import ValidationError

from config import LOG_LEVEL
from schemas.run_config import RunConfig
from services.charp import HKError
from services.command_router import (
    EXIT_ERROR,
    EXIT_USAGE,
    RoutingError,
    RunResult,
    route,
)
from services.curves import CurveError
from services.exactla import FieldError
from services.koszul import KoszulError
from services.mrc import MRCError
from services.slopes import SlopeError

logger = logging.getLogger("syzlab")

LIBRARY_ERRORS = (
    CurveError,
    FieldError,
    HKError,
    KoszulError,
    MRCError,
    RoutingError,
    SlopeError,
)


class UsageExit(Exception):
    """Raised when the command line cannot be parsed."""


class SyzlabArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors end in exit code 64."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageExit(f"{self.prog}: error: {message}")


def _curve_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--curve", dest="curve_path", help="Curve JSON file.")
    parser.add_argument(
        "--kind", choices=["rational_normal", "rational_general", "elliptic"]
    )
    parser.add_argument("--r", type=int)
    parser.add_argument("--d", type=int)
    parser.add_argument("--prime", type=int)


def build_parser() -> SyzlabArgumentParser:
    common = SyzlabArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="Write the result here instead of stdout.")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument(
        "--log-level",
        default=LOG_LEVEL,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        type=str.upper,
    )

    parser = SyzlabArgumentParser(prog="syzlab", description="Syzygies of points on curves.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    betti = sub.add_parser("betti", parents=[common], help="Betti table of points or of the curve.")
    _curve_flags(betti)
    betti.add_argument("--gamma", type=int)
    betti.add_argument("--j-max", type=int)

    mrc = sub.add_parser("mrc", parents=[common], help="Verify the minimal resolution conjecture.")
    _curve_flags(mrc)
    mrc.add_argument("--gamma", type=int, required=True)
    mrc.add_argument("--trials", type=int)

    raynaud = sub.add_parser("raynaud", parents=[common], help="Twisted Koszul vanishing.")
    _curve_flags(raynaud)
    raynaud.add_argument("--i", type=int, action="append", default=[])
    raynaud.add_argument("--trials", type=int)

    hk = sub.add_parser("hk", parents=[common], help="Hilbert-Kunz function.")
    _curve_flags(hk)
    hk.add_argument("--e-max", type=int, default=1)

    for name, text in (("plan", "Degeneration chains."), ("slope", "Slope and stability report.")):
        cmd = sub.add_parser(name, parents=[common], help=text)
        cmd.add_argument("--g", type=int, required=True)
        cmd.add_argument("--r", type=int, required=True)
        cmd.add_argument("--d", type=int, required=True)
        if name == "slope":
            cmd.add_argument("--char", dest="characteristic", type=int, default=0)

    audit = sub.add_parser("audit", parents=[common], help="Corank inequality audit.")
    audit.add_argument("--r-max", type=int, default=12)
    return parser


def _config_from_args(args: argparse.Namespace, argv: Sequence[str]) -> RunConfig:
    values = {
        key: value
        for key, value in vars(args).items()
        if key != "log_level" and value is not None
    }
    return RunConfig(argv=list(argv), **values)


def render(result: RunResult) -> str:
    if result.config.format == "csv":
        header = "".join(
            f"# {key}={json.dumps(value)}\n" for key, value in sorted(result.provenance().items())
        )
        return header + result.table.to_csv()
    return json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n"


def _emit_error(exc: Exception) -> None:
    sys.stderr.write(json.dumps({"error": str(exc), "type": type(exc).__name__}) + "\n")


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, run the subcommand and write its document; return the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageExit as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:
        # --help
        return int(exc.code or 0)

    logging.basicConfig(
        level=args.log_level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        config = _config_from_args(args, argv)
        result = route(config)
    except ValidationError as exc:
        _emit_error(exc)
        return EXIT_USAGE
    except LIBRARY_ERRORS as exc:
        logger.error("%s failed: %s", args.subcommand, exc)
        _emit_error(exc)
        return EXIT_ERROR

    text = render(result)
    if config.out:
        Path(config.out).write_text(text)
    else:
        sys.stdout.write(text)
    return result.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
