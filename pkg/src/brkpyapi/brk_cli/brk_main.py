import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from brkpyapi.__version__ import __version__
from brkpyapi.brk_cli.brk_runner import RunOutcome, run
from brkpyapi.brk_cli.cli_exception import CliException
from brkpyapi.brk_cli.problem_kind import ProblemKind, RunStatus
from brkpyapi.brk_cli.run_config import RunConfig, parse_config


LOG_FORMAT: str = "%(asctime)s:%(module)s:%(levelname)s:%(message)s"
SUITE_DEFAULT: str = 'problem = "suite"\nsystem = "burgers"\n'


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brk",
        description="Riemann and boundary Riemann problems of viscous hyperbolic systems.")
    parser.add_argument("problem", choices=[p.value for p in ProblemKind],
                        help="problem to run; replaces the problem key of the configuration")
    parser.add_argument("-c", "--config", type=Path, default=None,
                        help="TOML, YAML or JSON configuration (optional for suite)")
    parser.add_argument("-s", "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="dotted override such as numerics.tol_rh=1e-9; repeatable")
    parser.add_argument("-o", "--output-dir", default=None, help="output root, overrides output.directory")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="debug logging")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def _level(verbose: int) -> int:
    return logging.DEBUG if verbose else logging.INFO


def load(args: argparse.Namespace) -> RunConfig:
    """
    Builds the run configuration from the parsed arguments.

    :raises CliException: On a missing, malformed or invalid configuration.
    """
    overrides: List[str] = list(args.overrides) + [f"problem={args.problem}"]
    if args.output_dir is not None:
        overrides.append(f"output.directory={args.output_dir}")
    if args.config is None:
        if args.problem != ProblemKind.SUITE.value:
            raise CliException(f"{args.problem} needs --config")
        return parse_config(SUITE_DEFAULT, overrides)
    return parse_config(args.config, overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args: argparse.Namespace = build_parser().parse_args(argv)
    logging.basicConfig(level=_level(args.verbose), format=LOG_FORMAT)
    try:
        config: RunConfig = load(args)
    except CliException as e:
        logging.error(f"configuration rejected; Detail: {e}")
        print(f"brk: {e}", file=sys.stderr)
        return RunStatus.CONFIG_ERROR.value
    outcome: RunOutcome = run(config)
    print(f"{outcome.status.name.lower()}: {outcome.directory / 'summary.json'}")
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
