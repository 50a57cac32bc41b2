"""`halfsphere-ot <experiment> [--config FILE] [--out DIR] [--seed INT]`.

Exit codes: 0 success, 1 an experiment assertion failed, 2 config error,
3 numerical or I/O failure.
"""

import argparse
import json
import sys
from pathlib import Path

from dotenv import load_dotenv

from src import __version__
from src.errors import EXIT_OK, ConfigError, HalfsphereError, InvariantViolation, exit_code_for
from src.logger import Logger
from src.runner.config import EXPERIMENTS, config_from_dict
from src.runner.dispatch import dispatch_run
from src.runner.reports import write_outputs

LOGGER = Logger("runner.main")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="halfsphere-ot",
        description="Numerical experiments on optimal transport maps on the half-sphere.",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", type=Path, help="JSON document with ExperimentConfig keys")
    parser.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
    parser.add_argument("--seed", type=int, help="random seed (overrides the config)")
    parser.add_argument("--no-plots", action="store_true", help="skip SVG charts")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def load_config(args: argparse.Namespace):
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"malformed JSON ({e.msg} at line {e.lineno})") from e
        if not isinstance(data, dict):
            raise ConfigError("config document must be a JSON object")
    if data.setdefault("experiment", args.experiment) != args.experiment:
        raise ConfigError(f"config names {data['experiment']!r} but {args.experiment!r} was requested", "experiment")
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out is not None:
        data["output_dir"] = str(args.out)
    return config_from_dict(data)


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        report = dispatch_run(config)
        write_outputs(report, Path(config.output_dir), plots=not args.no_plots)
        if not report.passed:
            failed = ", ".join(a.name for a in report.assertions if not a.passed)
            raise InvariantViolation(f"failed assertions: {failed}")
    except (HalfsphereError, OSError) as e:
        code = exit_code_for(e)
        LOGGER.error(f"{type(e).__name__}: {e}")
        print(f"halfsphere-ot: {e}", file=sys.stderr)
        return code

    print(f"{config.experiment}: {len(report.assertions)} assertions passed -> {config.output_dir}")
    return EXIT_OK


def main() -> None:
    load_dotenv()
    sys.exit(run())


if __name__ == "__main__":
    main()
