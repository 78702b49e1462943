#!/usr/bin/env python3
import argparse
import logging
import os
import sys
from typing import List, Optional

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.cli.config_file import Subcommand, parse_config
from src.cli.dispatch import dispatch
from src.config import settings
from src.core.errors import ConfigError, LabError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_EXECUTION = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.app.cli_name,
        description="Robbins–Monro simulation, normalization and condition checks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app.version}")
    parser.add_argument("subcommand", choices=[s.value for s in Subcommand])
    parser.add_argument("--config", required=True, help="run configuration file")
    parser.add_argument("--out", help="output directory (overrides [run] output)")
    parser.add_argument("--seed", type=int, help="master seed (overrides [run] seed)")
    parser.add_argument("--threads", type=int, help="worker threads for mc (fallback: SA_LAB_THREADS)")
    return parser


def setup_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, settings.runner.log_level, logging.WARNING),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[
            logging.FileHandler(settings.runner.log_file, mode="a"),
        ]
    )


def error_line(error: BaseException) -> str:
    line = f" line={error.line}" if isinstance(error, ConfigError) and error.line is not None else ""
    message = " ".join(str(error).split())
    return f"{settings.app.cli_name}: error: kind={type(error).__name__}{line} message={message}"


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging()

    try:
        if not settings.validate_runner_config():
            raise ConfigError("SA_LAB_THREADS and SA_LAB_BLOCK_SIZE must be positive")
        if not settings.validate_diagnostics_config():
            raise ConfigError("environment thresholds need 0 < flat < growth and 0 < persistence <= 1")
        config = parse_config(args.config)
        if config.subcommand.value != args.subcommand:
            raise ConfigError(
                f"config is for '{config.subcommand.value}', command line asked for '{args.subcommand}'"
            )
        config = config.with_overrides(seed=args.seed, output=args.out, threads=args.threads)
        dispatch(config, threads=config.threads or settings.runner.threads)
        return EXIT_OK
    except KeyboardInterrupt:
        print("\nInterrupted.", file=sys.stderr)
        return EXIT_UNEXPECTED
    except (LabError, OSError) as e:
        logger.error(f"{args.subcommand} failed: {e}")
        print(error_line(e), file=sys.stderr)
        return EXIT_EXECUTION
    except Exception as e:
        logger.exception(f"Unexpected failure in {args.subcommand}")
        print(error_line(e), file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
