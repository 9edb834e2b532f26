"""
CLI Argument Parser

This module handles command-line argument parsing for sinai-spectra.
"""

import argparse

from sinaispectra.domain.config import ExperimentConfig, jobs_from_environment, load_config
from sinaispectra.domain.constants import SUITES

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

# Flag destinations that map one-to-one onto ExperimentConfig fields
CONFIG_FLAGS = (
    "N", "n", "h", "delta", "sigma", "seeds", "trials", "paths", "span", "jobs", "law",
    "output_dir", "screen_delta", "screen_delta_prime", "screen_beta", "window_constant",
)


def create_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser for the sinai-spectra CLI.

    Returns:
        Configured ArgumentParser instance
    """
    parser = argparse.ArgumentParser(
        description="sinai-spectra - spectral theory of Sinai's random walk, checked numerically"
    )
    parser.add_argument(
        "--log-level",
        choices=LOG_LEVELS,
        default="WARNING",
        help="Logging level for library diagnostics (default: WARNING)"
    )
    subparsers = parser.add_subparsers(dest="command", help="Subcommands")

    parser_run = subparsers.add_parser(
        "run",
        help="Run a verification suite and write its JSON and CSV reports"
    )
    parser_run.add_argument("suite", choices=SUITES, help="Suite to run")
    _add_config_arguments(parser_run)

    parser_validate = subparsers.add_parser(
        "validate",
        help="Dry-run parameter checks without running a suite"
    )
    parser_validate.add_argument(
        "suite", nargs="?", choices=SUITES, default=None,
        help="Suite the parameters are meant for (default: from config)"
    )
    _add_config_arguments(parser_validate)

    return parser


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    """Flags shared by `run` and `validate`; unset flags stay None."""
    parser.add_argument("--config", help="Config file (key=value lines, or YAML for .yml/.yaml)")
    parser.add_argument("--law", help="Disorder law, e.g. symmetric_uniform:0.1 or two_point:0.3")
    parser.add_argument("--N", type=int, nargs="+", help="Lattice scales for spectral suites")
    parser.add_argument("--n", type=float, nargs="+", help="Time scales for walk suites")
    parser.add_argument("--h", type=float, help="Extrema height")
    parser.add_argument("--delta", type=float, help="Good-path separation")
    parser.add_argument("--sigma", type=float, help="Brownian diffusion constant")
    parser.add_argument("--seeds", help="Seeds: a count (50), a range (0-49) or a list (1,5,9)")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials per estimate")
    parser.add_argument("--paths", type=int, help="Brownian paths per batch")
    parser.add_argument("--span", type=float, help="Brownian window half-width")
    parser.add_argument("--out", dest="output_dir", help="Output directory for reports")
    parser.add_argument(
        "--jobs", type=int,
        help="Worker processes (default: SINAI_SPECTRA_JOBS, else 1)"
    )
    parser.add_argument("--screen-delta", type=float, help="Valley screen separation")
    parser.add_argument("--screen-delta-prime", type=float, help="Valley screen window factor")
    parser.add_argument("--screen-beta", type=float, help="Valley screen bottom bound")
    parser.add_argument("--window-constant", type=float, help="Valley window constant C1")


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults, then the --config file, then flags; SINAI_SPECTRA_JOBS fills an unset --jobs.

    Raises:
        ConfigurationError: If the config file, a flag or the result is invalid
    """
    config = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {name: getattr(args, name, None) for name in CONFIG_FLAGS}
    if getattr(args, "suite", None):
        overrides["suite"] = args.suite
    if overrides["jobs"] is None and config.jobs == ExperimentConfig.jobs:
        overrides["jobs"] = jobs_from_environment(default=config.jobs)
    return config.with_overrides(overrides).validate()
