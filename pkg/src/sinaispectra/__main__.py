#!/usr/bin/env python3
"""
sinai-spectra - verification suites for the spectral theory of Sinai's random walk

Entry point for the sinai-spectra command-line tool.
Run with: python3 -m sinaispectra <command>
"""

import logging
import sys

from sinaispectra.cli.commands.run import cmd_run
from sinaispectra.cli.commands.validate import cmd_validate
from sinaispectra.cli.parser import config_from_args, create_parser
from sinaispectra.domain.exceptions import ConfigurationError
from sinaispectra.infrastructure.console.output import ConsoleHelper


def main(argv=None):
    """Main entry point for the script"""
    parser = create_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 2

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    console = ConsoleHelper()

    try:
        config = config_from_args(args)
    except ConfigurationError as e:
        console.set_error(str(e))
        return 2

    # Route to appropriate command handler
    if args.command == "run":
        return cmd_run(console, config)
    elif args.command == "validate":
        return cmd_validate(console, config)
    else:
        console.set_error(f"Unknown command: {args.command}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
