"""Annotated console output for CLI commands"""

import sys
from typing import Optional, TextIO


class ConsoleHelper:
    """Write results and annotated messages for a terminal or a log collector.

    Key/value outputs go to stdout as `name=value`; annotations go to stderr
    as `::error::`, `::warning::` or `::notice::` lines so that they can be
    picked out of mixed output.
    """

    def __init__(self, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None):
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr

    def write_output(self, name: str, value: str) -> None:
        """Print a named result.

        Multi-line values are wrapped in a `name<<END ... END` block.
        """
        if "\n" in value:
            print(f"{name}<<END\n{value}\nEND", file=self.stdout)
        else:
            print(f"{name}={value}", file=self.stdout)

    def set_error(self, message: str) -> None:
        print(f"::error::{message}", file=self.stderr)

    def set_notice(self, message: str) -> None:
        print(f"::notice::{message}", file=self.stderr)

    def set_warning(self, message: str) -> None:
        print(f"::warning::{message}", file=self.stderr)
