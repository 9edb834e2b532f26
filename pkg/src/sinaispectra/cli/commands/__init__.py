"""sinai-spectra command handlers"""

from .run import cmd_run
from .validate import cmd_validate

__all__ = ["cmd_run", "cmd_validate"]
