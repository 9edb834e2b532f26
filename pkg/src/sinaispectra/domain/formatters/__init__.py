"""Formatters for terminal output"""

from sinaispectra.domain.formatters.table_formatter import TableFormatter

__all__ = ["TableFormatter"]
