"""Box-drawn tables for terminal summaries of suite results"""

import unicodedata
from typing import List, Literal, Optional, Sequence

Align = Literal["left", "right", "center"]

# Cells longer than this are cut and end with an ellipsis
MAX_CELL_WIDTH = 60


def visual_width(text: str) -> int:
    """Terminal columns taken by `text`.

    Wide and fullwidth characters take two columns; combining marks take none.
    """
    width = 0
    for char in text:
        if unicodedata.combining(char):
            continue
        width += 2 if unicodedata.east_asian_width(char) in ("W", "F") else 1
    return width


def pad_to_visual_width(text: str, target_width: int, align: Align = "left") -> str:
    padding = target_width - visual_width(text)
    if padding <= 0:
        return text
    if align == "left":
        return text + " " * padding
    if align == "right":
        return " " * padding + text
    left = padding // 2
    return " " * left + text + " " * (padding - left)


def truncate(text: str, limit: int = MAX_CELL_WIDTH) -> str:
    if visual_width(text) <= limit:
        return text
    cut = text
    while visual_width(cut) > limit - 1:
        cut = cut[:-1]
    return cut + "…"


class TableFormatter:
    """Format rows as a bordered table with box-drawing characters."""

    def __init__(self, headers: List[str], align: Optional[Sequence[Align]] = None):
        """Initialize table formatter.

        Args:
            headers: Column headers
            align: Alignment per column, 'left' for all columns by default
        """
        self.headers = headers
        self.rows: List[List[str]] = []
        self.align = list(align or ["left"] * len(headers))

        if len(self.align) != len(headers):
            raise ValueError("align list must match number of headers")

    def add_row(self, row: Sequence[object]) -> None:
        if len(row) != len(self.headers):
            raise ValueError(f"Row has {len(row)} columns, expected {len(self.headers)}")
        self.rows.append([truncate(str(cell)) for cell in row])

    def format(self) -> str:
        """Table as a string, empty when there are no rows."""
        if not self.rows:
            return ""
        widths = [visual_width(h) for h in self.headers]
        for row in self.rows:
            widths = [max(w, visual_width(cell)) for w, cell in zip(widths, row)]

        def rule(left: str, middle: str, right: str) -> str:
            return left + middle.join("─" * (w + 2) for w in widths) + right

        def line(cells: Sequence[str]) -> str:
            padded = (
                f" {pad_to_visual_width(cell, w, a)} "
                for cell, w, a in zip(cells, widths, self.align)
            )
            return "│" + "│".join(padded) + "│"

        lines = [rule("┌", "┬", "┐"), line(self.headers), rule("├", "┼", "┤")]
        lines.extend(line(row) for row in self.rows)
        lines.append(rule("└", "┴", "┘"))
        return "\n".join(lines)
