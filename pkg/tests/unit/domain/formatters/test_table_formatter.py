"""Tests for table formatting utilities"""

import pytest

from sinaispectra.domain.formatters.table_formatter import (
    MAX_CELL_WIDTH,
    TableFormatter,
    pad_to_visual_width,
    truncate,
    visual_width,
)


class TestVisualWidth:
    """Test visual width calculation"""

    def test_ascii_text(self):
        """ASCII characters are single width"""
        assert visual_width("parity") == 6

    def test_wide_characters(self):
        """Fullwidth characters take two columns"""
        assert visual_width("λ") == 1
        assert visual_width("ＡＢ") == 4

    def test_combining_marks(self):
        """Combining marks take no column"""
        assert visual_width("é") == 1

    def test_empty_string(self):
        """Empty string has zero width"""
        assert visual_width("") == 0


class TestPadToVisualWidth:
    """Test visual width padding"""

    @pytest.mark.parametrize("align,expected", [
        ("left", "pass  "),
        ("right", "  pass"),
        ("center", " pass "),
    ])
    def test_alignment(self, align, expected):
        """Should pad on the side given by the alignment"""
        assert pad_to_visual_width("pass", 6, align) == expected

    def test_no_padding_when_too_long(self):
        """Should leave text wider than the target unchanged"""
        assert pad_to_visual_width("oscillation", 4) == "oscillation"


class TestTruncate:
    """Test cell truncation"""

    def test_long_cell_ends_with_ellipsis(self):
        """Should cut long cells to the maximum width"""
        # Act
        result = truncate("x" * (MAX_CELL_WIDTH + 20))

        # Assert
        assert visual_width(result) == MAX_CELL_WIDTH
        assert result.endswith("…")


class TestTableFormatter:
    """Test box-drawn table output"""

    def test_format_table(self):
        """Should draw borders, headers and aligned rows"""
        # Arrange
        table = TableFormatter(["Check", "Status"], align=["left", "center"])
        table.add_row(["parity", "pass"])
        table.add_row(["oscillation", "fail"])

        # Act
        lines = table.format().split("\n")

        # Assert
        assert lines[0].startswith("┌") and lines[-1].endswith("┘")
        assert "│ Check       │" in lines[1]
        assert "│ oscillation │  fail  │" == lines[4]
        assert len({visual_width(line) for line in lines}) == 1

    def test_empty_table(self):
        """Should format an empty table as an empty string"""
        assert TableFormatter(["Check"]).format() == ""

    def test_row_width_mismatch_raises(self):
        """Should reject rows with the wrong number of cells"""
        with pytest.raises(ValueError, match="expected 2"):
            TableFormatter(["Check", "Status"]).add_row(["parity"])

    def test_align_mismatch_raises(self):
        """Should reject an alignment list of the wrong length"""
        with pytest.raises(ValueError, match="align list"):
            TableFormatter(["Check", "Status"], align=["left"])
