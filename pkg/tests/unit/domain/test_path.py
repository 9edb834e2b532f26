"""Tests for piecewise-linear paths"""

import pytest

from sinaispectra.domain.path import Path
from tests.builders import PathBuilder


class TestPath:
    """Tests for Path construction and queries"""

    def test_rejects_non_increasing_abscissae(self):
        """Should require strictly increasing vertex positions"""
        with pytest.raises(ValueError, match="strictly increasing"):
            Path.from_points([(0.0, 1.0), (0.0, 2.0)])

    def test_rejects_single_point(self):
        """Should require at least two points"""
        with pytest.raises(ValueError, match="at least two"):
            Path.from_points([(0.0, 1.0)])

    def test_interpolates_linearly(self, z5_path):
        """Should interpolate between vertices"""
        assert float(z5_path.value_at(0.25)) == pytest.approx(-1.0)

    def test_argmax_prefers_leftmost(self):
        """Should return the leftmost maximizer"""
        # Arrange
        path = PathBuilder().through((0.0, 0.0), (1.0, 2.0), (2.0, 0.0), (3.0, 2.0)).build()

        # Act & Assert
        assert path.argmax_between(0.0, 3.0) == (1.0, 2.0)

    def test_max_and_min_between(self, z5_path):
        """Should evaluate extremes on sub-intervals including interpolated ends"""
        assert z5_path.max_between(-0.75, 0.25) == pytest.approx(1.0)
        assert z5_path.min_between(-0.25, 0.75) == pytest.approx(-3.0)

    def test_restrict_and_scale(self, z5_path):
        """Should restrict to a sub-interval and scale values"""
        # Act
        restricted = z5_path.restrict(-0.5, 0.5).scaled(2.0)

        # Assert
        assert (restricted.start, restricted.end) == (-0.5, 0.5)
        assert float(restricted.value_at(0.0)) == pytest.approx(2.0)

    def test_sup_distance(self, z5_path):
        """Should measure the sup distance to a shifted copy"""
        assert z5_path.sup_distance(z5_path.scaled(1.0, shift=0.5)) == pytest.approx(0.5)
