"""Unit tests for domain exception classes"""

import pytest

from sinaispectra.domain.exceptions import (
    ConfigurationError,
    DegenerateError,
    EllipticityError,
    InsufficientSpanError,
    RejectedPathError,
    SinaiSpectraError,
    SpectrumCollisionError,
    WindowError,
    WindowExitError,
)


class TestExceptionHierarchy:
    """Test suite for exception class hierarchy and inheritance"""

    @pytest.mark.parametrize("error_class", [
        ConfigurationError, DegenerateError, WindowError,
    ])
    def test_inherits_from_base(self, error_class):
        """Should be catchable as SinaiSpectraError"""
        # Act
        error = error_class("message")

        # Assert
        assert isinstance(error, SinaiSpectraError)
        assert str(error) == "message"

    def test_window_exit_is_window_error(self):
        """WindowExitError should be caught by WindowError handlers"""
        with pytest.raises(WindowError):
            raise WindowExitError(12, -41)


class TestStructuredErrors:
    """Test suite for exceptions carrying their parameters"""

    def test_ellipticity_error(self):
        """Should keep the site and name the bound in the message"""
        # Act
        error = EllipticityError(3, 2.5, 2.197)

        # Assert
        assert error.site == 3
        assert "site 3" in str(error)

    def test_window_exit_error(self):
        """Should keep the exit time and position"""
        # Act
        error = WindowExitError(12, -41)

        # Assert
        assert (error.time, error.position) == (12, -41)
        assert "time 12" in str(error)

    def test_spectrum_collision_error(self):
        """Should report lambda and the nearest eigenvalue"""
        # Act
        error = SpectrumCollisionError(0.5, 0.5000000001)

        # Assert
        assert error.nearest == 0.5000000001
        assert "nearest eigenvalue" in str(error)

    def test_insufficient_span_error(self):
        """Should mention the span when given"""
        # Act
        error = InsufficientSpanError(12, 100, span=40.0)

        # Assert
        assert error.count == 12
        assert "span=40" in str(error)

    def test_rejected_path_error(self):
        """Should keep the rejection reason"""
        assert RejectedPathError("degenerate").reason == "degenerate"
