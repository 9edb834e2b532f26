"""Tests for BrownianService"""

import numpy as np
import pytest
from scipy import integrate

from sinaispectra.domain.environment import DisorderLaw
from sinaispectra.domain.exceptions import ConfigurationError, InsufficientSpanError
from sinaispectra.services.core.brownian_service import BrownianService


@pytest.fixture
def service():
    return BrownianService()


class TestSamplePath:
    """Tests for sample_path and sample_paths"""

    def test_default_dt(self):
        """Should use (h/sigma)^2 / 400"""
        assert BrownianService.default_dt(1.0, 2.0) == pytest.approx(0.25 / 400)

    def test_path_starts_at_zero(self, service):
        """Should pin B(0) = 0 on the regular grid"""
        # Act
        sample = service.sample_path(1.0, 0.01, (-1.0, 2.0), seed=5)

        # Assert
        assert float(sample.value_at(0.0)) == 0.0
        assert sample.span == pytest.approx((-1.0, 2.0))
        assert np.allclose(np.diff(sample.path.abscissae), 0.01)

    def test_same_seed_same_path(self, service):
        """Should reproduce the path and its envelope for a fixed seed"""
        # Act
        first = service.sample_path(1.0, 0.01, (-1.0, 1.0), seed=9)
        second = service.sample_path(1.0, 0.01, (-1.0, 1.0), seed=9)

        # Assert
        assert np.array_equal(first.path.ordinates, second.path.ordinates)
        assert np.array_equal(first.envelope.ordinates, second.envelope.ordinates)

    def test_envelope_brackets_grid_values(self, service):
        """Should insert bridge extrema outside the range of each grid cell"""
        # Arrange
        sample = service.sample_path(1.0, 0.01, (0.0, 1.0), seed=2)
        values = sample.path.ordinates
        inserted = sample.envelope.ordinates[:-1].reshape(-1, 3)[:, 1:]

        # Assert
        cell_max = np.maximum(values[:-1], values[1:])
        cell_min = np.minimum(values[:-1], values[1:])
        assert np.all(inserted.max(axis=1) >= cell_max - 1e-12)
        assert np.all(inserted.min(axis=1) <= cell_min + 1e-12)

    def test_without_envelope(self, service):
        """Should fall back to the grid path for extrema when no envelope is drawn"""
        # Act
        sample = service.sample_path(1.0, 0.01, (-1.0, 1.0), seed=1, envelope=False)

        # Assert
        assert sample.envelope is None
        assert sample.extrema_path is sample.path

    @pytest.mark.parametrize("sigma,dt,span,message", [
        (0.0, 0.01, (-1.0, 1.0), "sigma"),
        (1.0, 0.0, (-1.0, 1.0), "dt"),
        (1.0, 0.01, (1.0, 2.0), "containing 0"),
        (1.0, 1.0, (-0.5, 0.5), "no grid step"),
    ])
    def test_invalid_arguments(self, service, sigma, dt, span, message):
        """Should raise ValueError for invalid sampling parameters"""
        with pytest.raises(ValueError, match=message):
            service.sample_path(sigma, dt, span, seed=0)

    def test_sample_paths_are_independent(self, service):
        """Should draw distinct paths from derived seeds"""
        # Act
        samples = service.sample_paths(1.0, 0.01, (-1.0, 1.0), count=3, seed=4)

        # Assert
        assert len({s.seed for s in samples}) == 3
        assert not np.array_equal(samples[0].path.ordinates, samples[1].path.ordinates)


class TestSlopeStatistics:
    """Tests for the interior h-slope statistics"""

    def test_heights_and_spacings(self, service):
        """Should give spacing mean near h^2/sigma^2 and heights near Exp(h)"""
        # Arrange
        samples = service.sample_paths(1.0, 1.0 / 400, (-150.0, 150.0), count=2, seed=0)

        # Act
        statistics = service.slope_statistics(samples, 1.0)

        # Assert
        assert statistics.count >= 100
        assert statistics.spacing_mean_error < 0.2
        assert float(np.mean(statistics.heights)) == pytest.approx(1.0, abs=0.25)
        assert np.all(statistics.heights >= -1e-12)
        assert len(statistics.laplace) == 3

    def test_short_span_raises(self, service):
        """Should raise InsufficientSpanError when too few interior slopes remain"""
        # Arrange
        samples = service.sample_paths(1.0, 1.0 / 400, (-5.0, 5.0), count=1, seed=0)

        # Act & Assert
        with pytest.raises(InsufficientSpanError):
            service.slope_statistics(samples, 1.0)

    def test_no_samples_raises(self, service):
        """Should raise ValueError for an empty batch"""
        with pytest.raises(ValueError, match="at least one sample"):
            service.slope_statistics([], 1.0)


class TestSpacingLaw:
    """Tests for the spacing law of consecutive h-extrema"""

    def test_density_is_normalized(self, service):
        """Should integrate to 1 with mean h^2 / sigma^2"""
        # Arrange
        x = np.linspace(1e-3, 30.0, 3_001)

        # Act
        law = service.spacing_law(x, h=1.0, sigma=1.0)

        # Assert
        assert integrate.trapezoid(law.density, x) == pytest.approx(1.0, abs=1e-3)
        assert integrate.trapezoid(law.size_biased, x) == pytest.approx(1.0, abs=1e-3)

    def test_cdfs_are_monotone(self, service):
        """Should give nondecreasing CDFs that approach 1"""
        # Act
        law = service.spacing_law(np.linspace(0.05, 12.0, 60), h=2.0, sigma=1.0)

        # Assert
        assert np.all(np.diff(law.cdf) >= -1e-12)
        assert np.all(np.diff(law.renewal_cdf) >= -1e-12)
        assert law.cdf[-1] > 0.5

    def test_small_kmax_raises(self, service):
        """Should reject fewer than the minimum number of series terms"""
        with pytest.raises(ValueError, match="kmax"):
            service.spacing_law([1.0], kmax=3)

    def test_grid_without_positive_point_raises(self, service):
        """Should reject a grid with no positive point"""
        with pytest.raises(ValueError, match="positive point"):
            service.spacing_law([0.0, -1.0])


class TestChecks:
    """Tests for tail, scaling, refinement and KMT checks"""

    def test_tail_bounds_hold(self, service):
        """Should keep the count tail and escape frequencies under their bounds"""
        # Arrange
        samples = service.sample_paths(1.0, 1.0 / 400, (-4.0, 4.0), count=20, seed=8)

        # Act
        report = service.tail_checks(samples, 1.0, bessel_trials=20_000, seed=1)

        # Assert
        assert report.paths == 20
        assert report.bounds_ok
        assert len(report.count_tail) == 20

    def test_scaling_check(self, service):
        """Should find equal mean counts for B and its Brownian rescaling"""
        # Act
        check = service.scaling_check(1.0, 1.0, 2.0, 10.0, paths=30, seed=3, dt=1.0 / 100)

        # Assert
        assert check.name == "scaling"
        assert check.passed

    def test_scaling_rejects_non_positive_factor(self, service):
        """Should raise ValueError for a <= 0"""
        with pytest.raises(ValueError, match="a must be positive"):
            service.scaling_check(1.0, 1.0, 0.0, 10.0, paths=2)

    def test_dt_refinement_counts_paths(self, service):
        """Should report one verdict per path"""
        # Act
        check = service.dt_refinement_check(1.0, 1.0, (-5.0, 5.0), paths=4, seed=2)

        # Assert
        assert check.paths == 4
        assert 0 <= check.unchanged <= 4

    def test_kmt_rejects_degenerate_law(self, service):
        """Should raise ConfigurationError for a zero-variance law"""
        with pytest.raises(ConfigurationError, match="zero variance"):
            service.kmt_diagnostic(DisorderLaw.two_point(0.5), 16, 4, 1.0, 0.5)

    def test_kmt_report_shape(self, service):
        """Should compare at least the maximum functional"""
        # Act
        report = service.kmt_diagnostic(DisorderLaw.two_point(0.3), 16, 10, 0.5, 0.2, seed=1)

        # Assert
        assert report.N == 16
        assert report.checks[0].name == "max"
        assert 0.0 <= report.acceptance_potential <= 1.0
