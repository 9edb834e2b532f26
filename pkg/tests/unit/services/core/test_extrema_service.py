"""Tests for ExtremaService: h-extrema, saddles, good-path certificates and RG decimation"""

import numpy as np
import pytest

from sinaispectra.domain.exceptions import DegenerateError, OverlapError, WindowError
from sinaispectra.domain.path import Path
from sinaispectra.services.core.extrema_service import ExtremaService
from tests.builders import PathBuilder


@pytest.fixture
def service():
    return ExtremaService()


class TestExtractExtrema:
    """Tests for extract_extrema"""

    def test_z5_at_height_one(self, service, z5_path):
        """Should find minima {-0.5, 0.5} and maxima {-1, 0, 1}"""
        # Act
        extrema = service.extract_extrema(z5_path, 1.0)

        # Assert
        assert extrema.minima == (-0.5, 0.5)
        assert extrema.maxima == (-1.0, 0.0, 1.0)
        assert extrema.left_boundary_max and extrema.right_boundary_max
        assert extrema.is_alternating()

    def test_increasing_path_has_only_right_maximum(self, service, increasing_path):
        """Should find no minimum and the right endpoint as the only maximum"""
        # Act
        extrema = service.extract_extrema(increasing_path, 1.0)

        # Assert
        assert extrema.minima == ()
        assert extrema.maxima == (1.0,)

    def test_height_above_total_variation(self, service, z5_path):
        """Should find nothing when h exceeds every variation"""
        # Act
        extrema = service.extract_extrema(z5_path, 6.0)

        # Assert
        assert extrema.minima == ()
        assert extrema.maxima == ()

    def test_rejects_non_positive_height(self, service, z5_path):
        """Should raise ValueError for h <= 0"""
        with pytest.raises(ValueError, match="h must be positive"):
            service.extract_extrema(z5_path, 0.0)

    def test_coarse_minima_nested_in_fine(self, service):
        """Should nest 2-minima inside 0.5-minima of a random zigzag"""
        # Arrange
        rng = np.random.default_rng(4)
        path = Path(np.arange(200.0), np.cumsum(rng.normal(size=200)))

        # Act & Assert
        assert service.nested_in(path, coarse=2.0, fine=0.5)


class TestSaddlePoint:
    """Tests for saddle_point and depth"""

    def test_saddle_between_deep_minimum_and_endpoints(self, service, z5_path):
        """Should give z* = 0 with value 1 for A={0.5}, B={-1, 1}"""
        assert service.saddle_point(z5_path, [0.5], [-1.0, 1.0]) == (0.0, 1.0)

    def test_saddle_between_minima(self, service, z5_path):
        """Should give z* = 0 with value 1 between the two minima"""
        assert service.saddle_point(z5_path, [-0.5], [0.5]) == (0.0, 1.0)

    def test_monotone_path_saddle_at_top_endpoint(self, service, increasing_path):
        """Should put the saddle at the higher endpoint of a monotone path"""
        # Act
        z, value = service.saddle_point(increasing_path, [-1.0], [1.0])

        # Assert
        assert z == 1.0
        assert value == 3.0

    def test_overlapping_sets_raise(self, service, z5_path):
        """Should raise OverlapError when A and B share a point"""
        with pytest.raises(OverlapError):
            service.saddle_point(z5_path, [0.5], [0.5, 1.0])

    @pytest.mark.parametrize("x,S,expected", [
        (0.5, [-1.0, 1.0], 4.0),
        (-0.5, [-1.0, 0.5, 1.0], 2.0),
    ])
    def test_depths_of_z5(self, service, z5_path, x, S, expected):
        """Should give the hand-computed depths of the Z5 minima"""
        assert service.depth(z5_path, x, S) == pytest.approx(expected)


class TestGoodPathCertificate:
    """Tests for good_path_certificate"""

    def test_z5_accepted(self, service, z5_path):
        """Should accept Z5 at h=1, delta=1 with x_1=0.5 (d=4) and x_2=-0.5 (d=2)"""
        # Act
        certificate = service.good_path_certificate(z5_path, 1.0, 1.0)

        # Assert
        assert certificate.accepted
        assert certificate.labeling == (0.5, -0.5)
        assert certificate.depths == pytest.approx((4.0, 2.0))
        assert certificate.saddles[0] == 0.0

    def test_z5_rejected_for_large_delta(self, service, z5_path):
        """Should reject Z5 at delta=2.5 because d_2=2 < h + delta"""
        # Act
        certificate = service.good_path_certificate(z5_path, 1.0, 2.5)

        # Assert
        assert not certificate.accepted
        assert certificate.reason == "shallow_minimum"
        assert certificate.labeling == (0.5, -0.5)

    def test_symmetric_double_well_is_degenerate(self, service):
        """Should reject a double well with equal depths as degenerate"""
        # Arrange
        path = PathBuilder().through(
            (-1.0, 0.0), (-0.5, -2.0), (0.0, 1.0), (0.5, -2.0), (1.0, 0.0)
        ).build()

        # Act
        certificate = service.good_path_certificate(path, 0.5, 0.1)

        # Assert
        assert certificate.reason == "degenerate"

    def test_no_minima_rejected(self, service, increasing_path):
        """Should reject a path without h-minima"""
        assert service.good_path_certificate(increasing_path, 1.0, 0.5).reason == "no_minima"


class TestRgDecimation:
    """Tests for rg_decimation and verify_rg_equivalence"""

    def test_z5_transcript(self, service, z5_path):
        """Should decimate (-1, -0.5) first with T=2, then 0.5 with T=4"""
        # Act
        transcript = service.rg_decimation(z5_path, 1.0)

        # Assert
        assert transcript.stages[0].bond == (-1.0, -0.5)
        assert transcript.decimated_minima == (-0.5, 0.5)
        assert transcript.variations == pytest.approx((2.0, 4.0))

    def test_single_well(self, service):
        """Should use one stage whose variation is the well depth"""
        # Arrange
        path = PathBuilder().through((-1.0, 0.0), (0.0, -3.0), (1.0, 1.0)).build()

        # Act
        transcript = service.rg_decimation(path, 0.5)

        # Assert
        assert transcript.q == 1
        assert transcript.variations == pytest.approx((3.0,))

    def test_no_minimum_raises(self, service, increasing_path):
        """Should raise WindowError when there is nothing to decimate"""
        with pytest.raises(WindowError, match="no"):
            service.rg_decimation(increasing_path, 1.0)

    def test_tied_variations_raise(self, service):
        """Should raise DegenerateError on tied smallest variations"""
        # Arrange
        path = PathBuilder().through(
            (-1.0, 0.0), (-0.5, -2.0), (0.0, 0.0), (0.5, -2.0), (1.0, 0.0)
        ).build()

        # Act & Assert
        with pytest.raises(DegenerateError, match="Tied"):
            service.rg_decimation(path, 1.0)

    def test_z5_equivalent(self, service, z5_path):
        """Should match greedy labeling and reversed decimation order on Z5"""
        # Act
        report = service.verify_rg_equivalence(z5_path, 1.0)

        # Assert
        assert report.equivalent
        assert report.q == 2

    def test_random_zigzags_equivalent(self, service):
        """Should agree on every nondegenerate seeded zigzag"""
        # Arrange
        rng = np.random.default_rng(12)
        checked = 0

        # Act
        for _ in range(50):
            path = Path(np.arange(41.0), np.cumsum(rng.normal(size=41)))
            try:
                report = service.verify_rg_equivalence(path, 1.0)
            except (DegenerateError, WindowError):
                continue
            checked += 1

            # Assert
            assert report.equivalent, report.mismatches
        assert checked > 0
