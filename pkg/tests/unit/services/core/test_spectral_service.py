"""Tests for SpectralService"""

import math

import numpy as np
import pytest

from sinaispectra.domain.exceptions import RejectedPathError, WindowError
from sinaispectra.services.core.spectral_service import SpectralService
from tests.builders import EnvironmentBuilder


@pytest.fixture
def service():
    return SpectralService()


def scaled_double_well(N, scale=0.5):
    """Environment whose V_N is `scale` times the double-well path, for every even N"""
    slopes = (-4.0, 6.0, -8.0, 10.0)
    increments = [s * scale / math.sqrt(N) for s in slopes for _ in range(N // 2)]
    return (EnvironmentBuilder()
            .on_window(-N + 1, N)
            .with_kappa(0.05)
            .with_increments(increments)
            .build())


class TestFullSpectrum:
    """Tests for full_spectrum, dense_spectrum and principal_pair"""

    def test_flat_three_site_spectrum(self, service, flat_environment):
        """Should give {1 - sqrt(2)/2, 1, 1 + sqrt(2)/2} for omega = 1/2 on three sites"""
        # Arrange
        gen = service.build_generator(flat_environment, (-1, 1))

        # Act
        spectrum = service.full_spectrum(gen)

        # Assert
        half_root = math.sqrt(2) / 2
        assert spectrum.eigenvalues == pytest.approx([1 - half_root, 1.0, 1 + half_root])

    def test_single_site_has_eigenvalue_one(self, service, seeded_environment):
        """Should give the eigenvalue 1 for a one-site domain"""
        # Arrange
        gen = service.build_generator(seeded_environment, (4, 4))

        # Act
        spectrum = service.full_spectrum(gen)

        # Assert
        assert spectrum.eigenvalues == pytest.approx([1.0])

    def test_matches_dense_solver(self, service, seeded_environment):
        """Should agree with a dense general eigensolver on the unsymmetrized generator"""
        # Arrange
        gen = service.build_generator(seeded_environment, (-12, 12))

        # Act
        tridiagonal = service.full_spectrum(gen).eigenvalues
        dense = service.dense_spectrum(gen)

        # Assert
        assert np.allclose(tridiagonal, dense, atol=1e-10)

    def test_eigenvectors_are_mu_orthonormal(self, service, seeded_environment):
        """Should return eigenvectors orthonormal in l2(mu)"""
        # Arrange
        gen = service.build_generator(seeded_environment, (-8, 9))

        # Act
        spectrum = service.full_spectrum(gen)

        # Assert
        weights = np.exp(spectrum.log_mu)
        gram = spectrum.eigenvectors.T @ (weights[:, None] * spectrum.eigenvectors)
        assert np.allclose(gram, np.eye(spectrum.size), atol=1e-9)
        assert np.max(spectrum.residuals) < 1e-10

    def test_principal_pair_is_positive(self, service, seeded_environment):
        """Should give a positive principal eigenvector whose Rayleigh quotient is lambda_1"""
        # Arrange
        gen = service.build_generator(seeded_environment, (-20, 20))

        # Act
        pair = service.principal_pair(gen)

        # Assert
        assert np.all(pair.vector > 0)
        assert pair.lam == pytest.approx(service.full_spectrum(gen).eigenvalues[0], rel=1e-9)
        assert service.rayleigh_quotient(gen, pair.vector) == pytest.approx(pair.lam, rel=1e-8)

    def test_rayleigh_quotient_bounds_principal_eigenvalue(self, service, seeded_environment):
        """Should give a Rayleigh quotient of at least lambda_1 for 100 random trial vectors"""
        # Arrange
        gen = service.build_generator(seeded_environment, (-20, 20))
        pair = service.principal_pair(gen)
        rng = np.random.default_rng(5)
        trials = [rng.normal(size=gen.size) for _ in range(50)]
        trials += [pair.vector + 1e-3 * rng.normal(size=gen.size) for _ in range(50)]

        # Act
        quotients = [service.rayleigh_quotient(gen, f) for f in trials]

        # Assert
        assert min(quotients) >= pair.lam * (1.0 - 1e-10)

    def test_anchors_fix_eigenvector_signs(self, service, z5_environment):
        """Should sign psi_j positive at its anchor site, even against the largest component"""
        # Arrange
        gen = service.build_generator(z5_environment, (-15, 15))
        plain = service.full_spectrum(gen)
        negative_site = int(plain.sites[np.argmin(plain.vector(1))])

        # Act
        anchored = service.full_spectrum(gen, anchors=(8, negative_site))

        # Assert
        assert anchored.vector(0)[gen.index_of(8)] > 0
        assert anchored.vector(1)[gen.index_of(negative_site)] > 0
        assert np.allclose(anchored.vector(1), -plain.vector(1))
        assert np.allclose(anchored.vector(2), plain.vector(2))

    def test_anchor_outside_domain_raises(self, service, z5_environment):
        """Should raise WindowError for an anchor that is not a site of D"""
        gen = service.build_generator(z5_environment, (-15, 15))
        with pytest.raises(WindowError, match="not in the Dirichlet domain"):
            service.full_spectrum(gen, anchors=(40,))


class TestCountBelow:
    """Tests for Sturm counting"""

    @pytest.mark.parametrize("lam,expected", [(0.1, 0), (0.5, 1), (1.5, 2), (2.0, 3)])
    def test_flat_counts(self, service, flat_environment, lam, expected):
        """Should count the eigenvalues of the flat three-site generator below lambda"""
        # Arrange
        gen = service.build_generator(flat_environment, (-1, 1))

        # Act
        result = service.count_below(gen, lam)

        # Assert
        assert result.count == expected
        assert not result.on_boundary

    def test_flags_eigenvalue_on_boundary(self, service, flat_environment):
        """Should flag lambda = 1 as sitting on an eigenvalue"""
        # Arrange
        gen = service.build_generator(flat_environment, (-1, 1))

        # Act & Assert
        assert service.count_below(gen, 1.0).on_boundary


class TestStructuralChecks:
    """Tests for oscillation, parity and nesting"""

    def test_oscillation_and_parity(self, service, seeded_environment):
        """Should find k-1 sign changes and eigenvalues paired around 1"""
        # Arrange
        gen = service.build_generator(seeded_environment, (-15, 15))
        spectrum = service.full_spectrum(gen)

        # Act
        report = service.structural_checks(spectrum, gen)

        # Assert
        assert report.interval
        assert report.oscillation_ok
        assert report.parity_ok()
        assert report.pairing_residual < 1e-6

    def test_holes_skip_interval_checks(self, service, seeded_environment):
        """Should skip oscillation and parity for a domain with holes"""
        # Arrange
        gen = service.build_generator(seeded_environment, (-15, 15), holes=[0])
        spectrum = service.full_spectrum(gen)

        # Act
        report = service.structural_checks(spectrum, gen)

        # Assert
        assert not report.interval
        assert report.notices

    def test_nesting(self, service, seeded_environment):
        """Should raise the principal eigenvalue and interlace when holes are punched"""
        # Act
        check = service.nesting_check(seeded_environment, (-20, 20), [-4, 7])

        # Assert
        assert check.monotone
        assert check.interlacing
        assert check.removed == 2


class TestMetastability:
    """Tests for the metastability report, capacity matrix and determinant roots"""

    def test_report_on_double_well(self, service, z5_environment):
        """Should certify minima 8 and -8 and count two eigenvalues below lambda*"""
        # Act
        report = service.metastability_report(z5_environment, 16, 1.0, 1.0)

        # Assert
        assert report.q == 2
        assert report.minima_sites == (8, -8)
        assert report.counting_ok
        assert report.resolvable
        assert report.lambda_exact[0] < report.lambda_exact[1] < report.lambda_star
        assert report.rel_err[0] < 0.05
        assert report.lambda_bar[0] < report.lambda_bar[1] < report.lambda_bar[2]

    def test_eigenvectors_signed_at_labeled_minima(self, service, z5_environment):
        """Should give each eigenvector a positive mu-inner product with its labeled minimum"""
        # Arrange
        gen = service.build_generator(z5_environment, (-15, 15))

        # Act
        report = service.metastability_report(z5_environment, 16, 1.0, 1.0)
        spectrum = service.full_spectrum(gen, anchors=report.minima_sites)

        # Assert
        for k, x in enumerate(report.minima_sites):
            assert spectrum.vector(k)[gen.index_of(x)] > 0
        assert max(report.vec_dist) < 1.0

    def test_eigenvector_error_decreases_with_N(self, service):
        """Should shrink the eigenvector distance as N grows on a fixed rescaled shape"""
        # Arrange
        sizes = (64, 100, 196)

        # Act
        reports = [
            service.metastability_report(scaled_double_well(N), N, 0.5, 0.5) for N in sizes
        ]

        # Assert
        assert [r.q for r in reports] == [2, 2, 2]
        assert [r.minima_sites for r in reports] == [(N // 2, -N // 2) for N in sizes]
        errors = [r.max_vec_dist() for r in reports]
        assert errors[0] > errors[1] > errors[2], errors

    def test_rejected_path_raises(self, service, z5_environment):
        """Should raise RejectedPathError when delta is too large for the second well"""
        with pytest.raises(RejectedPathError, match="shallow_minimum"):
            service.metastability_report(z5_environment, 16, 1.0, 2.5)

    def test_uncovered_window_raises(self, service, flat_environment):
        """Should raise WindowError when the window does not cover [-N, N]"""
        with pytest.raises(WindowError, match="does not cover"):
            service.metastability_report(flat_environment, 32, 1.0, 1.0)

    def test_capacity_matrix_checks(self, service, z5_environment):
        """Should give a symmetric K and a bounded B below the first eigenvalue"""
        # Arrange
        lam = service.metastability_report(z5_environment, 16, 1.0, 1.0).lambda_exact[0] / 2

        # Act
        matrix = service.capacity_matrix(z5_environment, 16, 1.0, 1.0, 1, lam)

        # Assert
        assert matrix.checks["K_symmetric"]
        assert matrix.checks["B_ok"]
        assert matrix.matrix.shape == (1, 1)

    def test_capacity_matrix_rejects_bad_k(self, service, z5_environment):
        """Should raise ValueError when k exceeds the number of labeled minima"""
        with pytest.raises(ValueError, match="k must lie"):
            service.capacity_matrix(z5_environment, 16, 1.0, 1.0, 3, 1e-9)

    def test_determinant_root_matches_eigenvalue(self, service, z5_environment):
        """Should locate the single root of det E_1 at lambda_1"""
        # Act
        location = service.determinant_root_locate(z5_environment, 16, 1.0, 1.0, 1)

        # Assert
        assert not location.flagged
        assert len(location.roots) == 1
        assert location.rel_errors[0] < 1e-6
