"""Tests for PotentialTheoryService"""

import numpy as np
import pytest
from scipy import linalg

from sinaispectra.domain.exceptions import OverlapError, SpectrumCollisionError, WindowError
from sinaispectra.domain.generator import DirichletGenerator
from sinaispectra.services.core.potential_theory_service import PotentialTheoryService
from sinaispectra.services.core.spectral_service import SpectralService


@pytest.fixture
def flat_theory(flat_environment):
    return PotentialTheoryService(flat_environment)


@pytest.fixture
def seeded_theory(seeded_environment):
    return PotentialTheoryService(seeded_environment)


class TestEquilibriumPotentials:
    """Tests for two-point, general and lambda equilibrium potentials"""

    def test_gambler_ruin(self, flat_theory):
        """Should give h_{0,4}(1) = 3/4 for V = 0"""
        # Act
        h = flat_theory.equilibrium_two_point(0, 4)

        # Assert
        assert float(h.value_at(1)) == pytest.approx(0.75)
        assert float(h.value_at(0)) == 1.0
        assert float(h.value_at(4)) == 0.0

    def test_two_point_needs_ordered_pair(self, flat_theory):
        """Should raise ValueError when a >= b"""
        with pytest.raises(ValueError, match="a < b"):
            flat_theory.equilibrium_two_point(4, 0)

    def test_boundary_outside_window_raises(self, flat_theory):
        """Should raise WindowError for sites beyond the admissible range"""
        with pytest.raises(WindowError, match="outside"):
            flat_theory.equilibrium_two_point(0, 30)

    def test_two_point_matches_linear_solve(self, seeded_environment, seeded_theory):
        """Should agree with a direct tridiagonal solve of L h = 0"""
        # Arrange
        a, b = -6, 7
        gen = DirichletGenerator.build(seeded_environment, (a + 1, b - 1))
        ab = np.zeros((3, gen.size))
        ab[1] = 1.0
        ab[0, 1:] = gen.upper
        ab[2, :-1] = gen.lower
        rhs = np.zeros(gen.size)
        rhs[0] = 1.0 - float(seeded_environment.omega_at(a + 1))

        # Act
        direct = linalg.solve_banded((1, 1), ab, rhs)
        closed = seeded_theory.equilibrium_two_point(a, b).on(gen.sites)

        # Assert
        assert np.allclose(closed, direct, rtol=1e-10, atol=1e-14)

    def test_general_glues_two_point_pieces(self, flat_theory):
        """Should give h_{{0},{-3,3}}(1) = 2/3 for V = 0"""
        # Act
        h = flat_theory.equilibrium_general([0], [-3, 3])

        # Assert
        assert float(h.value_at(1)) == pytest.approx(2 / 3)
        assert float(h.value_at(-1)) == pytest.approx(2 / 3)

    def test_general_is_constant_outside_hull(self, flat_theory):
        """Should be 1 left of A and 0 right of B when sup A < inf B"""
        # Act
        h = flat_theory.equilibrium_general([-2], [2])

        # Assert
        assert float(h.value_at(-5)) == 1.0
        assert float(h.value_at(5)) == 0.0

    def test_overlap_raises(self, flat_theory):
        """Should raise OverlapError when A and B intersect"""
        with pytest.raises(OverlapError):
            flat_theory.equilibrium_general([0, 1], [1, 4])

    def test_lambda_zero_is_plain(self, seeded_theory):
        """Should return the plain equilibrium potential at lambda = 0"""
        # Act
        plain = seeded_theory.equilibrium_general([0], [-8, 8])
        tilted = seeded_theory.lambda_equilibrium([0], [-8, 8], 0.0)

        # Assert
        assert np.allclose(plain.values, tilted.values, atol=1e-12)

    def test_lambda_on_spectrum_raises(self, seeded_environment, seeded_theory):
        """Should raise SpectrumCollisionError when lambda is an eigenvalue of L_D"""
        # Arrange
        spectral = SpectralService()
        gen = spectral.build_generator(seeded_environment, (-7, 7))
        lam = float(spectral.full_spectrum(gen).eigenvalues[0])

        # Act & Assert
        with pytest.raises(SpectrumCollisionError):
            seeded_theory.lambda_equilibrium([-8], [8], lam)


class TestCapacityAndGreen:
    """Tests for capacities and Green functions"""

    def test_flat_capacity(self, flat_theory):
        """Should give cap(0, 5) = 1/5 for V = 0"""
        assert flat_theory.capacity([0], [5]).value == pytest.approx(0.2)

    def test_capacity_adds_over_neighbours(self, seeded_theory):
        """Should give cap(a, {b1, b2}) = cap(b1, a) + cap(a, b2)"""
        # Act
        total = seeded_theory.capacity([0], [-5, 6]).value
        left = seeded_theory.capacity([-5], [0]).value
        right = seeded_theory.capacity([0], [6]).value

        # Assert
        assert total == pytest.approx(left + right, rel=1e-12)

    def test_flat_green_function(self, flat_theory):
        """Should give G(2, 2) = 2 on D = {1, 2, 3} for V = 0"""
        # Act
        green = flat_theory.green_function([1, 2, 3])

        # Assert
        assert green(2, 2) == pytest.approx(2.0)
        assert np.allclose(green.matrix, np.linalg.inv(np.array([
            [1.0, -0.5, 0.0], [-0.5, 1.0, -0.5], [0.0, -0.5, 1.0],
        ])))

    def test_single_site_green(self, seeded_theory):
        """Should give G = 1 on a single site"""
        assert seeded_theory.green_function([3])(3, 3) == pytest.approx(1.0)

    def test_green_inverts_generator(self, seeded_environment, seeded_theory):
        """Should satisfy L_D G_D = I"""
        # Arrange
        gen = DirichletGenerator.build(seeded_environment, (-10, 12))

        # Act
        green = seeded_theory.green_function(range(-10, 13))

        # Assert
        assert np.allclose(gen.dense() @ green.matrix, np.eye(gen.size), atol=1e-9)

    def test_green_reversibility(self, seeded_theory):
        """Should satisfy mu(x) G(x, z) = mu(z) G(z, x)"""
        # Arrange
        green = seeded_theory.green_function(range(-5, 9))
        mu = seeded_theory.measure.weights[green.sites - seeded_theory.env.x_lo]

        # Act
        weighted = mu[:, None] * green.matrix

        # Assert
        assert np.allclose(weighted, weighted.T, rtol=1e-10)

    def test_green_outside_window_raises(self, flat_theory):
        """Should raise WindowError for a domain leaving the window"""
        with pytest.raises(WindowError, match="leaves the window"):
            flat_theory.green_function(range(5, 15))


class TestHittingMoments:
    """Tests for exit-time moments"""

    def test_flat_mean_exit(self, flat_theory):
        """Should give E_3 tau = (x - a)(b - x) = 21 on (0, 10)"""
        assert flat_theory.hitting_moments(3, 0, 10).mean_exit == pytest.approx(21.0)

    def test_symmetric_conditional_means(self, flat_theory):
        """Should give equal conditional means toward both ends from the midpoint"""
        # Act
        moments = flat_theory.hitting_moments(5, 0, 10)

        # Assert
        assert moments.conditional_mean == pytest.approx(moments.conditional_mean_b)

    def test_start_outside_interval_raises(self, flat_theory):
        """Should raise ValueError for x outside (a, b)"""
        with pytest.raises(ValueError, match="strictly inside"):
            flat_theory.hitting_moments(0, 0, 10)

    def test_conditional_exit_moment_matches_two_point(self, seeded_theory):
        """Should equal h(x) times the conditional mean for a two-point target"""
        # Act
        moments = seeded_theory.hitting_moments(2, -3, 9)
        h = float(seeded_theory.equilibrium_two_point(-3, 9).value_at(2))
        moment = seeded_theory.conditional_exit_moment(2, [-3], [9])

        # Assert
        assert moment == pytest.approx(h * moments.conditional_mean, rel=1e-10)


class TestBoundsAndInequalities:
    """Tests for renewal bound, sandwiches and the barrier inequality"""

    def test_renewal_bound_on_random_triples(self, seeded_theory):
        """Should hold for random triples a < x < b"""
        rng = np.random.default_rng(1)
        for _ in range(100):
            a, x, b = sorted(rng.choice(np.arange(-35, 36), size=3, replace=False))
            assert seeded_theory.renewal_bound_check(int(x), [int(a)], [int(b)])

    def test_renewal_bound_rejects_x_in_targets(self, seeded_theory):
        """Should raise OverlapError when x is a target site"""
        with pytest.raises(OverlapError):
            seeded_theory.renewal_bound_check(0, [0], [5])

    def test_sandwiches_hold(self, seeded_theory):
        """Should bracket the equilibrium potential and the exit times"""
        # Act
        equilibrium = seeded_theory.equilibrium_sandwich(1, -6, 9)
        mean_exit, conditional = seeded_theory.exit_time_sandwich(-6, 9)

        # Assert
        assert equilibrium.holds
        assert mean_exit.holds
        assert conditional.holds

    @pytest.mark.parametrize("m1,m2,m3,before", [
        (3.0, 1.0, 2.0, True),
        (1.0, 2.5, 0.5, True),
        (2.0, 2.0, 4.0, False),
        (0.5, 1.5, 3.0, False),
    ])
    def test_barrier_inequality(self, m1, m2, m3, before):
        """Should hold for any barrier heights measured from V(y)"""
        assert PotentialTheoryService.barrier_inequality(m1, m2, m3, before)
